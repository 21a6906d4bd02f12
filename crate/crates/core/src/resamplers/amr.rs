//! Approximate multinomial resampling.
//!
//! The scaled weights `z = M w̄` are cut into `M` unit-mass rows. Each row is
//! anchored at the largest remaining `z_J` and topped up from the remaining
//! states nearest to `y_J`. Ties go to the lowest index in both searches.

use super::transport::validate_probabilities;
use crate::{Error, Points, Result};

/// Remaining mass at or below this is treated as exhausted.
const FILL_TOLERANCE: f64 = 1e-13;
/// Largest shortfall a row may show when every `z` is exhausted.
const MAX_SHORTFALL: f64 = 1e-10;

/// Rows `p_i` of the split, each a sparse probability vector.
#[derive(Clone, Debug, PartialEq)]
pub struct SubMultinomials {
    /// `(k, p_ik)` with `p_ik > 0`, in fill order (anchor first).
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl SubMultinomials {
    /// Index `J` each row was anchored at.
    pub fn anchors(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r[0].0).collect()
    }

    pub fn dense(&self) -> Vec<Vec<f64>> {
        let m = self.rows.len();
        self.rows
            .iter()
            .map(|r| {
                let mut p = vec![0.0; m];
                for &(k, v) in r {
                    p[k] += v;
                }
                p
            })
            .collect()
    }

    /// `x_i = Σ_k p_ik y_k`.
    pub fn means(&self, points: &Points) -> Points {
        let mut out = Points::with_capacity(points.dim(), self.rows.len());
        let mut x = vec![0.0; points.dim()];
        for row in &self.rows {
            x.fill(0.0);
            for &(k, p) in row {
                for (a, b) in x.iter_mut().zip(points.row(k)) {
                    *a += p * b;
                }
            }
            out.push(&x);
        }
        out
    }
}

fn argmax_lowest(z: &[f64]) -> usize {
    let mut best = 0;
    for (k, v) in z.iter().enumerate() {
        if *v > z[best] {
            best = k;
        }
    }
    best
}

/// Splits `weights` into `M` sub-multinomials with `(1/M) Σ_i p_i = w̄`.
pub fn amr_split(weights: &[f64], points: &Points) -> Result<SubMultinomials> {
    validate_probabilities(weights, points)?;
    let m = weights.len();
    let mut z: Vec<f64> = weights.iter().map(|w| w * m as f64).collect();
    let mut rows = Vec::with_capacity(m);
    for _ in 0..m {
        let anchor = argmax_lowest(&z);
        let first = z[anchor].min(1.0);
        z[anchor] -= first;
        let mut row = vec![(anchor, first)];
        let mut filled = first;
        while 1.0 - filled > FILL_TOLERANCE {
            let mut nearest: Option<(usize, f64)> = None;
            for (k, zk) in z.iter().enumerate() {
                if *zk <= FILL_TOLERANCE {
                    continue;
                }
                let d = points.squared_distance(anchor, k);
                if nearest.is_none_or(|(_, best)| d < best) {
                    nearest = Some((k, d));
                }
            }
            let Some((k, _)) = nearest else {
                break;
            };
            let take = (1.0 - filled).min(z[k]);
            z[k] -= take;
            filled += take;
            row.push((k, take));
        }
        let shortfall = 1.0 - filled;
        if shortfall > MAX_SHORTFALL {
            return Err(Error::Resample(format!(
                "sub-multinomial short by {shortfall:e} with all weight consumed"
            )));
        }
        if shortfall > 0.0 {
            row.last_mut().expect("row has an anchor").1 += shortfall;
        }
        rows.push(row);
    }
    Ok(SubMultinomials { rows })
}
