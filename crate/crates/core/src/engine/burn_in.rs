//! Plateau detection on a per-iteration statistic.

use super::config::BurnInSpec;

fn slope(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let tbar = (n - 1.0) / 2.0;
    let ybar = values.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, y) in values.iter().enumerate() {
        let dt = t as f64 - tbar;
        sxy += dt * (y - ybar);
        sxx += dt * dt;
    }
    sxy / sxx
}

/// Number of leading iterations to discard: the end of the first trailing
/// window whose least-squares slope is below `slope_tolerance · scale` in
/// magnitude, once the series has risen by `rise · scale` above its first
/// value. The rise requirement is dropped when the first value is already
/// within `rise · scale` of the series maximum. `None` if no window
/// qualifies.
pub fn detect_plateau(series: &[f64], scale: f64, spec: &BurnInSpec) -> Option<usize> {
    let w = spec.window;
    if w < 2 || series.len() < w {
        return None;
    }
    let rise = spec.rise * scale;
    let flat = spec.slope_tolerance * scale;
    let start = series[0];
    let global_max = series.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut risen = start >= global_max - rise;
    let mut running_max = f64::NEG_INFINITY;
    for end in 1..=series.len() {
        running_max = running_max.max(series[end - 1]);
        if running_max - start >= rise {
            risen = true;
        }
        if end >= w && risen && slope(&series[end - w..end]).abs() < flat {
            return Some(end);
        }
    }
    None
}

/// Burn-in of a PAIS run from its effective sample sizes (`scale = M`).
pub fn detect_burn_in(ess: &[f64], ensemble_size: usize, spec: &BurnInSpec) -> Option<usize> {
    detect_plateau(ess, ensemble_size as f64, spec)
}
