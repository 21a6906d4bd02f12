use super::adapt::AdaptationEvent;
use crate::diagnostics::{
    build_histogram, relative_l2_error, BinnedDensity, DiagnosticsRecord, GridSpec, HistogramGrid,
};
use crate::{Error, Points, Result};

/// Receives the sampler output as it is produced.
pub trait SampleSink {
    /// Weighted proposals of one PAIS iteration, or the chain states of one
    /// MH iteration (log weights all zero).
    fn samples(&mut self, iteration: usize, points: &Points, log_weights: &[f64]) -> Result<()>;

    fn diagnostics(&mut self, _record: &DiagnosticsRecord) -> Result<()> {
        Ok(())
    }
}

/// Discards everything.
pub struct NullSink;

impl SampleSink for NullSink {
    fn samples(&mut self, _: usize, _: &Points, _: &[f64]) -> Result<()> {
        Ok(())
    }
}

/// The full weighted sample stream, `M` entries per iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedSamples {
    pub per_iteration: usize,
    pub points: Points,
    pub log_weights: Vec<f64>,
}

impl WeightedSamples {
    pub fn new(dim: usize, per_iteration: usize) -> Self {
        WeightedSamples {
            per_iteration,
            points: Points::new(dim),
            log_weights: Vec::new(),
        }
    }

    pub fn iterations(&self) -> usize {
        self.log_weights.len() / self.per_iteration.max(1)
    }

    fn range(&self, from: usize, to: usize) -> (usize, usize) {
        let to = to.min(self.iterations());
        let from = from.min(to);
        (from * self.per_iteration, to * self.per_iteration)
    }

    /// Points of iterations `from..to` and their globally self-normalized
    /// linear weights.
    pub fn pooled(&self, from: usize, to: usize) -> Result<(Points, Vec<f64>)> {
        let (a, b) = self.range(from, to);
        if a == b {
            return Err(Error::Diagnostic(
                "no samples in the requested range".into(),
            ));
        }
        let w = crate::diagnostics::normalized_weights(&self.log_weights[a..b])?;
        let pts = Points::from_flat(
            self.points.dim(),
            self.points.as_flat()[a * self.points.dim()..b * self.points.dim()].to_vec(),
        );
        Ok((pts, w))
    }

    /// Raw moments `E[X_c^m]`, `m = 1, 2, 3`, of coordinate `c`.
    pub fn moments(&self, coordinate: usize, from: usize, to: usize) -> Result<[f64; 3]> {
        let (pts, w) = self.pooled(from, to)?;
        let mut out = [0.0; 3];
        for (x, w) in pts.coordinate(coordinate).zip(&w) {
            out[0] += w * x;
            out[1] += w * x * x;
            out[2] += w * x * x * x;
        }
        Ok(out)
    }

    pub fn mean_and_variance(
        &self,
        coordinate: usize,
        from: usize,
        to: usize,
    ) -> Result<(f64, f64)> {
        let (pts, w) = self.pooled(from, to)?;
        let mean: f64 = pts.coordinate(coordinate).zip(&w).map(|(x, w)| w * x).sum();
        let var = pts
            .coordinate(coordinate)
            .zip(&w)
            .map(|(x, w)| w * (x - mean) * (x - mean))
            .sum();
        Ok((mean, var))
    }

    pub fn histogram(&self, grid: &GridSpec, from: usize, to: usize) -> Result<HistogramGrid> {
        let (pts, w) = self.pooled(from, to)?;
        build_histogram(&pts, Some(&w), grid)
    }

    /// Relative L² error after pooling iterations `from..c` for every
    /// checkpoint `c`, in one pass.
    pub fn l2_error_curve(
        &self,
        reference: &BinnedDensity,
        from: usize,
        checkpoints: &[usize],
    ) -> Result<Vec<f64>> {
        let grid = &reference.grid;
        grid.validate()?;
        let (a, b) = self.range(from, usize::MAX);
        let shift = self.log_weights[a..b]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        if shift == f64::NEG_INFINITY {
            return Err(Error::Diagnostic("all weights are zero".into()));
        }
        let mut mass = vec![0.0; grid.bin_count()];
        let mut inside = 0.0;
        let mut out = Vec::with_capacity(checkpoints.len());
        let mut cursor = from;
        let volume = grid.bin_volume();
        for &c in checkpoints {
            let c = c.min(self.iterations());
            let (s, e) = self.range(cursor, c);
            for k in s..e {
                let w = (self.log_weights[k] - shift).exp();
                if let Some(bin) = grid.locate(self.points.row(k)) {
                    mass[bin] += w;
                    inside += w;
                }
            }
            cursor = cursor.max(c);
            let values = if inside > 0.0 {
                mass.iter().map(|m| m / (inside * volume)).collect()
            } else {
                vec![0.0; mass.len()]
            };
            let hist = HistogramGrid {
                grid: grid.clone(),
                values,
                out_of_range: 0.0,
            };
            out.push(relative_l2_error(&hist, reference)?);
        }
        Ok(out)
    }
}

/// Keeps the stream in memory.
pub struct MemorySink {
    pub samples: WeightedSamples,
}

impl MemorySink {
    pub fn new(dim: usize, per_iteration: usize) -> Self {
        MemorySink {
            samples: WeightedSamples::new(dim, per_iteration),
        }
    }
}

impl SampleSink for MemorySink {
    fn samples(&mut self, _: usize, points: &Points, log_weights: &[f64]) -> Result<()> {
        self.samples.points.extend(points);
        self.samples.log_weights.extend_from_slice(log_weights);
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SamplerOutput {
    pub initial: Points,
    pub final_states: Points,
    pub diagnostics: Vec<DiagnosticsRecord>,
    /// Local scale per iteration (the bracket center while adapting).
    pub beta_trace: Vec<f64>,
    pub adaptation: Vec<AdaptationEvent>,
    pub final_beta: f64,
    /// Leading iterations flagged as burn-in.
    pub burn_in: Option<usize>,
    /// Present when the run collected its stream in memory.
    pub samples: Option<WeightedSamples>,
}

impl SamplerOutput {
    /// First iteration used for analysis.
    pub fn analysis_start(&self) -> usize {
        self.burn_in.unwrap_or(0)
    }

    pub fn samples(&self) -> Result<&WeightedSamples> {
        self.samples
            .as_ref()
            .ok_or_else(|| Error::Diagnostic("samples were streamed, not kept".into()))
    }

    pub fn ess_series(&self) -> Vec<f64> {
        self.diagnostics.iter().map(|d| d.ess).collect()
    }

    /// Mean ESS over post-burn-in iterations.
    pub fn mean_ess(&self) -> f64 {
        mean(
            self.diagnostics[self.analysis_start().min(self.diagnostics.len())..]
                .iter()
                .map(|d| d.ess),
        )
    }

    pub fn mean_weight_variance(&self) -> f64 {
        mean(
            self.diagnostics[self.analysis_start().min(self.diagnostics.len())..]
                .iter()
                .map(|d| d.weight_variance),
        )
    }

    /// Overall acceptance rate of an MH run.
    pub fn acceptance_rate(&self, ensemble_size: usize) -> Option<f64> {
        let mut acc = 0;
        let mut n = 0;
        for d in &self.diagnostics {
            acc += d.acceptance_count?;
            n += ensemble_size;
        }
        (n > 0).then(|| acc as f64 / n as f64)
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}
