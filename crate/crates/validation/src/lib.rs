//! Helpers for the acceptance suite in `tests/acceptance.rs`.

use std::io::Write;

/// Writes one `PASS`/`FAIL` line for a criterion. Goes straight to the
/// process stdout so the line shows up even when the harness captures test
/// output.
pub fn report(criterion: u32, title: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "[{tag}] criterion {criterion:>2} ({title}): {detail}");
    let _ = out.flush();
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

pub fn geometric_mean(values: &[f64]) -> f64 {
    (values.iter().map(|v| v.ln()).sum::<f64>() / values.len() as f64).exp()
}

/// Interval of `β` over which `ess` stays at or above `fraction` of its
/// maximum, with the ends found by linear interpolation in `ln β` between
/// grid points. `betas` must be increasing.
pub fn ess_bracket(betas: &[f64], ess: &[f64], fraction: f64) -> (f64, f64) {
    let (peak, max) =
        ess.iter().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |acc, (k, &e)| if e > acc.1 { (k, e) } else { acc },
        );
    let level = fraction * max;
    let cross = |a: usize, b: usize| {
        let t = (level - ess[a]) / (ess[b] - ess[a]);
        (betas[a].ln() + t * (betas[b].ln() - betas[a].ln())).exp()
    };
    let mut lo = peak;
    while lo > 0 && ess[lo - 1] >= level {
        lo -= 1;
    }
    let mut hi = peak;
    while hi + 1 < ess.len() && ess[hi + 1] >= level {
        hi += 1;
    }
    let left = if lo == 0 { betas[0] } else { cross(lo - 1, lo) };
    let right = if hi + 1 == ess.len() {
        betas[hi]
    } else {
        cross(hi + 1, hi)
    };
    (left, right)
}
