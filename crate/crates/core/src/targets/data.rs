use super::chemical::full_system_trajectory;
use super::positive_param;
use crate::rng::{stream, Purpose};
use crate::{Error, Result};
use rand_distr::{Distribution, Gamma, Normal};
use serde::{Deserialize, Serialize};

/// How synthetic observations are produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSpec {
    /// One scalar observation `D = G(x_ref) + ε`, `ε ~ N(0, σ²)`.
    Scalar { observed: f64, sigma2: f64 },
    /// Full kinetics system run at `rates = (k1, k2, k3, k4)`, observed at
    /// `times` with Gamma noise of the given variance centred on `X1 + X2`.
    Chemical {
        rates: [f64; 4],
        times: Vec<f64>,
        variance: f64,
    },
}

/// Draws a data set. With `noisy = false` the noise-free model output is
/// returned. The draws depend only on `seed`.
pub fn generate_data(spec: &DataSpec, noisy: bool, seed: u64) -> Result<Vec<f64>> {
    let mut rng = stream(seed, Purpose::Data, 0, 0);
    match spec {
        DataSpec::Scalar { observed, sigma2 } => {
            positive_param("sigma2", *sigma2)?;
            if !observed.is_finite() {
                return Err(Error::param("observed", "must be finite"));
            }
            if !noisy {
                return Ok(vec![*observed]);
            }
            let noise = Normal::new(0.0, sigma2.sqrt())
                .map_err(|e| Error::param("sigma2", e.to_string()))?;
            Ok(vec![observed + noise.sample(&mut rng)])
        }
        DataSpec::Chemical {
            rates,
            times,
            variance,
        } => {
            positive_param("variance", *variance)?;
            let path = full_system_trajectory(*rates, times)?;
            path.into_iter()
                .map(|(x1, x2)| {
                    let mean = x1 + x2;
                    if !noisy {
                        return Ok(mean);
                    }
                    if !(mean > 0.0) {
                        return Err(Error::param(
                            "times",
                            "Gamma noise needs a positive mean; observe at t > 0",
                        ));
                    }
                    let shape = mean * mean / variance;
                    let scale = variance / mean;
                    let g = Gamma::new(shape, scale)
                        .map_err(|e| Error::param("variance", e.to_string()))?;
                    Ok(g.sample(&mut rng))
                })
                .collect()
        }
    }
}
