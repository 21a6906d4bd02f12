use super::prepare_dir;
use crate::config::{ExperimentSpec, TargetSpec};
use crate::output::{header, num, CsvFile};
use anyhow::Result;
use pais_core::targets::{generate_data, DataSpec};
use std::path::{Path, PathBuf};

/// `generate-data`: writes `data.csv` (`t,D` for the kinetics problem, `D`
/// for the scalar ones) and returns its path and the values.
pub fn cmd_generate_data(
    spec: &ExperimentSpec,
    seed: u64,
    noisy: bool,
    dir: &Path,
) -> Result<(PathBuf, Vec<f64>)> {
    let (data_spec, times) = match &spec.target {
        TargetSpec::Gaussian { sigma2, data, .. } | TargetSpec::Bimodal { sigma2, data, .. } => (
            DataSpec::Scalar {
                observed: *data,
                sigma2: *sigma2,
            },
            None,
        ),
        TargetSpec::Chemical(c) => (c.data_spec(), Some(c.times.clone())),
    };
    let values = generate_data(&data_spec, noisy, seed)?;
    prepare_dir(dir)?;
    let path = dir.join("data.csv");
    let cols: &[&str] = if times.is_some() { &["t", "D"] } else { &["D"] };
    let mut f = CsvFile::create(&path, &spec.hash(), seed, &header(cols))?;
    for (i, d) in values.iter().enumerate() {
        match &times {
            Some(t) => f.row([num(t[i]), num(*d)])?,
            None => f.row([num(*d)])?,
        }
    }
    f.finish()?;
    Ok((path, values))
}
