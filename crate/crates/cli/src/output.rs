//! CSV and JSON artifacts.
//!
//! Every CSV starts with a `# config_hash=<hex> seed=<n>` comment line,
//! followed by a header row. Floats are written in shortest round-trip form.

use anyhow::{bail, Context, Result};
use pais_core::diagnostics::DiagnosticsRecord;
use pais_core::engine::{MemorySink, SampleSink};
use pais_core::Points;
use serde::Serialize;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

pub struct CsvFile {
    writer: csv::Writer<BufWriter<File>>,
}

impl CsvFile {
    pub fn create(path: &Path, hash: &str, seed: u64, header: &[String]) -> Result<Self> {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        let mut out = BufWriter::new(file);
        writeln!(out, "# config_hash={hash} seed={seed}")?;
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(header)?;
        Ok(CsvFile { writer })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.writer.flush()?;
        Ok(())
    }
}

pub fn header(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// Shortest representation that parses back to the same value.
pub fn num(v: f64) -> String {
    format!("{v}")
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// Streams `iter,member,x1..xd,log_w` rows and optionally keeps the samples.
pub struct CsvSink {
    file: Option<CsvFile>,
    pub memory: MemorySink,
}

impl CsvSink {
    pub fn new(file: Option<CsvFile>, dim: usize, per_iteration: usize) -> Self {
        CsvSink {
            file,
            memory: MemorySink::new(dim, per_iteration),
        }
    }

    pub fn sample_header(dim: usize) -> Vec<String> {
        let mut h = vec!["iter".to_string(), "member".to_string()];
        h.extend((1..=dim).map(|c| format!("x{c}")));
        h.push("log_w".into());
        h
    }

    pub fn finish(self) -> Result<pais_core::engine::WeightedSamples> {
        if let Some(f) = self.file {
            f.finish()?;
        }
        Ok(self.memory.samples)
    }
}

impl SampleSink for CsvSink {
    fn samples(
        &mut self,
        iteration: usize,
        points: &Points,
        log_weights: &[f64],
    ) -> pais_core::Result<()> {
        if let Some(f) = &mut self.file {
            for (j, (x, lw)) in points.rows().zip(log_weights).enumerate() {
                let mut rec = vec![iteration.to_string(), j.to_string()];
                rec.extend(x.iter().map(|v| num(*v)));
                rec.push(num(*lw));
                f.row(&rec)
                    .map_err(|e| pais_core::Error::Diagnostic(format!("writing samples: {e}")))?;
            }
        }
        self.memory.samples(iteration, points, log_weights)
    }
}

pub fn write_diagnostics(
    path: &Path,
    hash: &str,
    seed: u64,
    records: &[DiagnosticsRecord],
    ensemble_size: usize,
    burn_in: Option<usize>,
) -> Result<()> {
    let mut f = CsvFile::create(
        path,
        hash,
        seed,
        &header(&["iter", "ess", "var_w", "beta", "acc_rate", "burned_in"]),
    )?;
    for d in records {
        let burned = burn_in.is_some_and(|b| d.iteration >= b);
        f.row([
            d.iteration.to_string(),
            num(d.ess),
            num(d.weight_variance),
            num(d.beta),
            opt(d.acceptance_rate(ensemble_size)),
            (burned as u8).to_string(),
        ])?;
    }
    f.finish()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Reads `t,D` rows, skipping `#` comment lines.
pub fn read_chemical_data(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (Some(t), Some(d)) = (col("t"), col("D")) else {
        bail!("{}: expected columns `t` and `D`", path.display());
    };
    let mut times = Vec::new();
    let mut data = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec?;
        let parse = |k: usize| -> Result<f64> {
            rec.get(k)
                .unwrap_or_default()
                .parse()
                .with_context(|| format!("{}: row {}", path.display(), line + 1))
        };
        times.push(parse(t)?);
        data.push(parse(d)?);
    }
    Ok((times, data))
}
