use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use anyhow::Context;
use gcid_core::stats::SampleMatrix;
use serde::Serialize;

use crate::config::usage;

/// A destination for one artifact: a file, or stdout when no path is given.
#[derive(Debug, Clone)]
pub struct Sink {
    path: Option<PathBuf>,
}

impl Sink {
    /// Refuses an existing file unless `force` is set. Checked before any work is done.
    pub fn new(path: Option<PathBuf>, force: bool) -> anyhow::Result<Self> {
        if let Some(p) = &path {
            if p.exists() && !force {
                return Err(usage(format!("{} exists; pass --force to overwrite", p.display())));
            }
        }
        Ok(Self { path })
    }

    pub fn is_stdout(&self) -> bool {
        self.path.is_none()
    }

    pub fn write(&self, bytes: &[u8]) -> anyhow::Result<()> {
        match &self.path {
            Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
            None => {
                let mut out = io::stdout().lock();
                out.write_all(bytes)?;
                out.flush()?;
                Ok(())
            }
        }
    }

    pub fn write_json<T: Serialize>(&self, value: &T) -> anyhow::Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(text.as_bytes())
    }
}

/// CSV with a header row; `f64` values use the shortest round-trip decimal form.
pub fn csv_bytes(header: &[String], rows: impl Iterator<Item = Vec<String>>) -> anyhow::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))
}

/// One row per replication, one column `x_k` per epoch.
pub fn samples_csv(m: &SampleMatrix) -> anyhow::Result<Vec<u8>> {
    let header: Vec<String> = (1..=m.cols()).map(|k| format!("x_{k}")).collect();
    csv_bytes(&header, m.iter_rows().map(|r| r.iter().map(f64::to_string).collect()))
}
