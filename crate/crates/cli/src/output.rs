use std::io::Write;
use std::path::Path;

use anyhow::anyhow;
use clap::ValueEnum;
use serde::Serialize;

use crate::failure::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

pub fn json<T: Serialize>(value: &T) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Failure::Evaluation(e.into()))?;
    s.push('\n');
    Ok(s)
}

pub fn csv<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| Failure::Evaluation(e.into()))?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Evaluation(anyhow!("{e}")))?;
    String::from_utf8(bytes).map_err(|e| Failure::Evaluation(e.into()))
}

/// Writes to `out`, or to stdout when absent.
pub fn emit(body: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, body).map_err(|e| Failure::Io(anyhow!("cannot write {}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

pub fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(anyhow!("cannot read {}: {e}", path.display())))
}
