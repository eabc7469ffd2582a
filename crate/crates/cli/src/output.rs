//! Report emission: pretty JSON and RFC 4180 CSV with LF line endings.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use coorbit::RunConfig;
use serde::Serialize;

pub const VERSION: &str = concat!("v", env!("CARGO_PKG_VERSION"));

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Envelope<'a, T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: &'a RunConfig,
    pub result: T,
}

impl<'a, T: Serialize> Envelope<'a, T> {
    pub fn new(command: &'static str, config: &'a RunConfig, result: T) -> Self {
        Envelope { tool: "coorbit", version: VERSION, command, config, result }
    }
}

/// Where reports go: files under `--out`, or the JSON report on stdout.
pub struct Sink {
    dir: Option<PathBuf>,
}

impl Sink {
    pub fn new(dir: Option<PathBuf>) -> Result<Sink> {
        if let Some(d) = &dir {
            fs::create_dir_all(d).with_context(|| format!("cannot create {}", d.display()))?;
        }
        Ok(Sink { dir })
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        match &self.dir {
            Some(d) => {
                let path = d.join(name);
                fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))
            }
            None => {
                std::io::stdout().lock().write_all(text.as_bytes())?;
                Ok(())
            }
        }
    }

    /// CSV files are only written with an output directory.
    pub fn csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let Some(d) = &self.dir else { return Ok(()) };
        let path = d.join(name);
        fs::write(&path, csv_bytes(header, rows)?).with_context(|| format!("cannot write {}", path.display()))
    }
}

pub fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.into_inner().map_err(|e| anyhow::anyhow!("csv buffer: {e}"))
}

/// Shortest round-trip decimal form.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quoting_and_line_endings() {
        let bytes = csv_bytes(&["a", "b"], &[vec!["1".into(), "x,y".into()], vec!["2".into(), "q\"q".into()]]).unwrap();
        assert_eq!(String::from_utf8(bytes).unwrap(), "a,b\n1,\"x,y\"\n2,\"q\"\"q\"\n");
    }

    #[test]
    fn numbers() {
        assert_eq!(num(0.1), "0.1");
        assert_eq!(num(7.59375), "7.59375");
        assert_eq!(num(f64::INFINITY), "inf");
    }
}
