//! Run reports and their on-disk artifacts.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, Result};
use crate::run::{ExtrapolationRow, TraceRow};

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    /// "run" or "oracle".
    pub mode: &'static str,
    pub config_hash: String,
    pub seed: u64,
    pub n_qubits: usize,
    pub tasks: Vec<Value>,
    pub flags: Vec<String>,
    /// Kept out of the artifacts so they stay byte-identical between runs.
    #[serde(skip)]
    pub wall_clock: Duration,
    #[serde(skip)]
    pub trace: Vec<TraceRow>,
    #[serde(skip)]
    pub extrapolation: Vec<ExtrapolationRow>,
}

impl RunReport {
    /// 0 on success, 2 when any task raised a convergence flag.
    pub fn exit_code(&self) -> i32 {
        if self.flags.is_empty() {
            0
        } else {
            2
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }

    /// Write the artifacts under `dir`; returns the paths written.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let files: Vec<(&str, String)> = match self.mode {
            "oracle" => vec![
                ("oracle.json", self.to_json()),
                ("oracle_trace.csv", trace_csv(&self.trace)),
            ],
            _ => vec![
                ("results.json", self.to_json()),
                ("trace.csv", trace_csv(&self.trace)),
                ("extrapolation.csv", extrapolation_csv(&self.extrapolation)),
            ],
        };
        let mut written = Vec::new();
        for (name, body) in files {
            let path = dir.join(name);
            fs::write(&path, body).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            written.push(path);
        }
        Ok(written)
    }
}

pub fn trace_csv(rows: &[TraceRow]) -> String {
    let mut out = String::from("task,kind,series,x,y\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{}", r.task, r.kind, r.series, r.x, r.y);
    }
    out
}

pub fn extrapolation_csv(rows: &[ExtrapolationRow]) -> String {
    let mut out = String::from("task,stage,rate,value\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", r.task, r.stage, r.rate, r.value);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let rows = vec![TraceRow {
            task: 0,
            kind: "vqe",
            series: "energy".into(),
            x: 1.0,
            y: -0.5,
        }];
        assert_eq!(trace_csv(&rows), "task,kind,series,x,y\n0,vqe,energy,1,-0.5\n");
        assert_eq!(extrapolation_csv(&[]), "task,stage,rate,value\n");
    }
}
