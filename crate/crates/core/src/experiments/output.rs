use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{ExperimentResult, ExperimentRow};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            _ => Err(Error::Parse(format!("unknown format `{s}`"))),
        }
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::Io(e.to_string())
}

impl ExperimentResult {
    pub fn columns(&self) -> Vec<String> {
        let first = self.rows.first();
        let mut cols: Vec<String> = first.map_or(Vec::new(), |r| r.inputs.iter().map(|c| c.name.clone()).collect());
        cols.extend(["estimate", "ci_low", "ci_high", "prediction", "ratio"].map(String::from));
        cols.extend(first.map_or(Vec::new(), |r| r.extras.iter().map(|c| c.name.clone()).collect()));
        cols.extend(["samples", "budget_exhausted", "note"].map(String::from));
        cols
    }

    fn record(row: &ExperimentRow) -> Vec<String> {
        let mut rec: Vec<String> = row.inputs.iter().map(|c| c.value.to_string()).collect();
        rec.extend([row.estimate, row.ci_low, row.ci_high, row.prediction, row.ratio].map(cell));
        rec.extend(row.extras.iter().map(|c| c.value.to_string()));
        rec.extend([row.samples.to_string(), row.budget_exhausted.to_string(), row.note.clone()]);
        rec
    }

    /// One header line, then one line per row in input order.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.columns()).map_err(io_err)?;
        for row in &self.rows {
            w.write_record(Self::record(row)).map_err(io_err)?;
        }
        let bytes = w.into_inner().map_err(io_err)?;
        String::from_utf8(bytes).map_err(io_err)
    }

    /// Parameters, seed, knobs, versions and timing; rows live in the CSV.
    pub fn manifest(&self) -> serde_json::Value {
        json!({
            "experiment": self.name,
            "params": self.params,
            "knobs": self.knobs,
            "seed": self.seed,
            "rows": self.rows.len(),
            "columns": self.columns(),
            "wall_time_secs": self.wall_time_secs,
            "version": env!("CARGO_PKG_VERSION"),
            "parallel": cfg!(feature = "parallel"),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(io_err)
    }

    /// Writes `<name>.csv` and `<name>.manifest.json` into `dir`.
    pub fn write_to_dir(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir).map_err(io_err)?;
        let csv_path = dir.join(format!("{}.csv", self.name));
        let manifest_path = dir.join(format!("{}.manifest.json", self.name));
        std::fs::write(&csv_path, self.to_csv()?).map_err(io_err)?;
        let manifest = serde_json::to_string_pretty(&self.manifest()).map_err(io_err)?;
        std::fs::write(&manifest_path, manifest).map_err(io_err)?;
        Ok((csv_path, manifest_path))
    }
}
