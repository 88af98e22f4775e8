//! Report containers and their CSV / JSON writers.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::ExperimentConfig;
use crate::error::Result;

/// One `{N, eps, k, x_star, quantity_name, value, implied_C}` record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaRecord {
    #[serde(rename = "N")]
    pub n: usize,
    pub eps: f64,
    pub k: f64,
    pub x_star: [f64; 2],
    pub quantity_name: String,
    pub value: f64,
    #[serde(rename = "implied_C")]
    pub implied_c: Option<f64>,
}

/// Per-run rows plus a summary block; the configuration is echoed into
/// every serialized form.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport<R, S> {
    pub config: ExperimentConfig,
    #[serde(skip)]
    pub rows: Vec<R>,
    pub summary: S,
    #[serde(skip)]
    pub records: Vec<LemmaRecord>,
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

impl<R: Serialize, S: Serialize> ExperimentReport<R, S> {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for row in &self.rows {
            out.serialize(row)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    /// Configuration echo and summary block.
    pub fn summary_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn records_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.records)?)
    }

    /// Writes `<prefix>.csv`, `<prefix>.json` and, when there are lemma
    /// records, `<prefix>.lemmas.json`. Returns the paths written.
    pub fn write_files(&self, prefix: &Path) -> Result<Vec<PathBuf>> {
        if let Some(dir) = prefix.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let csv_path = with_suffix(prefix, ".csv");
        self.write_csv(std::fs::File::create(&csv_path)?)?;
        let json_path = with_suffix(prefix, ".json");
        std::fs::write(&json_path, self.summary_json()?)?;
        let mut written = vec![csv_path, json_path];
        if !self.records.is_empty() {
            let p = with_suffix(prefix, ".lemmas.json");
            std::fs::write(&p, self.records_json()?)?;
            written.push(p);
        }
        Ok(written)
    }
}
