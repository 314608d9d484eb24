//! Reports, trace export and the run manifest.
//!
//! Everything written here is a pure function of the scenario bytes, the
//! seed and the engine version: maps are ordered, floats are printed at full
//! precision and no timestamps are recorded.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::analysis::Table;
use crate::network::SimulationTrace;
use crate::scenario::{AnalysisSpec, Scenario};

pub const ENGINE: &str = "cogeo";
pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");
/// Overrides the default output directory `./out`.
pub const OUT_DIR_ENV: &str = "COGEO_OUT_DIR";

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("cannot write {path}: {source}")]
    IoFailure {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("serialization failed: {0}")]
    Serialize(String),
}

/// Hex SHA-256 of the raw scenario bytes.
pub fn scenario_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// 17 significant digits in scientific notation.
pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceFormat {
    Csv,
    Json,
}

fn csv_error(e: csv::Error) -> OutputError {
    OutputError::Serialize(e.to_string())
}

/// Serializes traces; rows follow (replicate, step, edge index).
pub fn emit_trace(traces: &[SimulationTrace], format: TraceFormat) -> Result<Vec<u8>, OutputError> {
    match format {
        TraceFormat::Json => {
            let mut out = serde_json::to_vec_pretty(traces).map_err(|e| OutputError::Serialize(e.to_string()))?;
            out.push(b'\n');
            Ok(out)
        }
        TraceFormat::Csv => {
            let width = traces
                .iter()
                .flat_map(|t| t.events.iter().map(|e| e.transmitted.len()))
                .max()
                .unwrap_or(0);
            let mut w = csv::Writer::from_writer(Vec::new());
            let mut header: Vec<String> = ["replicate", "step", "from", "to", "success", "adopted", "transmitted_norm"]
                .iter()
                .map(|s| s.to_string())
                .collect();
            header.extend((0..width).map(|i| format!("transmitted_{i}")));
            w.write_record(&header).map_err(csv_error)?;
            for t in traces {
                for e in &t.events {
                    let mut row = vec![
                        t.replicate.to_string(),
                        e.step.to_string(),
                        e.from.clone(),
                        e.to.clone(),
                        e.success.to_string(),
                        e.adopted.to_string(),
                        format_number(e.transmitted.norm()),
                    ];
                    row.extend(e.transmitted.iter().map(|x| format_number(*x)));
                    row.resize(header.len(), String::new());
                    w.write_record(&row).map_err(csv_error)?;
                }
            }
            w.into_inner().map_err(|e| OutputError::Serialize(e.to_string()))
        }
    }
}

/// CSV of a per-step table; integral columns stay integral.
pub fn emit_table(table: &Table) -> Result<Vec<u8>, OutputError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.header).map_err(csv_error)?;
    for row in &table.rows {
        let cells: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let integral = matches!(table.header.get(i).map(String::as_str), Some("step" | "replicate"));
                if integral {
                    format!("{}", *x as u64)
                } else {
                    format_number(*x)
                }
            })
            .collect();
        w.write_record(&cells).map_err(csv_error)?;
    }
    w.into_inner().map_err(|e| OutputError::Serialize(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisBlock {
    pub name: String,
    pub kind: String,
    pub result: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub engine: String,
    pub engine_version: String,
    pub scenario_hash: String,
    pub seed: u64,
    pub analyses: Vec<AnalysisBlock>,
    pub warnings: Vec<String>,
}

/// Runs `specs` in order. Tables come back keyed `<analysis>_<table>`.
pub fn build_report(
    scenario: &Scenario,
    hash: &str,
    specs: &[&AnalysisSpec],
    seed: Option<u64>,
) -> crate::Result<(RunReport, Vec<(String, Table)>)> {
    let mut analyses = Vec::new();
    let mut warnings = Vec::new();
    let mut tables = Vec::new();
    for spec in specs {
        let out = spec.analysis.run(scenario, seed)?;
        warnings.extend(out.warnings.into_iter().map(|w| format!("{}: {w}", spec.name)));
        tables.extend(out.tables.into_iter().map(|t| (format!("{}_{}", spec.name, t.name), t)));
        analyses.push(AnalysisBlock {
            name: spec.name.clone(),
            kind: spec.analysis.kind().to_string(),
            result: out.result,
        });
    }
    let report = RunReport {
        engine: ENGINE.into(),
        engine_version: ENGINE_VERSION.into(),
        scenario_hash: hash.to_string(),
        seed: scenario.sim_config(seed).seed,
        analyses,
        warnings,
    };
    Ok((report, tables))
}

pub fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, OutputError> {
    let mut out = serde_json::to_vec_pretty(value).map_err(|e| OutputError::Serialize(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub engine: String,
    pub engine_version: String,
    pub command: String,
    pub scenario_hash: Option<String>,
    pub seed: Option<u64>,
    pub status: String,
    pub files: Vec<String>,
}

/// Single writer for one output directory; remembers what it wrote.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    /// `explicit`, else `$COGEO_OUT_DIR`, else `./out`.
    pub fn resolve(explicit: Option<&Path>) -> PathBuf {
        explicit
            .map(Path::to_path_buf)
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn create(root: PathBuf) -> Result<Self, OutputError> {
        fs::create_dir_all(&root).map_err(|source| OutputError::IoFailure {
            path: root.clone(),
            source,
        })?;
        Ok(Self {
            root,
            written: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, OutputError> {
        let path = self.root.join(name);
        fs::write(&path, bytes).map_err(|source| OutputError::IoFailure {
            path: path.clone(),
            source,
        })?;
        if !self.written.iter().any(|w| w == name) {
            self.written.push(name.to_string());
        }
        Ok(path)
    }

    /// Writes `manifest.json` listing every file written so far.
    pub fn finish(
        mut self,
        command: &str,
        scenario_hash: Option<String>,
        seed: Option<u64>,
        status: &str,
    ) -> Result<PathBuf, OutputError> {
        let manifest = Manifest {
            engine: ENGINE.into(),
            engine_version: ENGINE_VERSION.into(),
            command: command.into(),
            scenario_hash,
            seed,
            status: status.into(),
            files: self.written.clone(),
        };
        let bytes = to_json_bytes(&manifest)?;
        self.write("manifest.json", &bytes)
    }
}
