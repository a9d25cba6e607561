//! Run manifests written next to solver outputs.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use railblock_core::solver::relative_gap;

use crate::io::IoError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub time_limit: Option<f64>,
    pub gap: f64,
    pub threads: usize,
    pub seed: u64,
    pub detour: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub status: String,
    pub objective: Option<f64>,
    pub bound: Option<f64>,
    pub nodes: u64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultSummary {
    pub status: String,
    pub upper_bound: Option<f64>,
    pub lower_bound: Option<f64>,
    /// Where the lower bound comes from.
    pub lower_bound_source: Option<String>,
    /// `(UB - LB) / UB`.
    pub gap: Option<f64>,
}

impl ResultSummary {
    pub fn new(status: &str, ub: Option<f64>, lb: Option<f64>, source: Option<&str>) -> Self {
        let gap = match (ub, lb) {
            (Some(u), Some(l)) => Some(relative_gap(u, l)),
            _ => None,
        };
        ResultSummary {
            status: status.into(),
            upper_bound: ub,
            lower_bound: lb,
            lower_bound_source: lb.and(source.map(String::from)),
            gap,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub instance: String,
    /// SHA-256 of the instance file bytes (of the concatenated CSV files
    /// for a directory).
    pub instance_sha256: String,
    pub mode: String,
    pub options: RunOptions,
    pub stages: Vec<StageTiming>,
    pub result: ResultSummary,
    pub total_seconds: f64,
}

impl RunManifest {
    /// The manifest with every wall-clock field zeroed.
    pub fn without_timings(&self) -> RunManifest {
        let mut m = self.clone();
        m.total_seconds = 0.0;
        for s in &mut m.stages {
            s.seconds = 0.0;
        }
        m
    }

    pub fn save(&self, path: &Path) -> Result<(), IoError> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(path, text + "\n").map_err(|source| IoError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<RunManifest, IoError> {
        let text = fs::read_to_string(path).map_err(|source| IoError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| IoError::Json {
            path: path.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }
}

/// Content hash of an instance file or CSV directory.
pub fn instance_digest(path: &Path) -> Result<String, IoError> {
    let read = |p: &Path| {
        fs::read(p).map_err(|source| IoError::Io {
            path: p.to_path_buf(),
            source,
        })
    };
    let mut hasher = Sha256::new();
    if path.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(path)
            .map_err(|source| IoError::Io {
                path: path.to_path_buf(),
                source,
            })?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "csv" || x == "json"))
            .collect();
        files.sort();
        for f in files {
            hasher.update(f.file_name().unwrap().to_string_lossy().as_bytes());
            hasher.update([0]);
            hasher.update(read(&f)?);
        }
    } else {
        hasher.update(read(path)?);
    }
    Ok(hex::encode(hasher.finalize()))
}

/// `<dir>/<stem>.manifest.json` next to `output`.
pub fn manifest_path_for(output: &Path) -> PathBuf {
    let stem = output.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into());
    output.with_file_name(format!("{stem}.manifest.json"))
}
