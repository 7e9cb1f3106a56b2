use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};
use sfr_inertia::estimators::{ModelFitEstimate, SwingEstimate, SwingMethod};
use sfr_inertia::LoadedManifest;

#[derive(Debug, Serialize)]
pub struct Software {
    pub name: &'static str,
    pub version: &'static str,
}

impl Software {
    pub fn current() -> Self {
        Self {
            name: env!("CARGO_BIN_NAME"),
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct InputRecord {
    pub manifest: PathBuf,
    /// SHA-256 over the manifest and every referenced trace, in manifest order.
    pub digest: String,
    pub files: Vec<PathBuf>,
}

impl InputRecord {
    pub fn from_manifest(path: &Path, loaded: &LoadedManifest) -> Result<Self> {
        let mut hasher = Sha256::new();
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        hasher.update(&bytes);
        let mut files = Vec::new();
        for entry in &loaded.manifest.traces {
            let resolved = loaded.resolve(entry);
            // a missing trace is reported by the dataset loader with its typed error
            if let Ok(bytes) = fs::read(&resolved) {
                hasher.update(entry.path.to_string_lossy().as_bytes());
                hasher.update(&bytes);
            }
            files.push(entry.path.clone());
        }
        Ok(Self {
            manifest: path.to_path_buf(),
            digest: format!("sha256:{}", hex::encode(hasher.finalize())),
            files,
        })
    }
}

/// One row of the summary table: method, KE, D and remarks.
#[derive(Debug, Serialize)]
pub struct MethodResult {
    pub method: &'static str,
    pub ke_mws: Option<f64>,
    pub d_pct_per_hz: Option<f64>,
    pub rmse_hz: Option<f64>,
    pub converged: Option<bool>,
    pub rocof_hz_per_s: Option<f64>,
    pub hyperparameters: serde_json::Value,
    pub remarks: String,
    pub error: Option<String>,
}

impl MethodResult {
    pub fn swing(estimate: &SwingEstimate, hyperparameters: serde_json::Value) -> Self {
        Self {
            method: method_name(estimate.method),
            ke_mws: Some(estimate.ke),
            d_pct_per_hz: None,
            rmse_hz: None,
            converged: None,
            rocof_hz_per_s: Some(estimate.rocof),
            remarks: match estimate.method {
                SwingMethod::SlidingWindow => format!("{} ms window", estimate.hyperparameter * 1e3),
                SwingMethod::Inoue => format!("polynomial order {}", estimate.hyperparameter),
            },
            hyperparameters,
            error: None,
        }
    }

    pub fn fit(estimate: &ModelFitEstimate, hyperparameters: serde_json::Value, cleaned: bool) -> Self {
        let mut remarks = format!("{} iterations", estimate.iterations);
        if !estimate.converged {
            remarks.push_str(", iteration limit reached");
        }
        if !cleaned {
            remarks.push_str(", inertial power not removed");
        }
        Self {
            method: "model_fit",
            ke_mws: Some(estimate.ke),
            d_pct_per_hz: Some(estimate.d),
            rmse_hz: Some(estimate.rmse),
            converged: Some(estimate.converged),
            rocof_hz_per_s: None,
            hyperparameters,
            remarks,
            error: None,
        }
    }

    pub fn failed(method: &'static str, hyperparameters: serde_json::Value, err: &sfr_inertia::Error) -> Self {
        Self {
            method,
            ke_mws: None,
            d_pct_per_hz: None,
            rmse_hz: None,
            converged: None,
            rocof_hz_per_s: None,
            hyperparameters,
            remarks: String::new(),
            error: Some(format!("{}: {err}", err.code())),
        }
    }
}

pub fn method_name(method: SwingMethod) -> &'static str {
    match method {
        SwingMethod::SlidingWindow => "sliding_window",
        SwingMethod::Inoue => "inoue",
    }
}

#[derive(Debug, Serialize)]
pub struct SweepTable {
    pub method: &'static str,
    pub hyperparameter: &'static str,
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub ke_mws: Option<f64>,
}

/// Wall-clock details. Everything else in the report is a pure function of
/// the inputs and flags.
#[derive(Debug, Serialize)]
pub struct Metadata {
    pub elapsed_ms: f64,
    pub generated_unix_s: u64,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub software: Software,
    pub input: InputRecord,
    pub options: serde_json::Value,
    pub results: Vec<MethodResult>,
    pub sweeps: Vec<SweepTable>,
    /// SHA-256 of this report serialised without `metadata` and this field.
    pub report_digest: String,
    pub metadata: Metadata,
}

#[derive(Serialize)]
struct DigestView<'a> {
    software: &'a Software,
    input: &'a InputRecord,
    options: &'a serde_json::Value,
    results: &'a [MethodResult],
    sweeps: &'a [SweepTable],
}

impl RunReport {
    pub fn new(
        input: InputRecord,
        options: serde_json::Value,
        results: Vec<MethodResult>,
        sweeps: Vec<SweepTable>,
        metadata: Metadata,
    ) -> Result<Self> {
        let software = Software::current();
        let view = DigestView {
            software: &software,
            input: &input,
            options: &options,
            results: &results,
            sweeps: &sweeps,
        };
        let digest = Sha256::digest(serde_json::to_vec(&view)?);
        Ok(Self {
            software,
            input,
            options,
            results,
            sweeps,
            report_digest: format!("sha256:{}", hex::encode(digest)),
            metadata,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
    }
}
