use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifest::{EventManifest, TraceEntry, TraceRole, WashoutSection};
use crate::preprocess::DEFAULT_WASHOUT_TIME_CONSTANT;
use crate::sim::simulate::SyntheticEvent;
use crate::timeseries::{write_trace_csv, UniformTrace};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TRUTH_FILE: &str = "truth.json";

/// Contents of `truth.json`. Estimators never read it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub ke_mws: f64,
    pub d_pct_per_hz: f64,
    pub machine_inertia_mws: f64,
    /// Clean traces, keyed by name; paths relative to the export directory.
    pub files: BTreeMap<String, PathBuf>,
}

impl TruthRecord {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

/// Write the measured traces, `manifest.json` and `truth.json` into
/// `directory` (created if missing). Returns the manifest path.
///
/// The manifest carries a washout section with each machine's inertia so
/// the inertial component can be removed from the PFR channels.
pub fn export_event(event: &SyntheticEvent, directory: impl AsRef<Path>) -> Result<PathBuf> {
    let dir = directory.as_ref();
    fs::create_dir_all(dir.join("truth")).map_err(|e| Error::io(dir, e))?;
    let ds = &event.dataset;

    let mut traces = Vec::new();
    let mut put = |trace: &UniformTrace, file: String, role: TraceRole| -> Result<()> {
        write_trace_csv(dir.join(&file), trace)?;
        traces.push(TraceEntry {
            path: file.into(),
            role,
            channel_id: Some(trace.channel_id().to_string()),
        });
        Ok(())
    };
    put(ds.frequency(), "frequency.csv".into(), TraceRole::Frequency)?;
    for c in ds.pfr_channels() {
        put(c, format!("pfr_{}.csv", c.channel_id()), TraceRole::Pfr)?;
    }
    put(ds.contingency(), "contingency.csv".into(), TraceRole::Contingency)?;

    let mut inertias: BTreeMap<String, f64> = event
        .config
        .governors
        .iter()
        .map(|g| (g.id.clone(), g.inertia_mws))
        .collect();
    if event.truth.ffr.is_some() {
        inertias.insert("ffr".into(), 0.0);
    }
    let manifest = EventManifest {
        f_n_hz: ds.f_n(),
        p_load_mw: ds.p_load(),
        onset_s: Some(ds.onset_time()),
        traces,
        washout: Some(WashoutSection {
            t_w_s: DEFAULT_WASHOUT_TIME_CONSTANT,
            inertias_mws: inertias,
        }),
        fit: None,
        windows: None,
    };
    let manifest_path = dir.join(MANIFEST_FILE);
    manifest.save(&manifest_path)?;

    let truth = &event.truth;
    let mut files = BTreeMap::new();
    let mut put_truth = |name: String, trace: &UniformTrace| -> Result<()> {
        let rel = PathBuf::from("truth").join(format!("{name}.csv"));
        write_trace_csv(dir.join(&rel), trace)?;
        files.insert(name, rel);
        Ok(())
    };
    put_truth("frequency".into(), &truth.frequency)?;
    put_truth("governor_total".into(), &truth.governor_total)?;
    for g in &truth.governors {
        put_truth(format!("governor_{}", g.channel_id()), g)?;
    }
    for g in &truth.inertial_per_machine {
        put_truth(format!("inertial_{}", g.channel_id()), g)?;
    }
    if let Some(ffr) = &truth.ffr {
        put_truth("ffr".into(), ffr)?;
    }
    let record = TruthRecord {
        ke_mws: truth.ke,
        d_pct_per_hz: truth.d,
        machine_inertia_mws: truth.machine_inertia,
        files,
    };
    write_json(&dir.join(TRUTH_FILE), &record)?;
    Ok(manifest_path)
}
