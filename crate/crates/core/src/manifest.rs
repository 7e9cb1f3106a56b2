//! JSON event manifest: which CSV files make up an event and how to
//! interpret them.
//!
//! ```json
//! {
//!   "f_n_hz": 50.0,
//!   "p_load_mw": 315.0,
//!   "onset_s": 2.0,
//!   "traces": [
//!     {"path": "frequency.csv", "role": "frequency"},
//!     {"path": "G1.csv", "role": "pfr", "channel_id": "G1"},
//!     {"path": "contingency.csv", "role": "contingency"}
//!   ],
//!   "washout": {"t_w_s": 0.06, "inertias_mws": {"G1": 600.0}},
//!   "fit": {"horizon_s": 20.0, "d_max": 10.0}
//! }
//! ```
//!
//! Trace paths are relative to the manifest's directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::FitOptions;
use crate::preprocess::{WashoutConfig, DEFAULT_WASHOUT_TIME_CONSTANT};
use crate::timeseries::{
    build_event_dataset_with, load_trace_csv, ColumnSpec, EventDataset, EventWindows, Unit,
    UniformTrace,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceRole {
    Frequency,
    Pfr,
    Contingency,
}

impl TraceRole {
    pub fn unit(self) -> Unit {
        match self {
            TraceRole::Frequency => Unit::Hz,
            TraceRole::Pfr | TraceRole::Contingency => Unit::MW,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub path: PathBuf,
    pub role: TraceRole,
    /// Defaults to the file stem.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel_id: Option<String>,
}

impl TraceEntry {
    pub fn channel_id(&self) -> String {
        self.channel_id.clone().unwrap_or_else(|| {
            self.path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default()
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WashoutSection {
    #[serde(default = "default_t_w")]
    pub t_w_s: f64,
    #[serde(default)]
    pub inertias_mws: BTreeMap<String, f64>,
}

fn default_t_w() -> f64 {
    DEFAULT_WASHOUT_TIME_CONSTANT
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventManifest {
    pub f_n_hz: f64,
    pub p_load_mw: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub onset_s: Option<f64>,
    pub traces: Vec<TraceEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub washout: Option<WashoutSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitOptions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub windows: Option<EventWindows>,
}

/// A parsed manifest together with the directory its paths resolve against.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedManifest {
    pub manifest: EventManifest,
    pub base_dir: PathBuf,
}

impl EventManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<LoadedManifest> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let manifest: EventManifest = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        manifest.check_roles()?;
        Ok(LoadedManifest {
            manifest,
            base_dir: path.parent().map(Path::to_path_buf).unwrap_or_default(),
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    fn check_roles(&self) -> Result<()> {
        let count = |role| self.traces.iter().filter(|t| t.role == role).count();
        for role in [TraceRole::Frequency, TraceRole::Contingency] {
            if count(role) != 1 {
                return Err(Error::InvalidConfig(format!(
                    "manifest needs exactly one {role:?} trace, found {}",
                    count(role)
                )));
            }
        }
        Ok(())
    }

    pub fn washout_config(&self) -> Result<Option<WashoutConfig>> {
        self.washout
            .as_ref()
            .map(|w| WashoutConfig::new(w.t_w_s, w.inertias_mws.clone(), self.f_n_hz))
            .transpose()
    }

    pub fn fit_options(&self) -> FitOptions {
        self.fit.unwrap_or_default()
    }
}

impl LoadedManifest {
    pub fn resolve(&self, entry: &TraceEntry) -> PathBuf {
        self.base_dir.join(&entry.path)
    }

    fn load_role(&self, role: TraceRole) -> Result<Vec<UniformTrace>> {
        self.manifest
            .traces
            .iter()
            .filter(|t| t.role == role)
            .map(|t| load_trace_csv(self.resolve(t), &ColumnSpec::standard(role.unit(), t.channel_id())))
            .collect()
    }

    /// Load every referenced trace and build the event dataset.
    pub fn dataset(&self) -> Result<EventDataset> {
        let m = &self.manifest;
        let frequency = self.load_role(TraceRole::Frequency)?.remove(0);
        let contingency = self.load_role(TraceRole::Contingency)?.remove(0);
        let pfr = self.load_role(TraceRole::Pfr)?;
        build_event_dataset_with(
            &frequency,
            &pfr,
            &contingency,
            m.f_n_hz,
            m.p_load_mw,
            m.onset_s,
            m.windows.unwrap_or_default(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_manifest() {
        let m: EventManifest = serde_json::from_str(
            r#"{"f_n_hz": 50, "p_load_mw": 315,
                "traces": [{"path": "f.csv", "role": "frequency"},
                           {"path": "c.csv", "role": "contingency"},
                           {"path": "pfr/G1.csv", "role": "pfr"}]}"#,
        )
        .unwrap();
        m.check_roles().unwrap();
        assert_eq!(m.onset_s, None);
        assert_eq!(m.traces[2].channel_id(), "G1");
        assert_eq!(m.fit_options(), FitOptions::default());
        assert!(m.washout_config().unwrap().is_none());
    }

    #[test]
    fn partial_sections_take_defaults() {
        let m: EventManifest = serde_json::from_str(
            r#"{"f_n_hz": 60, "p_load_mw": 100, "traces": [],
                "washout": {"inertias_mws": {"G1": 10}},
                "fit": {"horizon_s": 8, "multistart": false}}"#,
        )
        .unwrap();
        let w = m.washout_config().unwrap().unwrap();
        assert_eq!(w.t_w(), DEFAULT_WASHOUT_TIME_CONSTANT);
        let fit = m.fit_options();
        assert_eq!(fit.horizon_s, 8.0);
        assert!(!fit.multistart);
        assert_eq!(fit.max_iter, FitOptions::default().max_iter);
    }

    #[test]
    fn role_counts_checked() {
        let m: EventManifest = serde_json::from_str(
            r#"{"f_n_hz": 50, "p_load_mw": 315,
                "traces": [{"path": "f.csv", "role": "frequency"}]}"#,
        )
        .unwrap();
        assert!(matches!(m.check_roles(), Err(Error::InvalidConfig(_))));
    }
}
