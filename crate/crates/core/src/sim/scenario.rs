use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Aggregate turbine-governor: droop, valve lag `t1`, turbine lead-lag
/// `(1 + t2 s) / (1 + t3 s)`, output clamped to the headroom band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GovernorParams {
    pub id: String,
    /// Per unit on machine rating.
    pub droop: f64,
    pub rating_mw: f64,
    pub t1_s: f64,
    pub t2_s: f64,
    pub t3_s: f64,
    pub headroom_up_mw: f64,
    pub headroom_down_mw: f64,
    /// Machine inertia; adds an inertial component to its electrical output.
    #[serde(default)]
    pub inertia_mws: f64,
    /// Pre-event output.
    #[serde(default)]
    pub dispatch_mw: f64,
}

impl GovernorParams {
    pub fn new(id: impl Into<String>, rating_mw: f64) -> Self {
        Self {
            id: id.into(),
            droop: 0.05,
            rating_mw,
            t1_s: 0.5,
            t2_s: 1.0,
            t3_s: 7.0,
            headroom_up_mw: rating_mw,
            headroom_down_mw: rating_mw,
            inertia_mws: 0.0,
            dispatch_mw: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| {
            Err(Error::InvalidConfig(format!(
                "governor `{}`: {what}",
                self.id
            )))
        };
        if !(self.droop > 0.0) {
            return bad("droop must be positive");
        }
        if !(self.rating_mw > 0.0) {
            return bad("rating must be positive");
        }
        if !(self.t1_s > 0.0 && self.t3_s > 0.0 && self.t2_s >= 0.0) {
            return bad("time constants need t1 > 0, t3 > 0, t2 >= 0");
        }
        if !(self.headroom_up_mw >= 0.0 && self.headroom_down_mw >= 0.0) {
            return bad("headroom must be non-negative");
        }
        if !(self.inertia_mws >= 0.0) {
            return bad("inertia must be non-negative");
        }
        if !self.dispatch_mw.is_finite() {
            return bad("dispatch must be finite");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContingencySpec {
    pub magnitude_mw: f64,
    /// Snapped to the output grid.
    pub time_s: f64,
    /// Zero for an instantaneous trip.
    #[serde(default)]
    pub ramp_s: f64,
}

/// Fast frequency response: a delayed, ramp-limited injection triggered
/// when the deviation first crosses the deadband.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FfrParams {
    pub capacity_mw: f64,
    pub deadband_hz: f64,
    pub delay_s: f64,
    pub ramp_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Oscillation {
    pub amplitude_hz: f64,
    #[serde(default = "Oscillation::default_frequency")]
    pub frequency_hz: f64,
    #[serde(default = "Oscillation::default_damping")]
    pub damping_per_s: f64,
}

impl Oscillation {
    fn default_frequency() -> f64 {
        1.5
    }

    fn default_damping() -> f64 {
        0.3
    }
}

/// Half-sine dip starting at onset, as seen in measurements during a fault.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transient {
    pub amplitude_hz: f64,
    pub duration_s: f64,
}

/// Measurement artifacts. They are added to the measured traces only.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct Artifacts {
    pub oscillation: Option<Oscillation>,
    pub transient: Option<Transient>,
    /// Gaussian noise on the frequency trace.
    pub noise_sigma_hz: f64,
    /// Gaussian noise on every power trace.
    pub power_noise_sigma_mw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub ke_true_mws: f64,
    pub d_true_pct_per_hz: f64,
    pub p_load_mw: f64,
    pub f_n_hz: f64,
    pub contingency: ContingencySpec,
    #[serde(default)]
    pub governors: Vec<GovernorParams>,
    #[serde(default)]
    pub ffr: Option<FfrParams>,
    #[serde(default)]
    pub artifacts: Artifacts,
    pub dt_s: f64,
    pub duration_s: f64,
    #[serde(default)]
    pub seed: u64,
}

impl ScenarioConfig {
    /// Read and validate a JSON scenario.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config: Self = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: String| Err(Error::InvalidConfig(what));
        if !(self.ke_true_mws > 0.0) {
            return bad(format!("ke_true must be positive, got {}", self.ke_true_mws));
        }
        if !(self.p_load_mw > 0.0) {
            return bad(format!("p_load must be positive, got {}", self.p_load_mw));
        }
        if !(self.f_n_hz > 0.0) {
            return bad(format!("f_n must be positive, got {}", self.f_n_hz));
        }
        if !(self.d_true_pct_per_hz >= 0.0) {
            return bad("load relief must be non-negative".into());
        }
        if !(self.dt_s > 0.0 && self.dt_s <= 0.02) {
            return bad(format!("dt must lie in (0, 0.02] s, got {}", self.dt_s));
        }
        if !(self.duration_s >= 20.0) {
            return bad(format!("duration must be at least 20 s, got {}", self.duration_s));
        }
        let c = &self.contingency;
        if !(c.magnitude_mw > 0.0 && c.ramp_s >= 0.0) {
            return bad("contingency magnitude must be positive and ramp non-negative".into());
        }
        if !(c.time_s >= self.dt_s && c.time_s < self.duration_s) {
            return bad("contingency time must lie inside the simulated span".into());
        }
        for g in &self.governors {
            g.validate()?;
        }
        let machine_inertia = self.machine_inertia();
        if machine_inertia > self.ke_true_mws {
            return bad(format!(
                "machine inertia {machine_inertia} MW.s exceeds system inertia {}",
                self.ke_true_mws
            ));
        }
        if let Some(f) = &self.ffr {
            if !(f.capacity_mw >= 0.0 && f.deadband_hz >= 0.0 && f.delay_s >= 0.0 && f.ramp_s >= 0.0)
            {
                return bad("FFR parameters must be non-negative".into());
            }
        }
        let a = &self.artifacts;
        let non_negative = [
            a.noise_sigma_hz,
            a.power_noise_sigma_mw,
            a.oscillation.map_or(0.0, |o| o.amplitude_hz),
            a.oscillation.map_or(0.0, |o| o.frequency_hz),
            a.oscillation.map_or(0.0, |o| o.damping_per_s),
            a.transient.map_or(0.0, |t| t.amplitude_hz),
            a.transient.map_or(0.0, |t| t.duration_s),
        ];
        if non_negative.iter().any(|v| !(*v >= 0.0)) {
            return bad("artifact amplitudes, rates and durations must be non-negative".into());
        }
        Ok(())
    }

    /// Total inertia of the modelled machines (a floor for system inertia).
    pub fn machine_inertia(&self) -> f64 {
        self.governors.iter().map(|g| g.inertia_mws).sum()
    }

    pub fn without_artifacts(mut self) -> Self {
        self.artifacts = Artifacts::default();
        self
    }

    pub fn without_machine_inertia(mut self) -> Self {
        for g in &mut self.governors {
            g.inertia_mws = 0.0;
        }
        self
    }

    /// Small islanded system: three governed units, 85 MW trip out of 315 MW.
    pub fn case1_analog() -> Self {
        let unit = |id: &str, rating: f64, inertia: f64, dispatch: f64| GovernorParams {
            t1_s: 0.3,
            t2_s: 3.0,
            t3_s: 6.0,
            headroom_up_mw: 80.0,
            headroom_down_mw: 80.0,
            inertia_mws: inertia,
            dispatch_mw: dispatch,
            ..GovernorParams::new(id, rating)
        };
        Self {
            ke_true_mws: 1522.0,
            d_true_pct_per_hz: 4.0,
            p_load_mw: 315.0,
            f_n_hz: 50.0,
            contingency: ContingencySpec {
                magnitude_mw: 85.0,
                time_s: 2.0,
                ramp_s: 0.0,
            },
            governors: vec![
                unit("G1", 150.0, 600.0, 95.0),
                unit("G2", 100.0, 500.0, 75.0),
                unit("G4", 80.0, 300.0, 60.0),
            ],
            ffr: None,
            artifacts: Artifacts::default(),
            dt_s: 0.01,
            duration_s: 25.0,
            seed: 1,
        }
    }

    /// Large interconnected 60 Hz system with a 1.5 Hz inter-machine swing
    /// superimposed on the measured frequency.
    pub fn case2_oscillatory() -> Self {
        let governors = [1000.0, 1000.0, 800.0, 800.0, 700.0, 600.0, 600.0, 500.0, 500.0]
            .iter()
            .enumerate()
            .map(|(i, &rating)| GovernorParams {
                t1_s: 0.3,
                t2_s: 3.0,
                t3_s: 6.0,
                headroom_up_mw: 200.0,
                headroom_down_mw: 200.0,
                dispatch_mw: 0.6 * rating,
                ..GovernorParams::new(format!("G{}", i + 1), rating)
            })
            .collect();
        Self {
            ke_true_mws: 78270.0,
            d_true_pct_per_hz: 4.0,
            p_load_mw: 6097.0,
            f_n_hz: 60.0,
            contingency: ContingencySpec {
                magnitude_mw: 200.0,
                time_s: 2.0,
                ramp_s: 0.0,
            },
            governors,
            ffr: None,
            artifacts: Artifacts {
                oscillation: Some(Oscillation {
                    amplitude_hz: 0.03,
                    frequency_hz: 1.5,
                    damping_per_s: 0.3,
                }),
                ..Artifacts::default()
            },
            dt_s: 0.01,
            duration_s: 25.0,
            seed: 2,
        }
    }

    /// The small system with a 30 MW battery providing fast frequency response.
    pub fn case3_ffr() -> Self {
        Self {
            ffr: Some(FfrParams {
                capacity_mw: 30.0,
                deadband_hz: 0.1,
                delay_s: 0.1,
                ramp_s: 0.3,
            }),
            seed: 3,
            ..Self::case1_analog()
        }
    }

    /// Network fault tripping 231 MW: a 150 ms measurement transient at onset.
    pub fn case5_fault_transient() -> Self {
        let governors = [
            ("G1", 500.0, 2800.0),
            ("G2", 400.0, 2300.0),
            ("G3", 400.0, 2300.0),
            ("G4", 300.0, 1700.0),
            ("G5", 300.0, 1512.0),
            ("G6", 200.0, 1000.0),
        ]
        .iter()
        .map(|&(id, rating, inertia)| GovernorParams {
            t1_s: 0.3,
            t2_s: 3.0,
            t3_s: 6.0,
            headroom_up_mw: 200.0,
            headroom_down_mw: 200.0,
            inertia_mws: inertia,
            dispatch_mw: 0.6 * rating,
            ..GovernorParams::new(id, rating)
        })
        .collect();
        Self {
            ke_true_mws: 14000.0,
            d_true_pct_per_hz: 4.0,
            p_load_mw: 1991.0,
            f_n_hz: 50.0,
            contingency: ContingencySpec {
                magnitude_mw: 231.0,
                time_s: 2.0,
                ramp_s: 0.0,
            },
            governors,
            ffr: None,
            artifacts: Artifacts {
                transient: Some(Transient {
                    amplitude_hz: 0.03,
                    duration_s: 0.15,
                }),
                ..Artifacts::default()
            },
            dt_s: 0.01,
            duration_s: 25.0,
            seed: 5,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        for c in [
            ScenarioConfig::case1_analog(),
            ScenarioConfig::case2_oscillatory(),
            ScenarioConfig::case3_ffr(),
            ScenarioConfig::case5_fault_transient(),
        ] {
            c.validate().unwrap();
        }
        assert_eq!(ScenarioConfig::case5_fault_transient().machine_inertia(), 11612.0);
    }

    #[test]
    fn rejects_invalid_configs() {
        let base = ScenarioConfig::case1_analog();
        let mut c = base.clone();
        c.dt_s = 0.05;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.duration_s = 10.0;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.governors[0].droop = 0.0;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.governors[0].inertia_mws = 5000.0;
        assert!(c.validate().is_err());
        let mut c = base;
        c.artifacts.noise_sigma_hz = -1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn json_defaults() {
        let json = r#"{
            "ke_true_mws": 2500, "d_true_pct_per_hz": 0, "p_load_mw": 1000, "f_n_hz": 50,
            "contingency": {"magnitude_mw": 100, "time_s": 1.0},
            "dt_s": 0.01, "duration_s": 20
        }"#;
        let c: ScenarioConfig = serde_json::from_str(json).unwrap();
        c.validate().unwrap();
        assert!(c.governors.is_empty());
        assert_eq!(c.artifacts, Artifacts::default());
        assert_eq!(c.seed, 0);
    }
}
