use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::sim::governor::{advance, GovernorState, SUBSTEPS};
use crate::sim::scenario::{FfrParams, ScenarioConfig};
use crate::timeseries::{build_event_dataset, EventDataset, Unit, UniformTrace};

/// Deviation beyond which a scenario is treated as nonphysical (Hz).
pub const MAX_DEVIATION_HZ: f64 = 5.0;
/// Round-off allowance on the guard, so a ramp that ends exactly on it passes.
const GUARD_SLACK_HZ: f64 = 1e-9;

/// Clean signals behind a synthetic event. Every trace shares the dataset
/// grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub ke: f64,
    pub d: f64,
    /// Frequency without measurement artifacts (Hz).
    pub frequency: UniformTrace,
    /// Sum of governor outputs (MW), excluding FFR.
    pub governor_total: UniformTrace,
    pub governors: Vec<UniformTrace>,
    /// `-(2 KE_i / f_n) dΔf/dt` per governed machine (MW).
    pub inertial_per_machine: Vec<UniformTrace>,
    pub ffr: Option<UniformTrace>,
    /// Inertia of the governed machines (MW.s).
    pub machine_inertia: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticEvent {
    pub config: ScenarioConfig,
    pub dataset: EventDataset,
    pub truth: GroundTruth,
}

struct Ffr {
    params: FfrParams,
    /// Internal step index of the deadband crossing.
    triggered: Option<usize>,
}

impl Ffr {
    fn output(&self, step: f64, h: f64) -> f64 {
        let Some(trigger) = self.triggered else {
            return 0.0;
        };
        let since = (step - trigger as f64) * h - self.params.delay_s;
        if since < 0.0 {
            0.0
        } else if self.params.ramp_s == 0.0 {
            self.params.capacity_mw
        } else {
            self.params.capacity_mw * (since / self.params.ramp_s).min(1.0)
        }
    }
}

struct Model<'a> {
    config: &'a ScenarioConfig,
    h: f64,
    /// Internal step index of the contingency.
    trip_step: usize,
    relief: f64,
}

impl Model<'_> {
    fn lost(&self, step: f64) -> f64 {
        let c = &self.config.contingency;
        let since = step - self.trip_step as f64;
        if since < 0.0 {
            0.0
        } else if c.ramp_s == 0.0 {
            c.magnitude_mw
        } else {
            c.magnitude_mw * (since * self.h / c.ramp_s).min(1.0)
        }
    }

    fn governor_power(&self, states: &[GovernorState]) -> f64 {
        self.config
            .governors
            .iter()
            .zip(states)
            .map(|(g, s)| g.output(*s))
            .sum()
    }

    /// `dΔf/dt` for the given net injection.
    fn slope(&self, df: f64, governors: f64, ffr: f64, lost: f64) -> f64 {
        self.config.f_n_hz / (2.0 * self.config.ke_true_mws)
            * (governors + ffr - lost - self.relief * df)
    }

    fn rates(&self, df: f64, states: &[GovernorState], ffr: f64, lost: f64) -> (f64, Vec<GovernorState>) {
        let f_n = self.config.f_n_hz;
        let slope = self.slope(df, self.governor_power(states), ffr, lost);
        let gov = self
            .config
            .governors
            .iter()
            .zip(states)
            .map(|(g, s)| g.derivative(*s, df, f_n))
            .collect();
        (slope, gov)
    }
}

/// Integrate the aggregate frequency dynamics of a scenario and package the
/// measured traces together with the clean ground truth.
///
/// Frequency and governor states advance with an explicit trapezoid (Heun)
/// step at a tenth of the output step. Measurement artifacts and noise are
/// added afterwards, to the measured copies only.
pub fn simulate_event(config: &ScenarioConfig) -> Result<SyntheticEvent> {
    config.validate()?;
    let dt = config.dt_s;
    let f_n = config.f_n_hz;
    let n = (config.duration_s / dt).round() as usize + 1;
    let onset_index = (config.contingency.time_s / dt).round() as usize;
    let h = dt / SUBSTEPS as f64;
    let model = Model {
        config,
        h,
        trip_step: onset_index * SUBSTEPS,
        relief: config.d_true_pct_per_hz / 100.0 * config.p_load_mw,
    };
    let mut ffr = config.ffr.map(|params| Ffr {
        params,
        triggered: None,
    });
    let ffr_at = |ffr: &Option<Ffr>, step: f64| ffr.as_ref().map_or(0.0, |f| f.output(step, h));

    let m = config.governors.len();
    let mut df = 0.0;
    let mut states = vec![GovernorState::default(); m];

    let mut dev = Vec::with_capacity(n);
    let mut slope = Vec::with_capacity(n);
    let mut gov = vec![Vec::with_capacity(n); m];
    let mut ffr_out = Vec::with_capacity(n);
    let mut lost = Vec::with_capacity(n);

    for i in 0..n {
        let step = i * SUBSTEPS;
        if i > 0 {
            for j in step - SUBSTEPS..step {
                let mid = model.lost(j as f64 + 0.5);
                let (p0, p1) = (ffr_at(&ffr, j as f64), ffr_at(&ffr, (j + 1) as f64));
                let (s1, g1) = model.rates(df, &states, p0, mid);
                let trial: Vec<_> = states
                    .iter()
                    .zip(&g1)
                    .map(|(s, r)| advance(*s, *r, h))
                    .collect();
                let (s2, g2) = model.rates(df + h * s1, &trial, p1, mid);
                df += 0.5 * h * (s1 + s2);
                for ((s, a), b) in states.iter_mut().zip(&g1).zip(&g2) {
                    s.lag += 0.5 * h * (a.lag + b.lag);
                    s.lead += 0.5 * h * (a.lead + b.lead);
                }
                if let Some(f) = ffr.as_mut() {
                    if f.triggered.is_none() && df < -f.params.deadband_hz {
                        f.triggered = Some(j + 1);
                    }
                }
            }
            if !(df.abs() <= MAX_DEVIATION_HZ + GUARD_SLACK_HZ) {
                return Err(Error::UnstableScenario {
                    deviation: df,
                    time: i as f64 * dt,
                });
            }
        }
        let l = model.lost(step as f64);
        let p_ffr = ffr_at(&ffr, step as f64);
        let outputs: Vec<f64> = config
            .governors
            .iter()
            .zip(&states)
            .map(|(g, s)| g.output(*s))
            .collect();
        slope.push(model.slope(df, outputs.iter().sum(), p_ffr, l));
        for (trace, v) in gov.iter_mut().zip(outputs) {
            trace.push(v);
        }
        dev.push(df);
        ffr_out.push(p_ffr);
        lost.push(l);
    }

    let trace = |values: Vec<f64>, unit: Unit, id: &str| UniformTrace::new(0.0, dt, values, unit, id);

    let governor_total: Vec<f64> = (0..n).map(|i| gov.iter().map(|g| g[i]).sum()).collect();
    let inertial: Vec<Vec<f64>> = config
        .governors
        .iter()
        .map(|g| slope.iter().map(|s| -2.0 * g.inertia_mws / f_n * s).collect())
        .collect();

    // measured copies
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let artifacts = &config.artifacts;
    let mut noise = |sigma: f64, values: &mut [f64]| {
        if sigma > 0.0 {
            let normal = Normal::new(0.0, sigma).expect("validated sigma");
            for v in values {
                *v += normal.sample(&mut rng);
            }
        }
    };
    let onset_time = onset_index as f64 * dt;
    let mut measured_f: Vec<f64> = (0..n)
        .map(|i| {
            let mut f = f_n + dev[i];
            let t = i as f64 * dt - onset_time;
            if i >= onset_index {
                if let Some(o) = &artifacts.oscillation {
                    f -= o.amplitude_hz
                        * (-o.damping_per_s * t).exp()
                        * (2.0 * std::f64::consts::PI * o.frequency_hz * t).sin();
                }
                if let Some(tr) = &artifacts.transient {
                    if tr.duration_s > 0.0 && t <= tr.duration_s {
                        f -= tr.amplitude_hz * (std::f64::consts::PI * t / tr.duration_s).sin();
                    }
                }
            }
            f
        })
        .collect();
    noise(artifacts.noise_sigma_hz, &mut measured_f);

    let mut channels = Vec::with_capacity(m + 1);
    for (k, g) in config.governors.iter().enumerate() {
        let mut values: Vec<f64> = (0..n)
            .map(|i| g.dispatch_mw + gov[k][i] + inertial[k][i])
            .collect();
        noise(artifacts.power_noise_sigma_mw, &mut values);
        channels.push(trace(values, Unit::MW, &g.id)?);
    }
    if config.ffr.is_some() {
        let mut values = ffr_out.clone();
        noise(artifacts.power_noise_sigma_mw, &mut values);
        channels.push(trace(values, Unit::MW, "ffr")?);
    }
    let mut contingency: Vec<f64> = lost
        .iter()
        .map(|l| config.contingency.magnitude_mw - l)
        .collect();
    noise(artifacts.power_noise_sigma_mw, &mut contingency);

    let dataset = build_event_dataset(
        &trace(measured_f, Unit::Hz, "frequency")?,
        &channels,
        &trace(contingency, Unit::MW, "contingency")?,
        f_n,
        config.p_load_mw,
        Some(onset_time),
    )?;

    let truth = GroundTruth {
        ke: config.ke_true_mws,
        d: config.d_true_pct_per_hz,
        frequency: trace(dev.iter().map(|v| f_n + v).collect(), Unit::Hz, "frequency")?,
        governor_total: trace(governor_total, Unit::MW, "governor_total")?,
        governors: config
            .governors
            .iter()
            .zip(gov)
            .map(|(g, values)| trace(values, Unit::MW, &g.id))
            .collect::<Result<_>>()?,
        inertial_per_machine: config
            .governors
            .iter()
            .zip(inertial)
            .map(|(g, values)| trace(values, Unit::MW, &g.id))
            .collect::<Result<_>>()?,
        ffr: match config.ffr {
            Some(_) => Some(trace(ffr_out, Unit::MW, "ffr")?),
            None => None,
        },
        machine_inertia: config.machine_inertia(),
    };
    Ok(SyntheticEvent {
        config: config.clone(),
        dataset,
        truth,
    })
}
