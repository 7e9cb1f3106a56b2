//! Washout-based removal of inertial power from generator traces, and the
//! smoothing primitive used by the swing-equation baselines.
//!
//! A synchronous machine's electrical output during a frequency event is the
//! sum of its governor (mechanical) response and an inertial component
//! proportional to the rate of change of frequency. The SFR model already
//! carries inertia through `KE`, so the inertial part has to be taken out of
//! the measured PFR before fitting. The derivative is approximated by a
//! washout `K s / (1 + T_w s)` discretised with a backward difference:
//!
//! ```text
//! y[k] = (T_w * y[k-1] + K * (f[k] - f[k-1])) / (dt + T_w),   K = 2 KE_i / f_n
//! ```
//!
//! and the injected inertial power is `-y`. Small `T_w` tracks the true
//! derivative closely but passes noise; large `T_w` lags the onset.
//!
//! The system frequency is used for every machine; local machine frequency
//! is not modelled.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::timeseries::{EventDataset, UniformTrace, Unit};

pub const DEFAULT_WASHOUT_TIME_CONSTANT: f64 = 0.06;

#[derive(Debug, Clone, PartialEq)]
pub struct WashoutConfig {
    t_w: f64,
    generator_inertias: BTreeMap<String, f64>,
    f_n: f64,
}

impl WashoutConfig {
    pub fn new(t_w: f64, generator_inertias: BTreeMap<String, f64>, f_n: f64) -> Result<Self> {
        if !(t_w > 0.0 && t_w.is_finite()) {
            return Err(Error::InvalidTimeConstant(t_w));
        }
        if !(f_n > 0.0) {
            return Err(Error::InvalidConfig(format!("f_n must be positive, got {f_n}")));
        }
        if let Some((id, ke)) = generator_inertias
            .iter()
            .find(|(_, ke)| !(**ke >= 0.0 && ke.is_finite()))
        {
            return Err(Error::InvalidConfig(format!(
                "inertia of `{id}` must be non-negative, got {ke}"
            )));
        }
        Ok(Self {
            t_w,
            generator_inertias,
            f_n,
        })
    }

    pub fn t_w(&self) -> f64 {
        self.t_w
    }

    pub fn f_n(&self) -> f64 {
        self.f_n
    }

    pub fn generator_inertias(&self) -> &BTreeMap<String, f64> {
        &self.generator_inertias
    }
}

/// Estimated inertial power (MW) injected by a machine of inertia `ke_i`.
pub fn inertial_component(
    frequency: &UniformTrace,
    ke_i: f64,
    f_n: f64,
    t_w: f64,
) -> Result<UniformTrace> {
    if !(t_w > 0.0 && t_w.is_finite()) {
        return Err(Error::InvalidTimeConstant(t_w));
    }
    if !(ke_i >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "inertia must be non-negative, got {ke_i}"
        )));
    }
    let gain = 2.0 * ke_i / f_n;
    let dt = frequency.dt();
    let f = frequency.values();
    let mut out = Vec::with_capacity(f.len());
    let mut y = 0.0;
    out.push(0.0);
    for w in f.windows(2) {
        y = (t_w * y + gain * (w[1] - w[0])) / (dt + t_w);
        out.push(-y);
    }
    UniformTrace::new(
        frequency.start_time(),
        dt,
        out,
        Unit::MW,
        format!("{}_inertial", frequency.channel_id()),
    )
}

/// `pfr_channel` with the washout estimate of its inertial power removed.
///
/// Applying this twice removes the inertial estimate twice.
pub fn remove_inertial(
    pfr_channel: &UniformTrace,
    frequency: &UniformTrace,
    config: &WashoutConfig,
) -> Result<UniformTrace> {
    let ke_i = *config
        .generator_inertias
        .get(pfr_channel.channel_id())
        .ok_or_else(|| Error::UnknownChannel(pfr_channel.channel_id().to_string()))?;
    if !pfr_channel.same_grid(frequency) {
        return Err(Error::InvalidConfig(format!(
            "channel `{}` is not aligned with the frequency trace",
            pfr_channel.channel_id()
        )));
    }
    if ke_i == 0.0 {
        return Ok(pfr_channel.clone());
    }
    let inertial = inertial_component(frequency, ke_i, config.f_n, config.t_w)?;
    let values = pfr_channel
        .values()
        .iter()
        .zip(inertial.values())
        .map(|(p, i)| p - i)
        .collect();
    pfr_channel.with_values(values)
}

/// Apply [`remove_inertial`] to every PFR channel of a dataset.
pub fn clean_dataset(dataset: &EventDataset, config: &WashoutConfig) -> Result<EventDataset> {
    let cleaned = dataset
        .pfr_channels()
        .iter()
        .map(|c| remove_inertial(c, dataset.frequency(), config))
        .collect::<Result<Vec<_>>>()?;
    dataset.with_pfr_channels(cleaned)
}

/// Centered moving average; edge samples average over a shrunken window.
pub fn moving_average(trace: &UniformTrace, window: f64) -> Result<UniformTrace> {
    let dt = trace.dt();
    if !(window >= dt * (1.0 - 1e-9)) {
        return Err(Error::WindowTooSmall { window, dt });
    }
    let samples = (window / dt).round() as usize;
    let half = samples / 2;
    if half == 0 {
        return Ok(trace.clone());
    }
    let v = trace.values();
    let n = v.len();
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for x in v {
        acc += x;
        prefix.push(acc);
    }
    let values = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(n);
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect();
    trace.with_values(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};

    fn freq(values: Vec<f64>) -> UniformTrace {
        UniformTrace::new(0.0, 0.01, values, Unit::Hz, "f").unwrap()
    }

    /// 50 Hz until `onset`, then a ramp of `slope` Hz/s.
    fn ramp(slope: f64, onset: usize, len: usize) -> UniformTrace {
        freq(
            (0..len)
                .map(|i| 50.0 + slope * 0.01 * (i.saturating_sub(onset)) as f64)
                .collect(),
        )
    }

    #[test]
    fn constant_frequency_gives_zero() {
        let out = inertial_component(&freq(vec![50.0; 300]), 2500.0, 50.0, 0.06).unwrap();
        assert!(out.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn ramp_settles_to_derivative_gain() {
        let out = inertial_component(&ramp(-1.0, 100, 400), 2500.0, 50.0, 0.06).unwrap();
        // 5 * t_w = 30 samples after onset
        for v in &out.values()[130..] {
            assert!((v - 100.0).abs() <= 1.0, "{v}");
        }
        assert!(out.values()[..=100].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn invalid_time_constant() {
        let f = freq(vec![50.0; 10]);
        assert!(matches!(
            inertial_component(&f, 1.0, 50.0, 0.0),
            Err(Error::InvalidTimeConstant(_))
        ));
        assert!(matches!(
            WashoutConfig::new(-0.1, BTreeMap::new(), 50.0),
            Err(Error::InvalidTimeConstant(_))
        ));
    }

    #[test]
    fn short_time_constant_converges_to_derivative() {
        let f = ramp(-0.7, 50, 400);
        for k in 1..=10 {
            let t_w = 0.01 * k as f64;
            let out = inertial_component(&f, 1000.0, 50.0, t_w).unwrap();
            let exact = 2.0 * 1000.0 / 50.0 * 0.7;
            let last = *out.values().last().unwrap();
            assert!((last - exact).abs() / exact <= 2.0 * 0.01 / t_w);
        }
    }

    #[test]
    fn zero_inertia_is_identity_and_unknown_channel_errors() {
        let f = ramp(-1.0, 10, 100);
        let p = UniformTrace::new(0.0, 0.01, (0..100).map(|i| i as f64).collect(), Unit::MW, "g1")
            .unwrap();
        let config = WashoutConfig::new(0.06, [("g1".to_string(), 0.0)].into(), 50.0).unwrap();
        assert_eq!(remove_inertial(&p, &f, &config).unwrap(), p);
        let other = p.clone().with_channel_id("g2");
        assert!(matches!(
            remove_inertial(&other, &f, &config),
            Err(Error::UnknownChannel(c)) if c == "g2"
        ));
    }

    #[test]
    fn moving_average_identity_and_constant() {
        let t = freq((0..50).map(|i| (i as f64).sin()).collect());
        assert_eq!(moving_average(&t, 0.01).unwrap(), t);
        let c = freq(vec![49.9; 80]);
        let out = moving_average(&c, 0.3).unwrap();
        assert!(out.values().iter().all(|v| (v - 49.9).abs() < 1e-12));
        assert!(matches!(
            moving_average(&t, 0.005),
            Err(Error::WindowTooSmall { .. })
        ));
    }

    #[test]
    fn moving_average_reduces_white_noise() {
        let sigma = 0.01;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let normal = Normal::new(0.0, sigma).unwrap();
        let t = freq((0..20_000).map(|_| 50.0 + normal.sample(&mut rng)).collect());
        let out = moving_average(&t, 0.5).unwrap();
        let interior = &out.values()[100..out.len() - 100];
        let mean = interior.iter().sum::<f64>() / interior.len() as f64;
        let sd = (interior.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
            / (interior.len() - 1) as f64)
            .sqrt();
        let expected = sigma / 50f64.sqrt();
        assert!((sd - expected).abs() / expected < 0.2, "sd {sd} vs {expected}");
    }

    proptest! {
        #[test]
        fn linear_in_inertia(ke in 0.0f64..1e5, slope in -2.0f64..2.0) {
            let f = ramp(slope, 20, 200);
            let one = inertial_component(&f, ke, 50.0, 0.06).unwrap();
            let two = inertial_component(&f, 2.0 * ke, 50.0, 0.06).unwrap();
            for (a, b) in one.values().iter().zip(two.values()) {
                prop_assert_eq!(2.0 * a, *b);
            }
        }
    }
}
