use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical unit of a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Unit {
    Hz,
    MW,
}

/// A uniformly sampled, time-anchored scalar signal.
///
/// Sample `i` sits at `start_time + i * dt`. Construction rejects
/// non-positive steps, fewer than two samples and non-finite values, so every
/// `UniformTrace` in circulation satisfies those invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformTrace {
    start_time: f64,
    dt: f64,
    values: Vec<f64>,
    unit: Unit,
    channel_id: String,
}

impl UniformTrace {
    pub fn new(
        start_time: f64,
        dt: f64,
        values: Vec<f64>,
        unit: Unit,
        channel_id: impl Into<String>,
    ) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidStep(dt));
        }
        if !start_time.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "start time {start_time} is not finite"
            )));
        }
        if values.len() < 2 {
            return Err(Error::TooFewSamples(values.len()));
        }
        if let Some(row) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { row });
        }
        Ok(Self {
            start_time,
            dt,
            values,
            unit,
            channel_id: channel_id.into(),
        })
    }

    pub fn start_time(&self) -> f64 {
        self.start_time
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn channel_id(&self) -> &str {
        &self.channel_id
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time_at(&self, index: usize) -> f64 {
        self.start_time + index as f64 * self.dt
    }

    pub fn end_time(&self) -> f64 {
        self.time_at(self.values.len() - 1)
    }

    /// Index of the sample nearest to `t`, or `None` if `t` lies more than
    /// half a step outside the trace.
    pub fn nearest_index(&self, t: f64) -> Option<usize> {
        let pos = ((t - self.start_time) / self.dt).round();
        if pos < 0.0 || pos > (self.values.len() - 1) as f64 {
            None
        } else {
            Some(pos as usize)
        }
    }

    /// Same grid, unit and channel with new sample values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.values.len() {
            return Err(Error::InvalidConfig(format!(
                "expected {} samples, got {}",
                self.values.len(),
                values.len()
            )));
        }
        Self::new(
            self.start_time,
            self.dt,
            values,
            self.unit,
            self.channel_id.clone(),
        )
    }

    pub fn with_channel_id(mut self, channel_id: impl Into<String>) -> Self {
        self.channel_id = channel_id.into();
        self
    }

    /// Translate the time axis by `tau` seconds.
    pub fn shifted(&self, tau: f64) -> Self {
        Self {
            start_time: self.start_time + tau,
            ..self.clone()
        }
    }

    /// Whether `other` sits on exactly the same sample grid.
    pub fn same_grid(&self, other: &UniformTrace) -> bool {
        self.start_time == other.start_time
            && self.dt == other.dt
            && self.values.len() == other.values.len()
    }

    /// Linear interpolation onto `len` samples starting at `start` with step
    /// `dt`. Grid points outside the trace are clamped to the nearest end.
    pub(crate) fn interpolate_onto(&self, start: f64, dt: f64, len: usize) -> Result<Self> {
        if self.start_time == start && self.dt == dt && self.values.len() >= len {
            let mut values = self.values.clone();
            values.truncate(len);
            return Self::new(start, dt, values, self.unit, self.channel_id.clone());
        }
        let last = self.values.len() - 1;
        let offset = (start - self.start_time) / self.dt;
        let ratio = dt / self.dt;
        let values = (0..len)
            .map(|i| {
                let pos = offset + i as f64 * ratio;
                if pos <= 0.0 {
                    return self.values[0];
                }
                if pos >= last as f64 || (last as f64 - pos).abs() < 1e-9 {
                    return self.values[last];
                }
                let idx = pos.floor() as usize;
                let frac = pos - idx as f64;
                if frac < 1e-12 {
                    return self.values[idx];
                }
                let (a, b) = (self.values[idx], self.values[idx + 1]);
                a + frac * (b - a)
            })
            .collect();
        Self::new(start, dt, values, self.unit, self.channel_id.clone())
    }

    /// Mean of the samples in `range`, clamped to the trace.
    pub(crate) fn mean_over(&self, range: std::ops::Range<usize>) -> Option<f64> {
        let end = range.end.min(self.values.len());
        let start = range.start.min(end);
        let slice = &self.values[start..end];
        if slice.is_empty() {
            None
        } else {
            Some(slice.iter().sum::<f64>() / slice.len() as f64)
        }
    }
}

/// Linearly interpolate `trace` onto a grid with step `dt_new` spanning the
/// same interval. The first sample is preserved exactly, and so is the last
/// whenever the span is a whole number of new steps.
pub fn resample(trace: &UniformTrace, dt_new: f64) -> Result<UniformTrace> {
    if !(dt_new > 0.0 && dt_new.is_finite()) {
        return Err(Error::InvalidStep(dt_new));
    }
    let span = trace.end_time() - trace.start_time();
    let len = (span / dt_new + 1e-9).floor() as usize + 1;
    if len < 2 {
        return Err(Error::TooFewSamples(len));
    }
    trace.interpolate_onto(trace.start_time(), dt_new, len)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(dt: f64, values: Vec<f64>) -> UniformTrace {
        UniformTrace::new(0.0, dt, values, Unit::Hz, "f").unwrap()
    }

    #[test]
    fn rejects_bad_construction() {
        assert!(matches!(
            UniformTrace::new(0.0, 0.0, vec![1.0, 2.0], Unit::Hz, "x"),
            Err(Error::InvalidStep(_))
        ));
        assert!(matches!(
            UniformTrace::new(0.0, 0.1, vec![1.0], Unit::Hz, "x"),
            Err(Error::TooFewSamples(1))
        ));
        assert!(matches!(
            UniformTrace::new(0.0, 0.1, vec![1.0, f64::NAN], Unit::Hz, "x"),
            Err(Error::NonFiniteValue { row: 1 })
        ));
    }

    #[test]
    fn constant_upsample_is_exact() {
        let t = trace(0.02, vec![50.0; 101]);
        let r = resample(&t, 0.01).unwrap();
        assert_eq!(r.len(), 201);
        assert!(r.values().iter().all(|&v| v == 50.0));
    }

    #[test]
    fn ramp_midpoint() {
        let t = trace(0.1, (0..=10).map(|i| i as f64 / 10.0).collect());
        let r = resample(&t, 0.05).unwrap();
        assert_eq!(r.len(), 21);
        assert!((r.values()[1] - 0.05).abs() < 1e-15);
        assert_eq!(r.values()[0], 0.0);
        assert_eq!(*r.values().last().unwrap(), 1.0);
    }

    #[test]
    fn sinusoid_downsample_accuracy() {
        let dt = 0.001;
        let values = (0..=5000)
            .map(|i| (2.0 * std::f64::consts::PI * i as f64 * dt).sin())
            .collect();
        let r = resample(&trace(dt, values), 0.01).unwrap();
        let err = r
            .values()
            .iter()
            .enumerate()
            .map(|(i, v)| (v - (2.0 * std::f64::consts::PI * r.time_at(i)).sin()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-4, "max error {err}");
    }

    #[test]
    fn invalid_step() {
        let t = trace(0.1, vec![0.0; 5]);
        assert!(matches!(resample(&t, 0.0), Err(Error::InvalidStep(_))));
        assert!(matches!(resample(&t, -1.0), Err(Error::InvalidStep(_))));
    }
}
