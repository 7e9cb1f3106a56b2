use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::timeseries::onset::{detect_onset_index, DEFAULT_ONSET_FLOOR_MW};
use crate::timeseries::trace::{Unit, UniformTrace};

/// Averaging windows used to anchor an event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EventWindows {
    /// Length of the pre-onset reference window (s).
    pub pre_onset_s: f64,
    /// Delay after onset before the settled contingency window starts (s).
    pub post_onset_delay_s: f64,
    /// Length of the settled contingency window (s).
    pub post_onset_s: f64,
    /// Smallest step accepted by automatic onset detection (MW).
    pub onset_floor_mw: f64,
    /// Data required after onset (s).
    pub min_post_onset_s: f64,
}

impl Default for EventWindows {
    fn default() -> Self {
        Self {
            pre_onset_s: 0.1,
            post_onset_delay_s: 0.2,
            post_onset_s: 0.1,
            onset_floor_mw: DEFAULT_ONSET_FLOOR_MW,
            min_post_onset_s: 5.0,
        }
    }
}

/// Aligned bundle of measurements describing one disturbance.
///
/// All traces share one grid. `onset_time` is a grid time; estimators work
/// in event-relative time `t - onset_time`.
#[derive(Debug, Clone, PartialEq)]
pub struct EventDataset {
    frequency: UniformTrace,
    pfr_channels: Vec<UniformTrace>,
    contingency: UniformTrace,
    f_n: f64,
    p_load: f64,
    p_cont_size: f64,
    onset_time: f64,
    onset_index: usize,
    windows: EventWindows,
}

impl EventDataset {
    pub fn frequency(&self) -> &UniformTrace {
        &self.frequency
    }

    pub fn pfr_channels(&self) -> &[UniformTrace] {
        &self.pfr_channels
    }

    pub fn contingency(&self) -> &UniformTrace {
        &self.contingency
    }

    pub fn f_n(&self) -> f64 {
        self.f_n
    }

    pub fn p_load(&self) -> f64 {
        self.p_load
    }

    pub fn p_cont_size(&self) -> f64 {
        self.p_cont_size
    }

    pub fn onset_time(&self) -> f64 {
        self.onset_time
    }

    pub fn onset_index(&self) -> usize {
        self.onset_index
    }

    pub fn windows(&self) -> &EventWindows {
        &self.windows
    }

    pub fn dt(&self) -> f64 {
        self.frequency.dt()
    }

    pub fn len(&self) -> usize {
        self.frequency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequency.is_empty()
    }

    /// Sample indices of the pre-onset reference window.
    pub fn pre_onset_range(&self) -> Range<usize> {
        let n = window_samples(self.windows.pre_onset_s, self.dt());
        self.onset_index.saturating_sub(n)..self.onset_index
    }

    /// Mean frequency over the pre-onset window; the reference for deviations.
    pub fn frequency_reference(&self) -> f64 {
        self.frequency
            .mean_over(self.pre_onset_range())
            .expect("pre-onset window is non-empty by construction")
    }

    /// Lost power as a deviation: zero before onset, `p_cont_size` once settled.
    pub fn lost_power(&self) -> UniformTrace {
        let pre = self
            .contingency
            .mean_over(self.pre_onset_range())
            .expect("pre-onset window is non-empty by construction");
        let values = self.contingency.values().iter().map(|c| pre - c).collect();
        self.contingency
            .with_values(values)
            .expect("same grid")
            .with_channel_id("lost_power")
    }

    /// Replace the PFR channels with traces on the same grid.
    pub fn with_pfr_channels(&self, channels: Vec<UniformTrace>) -> Result<Self> {
        check_grid(&self.frequency, &channels)?;
        Ok(Self {
            pfr_channels: channels,
            ..self.clone()
        })
    }

    /// Replace the frequency trace with one on the same grid.
    pub fn with_frequency(&self, frequency: UniformTrace) -> Result<Self> {
        check_grid(&self.frequency, std::slice::from_ref(&frequency))?;
        Ok(Self {
            frequency,
            ..self.clone()
        })
    }
}

fn check_grid(reference: &UniformTrace, traces: &[UniformTrace]) -> Result<()> {
    match traces.iter().find(|t| !t.same_grid(reference)) {
        Some(t) => Err(Error::InvalidConfig(format!(
            "channel `{}` is not on the dataset grid",
            t.channel_id()
        ))),
        None => Ok(()),
    }
}

pub(crate) fn window_samples(window_s: f64, dt: f64) -> usize {
    ((window_s / dt).round() as usize).max(1)
}

/// Align traces onto a common grid and anchor the event.
///
/// `onset` of `None` runs automatic detection on the contingency trace.
pub fn build_event_dataset(
    frequency: &UniformTrace,
    pfr_channels: &[UniformTrace],
    contingency: &UniformTrace,
    f_n: f64,
    p_load: f64,
    onset: Option<f64>,
) -> Result<EventDataset> {
    build_event_dataset_with(
        frequency,
        pfr_channels,
        contingency,
        f_n,
        p_load,
        onset,
        EventWindows::default(),
    )
}

pub fn build_event_dataset_with(
    frequency: &UniformTrace,
    pfr_channels: &[UniformTrace],
    contingency: &UniformTrace,
    f_n: f64,
    p_load: f64,
    onset: Option<f64>,
    windows: EventWindows,
) -> Result<EventDataset> {
    if !(f_n > 0.0) {
        return Err(Error::InvalidConfig(format!("f_n must be positive, got {f_n}")));
    }
    if !(p_load > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "p_load must be positive, got {p_load}"
        )));
    }
    if frequency.unit() != Unit::Hz {
        return Err(Error::InvalidConfig("frequency trace must be in Hz".into()));
    }
    if let Some(t) = pfr_channels
        .iter()
        .chain(std::iter::once(contingency))
        .find(|t| t.unit() != Unit::MW)
    {
        return Err(Error::InvalidConfig(format!(
            "power channel `{}` must be in MW",
            t.channel_id()
        )));
    }

    let all = || {
        std::iter::once(frequency)
            .chain(pfr_channels.iter())
            .chain(std::iter::once(contingency))
    };
    // coarsest step wins; span is the intersection
    let dt = all().map(UniformTrace::dt).fold(0.0, f64::max);
    let start = all().map(UniformTrace::start_time).fold(f64::MIN, f64::max);
    let end = all().map(UniformTrace::end_time).fold(f64::MAX, f64::min);
    if end - start < dt {
        return Err(Error::InsufficientOverlap(format!(
            "common span [{start:.3}, {end:.3}] s is shorter than one step"
        )));
    }
    let len = ((end - start) / dt + 1e-9).floor() as usize + 1;

    let frequency = frequency.interpolate_onto(start, dt, len)?;
    let contingency = contingency.interpolate_onto(start, dt, len)?;
    let pfr_channels = pfr_channels
        .iter()
        .map(|c| c.interpolate_onto(start, dt, len))
        .collect::<Result<Vec<_>>>()?;

    let onset_index = match onset {
        Some(t) => frequency.nearest_index(t).ok_or_else(|| {
            Error::InsufficientOverlap(format!("onset {t} s lies outside the common span"))
        })?,
        None => detect_onset_index(&contingency, windows.onset_floor_mw)?,
    };
    if onset_index == 0 {
        return Err(Error::InsufficientOverlap(
            "no pre-onset samples in the common span".into(),
        ));
    }
    let onset_time = frequency.time_at(onset_index);
    let post_onset = frequency.end_time() - onset_time;
    if post_onset + 1e-9 < windows.min_post_onset_s {
        return Err(Error::InsufficientOverlap(format!(
            "only {post_onset:.3} s of data after onset, need {} s",
            windows.min_post_onset_s
        )));
    }

    let pre_n = window_samples(windows.pre_onset_s, dt);
    let pre = contingency
        .mean_over(onset_index.saturating_sub(pre_n)..onset_index)
        .expect("onset_index > 0");
    let post_start = onset_index + (windows.post_onset_delay_s / dt).round() as usize;
    let post_n = window_samples(windows.post_onset_s, dt);
    let post = contingency
        .mean_over(post_start..post_start + post_n)
        .ok_or_else(|| {
            Error::InsufficientOverlap("settled contingency window beyond trace end".into())
        })?;
    let p_cont_size = pre - post;
    if !(p_cont_size > 0.0) {
        return Err(Error::NonPositiveContingency(p_cont_size));
    }

    Ok(EventDataset {
        frequency,
        pfr_channels,
        contingency,
        f_n,
        p_load,
        p_cont_size,
        onset_time,
        onset_index,
        windows,
    })
}

/// Sample-wise sum of the PFR channels, re-based to zero pre-onset mean.
pub fn aggregate_pfr(dataset: &EventDataset) -> UniformTrace {
    let n = dataset.len();
    let mut total = vec![0.0; n];
    for channel in dataset.pfr_channels() {
        for (acc, v) in total.iter_mut().zip(channel.values()) {
            *acc += v;
        }
    }
    let range = dataset.pre_onset_range();
    let baseline = total[range.clone()].iter().sum::<f64>() / range.len() as f64;
    for v in &mut total {
        *v -= baseline;
    }
    UniformTrace::new(
        dataset.frequency().start_time(),
        dataset.dt(),
        total,
        Unit::MW,
        "aggregate_pfr",
    )
    .expect("aggregate of finite channels on a valid grid")
}
