use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::timeseries::{EventDataset, UniformTrace};

/// Default span after onset searched for the steepest windowed slope (s).
pub const DEFAULT_SEARCH_HORIZON: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwingMethod {
    SlidingWindow,
    Inoue,
}

/// Inertia from the linearised swing equation evaluated at onset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SwingEstimate {
    /// MW.s
    pub ke: f64,
    /// Hz/s
    pub rocof: f64,
    pub method: SwingMethod,
    /// Window length (s) or polynomial order.
    pub hyperparameter: f64,
}

/// Which way frequency moves after the disturbance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Generation loss.
    Falling,
    /// Load loss.
    Rising,
}

/// `KE = -(f_n / 2) * p_cont / rocof`.
pub fn swing_inertia(f_n: f64, p_cont: f64, rocof: f64) -> Result<f64> {
    if rocof == 0.0 {
        return Err(Error::ZeroRocof);
    }
    let ke = -(f_n / 2.0) * p_cont / rocof;
    if !(ke > 0.0) || !ke.is_finite() {
        return Err(Error::NegativeEstimate { rocof, p_cont });
    }
    Ok(ke)
}

/// Steepest windowed difference quotient after onset.
///
/// For every sample `t` in `(onset, onset + search_horizon]` the slope
/// `(f[t] - f[t - window]) / window` is formed; the most negative value is
/// returned for [`Direction::Falling`], the most positive for
/// [`Direction::Rising`]. The window is snapped to a whole number of samples.
pub fn rocof_sliding_window(
    frequency: &UniformTrace,
    onset: f64,
    window: f64,
    search_horizon: f64,
    direction: Direction,
) -> Result<f64> {
    let dt = frequency.dt();
    let w = (window / dt).round() as usize;
    if w < 2 {
        return Err(Error::WindowTooSmall { window, dt });
    }
    if !(search_horizon > window) {
        return Err(Error::HorizonOutOfRange(format!(
            "search horizon {search_horizon} s must exceed window {window} s"
        )));
    }
    let onset_idx = frequency.nearest_index(onset).ok_or_else(|| {
        Error::HorizonOutOfRange(format!("onset {onset} s outside the trace"))
    })?;
    let last = onset_idx + (search_horizon / dt).round() as usize;
    if last >= frequency.len() {
        return Err(Error::HorizonOutOfRange(format!(
            "onset + {search_horizon} s runs past the end of the trace"
        )));
    }
    let f = frequency.values();
    let span = w as f64 * dt;
    let slopes = (onset_idx + 1..=last)
        .filter(|&k| k >= w)
        .map(|k| (f[k] - f[k - w]) / span);
    let extreme = match direction {
        Direction::Falling => slopes.fold(0.0, f64::min),
        Direction::Rising => slopes.fold(0.0, f64::max),
    };
    Ok(extreme)
}

pub fn estimate_sliding_window(dataset: &EventDataset, window: f64) -> Result<SwingEstimate> {
    estimate_sliding_window_with(dataset, window, DEFAULT_SEARCH_HORIZON)
}

pub fn estimate_sliding_window_with(
    dataset: &EventDataset,
    window: f64,
    search_horizon: f64,
) -> Result<SwingEstimate> {
    let rocof = rocof_sliding_window(
        dataset.frequency(),
        dataset.onset_time(),
        window,
        search_horizon,
        Direction::Falling,
    )?;
    let ke = swing_inertia(dataset.f_n(), dataset.p_cont_size(), rocof)?;
    Ok(SwingEstimate {
        ke,
        rocof,
        method: SwingMethod::SlidingWindow,
        hyperparameter: window,
    })
}
