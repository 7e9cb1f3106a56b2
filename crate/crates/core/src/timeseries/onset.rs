use crate::error::{Error, Result};
use crate::timeseries::trace::UniformTrace;

/// Smallest single-sample step (MW) accepted as a contingency.
pub const DEFAULT_ONSET_FLOOR_MW: f64 = 5.0;

/// Time of the contingency onset in `contingency`, using the default floor.
pub fn detect_onset(contingency: &UniformTrace) -> Result<f64> {
    detect_onset_with(contingency, DEFAULT_ONSET_FLOOR_MW)
}

pub fn detect_onset_with(contingency: &UniformTrace, floor_mw: f64) -> Result<f64> {
    detect_onset_index(contingency, floor_mw).map(|i| contingency.time_at(i))
}

/// Index of the first sample whose backward difference exceeds half of the
/// largest single-step change. Drops and rises are treated alike.
pub fn detect_onset_index(contingency: &UniformTrace, floor_mw: f64) -> Result<usize> {
    let steps: Vec<f64> = contingency
        .values()
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .collect();
    let largest = steps.iter().copied().fold(0.0, f64::max);
    if largest < floor_mw || largest == 0.0 {
        return Err(Error::OnsetNotFound {
            largest_step: largest,
            floor: floor_mw,
        });
    }
    let threshold = 0.5 * largest;
    let first = steps
        .iter()
        .position(|&s| s > threshold)
        .expect("largest step always exceeds half of itself");
    Ok(first + 1)
}
