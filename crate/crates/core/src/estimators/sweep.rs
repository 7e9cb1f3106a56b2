use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::inoue::estimate_inoue;
use crate::estimators::swing::{estimate_sliding_window, SwingEstimate, SwingMethod};
use crate::timeseries::EventDataset;

/// Estimates across a swept hyperparameter. Failed points are `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub method: SwingMethod,
    pub hyperparameter_values: Vec<f64>,
    pub estimates: Vec<Option<SwingEstimate>>,
}

impl SweepResult {
    /// `(hyperparameter, ke)` pairs for the points that succeeded.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.hyperparameter_values
            .iter()
            .zip(&self.estimates)
            .filter_map(|(h, e)| e.map(|e| (*h, e.ke)))
    }
}

fn check_increasing(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::EmptySweep);
    }
    if values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::UnsortedSweep);
    }
    Ok(())
}

pub fn sweep_window_lengths(dataset: &EventDataset, windows: &[f64]) -> Result<SweepResult> {
    check_increasing(windows)?;
    let estimates = windows
        .par_iter()
        .map(|&w| estimate_sliding_window(dataset, w).ok())
        .collect();
    Ok(SweepResult {
        method: SwingMethod::SlidingWindow,
        hyperparameter_values: windows.to_vec(),
        estimates,
    })
}

pub fn sweep_poly_orders(
    dataset: &EventDataset,
    orders: &[usize],
    fit_horizon: f64,
) -> Result<SweepResult> {
    let values: Vec<f64> = orders.iter().map(|&o| o as f64).collect();
    check_increasing(&values)?;
    let estimates = orders
        .par_iter()
        .map(|&o| estimate_inoue(dataset, o, fit_horizon).ok())
        .collect();
    Ok(SweepResult {
        method: SwingMethod::Inoue,
        hyperparameter_values: values,
        estimates,
    })
}
