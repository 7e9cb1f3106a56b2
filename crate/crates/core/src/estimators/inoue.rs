//! Polynomial-fit RoCoF.
//!
//! The post-onset frequency is fitted by linear least squares in a Legendre
//! basis over normalised time `x = 2 t / T - 1`, so orders up to 30 stay
//! well conditioned. The RoCoF is the analytic derivative at `x = -1`:
//! `P_n'(-1) = (-1)^(n+1) n (n+1) / 2`, scaled by `dx/dt = 2 / T`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::estimators::swing::{swing_inertia, SwingEstimate, SwingMethod};
use crate::timeseries::{EventDataset, UniformTrace};

/// Post-onset span fitted when the caller has no preference (s).
pub const DEFAULT_FIT_HORIZON: f64 = 5.0;
pub const MAX_ORDER: usize = 30;
/// Ratio of largest to smallest singular value above which a fit is refused.
pub const CONDITION_LIMIT: f64 = 1e10;

/// Legendre polynomials `P_0..=P_order` at `x`.
fn legendre_row(x: f64, order: usize, row: &mut [f64]) {
    row[0] = 1.0;
    if order >= 1 {
        row[1] = x;
    }
    for n in 2..=order {
        let nf = n as f64;
        row[n] = ((2.0 * nf - 1.0) * x * row[n - 1] - (nf - 1.0) * row[n - 2]) / nf;
    }
}

/// RoCoF (Hz/s) at `onset` from a polynomial of degree `order` fitted over
/// `[onset, onset + fit_horizon]`.
pub fn polynomial_rocof(
    frequency: &UniformTrace,
    onset: f64,
    order: usize,
    fit_horizon: f64,
) -> Result<f64> {
    if order == 0 || order > MAX_ORDER {
        return Err(Error::InvalidOrder(order));
    }
    let dt = frequency.dt();
    let onset_idx = frequency
        .nearest_index(onset)
        .ok_or_else(|| Error::HorizonOutOfRange(format!("onset {onset} s outside the trace")))?;
    let steps = ((fit_horizon / dt).round() as usize).min(frequency.len() - 1 - onset_idx);
    let samples = steps + 1;
    let needed = 10 * (order + 1);
    if samples < needed || steps == 0 {
        return Err(Error::InsufficientSamples {
            needed,
            available: samples,
        });
    }

    let f = &frequency.values()[onset_idx..=onset_idx + steps];
    let reference = f[0];
    let mut design = DMatrix::<f64>::zeros(samples, order + 1);
    let mut row = vec![0.0; order + 1];
    for k in 0..samples {
        let x = 2.0 * k as f64 / steps as f64 - 1.0;
        legendre_row(x, order, &mut row);
        for (j, v) in row.iter().enumerate() {
            design[(k, j)] = *v;
        }
    }
    let rhs = DVector::from_iterator(samples, f.iter().map(|v| v - reference));

    let svd = design.svd(true, true);
    let (max_sv, min_sv) = svd
        .singular_values
        .iter()
        .fold((0.0f64, f64::INFINITY), |(hi, lo), &s| (hi.max(s), lo.min(s)));
    let condition = max_sv / min_sv;
    if !(condition < CONDITION_LIMIT) {
        return Err(Error::IllConditionedFit(condition));
    }
    let coeffs = svd
        .solve(&rhs, 0.0)
        .map_err(|_| Error::IllConditionedFit(condition))?;

    let slope_at_start: f64 = coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(n, c)| {
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            c * sign * (n * (n + 1)) as f64 / 2.0
        })
        .sum();
    Ok(slope_at_start * 2.0 / (steps as f64 * dt))
}

pub fn estimate_inoue(
    dataset: &EventDataset,
    order: usize,
    fit_horizon: f64,
) -> Result<SwingEstimate> {
    let rocof = polynomial_rocof(
        dataset.frequency(),
        dataset.onset_time(),
        order,
        fit_horizon,
    )?;
    let ke = swing_inertia(dataset.f_n(), dataset.p_cont_size(), rocof)?;
    Ok(SwingEstimate {
        ke,
        rocof,
        method: SwingMethod::Inoue,
        hyperparameter: order as f64,
    })
}
