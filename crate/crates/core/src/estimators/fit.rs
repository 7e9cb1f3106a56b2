//! Joint inertia / load-relief estimation by fitting the SFR model.
//!
//! The measured deviation `Δf = f - f_ref` (with `f_ref` the pre-onset mean)
//! is compared with the model prediction over the fit horizon and the RMSE
//! is minimised over `(KE, D)` inside box bounds. Each start runs a damped
//! Gauss–Newton iteration in `(ln KE, D)` with forward-difference
//! sensitivities and step halving; bound-active coordinates whose gradient
//! points outward are frozen for that iteration.
//!
//! The RMSE divides by the number of summed samples (`N + 1` for samples
//! `0..=N`).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::sfr::{Discretization, SfrInputs};
use crate::estimators::swing::estimate_sliding_window;
use crate::timeseries::{EventDataset, Unit, UniformTrace};

pub const MIN_FIT_SAMPLES: usize = 50;
const KE_FALLBACK: f64 = 1e4;
const COARSE_WINDOW: f64 = 0.5;
const FD_STEP: f64 = 1e-6;
const MAX_HALVINGS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitOptions {
    /// Span after onset that is fitted (s); clipped to the trace end.
    pub horizon_s: f64,
    pub ke_min: f64,
    pub ke_max: f64,
    /// Upper bound on the load relief factor (%/Hz).
    pub d_max: f64,
    /// Stop when the relative RMSE improvement of a step falls below this.
    pub tol: f64,
    pub max_iter: usize,
    pub multistart: bool,
    pub scheme: Discretization,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            horizon_s: 20.0,
            ke_min: 1.0,
            ke_max: 1e7,
            d_max: 10.0,
            tol: 1e-8,
            max_iter: 200,
            multistart: true,
            scheme: Discretization::Trapezoidal,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelFitEstimate {
    /// MW.s
    pub ke: f64,
    /// %/Hz
    pub d: f64,
    /// Hz
    pub rmse: f64,
    /// `f_ref + Δf̂` over the fit horizon, starting at onset.
    pub fitted_frequency: UniformTrace,
    pub iterations: usize,
    pub converged: bool,
}

/// Objective bookkeeping shared by every start.
struct Problem<'a> {
    inputs: &'a SfrInputs,
    measured: Vec<f64>,
    options: FitOptions,
}

#[derive(Debug, Clone, Copy)]
struct Outcome {
    ke: f64,
    d: f64,
    rmse: f64,
    iterations: usize,
    converged: bool,
}

impl Problem<'_> {
    fn samples(&self) -> usize {
        self.measured.len()
    }

    fn predict(&self, ke: f64, d: f64) -> Vec<f64> {
        self.inputs
            .deviation(ke, d, self.samples(), self.options.scheme)
            .expect("ke kept inside positive bounds")
    }

    fn residuals(&self, ke: f64, d: f64) -> Vec<f64> {
        self.measured
            .iter()
            .zip(self.predict(ke, d))
            .map(|(m, p)| m - p)
            .collect()
    }

    fn bounds(&self) -> [(f64, f64); 2] {
        [
            (self.options.ke_min.ln(), self.options.ke_max.ln()),
            (0.0, self.options.d_max),
        ]
    }

    fn project(&self, theta: [f64; 2]) -> [f64; 2] {
        let b = self.bounds();
        [theta[0].clamp(b[0].0, b[0].1), theta[1].clamp(b[1].0, b[1].1)]
    }

    fn rmse_of(residuals: &[f64]) -> f64 {
        (residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64).sqrt()
    }

    fn local(&self, start: [f64; 2]) -> Outcome {
        let bounds = self.bounds();
        let mut theta = self.project(start);
        let mut res = self.residuals(theta[0].exp(), theta[1]);
        let mut rmse = Self::rmse_of(&res);
        let mut iterations = 0;
        let mut converged = false;

        while iterations < self.options.max_iter {
            iterations += 1;
            // forward differences of the residual (backward at the upper bound)
            let mut jac = [vec![0.0; res.len()], vec![0.0; res.len()]];
            for (i, col) in jac.iter_mut().enumerate() {
                let mut h = FD_STEP * theta[i].abs().max(1.0);
                if theta[i] + h > bounds[i].1 {
                    h = -h;
                }
                let mut probe = theta;
                probe[i] += h;
                let shifted = self.residuals(probe[0].exp(), probe[1]);
                for ((c, a), b) in col.iter_mut().zip(&shifted).zip(&res) {
                    *c = (a - b) / h;
                }
            }
            let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
            let grad = [dot(&jac[0], &res), dot(&jac[1], &res)];
            let hess = [
                [dot(&jac[0], &jac[0]), dot(&jac[0], &jac[1])],
                [dot(&jac[1], &jac[0]), dot(&jac[1], &jac[1])],
            ];

            // freeze coordinates pinned at a bound with the descent direction outward
            let free: Vec<usize> = (0..2)
                .filter(|&i| {
                    let at_lo = theta[i] <= bounds[i].0 && grad[i] > 0.0;
                    let at_hi = theta[i] >= bounds[i].1 && grad[i] < 0.0;
                    !(at_lo || at_hi)
                })
                .collect();
            let mut step = [0.0; 2];
            match free.as_slice() {
                [i] => {
                    if hess[*i][*i] > 0.0 {
                        step[*i] = -grad[*i] / hess[*i][*i];
                    }
                }
                [_, _] => {
                    let det = hess[0][0] * hess[1][1] - hess[0][1] * hess[1][0];
                    let scale = hess[0][0] * hess[1][1];
                    if det > 1e-14 * scale && scale > 0.0 {
                        step[0] = -(hess[1][1] * grad[0] - hess[0][1] * grad[1]) / det;
                        step[1] = -(hess[0][0] * grad[1] - hess[1][0] * grad[0]) / det;
                    } else {
                        // nearly singular: fall back to diagonal scaling
                        for i in 0..2 {
                            if hess[i][i] > 0.0 {
                                step[i] = -grad[i] / hess[i][i];
                            }
                        }
                    }
                }
                _ => {}
            }
            if step == [0.0, 0.0] {
                converged = true;
                break;
            }

            let mut alpha = 1.0;
            let mut accepted = None;
            for _ in 0..MAX_HALVINGS {
                let trial = self.project([theta[0] + alpha * step[0], theta[1] + alpha * step[1]]);
                let trial_res = self.residuals(trial[0].exp(), trial[1]);
                let trial_rmse = Self::rmse_of(&trial_res);
                if trial_rmse < rmse {
                    accepted = Some((trial, trial_res, trial_rmse));
                    break;
                }
                alpha *= 0.5;
            }
            let Some((trial, trial_res, trial_rmse)) = accepted else {
                converged = true;
                break;
            };
            let improvement = (rmse - trial_rmse) / rmse;
            theta = trial;
            res = trial_res;
            rmse = trial_rmse;
            if improvement < self.options.tol {
                converged = true;
                break;
            }
        }

        Outcome {
            ke: theta[0].exp(),
            d: theta[1],
            rmse,
            iterations,
            converged,
        }
    }
}

/// Initial inertia guess from a coarse sliding-window estimate.
fn initial_inertia(dataset: &EventDataset, options: &FitOptions) -> f64 {
    estimate_sliding_window(dataset, COARSE_WINDOW)
        .map(|e| e.ke)
        .unwrap_or(KE_FALLBACK)
        .clamp(options.ke_min, options.ke_max)
}

/// Starting points, in `(KE, D)`, used by [`fit_sfr`].
pub fn initial_points(dataset: &EventDataset, options: &FitOptions) -> Vec<(f64, f64)> {
    let ke0 = initial_inertia(dataset, options);
    if !options.multistart {
        return vec![(ke0, 4.0f64.min(options.d_max))];
    }
    let mut points = Vec::new();
    for scale in [0.5, 1.0, 2.0] {
        for d in [0.0, 2.0, 4.0, 8.0] {
            points.push((
                (ke0 * scale).clamp(options.ke_min, options.ke_max),
                f64::min(d, options.d_max),
            ));
        }
    }
    points
}

/// RMSE between the measured deviation and the model at `(ke, d)`.
pub fn fit_objective(
    dataset: &EventDataset,
    ke: f64,
    d: f64,
    options: &FitOptions,
) -> Result<f64> {
    let inputs = SfrInputs::from_dataset(dataset);
    let measured = measured_deviation(dataset, options)?;
    let predicted = inputs.deviation(ke, d, measured.len(), options.scheme)?;
    let res: Vec<f64> = measured.iter().zip(&predicted).map(|(m, p)| m - p).collect();
    Ok(Problem::rmse_of(&res))
}

fn measured_deviation(dataset: &EventDataset, options: &FitOptions) -> Result<Vec<f64>> {
    let k0 = dataset.onset_index();
    let available = dataset.len() - k0;
    let samples = ((options.horizon_s / dataset.dt()).round() as usize + 1).min(available);
    if samples < MIN_FIT_SAMPLES {
        return Err(Error::DegenerateHorizon(samples));
    }
    let f_ref = dataset.frequency_reference();
    Ok(dataset.frequency().values()[k0..k0 + samples]
        .iter()
        .map(|f| f - f_ref)
        .collect())
}

/// Fit `(KE, D)` to the dataset.
///
/// Hitting `max_iter` is not an error: the best point found is returned with
/// `converged = false`.
pub fn fit_sfr(dataset: &EventDataset, options: &FitOptions) -> Result<ModelFitEstimate> {
    if !(options.ke_min > 0.0 && options.ke_max > options.ke_min) {
        return Err(Error::InvalidConfig(format!(
            "inertia bounds [{}, {}] are invalid",
            options.ke_min, options.ke_max
        )));
    }
    if !(options.d_max >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "d_max must be non-negative, got {}",
            options.d_max
        )));
    }
    let inputs = SfrInputs::from_dataset(dataset);
    let problem = Problem {
        inputs: &inputs,
        measured: measured_deviation(dataset, options)?,
        options: *options,
    };

    let starts = initial_points(dataset, options);
    let outcomes: Vec<Outcome> = starts
        .par_iter()
        .map(|&(ke, d)| problem.local([ke.ln(), d]))
        .collect();
    let best = outcomes
        .into_iter()
        .reduce(|a, b| {
            if b.rmse < a.rmse || (b.rmse == a.rmse && b.ke < a.ke) {
                b
            } else {
                a
            }
        })
        .expect("at least one start");

    let f_ref = dataset.frequency_reference();
    let fitted = problem
        .predict(best.ke, best.d)
        .into_iter()
        .map(|v| f_ref + v)
        .collect();
    let fitted_frequency = UniformTrace::new(
        dataset.onset_time(),
        dataset.dt(),
        fitted,
        Unit::Hz,
        "fitted_frequency",
    )?;
    Ok(ModelFitEstimate {
        ke: best.ke,
        d: best.d,
        rmse: best.rmse,
        fitted_frequency,
        iterations: best.iterations,
        converged: best.converged,
    })
}
