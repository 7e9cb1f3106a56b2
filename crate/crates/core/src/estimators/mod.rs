//! Inertia estimators: the swing-equation baselines (sliding window and
//! polynomial fit) and the joint SFR model fit.

mod fit;
mod inoue;
mod sfr;
mod sweep;
mod swing;

pub use fit::{fit_objective, fit_sfr, initial_points, FitOptions, ModelFitEstimate, MIN_FIT_SAMPLES};
pub use inoue::{estimate_inoue, polynomial_rocof, CONDITION_LIMIT, DEFAULT_FIT_HORIZON, MAX_ORDER};
pub use sfr::{sfr_predict, sfr_predict_with, Discretization, SfrInputs};
pub use sweep::{sweep_poly_orders, sweep_window_lengths, SweepResult};
pub use swing::{
    estimate_sliding_window, estimate_sliding_window_with, rocof_sliding_window, swing_inertia,
    Direction, SwingEstimate, SwingMethod, DEFAULT_SEARCH_HORIZON,
};
