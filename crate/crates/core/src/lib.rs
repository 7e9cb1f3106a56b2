//! Power system inertia estimation from disturbance recordings.
//!
//! The crate aligns frequency and generator power measurements around a
//! contingency, estimates the system kinetic energy with two swing-equation
//! baselines and a joint fit of a low-order frequency response model, and
//! generates synthetic events with known ground truth for verification.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimators;
pub mod manifest;
pub mod preprocess;
pub mod sim;
pub mod timeseries;

pub use error::{Error, Result};
pub use estimators::{
    estimate_inoue, estimate_sliding_window, fit_sfr, sfr_predict, swing_inertia, FitOptions,
    ModelFitEstimate, SwingEstimate, SwingMethod,
};
pub use manifest::{EventManifest, LoadedManifest};
pub use preprocess::{clean_dataset, remove_inertial, WashoutConfig};
pub use sim::{export_event, simulate_event, ScenarioConfig, SyntheticEvent};
pub use timeseries::{build_event_dataset, EventDataset, Unit, UniformTrace};
