use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("time column is not strictly increasing at row {row}")]
    NonMonotonicTime { row: usize },
    #[error("non-finite value at row {row}")]
    NonFiniteValue { row: usize },
    #[error("trace needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("sample spacing jitter {jitter:.3e} exceeds tolerance; resample explicitly")]
    NonUniformSampling { jitter: f64 },
    #[error("invalid time step {0}")]
    InvalidStep(f64),
    #[error("traces do not overlap sufficiently: {0}")]
    InsufficientOverlap(String),
    #[error("no contingency onset found (largest step {largest_step:.3} MW below floor {floor:.3} MW)")]
    OnsetNotFound { largest_step: f64, floor: f64 },
    #[error("contingency size must be positive, got {0:.6} MW")]
    NonPositiveContingency(f64),
    #[error("invalid washout time constant {0}")]
    InvalidTimeConstant(f64),
    #[error("unknown channel `{0}`")]
    UnknownChannel(String),
    #[error("window {window} s is too small for step {dt} s")]
    WindowTooSmall { window: f64, dt: f64 },
    #[error("search horizon out of range: {0}")]
    HorizonOutOfRange(String),
    #[error("RoCoF is zero")]
    ZeroRocof,
    #[error("negative inertia estimate (RoCoF {rocof:.6} Hz/s inconsistent with contingency {p_cont:.3} MW)")]
    NegativeEstimate { rocof: f64, p_cont: f64 },
    #[error("polynomial fit is ill-conditioned (condition estimate {0:.3e})")]
    IllConditionedFit(f64),
    #[error("insufficient samples: need {needed}, have {available}")]
    InsufficientSamples { needed: usize, available: usize },
    #[error("polynomial order {0} outside 1..=30")]
    InvalidOrder(usize),
    #[error("inertia must be positive, got {0}")]
    NonPositiveInertia(f64),
    #[error("fit horizon has {0} samples, need at least 50")]
    DegenerateHorizon(usize),
    #[error("sweep has no hyperparameter values")]
    EmptySweep,
    #[error("sweep values must be strictly increasing")]
    UnsortedSweep,
    #[error("scenario is unstable: frequency deviation {deviation:.3} Hz at t = {time:.3} s")]
    UnstableScenario { deviation: f64, time: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short stable identifier, used by the CLI in its error line.
    pub fn code(&self) -> &'static str {
        match self {
            Error::MissingColumn(_) => "missing_column",
            Error::NonMonotonicTime { .. } => "non_monotonic_time",
            Error::NonFiniteValue { .. } => "non_finite_value",
            Error::TooFewSamples(_) => "too_few_samples",
            Error::NonUniformSampling { .. } => "non_uniform_sampling",
            Error::InvalidStep(_) => "invalid_step",
            Error::InsufficientOverlap(_) => "insufficient_overlap",
            Error::OnsetNotFound { .. } => "onset_not_found",
            Error::NonPositiveContingency(_) => "non_positive_contingency",
            Error::InvalidTimeConstant(_) => "invalid_time_constant",
            Error::UnknownChannel(_) => "unknown_channel",
            Error::WindowTooSmall { .. } => "window_too_small",
            Error::HorizonOutOfRange(_) => "horizon_out_of_range",
            Error::ZeroRocof => "zero_rocof",
            Error::NegativeEstimate { .. } => "negative_estimate",
            Error::IllConditionedFit(_) => "ill_conditioned_fit",
            Error::InsufficientSamples { .. } => "insufficient_samples",
            Error::InvalidOrder(_) => "invalid_order",
            Error::NonPositiveInertia(_) => "non_positive_inertia",
            Error::DegenerateHorizon(_) => "degenerate_horizon",
            Error::EmptySweep => "empty_sweep",
            Error::UnsortedSweep => "unsorted_sweep",
            Error::UnstableScenario { .. } => "unstable_scenario",
            Error::InvalidConfig(_) => "invalid_config",
            Error::Io { .. } => "io",
            Error::Csv { .. } => "csv",
            Error::Json { .. } => "json",
        }
    }

    /// True for errors caused by the inputs (files, configs, datasets) rather
    /// than by a numerical estimator failing on otherwise valid data.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::ZeroRocof | Error::NegativeEstimate { .. } | Error::IllConditionedFit(_)
        )
    }
}
