//! Synthetic disturbance events with known inertia and load relief.

mod export;
mod governor;
mod scenario;
mod simulate;

pub use export::{export_event, TruthRecord, MANIFEST_FILE, TRUTH_FILE};
pub use governor::governor_response;
pub use scenario::{
    Artifacts, ContingencySpec, FfrParams, GovernorParams, Oscillation, ScenarioConfig, Transient,
};
pub use simulate::{simulate_event, GroundTruth, SyntheticEvent, MAX_DEVIATION_HZ};
