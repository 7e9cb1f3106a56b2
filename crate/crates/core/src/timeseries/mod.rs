//! Trace ingestion, resampling, alignment and PFR aggregation.

mod csv_io;
mod dataset;
mod onset;
mod trace;

pub use csv_io::{
    load_samples_csv, load_trace_csv, write_trace_csv, ColumnSpec, RawSamples, JITTER_TOLERANCE,
};
pub use dataset::{
    aggregate_pfr, build_event_dataset, build_event_dataset_with, EventDataset, EventWindows,
};
pub use onset::{detect_onset, detect_onset_index, detect_onset_with, DEFAULT_ONSET_FLOOR_MW};
pub use trace::{resample, Unit, UniformTrace};
