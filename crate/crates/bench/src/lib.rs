//! Benchmarks for the estimator and simulator hot paths. See `benches/`.
