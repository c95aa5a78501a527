//! Criterion benchmarks for geophase live under `benches/`.
