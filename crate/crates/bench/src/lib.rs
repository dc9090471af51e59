//! Criterion benchmarks for the varilab pipelines live in `benches/`.
