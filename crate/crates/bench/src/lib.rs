//! Criterion benchmarks for the simulation engine live in `benches/`.
