//! Benchmarks for the bounded checker live in `benches/`.
