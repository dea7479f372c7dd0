//! Criterion benchmarks for the `cayfib` toolkit; see `benches/toolkit.rs`.
