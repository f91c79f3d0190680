//! Criterion benchmarks for `toda-core`; see `benches/`.
