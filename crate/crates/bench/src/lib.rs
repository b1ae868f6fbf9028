//! Criterion benchmarks for `ocd-core`; see `benches/`.
