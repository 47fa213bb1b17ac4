//! Criterion benchmarks for `memwalk`; see `benches/`.
