//! Criterion benchmarks for `rkhs-scale`; see `benches/`.
