//! Criterion benchmarks for geolink live in `benches/`.
