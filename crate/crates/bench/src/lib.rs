//! Benchmarks for bergman-core live in `benches/`.
