//! Criterion benchmarks for the phasezone kernels live under `benches/`.
