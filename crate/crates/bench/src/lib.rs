//! Benchmarks for lielab-core; see benches/kernels.rs.
