//! Library side of the benchmark CLI: the bench-grid config format and the
//! grid runner. The binary in `main.rs` is a thin argument layer over this.

pub mod bench;
pub mod bench_config;

pub use bench_config::{BenchConfig, ConfigError, DataSource, Method};
