//! Benchmark-only crate; see `benches/meters.rs`.
