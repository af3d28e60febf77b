//! Benchmark-only crate; see `benches/outage.rs`.
