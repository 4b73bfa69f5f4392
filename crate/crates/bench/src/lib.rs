//! Benchmark-only crate; see `benches/window.rs`.
