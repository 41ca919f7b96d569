//! Benchmarks for `bmn-core` live in `benches/`; run them with
//! `cargo bench -p bmn-bench`.
