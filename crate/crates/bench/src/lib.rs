//! Criterion benchmarks for `dualdomain`. The benchmarks live in `benches/`;
//! run them with `cargo bench -p dualdomain-bench`.
