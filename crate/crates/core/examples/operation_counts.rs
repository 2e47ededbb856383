//! Counted client and server work as n and N grow.
//!
//!     cargo run --release --example operation_counts

use spdc::cli::{bench_csv, RunConfig};
use spdc::client::Method;

fn main() {
    let csv = bench_csv(
        &RunConfig::default(),
        &[12, 24, 48, 96],
        &[2, 3, 4, 6],
        &[Method::Q2, Method::Q3],
    )
    .unwrap();
    print!("{csv}");
}
