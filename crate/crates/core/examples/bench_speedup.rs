//! Times stage-3 dedup at several worker counts.
//!
//!     cargo run --release --example bench_speedup -- 100000 1,2,4,8

use streamprep::bench::{bench_dedup, BenchSettings};

fn list(arg: Option<String>, default: Vec<usize>) -> Result<Vec<usize>, std::num::ParseIntError> {
    match arg {
        Some(a) => a.split(',').map(str::parse).collect(),
        None => Ok(default),
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let settings = BenchSettings {
        sizes: list(args.next(), vec![100_000])?,
        worker_counts: list(args.next(), vec![1, 2, 4])?,
        ..BenchSettings::default()
    };
    print!("{}", bench_dedup(&settings)?);
    Ok(())
}
