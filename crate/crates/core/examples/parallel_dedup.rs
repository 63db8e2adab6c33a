//! Runs stage-3 dedup on the worker pool and prints the wave plan and the
//! per-item trace.
//!
//!     cargo run --release --example parallel_dedup -- 4

use streamprep::dedup::recursive_duplicate_elimination;
use streamprep::runtime::{parallel_dedup_with, ParallelOptions};
use streamprep::synth::bench_objects;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let workers: usize = std::env::args().nth(1).map(|w| w.parse()).transpose()?.unwrap_or(4);
    let objects = bench_objects(20_000, 7, 16, 0.1, 42);

    let opts = ParallelOptions {
        trace: true,
        ..ParallelOptions::new(workers)
    };
    let outcome = parallel_dedup_with(objects.clone(), &opts)?;
    for (round, r) in outcome.plan.rounds.iter().enumerate() {
        println!(
            "round {}: {} objects, {} merge waves, {} sweep waves, passthrough {:?}",
            round,
            r.objects,
            r.merge_waves.len(),
            r.sweep_waves.len(),
            r.passthrough
        );
    }
    for entry in &outcome.trace {
        println!("  {}", entry);
    }

    let sequential = recursive_duplicate_elimination(objects)?;
    assert_eq!(outcome.result, sequential);
    println!(
        "{} rows kept, {} cross-class vectors; same as the sequential run",
        outcome.result.row_count(),
        outcome.result.duplicates().len()
    );
    Ok(())
}
