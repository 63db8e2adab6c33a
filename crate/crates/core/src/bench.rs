//! Wall-clock timing of stage-3 dedup over synthetic class objects.

use std::fmt;
use std::time::{Duration, Instant};

use crate::error::Result;
use crate::runtime::parallel_dedup;
use crate::synth::bench_objects;

/// Reference timings of a sequential and a four-thread run, shown next to
/// the measured cells for comparison.
pub const REFERENCE_SEQUENTIAL_MINUTES: f64 = 421.0;
pub const REFERENCE_THREADED_MINUTES: f64 = 259.0;
pub const REFERENCE_INPUT_ROWS: usize = 307_000;
pub const REFERENCE_OUTPUT_ROWS: usize = 17_861;
/// Speedup the informative 4-worker check aims for.
pub const TARGET_SPEEDUP: f64 = 1.3;

pub fn reference_reduction() -> f64 {
    1.0 - REFERENCE_THREADED_MINUTES / REFERENCE_SEQUENTIAL_MINUTES
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchSettings {
    pub sizes: Vec<usize>,
    pub worker_counts: Vec<usize>,
    pub runs: usize,
    pub classes: usize,
    pub schema_len: usize,
    pub dup_rate: f64,
    pub seed: u64,
}

impl Default for BenchSettings {
    fn default() -> Self {
        BenchSettings {
            sizes: vec![10_000, 100_000],
            worker_counts: vec![1, 2, 4],
            runs: 3,
            classes: 8,
            schema_len: 32,
            dup_rate: 0.1,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchCell {
    pub rows: usize,
    pub workers: usize,
    pub median: Duration,
    pub runs: Vec<Duration>,
    pub output_rows: usize,
    /// Median at one worker divided by this median; `None` without a
    /// one-worker cell of the same size.
    pub speedup: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub settings: BenchSettings,
    pub cells: Vec<BenchCell>,
    pub host_cores: usize,
}

impl BenchReport {
    pub fn cell(&self, rows: usize, workers: usize) -> Option<&BenchCell> {
        self.cells.iter().find(|c| c.rows == rows && c.workers == workers)
    }
}

fn median(runs: &[Duration]) -> Duration {
    let mut sorted = runs.to_vec();
    sorted.sort();
    sorted[sorted.len() / 2]
}

/// Times `parallel_dedup` for every (size, workers) cell. Every run of a
/// size dedups an identical freshly generated input.
pub fn bench_dedup(settings: &BenchSettings) -> Result<BenchReport> {
    let runs = settings.runs.max(3);
    let mut cells = Vec::new();
    for &rows in &settings.sizes {
        let mut baseline = None;
        for &workers in &settings.worker_counts {
            let mut times = Vec::with_capacity(runs);
            let mut output_rows = 0;
            for _ in 0..runs {
                let objects = bench_objects(
                    rows,
                    settings.classes,
                    settings.schema_len,
                    settings.dup_rate,
                    settings.seed,
                );
                let start = Instant::now();
                let result = parallel_dedup(objects, workers)?;
                times.push(start.elapsed());
                output_rows = result.row_count();
            }
            let m = median(&times);
            if workers == 1 {
                baseline = Some(m);
            }
            log::info!("rows={} workers={} median={:?}", rows, workers, m);
            cells.push(BenchCell {
                rows,
                workers,
                median: m,
                runs: times,
                output_rows,
                speedup: None,
            });
        }
        if let Some(b) = baseline {
            for c in cells.iter_mut().filter(|c| c.rows == rows) {
                c.speedup = Some(b.as_secs_f64() / c.median.as_secs_f64().max(1e-9));
            }
        }
    }
    Ok(BenchReport {
        settings: settings.clone(),
        cells,
        host_cores: num_cpus::get(),
    })
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "# dedup bench: classes={} schema_len={} dup_rate={} runs={} host_cores={}",
            self.settings.classes,
            self.settings.schema_len,
            self.settings.dup_rate,
            self.settings.runs.max(3),
            self.host_cores
        )?;
        writeln!(
            f,
            "{:>10} {:>8} {:>12} {:>10} {:>8}",
            "rows", "workers", "median_ms", "out_rows", "speedup"
        )?;
        for c in &self.cells {
            let speedup = c.speedup.map_or_else(|| "-".to_string(), |s| format!("{:.2}", s));
            writeln!(
                f,
                "{:>10} {:>8} {:>12.3} {:>10} {:>8}",
                c.rows,
                c.workers,
                c.median.as_secs_f64() * 1e3,
                c.output_rows,
                speedup
            )?;
        }
        writeln!(
            f,
            "reference: {} -> {} rows, {} min sequential vs {} min threaded, {:.2}% less time",
            REFERENCE_INPUT_ROWS,
            REFERENCE_OUTPUT_ROWS,
            REFERENCE_SEQUENTIAL_MINUTES,
            REFERENCE_THREADED_MINUTES,
            reference_reduction() * 100.0
        )
    }
}
