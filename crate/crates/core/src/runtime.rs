//! Master/worker execution of the recursive duplicate elimination.
//!
//! The master splits every round into waves of at most `workers` independent
//! tasks, hands them to a fixed pool, and waits on a [`Barrier`] of per-slot
//! completion flags before starting the next wave. Workers only ever receive
//! owned inputs and send fresh results back; the master is the single writer
//! of the object list between waves.

use std::collections::BTreeSet;
use std::panic::{self, AssertUnwindSafe};
use std::sync::{Arc, Condvar, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use crossbeam_channel::{unbounded, Receiver, Sender};
use thiserror::Error;

use crate::attributes::FeatureVector;
use crate::dedup::{check_labels, pair_ends_inward, remove_inter_class_duplicates, ClassObject, DedupError};

/// Polling interval of the compatibility wait mode.
pub const LEGACY_POLL_INTERVAL: Duration = Duration::from_millis(500);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuntimeError {
    #[error("wave did not finish within {waited:?}; slots still pending: {pending:?}")]
    WaveTimeout { waited: Duration, pending: Vec<usize> },
    #[error("worker failed in round {round}, {phase} wave {wave}, item {item}: {message}")]
    DedupWorkerFailure {
        round: usize,
        phase: Phase,
        wave: usize,
        item: usize,
        message: String,
    },
    #[error("worker count must be at least 1")]
    NoWorkers,
    #[error(transparent)]
    Dedup(#[from] DedupError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaitMode {
    /// Block on a condition variable until the last flag is set.
    Signal,
    /// Sleep and re-check the flags, as the original polling barrier did.
    Poll(Duration),
}

/// Completion flags, one per worker slot.
pub struct Barrier {
    flags: Mutex<Vec<bool>>,
    changed: Condvar,
    mode: WaitMode,
    timeout: Option<Duration>,
}

impl Barrier {
    pub fn new(slots: usize) -> Self {
        Barrier::with_mode(slots, WaitMode::Signal, None)
    }

    pub fn with_mode(slots: usize, mode: WaitMode, timeout: Option<Duration>) -> Self {
        Barrier {
            flags: Mutex::new(vec![false; slots]),
            changed: Condvar::new(),
            mode,
            timeout,
        }
    }

    pub fn slots(&self) -> usize {
        self.flags.lock().expect("barrier lock").len()
    }

    /// Marks one slot complete. Returns false if it was already marked in
    /// this wave.
    pub fn mark(&self, slot: usize) -> bool {
        let mut flags = self.flags.lock().expect("barrier lock");
        let fresh = !flags[slot];
        flags[slot] = true;
        if flags.iter().all(|&f| f) {
            self.changed.notify_all();
        }
        fresh
    }

    /// Pre-marks every slot from `first` on, for waves shorter than the pool.
    pub fn pad_from(&self, first: usize) {
        let mut flags = self.flags.lock().expect("barrier lock");
        for f in flags.iter_mut().skip(first) {
            *f = true;
        }
        if flags.iter().all(|&f| f) {
            self.changed.notify_all();
        }
    }

    pub fn evaluate(&self) -> bool {
        self.flags.lock().expect("barrier lock").iter().all(|&f| f)
    }

    /// Waits until every flag is set, then clears them all for the next wave.
    pub fn await_all(&self) -> Result<(), RuntimeError> {
        let start = Instant::now();
        let expired = |start: Instant| self.timeout.is_some_and(|t| start.elapsed() >= t);
        let mut flags = self.flags.lock().expect("barrier lock");
        while !flags.iter().all(|&f| f) {
            if expired(start) {
                let pending = flags.iter().enumerate().filter(|(_, &f)| !f).map(|(i, _)| i).collect();
                return Err(RuntimeError::WaveTimeout {
                    waited: start.elapsed(),
                    pending,
                });
            }
            match self.mode {
                WaitMode::Signal => {
                    flags = match self.timeout {
                        Some(t) => {
                            let left = t.saturating_sub(start.elapsed());
                            self.changed.wait_timeout(flags, left).expect("barrier lock").0
                        }
                        None => self.changed.wait(flags).expect("barrier lock"),
                    };
                }
                WaitMode::Poll(interval) => {
                    drop(flags);
                    thread::sleep(interval);
                    flags = self.flags.lock().expect("barrier lock");
                }
            }
        }
        flags.iter_mut().for_each(|f| *f = false);
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Merge,
    Sweep,
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Phase::Merge => "merge",
            Phase::Sweep => "sweep",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Task {
    /// Merge objects `left` and `right` of the round input into slot `output`
    /// of the merged list.
    Merge { left: usize, right: usize, output: usize },
    /// Sweep merged object `target` against every other merged object.
    Sweep { target: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wave {
    pub tasks: Vec<Task>,
    /// Slots with no task, marked complete up front.
    pub padded: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundPlan {
    pub objects: usize,
    pub merge_waves: Vec<Wave>,
    /// Round input index copied straight to the end of the merged list.
    pub passthrough: Option<usize>,
    pub sweep_waves: Vec<Wave>,
}

impl RoundPlan {
    pub fn merged_len(&self) -> usize {
        self.objects.div_ceil(2)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WavePlan {
    pub workers: usize,
    pub rounds: Vec<RoundPlan>,
}

impl WavePlan {
    pub fn waves(&self) -> impl Iterator<Item = (usize, Phase, &Wave)> {
        self.rounds.iter().enumerate().flat_map(|(r, round)| {
            round
                .merge_waves
                .iter()
                .map(move |w| (r, Phase::Merge, w))
                .chain(round.sweep_waves.iter().map(move |w| (r, Phase::Sweep, w)))
        })
    }

    pub fn task_count(&self) -> usize {
        self.waves().map(|(_, _, w)| w.tasks.len()).sum()
    }
}

fn chunk_waves(tasks: Vec<Task>, workers: usize) -> Vec<Wave> {
    tasks
        .chunks(workers)
        .map(|c| Wave {
            tasks: c.to_vec(),
            padded: workers - c.len(),
        })
        .collect()
}

/// Schedules every round for `n_objects` starting objects.
pub fn plan_waves(n_objects: usize, n_workers: usize) -> WavePlan {
    let workers = n_workers.max(1);
    let mut rounds = Vec::new();
    let mut n = n_objects;
    while n > 1 {
        let (pairs, passthrough) = pair_ends_inward(n);
        let merges = pairs
            .iter()
            .enumerate()
            .map(|(output, &(left, right))| Task::Merge { left, right, output })
            .collect();
        let merged = n.div_ceil(2);
        // a lone merged object has nothing to sweep against
        let sweeps = if merged > 1 {
            (0..merged).map(|target| Task::Sweep { target }).collect()
        } else {
            Vec::new()
        };
        rounds.push(RoundPlan {
            objects: n,
            merge_waves: chunk_waves(merges, workers),
            passthrough,
            sweep_waves: chunk_waves(sweeps, workers),
        });
        n = merged;
    }
    WavePlan { workers, rounds }
}

/// Tunables for [`parallel_dedup_with`].
#[derive(Debug, Clone)]
pub struct ParallelOptions {
    pub workers: usize,
    pub wait: WaitMode,
    pub wave_timeout: Option<Duration>,
    pub trace: bool,
}

impl ParallelOptions {
    pub fn new(workers: usize) -> Self {
        ParallelOptions {
            workers,
            wait: WaitMode::Signal,
            wave_timeout: None,
            trace: false,
        }
    }
}

/// Twice the number of physical cores.
pub fn default_workers() -> usize {
    2 * num_cpus::get_physical().max(1)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEntry {
    pub round: usize,
    pub phase: Phase,
    pub wave: usize,
    pub item: usize,
    pub duration: Duration,
}

impl std::fmt::Display for TraceEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "round={} phase={} wave={} item={} micros={}",
            self.round,
            self.phase,
            self.wave,
            self.item,
            self.duration.as_micros()
        )
    }
}

#[derive(Debug)]
pub struct ParallelOutcome<R> {
    pub result: ClassObject<R>,
    pub plan: WavePlan,
    pub trace: Vec<TraceEntry>,
}

type DupSets = Arc<Vec<BTreeSet<FeatureVector>>>;

enum Job<R> {
    Merge {
        slot: usize,
        x: ClassObject<R>,
        y: ClassObject<R>,
    },
    Sweep {
        slot: usize,
        target: usize,
        object: ClassObject<R>,
        dups: DupSets,
    },
}

struct Done<R> {
    slot: usize,
    result: Result<ClassObject<R>, String>,
    duration: Duration,
}

fn run_job<R>(job: Job<R>) -> (usize, Result<ClassObject<R>, String>) {
    match job {
        Job::Merge { slot, x, y } => (slot, remove_inter_class_duplicates(x, y).map_err(|e| e.to_string())),
        Job::Sweep {
            slot,
            target,
            mut object,
            dups,
        } => {
            for (j, d) in dups.iter().enumerate() {
                if j != target {
                    object.strip(d);
                }
            }
            (slot, Ok(object))
        }
    }
}

fn worker_loop<R>(jobs: Receiver<Job<R>>, done: Sender<Done<R>>, barrier: &Barrier) {
    while let Ok(job) = jobs.recv() {
        let slot = match &job {
            Job::Merge { slot, .. } | Job::Sweep { slot, .. } => *slot,
        };
        let start = Instant::now();
        let result = match panic::catch_unwind(AssertUnwindSafe(|| run_job(job))) {
            Ok((_, r)) => r,
            Err(p) => Err(p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "worker panicked".to_string())),
        };
        let sent = done.send(Done {
            slot,
            result,
            duration: start.elapsed(),
        });
        barrier.mark(slot);
        if sent.is_err() {
            break;
        }
    }
}

/// Runs the recursive elimination on `n_workers` threads. The result equals
/// [`crate::dedup::recursive_duplicate_elimination`] for every worker count.
pub fn parallel_dedup<R: Send>(objects: Vec<ClassObject<R>>, n_workers: usize) -> Result<ClassObject<R>, RuntimeError> {
    parallel_dedup_with(objects, &ParallelOptions::new(n_workers)).map(|o| o.result)
}

pub fn parallel_dedup_with<R: Send>(
    objects: Vec<ClassObject<R>>,
    opts: &ParallelOptions,
) -> Result<ParallelOutcome<R>, RuntimeError> {
    if opts.workers == 0 {
        return Err(RuntimeError::NoWorkers);
    }
    check_labels(&objects)?;
    let plan = plan_waves(objects.len(), opts.workers);
    if plan.rounds.is_empty() {
        let mut objects = objects;
        return Ok(ParallelOutcome {
            result: objects.pop().expect("checked non-empty"),
            plan,
            trace: Vec::new(),
        });
    }
    let barrier = Barrier::with_mode(opts.workers, opts.wait, opts.wave_timeout);
    let (job_tx, job_rx) = unbounded::<Job<R>>();
    let (done_tx, done_rx) = unbounded::<Done<R>>();

    thread::scope(|scope| {
        for _ in 0..opts.workers {
            let jobs = job_rx.clone();
            let done = done_tx.clone();
            let barrier = &barrier;
            scope.spawn(move || worker_loop(jobs, done, barrier));
        }
        drop(done_tx);
        let outcome = run_master(objects, &plan, opts, &barrier, &job_tx, &done_rx);
        drop(job_tx);
        outcome.map(|(result, trace)| ParallelOutcome {
            result,
            plan: plan.clone(),
            trace,
        })
    })
}

fn run_master<R: Send>(
    objects: Vec<ClassObject<R>>,
    plan: &WavePlan,
    opts: &ParallelOptions,
    barrier: &Barrier,
    jobs: &Sender<Job<R>>,
    done: &Receiver<Done<R>>,
) -> Result<(ClassObject<R>, Vec<TraceEntry>), RuntimeError> {
    let mut trace = Vec::new();
    let mut current: Vec<Option<ClassObject<R>>> = objects.into_iter().map(Some).collect();

    for (round_no, round) in plan.rounds.iter().enumerate() {
        let mut merged: Vec<Option<ClassObject<R>>> = (0..round.merged_len()).map(|_| None).collect();
        for (wave_no, wave) in round.merge_waves.iter().enumerate() {
            let mut outputs = Vec::with_capacity(wave.tasks.len());
            for (slot, task) in wave.tasks.iter().enumerate() {
                let Task::Merge { left, right, output } = *task else {
                    unreachable!("merge wave holds merge tasks")
                };
                let x = current[left].take().expect("planned object present");
                let y = current[right].take().expect("planned object present");
                outputs.push(output);
                jobs.send(Job::Merge { slot, x, y }).expect("workers alive");
            }
            let results = finish_wave(barrier, done, wave, round_no, Phase::Merge, wave_no, opts, &mut trace)?;
            for (slot, obj) in results.into_iter().enumerate() {
                merged[outputs[slot]] = Some(obj);
            }
        }
        if let Some(p) = round.passthrough {
            let last = merged.len() - 1;
            merged[last] = current[p].take();
        }

        if !round.sweep_waves.is_empty() {
            let dups: Vec<BTreeSet<FeatureVector>> = merged
                .iter_mut()
                .map(|o| o.as_mut().expect("merged object present").take_duplicates())
                .collect();
            let dups: DupSets = Arc::new(dups);
            let mut swept: Vec<Option<ClassObject<R>>> = (0..merged.len()).map(|_| None).collect();
            for (wave_no, wave) in round.sweep_waves.iter().enumerate() {
                let mut targets = Vec::with_capacity(wave.tasks.len());
                for (slot, task) in wave.tasks.iter().enumerate() {
                    let Task::Sweep { target } = *task else {
                        unreachable!("sweep wave holds sweep tasks")
                    };
                    let object = merged[target].take().expect("planned object present");
                    targets.push(target);
                    jobs.send(Job::Sweep {
                        slot,
                        target,
                        object,
                        dups: Arc::clone(&dups),
                    })
                    .expect("workers alive");
                }
                let results = finish_wave(barrier, done, wave, round_no, Phase::Sweep, wave_no, opts, &mut trace)?;
                for (slot, obj) in results.into_iter().enumerate() {
                    swept[targets[slot]] = Some(obj);
                }
            }
            let dups = Arc::try_unwrap(dups).unwrap_or_else(|shared| (*shared).clone());
            for (obj, d) in swept.iter_mut().zip(dups) {
                obj.as_mut().expect("swept object present").set_duplicates(d);
            }
            merged = swept;
        }
        current = merged;
    }
    let result = current.pop().flatten().expect("final round leaves one object");
    Ok((result, trace))
}

#[allow(clippy::too_many_arguments)]
fn finish_wave<R>(
    barrier: &Barrier,
    done: &Receiver<Done<R>>,
    wave: &Wave,
    round: usize,
    phase: Phase,
    wave_no: usize,
    opts: &ParallelOptions,
    trace: &mut Vec<TraceEntry>,
) -> Result<Vec<ClassObject<R>>, RuntimeError> {
    barrier.pad_from(wave.tasks.len());
    barrier.await_all()?;
    let mut results: Vec<Option<ClassObject<R>>> = (0..wave.tasks.len()).map(|_| None).collect();
    let mut failure = None;
    for _ in 0..wave.tasks.len() {
        // every result is sent before its flag is set, so none can be missing
        let d = done.recv().expect("result sent before flag");
        if opts.trace {
            let entry = TraceEntry {
                round,
                phase,
                wave: wave_no,
                item: d.slot,
                duration: d.duration,
            };
            log::debug!("{}", entry);
            trace.push(entry);
        }
        match d.result {
            Ok(obj) => results[d.slot] = Some(obj),
            Err(message) => {
                failure.get_or_insert(RuntimeError::DedupWorkerFailure {
                    round,
                    phase,
                    wave: wave_no,
                    item: d.slot,
                    message,
                });
            }
        }
    }
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(results.into_iter().map(|r| r.expect("all slots reported")).collect())
}
