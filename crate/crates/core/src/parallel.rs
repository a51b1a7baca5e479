//! Deterministic data-parallel map and the timing harness.
//!
//! Work is split into contiguous index ranges ("chunks") that are assigned
//! round-robin to a fixed number of scoped threads. Every output slot is
//! written by exactly one kernel call, so the result never depends on the
//! thread count or the chunk size.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::str::FromStr;
use std::time::Instant;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Threads {
    #[default]
    Auto,
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Chunk {
    #[default]
    Auto,
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ParallelConfig {
    pub threads: Threads,
    pub chunk: Chunk,
}

impl ParallelConfig {
    pub fn serial() -> Self {
        Self::with_threads(1)
    }

    /// Panics if `threads` is zero.
    pub fn with_threads(threads: usize) -> Self {
        assert!(threads >= 1, "thread count must be at least 1");
        Self {
            threads: Threads::Fixed(threads),
            chunk: Chunk::Auto,
        }
    }

    pub fn chunk(mut self, chunk: usize) -> Self {
        assert!(chunk >= 1, "chunk size must be at least 1");
        self.chunk = Chunk::Fixed(chunk);
        self
    }

    pub fn resolved_threads(&self) -> usize {
        match self.threads {
            Threads::Fixed(n) => n.max(1),
            Threads::Auto => max_threads(),
        }
    }

    fn resolved_chunk(&self, n: usize, threads: usize) -> usize {
        match self.chunk {
            Chunk::Fixed(c) => c.max(1),
            Chunk::Auto => n.div_ceil(threads).max(1),
        }
    }
}

impl FromStr for Threads {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Threads::Auto);
        }
        match s.parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Threads::Fixed(n)),
            _ => Err(Error::Config(format!(
                "thread count must be a positive integer or \"auto\", got {s:?}"
            ))),
        }
    }
}

pub fn max_threads() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

/// `output[i] = kernel(i)` for `i` in `0..n`.
///
/// A panicking kernel propagates the panic to the caller; use
/// [`try_parallel_map`] to turn failures into errors.
pub fn parallel_map<T, F>(n: usize, config: &ParallelConfig, kernel: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let chunks = run_chunks(n, config, |start, end| {
        (start..end).map(&kernel).collect::<Vec<T>>()
    });
    let mut out = Vec::with_capacity(n);
    for chunk in chunks {
        match chunk {
            Ok(values) => out.extend(values),
            Err(payload) => std::panic::resume_unwind(payload),
        }
    }
    out
}

/// Fallible variant of [`parallel_map`]. On failure the error reported is the
/// one with the lowest index; a panicking kernel becomes
/// [`Error::KernelPanic`] carrying the start of the chunk it ran in.
pub fn try_parallel_map<T, E, F>(
    n: usize,
    config: &ParallelConfig,
    kernel: F,
) -> std::result::Result<Vec<T>, E>
where
    T: Send,
    E: Send + From<Error>,
    F: Fn(usize) -> std::result::Result<T, E> + Sync,
{
    let chunks = run_chunks(n, config, |start, end| {
        (start..end)
            .map(&kernel)
            .collect::<std::result::Result<Vec<T>, E>>()
    });
    let starts = (0..n).step_by(config.resolved_chunk(n, config.resolved_threads()));

    let mut out = Vec::with_capacity(n);
    for (start, chunk) in starts.zip(chunks) {
        match chunk {
            Ok(Ok(values)) => out.extend(values),
            Ok(Err(e)) => return Err(e),
            Err(_) => return Err(Error::KernelPanic { index: start }.into()),
        }
    }
    Ok(out)
}

type ChunkResult<R> = std::thread::Result<R>;

/// Runs `work(start, end)` over contiguous chunks and returns the per-chunk
/// results in chunk order.
fn run_chunks<R, W>(n: usize, config: &ParallelConfig, work: W) -> Vec<ChunkResult<R>>
where
    R: Send,
    W: Fn(usize, usize) -> R + Sync,
{
    if n == 0 {
        return Vec::new();
    }
    let threads = config.resolved_threads();
    let chunk = config.resolved_chunk(n, threads);
    let n_chunks = n.div_ceil(chunk);
    let bounds = |c: usize| (c * chunk, ((c + 1) * chunk).min(n));
    let run = |c: usize| {
        let (start, end) = bounds(c);
        catch_unwind(AssertUnwindSafe(|| work(start, end)))
    };

    let workers = threads.min(n_chunks);
    if workers <= 1 {
        return (0..n_chunks).map(run).collect();
    }

    let mut slots: Vec<Option<ChunkResult<R>>> = (0..n_chunks).map(|_| None).collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let run = &run;
                scope.spawn(move || {
                    (w..n_chunks)
                        .step_by(workers)
                        .map(|c| (c, run(c)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for handle in handles {
            let done = handle
                .join()
                .expect("chunk panics are caught inside the worker");
            for (c, result) in done {
                slots[c] = Some(result);
            }
        }
    });
    slots
        .into_iter()
        .map(|s| s.expect("every chunk is assigned to a worker"))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub label: String,
    pub runs: usize,
    pub mean_seconds: f64,
    pub min_seconds: f64,
    pub max_seconds: f64,
}

impl BenchReport {
    pub const CSV_HEADER: [&'static str; 5] = ["label", "runs", "mean_s", "min_s", "max_s"];

    pub fn csv_record(&self) -> [String; 5] {
        [
            self.label.clone(),
            self.runs.to_string(),
            self.mean_seconds.to_string(),
            self.min_seconds.to_string(),
            self.max_seconds.to_string(),
        ]
    }
}

/// One untimed warm-up call, then `runs` timed calls of `thunk`.
pub fn bench<E, F>(label: &str, runs: usize, mut thunk: F) -> std::result::Result<BenchReport, E>
where
    E: From<Error>,
    F: FnMut() -> std::result::Result<(), E>,
{
    if runs == 0 {
        return Err(Error::Config("bench needs at least one run".into()).into());
    }
    thunk()?;
    let mut times = Vec::with_capacity(runs);
    for _ in 0..runs {
        let t0 = Instant::now();
        thunk()?;
        // Clamp so a sub-resolution run still reports a positive time.
        times.push(t0.elapsed().as_secs_f64().max(1e-9));
    }
    let min = times.iter().copied().fold(f64::INFINITY, f64::min);
    let max = times.iter().copied().fold(0.0, f64::max);
    let mean = (times.iter().sum::<f64>() / runs as f64).clamp(min, max);
    Ok(BenchReport {
        label: label.to_string(),
        runs,
        mean_seconds: mean,
        min_seconds: min,
        max_seconds: max,
    })
}
