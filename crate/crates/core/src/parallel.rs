//! Data-parallel ant construction with keyed random streams.
//!
//! Every random draw in a run comes from a stream identified by
//! `(seed, iteration, ant, purpose)`. Streams are ChaCha8 instances keyed by
//! the master seed and addressed by a 64-bit stream id built from the other
//! three fields, so no two keys share a stream and no stream depends on which
//! worker consumed the ones before it. Ant `k`'s tour is a pure function of
//! its key and the read-only inputs, and results are written to slot `k`;
//! the worker count cannot change the output.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::colony::{AcoParams, ChoiceTable, PheromoneMatrix};
use crate::error::{Error, Result};
use crate::instance::{Instance, Tour};

/// Environment variable consulted for the worker count.
pub const THREADS_ENV: &str = "ANTGENE_THREADS";

const ANT_BITS: u32 = 24;
const PURPOSE_BITS: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Purpose {
    StartCity = 0,
    Transition = 1,
    Ga = 2,
    TopUp = 3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub seed: u64,
    pub iteration: u64,
    pub ant: u64,
    pub purpose: Purpose,
}

impl StreamKey {
    pub fn new(seed: u64, iteration: usize, ant: usize, purpose: Purpose) -> Self {
        Self {
            seed,
            iteration: iteration as u64,
            ant: ant as u64,
            purpose,
        }
    }

    fn stream_id(&self) -> u64 {
        assert!(self.iteration < 1 << (64 - ANT_BITS - PURPOSE_BITS), "iteration index too large");
        assert!(self.ant < 1 << ANT_BITS, "ant index too large");
        (self.iteration << (ANT_BITS + PURPOSE_BITS)) | (self.ant << PURPOSE_BITS) | self.purpose as u64
    }
}

pub type Stream = ChaCha8Rng;

/// The random stream for `key`. Pure: the same key always gives the same stream.
pub fn stream_for(key: StreamKey) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(key.seed);
    rng.set_stream(key.stream_id());
    rng
}

/// Requested worker count; 0 lets the system choose.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EngineConfig {
    pub threads: usize,
}

impl EngineConfig {
    pub fn new(threads: usize) -> Self {
        Self { threads }
    }

    /// Reads [`THREADS_ENV`], falling back to `default` when unset or unparsable.
    pub fn from_env(default: usize) -> Self {
        Self::new(parse_threads(std::env::var(THREADS_ENV).ok().as_deref()).unwrap_or(default))
    }

    pub fn resolved_threads(&self) -> usize {
        if self.threads > 0 {
            self.threads
        } else {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        }
    }
}

pub fn parse_threads(value: Option<&str>) -> Option<usize> {
    value?.trim().parse().ok()
}

/// A worker pool sized by an [`EngineConfig`].
pub struct Engine {
    pool: rayon::ThreadPool,
    threads: usize,
}

impl std::fmt::Debug for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Engine").field("threads", &self.threads).finish()
    }
}

impl Engine {
    pub fn new(config: EngineConfig) -> Result<Self> {
        let threads = config.resolved_threads();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .thread_name(|i| format!("antgene-worker-{i}"))
            .build()
            .map_err(|e| Error::Pool(e.to_string()))?;
        Ok(Self { pool, threads })
    }

    pub fn threads(&self) -> usize {
        self.threads
    }

    /// Builds one tour per ant against a fixed trail snapshot and applies
    /// `post` (local search) to each inside the parallel region. Returns once
    /// every worker has finished, with tours indexed by ant.
    pub fn construct<F>(
        &self,
        tau: &PheromoneMatrix,
        inst: &Instance,
        p: &AcoParams,
        seed: u64,
        iteration: usize,
        post: F,
    ) -> Result<Vec<Tour>>
    where
        F: Fn(Tour) -> Tour + Sync,
    {
        let table = ChoiceTable::new(tau, inst, p)?;
        let n = inst.n();
        let block = p.ants.div_ceil(self.threads).max(1);
        self.pool.install(|| {
            (0..p.ants)
                .into_par_iter()
                .with_min_len(block)
                .map(|ant| {
                    let start = stream_for(StreamKey::new(seed, iteration, ant, Purpose::StartCity))
                        .gen_range(0..n);
                    let mut draws = stream_for(StreamKey::new(seed, iteration, ant, Purpose::Transition));
                    table
                        .construct(start, &mut draws)
                        .map(&post)
                        .map_err(|e| Error::from(e).at_ant(ant))
                })
                .collect()
        })
    }
}

/// One-shot parallel construction without local search.
pub fn parallel_construct(
    tau: &PheromoneMatrix,
    inst: &Instance,
    p: &AcoParams,
    seed: u64,
    iteration: usize,
    config: EngineConfig,
) -> Result<Vec<Tour>> {
    Engine::new(config)?.construct(tau, inst, p, seed, iteration, |t| t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseTiming {
    pub label: &'static str,
    pub elapsed: Duration,
}

/// Runs `work` and measures it on the monotonic clock.
pub fn phase_timer<T>(label: &'static str, work: impl FnOnce() -> T) -> (T, PhaseTiming) {
    let start = Instant::now();
    let value = work();
    (
        value,
        PhaseTiming {
            label,
            elapsed: start.elapsed(),
        },
    )
}
