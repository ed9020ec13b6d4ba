//! Experiment drivers shared by the CLI and the acceptance suite.

use std::fmt::Write as _;
use std::time::Instant;

use rand::Rng;
use serde::Serialize;

use crate::colony::{select_next_city, transition_probabilities, AcoParams, AntState, PheromoneMatrix};
use crate::error::{Error, ParamError, Result};
use crate::hybrid::{solve, HybridParams};
use crate::instance::oracle::HELD_KARP_LIMIT;
use crate::instance::{brute_force_optimum, canonical_form, random_instance, Instance, InstanceError};
use crate::parallel::{stream_for, Purpose, StreamKey};

// ---------------------------------------------------------------------------
// Oracle sweep
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleRow {
    pub seed: u64,
    pub optimum: f64,
    pub found: f64,
    /// Relative gap `(found - optimum) / optimum`.
    pub gap: f64,
    pub optimal: bool,
    /// Whether the run's best-so-far trace was non-increasing.
    pub monotone: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub n: usize,
    pub rows: Vec<OracleRow>,
}

pub const ORACLE_CSV_HEADER: &str = "seed,optimum,found,gap,optimal";

impl OracleReport {
    pub fn optimal_count(&self) -> usize {
        self.rows.iter().filter(|r| r.optimal).count()
    }

    pub fn optimal_fraction(&self) -> f64 {
        self.optimal_count() as f64 / self.rows.len().max(1) as f64
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("{ORACLE_CSV_HEADER}\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},{},{},{},{}", r.seed, r.optimum, r.found, r.gap, r.optimal);
        }
        s
    }
}

/// Compares a solver result with the exact optimum. Both lengths are summed
/// over the canonical form, so the same tour always yields a gap of exactly 0.
pub fn compare_with_optimum(inst: &Instance, found: &[usize]) -> Result<(f64, f64)> {
    let opt = brute_force_optimum(inst)?;
    let opt_len = inst.tour_length(&canonical_form(opt.order()))?;
    let found_len = inst.tour_length(&canonical_form(found))?;
    Ok((opt_len, found_len))
}

/// Solves `random_instance(n, seed)` for every seed (with the solver seeded
/// by the same value) and checks each result against the exact optimum.
pub fn oracle_sweep(n: usize, seeds: &[u64], params: &HybridParams) -> Result<OracleReport> {
    if n > HELD_KARP_LIMIT {
        return Err(InstanceError::TooLarge {
            n,
            limit: HELD_KARP_LIMIT,
        }
        .into());
    }
    let mut rows = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let inst = random_instance(n, seed)?;
        let params = HybridParams {
            seed,
            ..params.clone()
        };
        let (best, trace) = solve(&inst, &params)?;
        let (optimum, found) = compare_with_optimum(&inst, best.order())?;
        rows.push(OracleRow {
            seed,
            optimum,
            found,
            gap: (found - optimum) / optimum,
            optimal: found <= optimum,
            monotone: trace.is_monotone(),
        });
    }
    Ok(OracleReport { n, rows })
}

// ---------------------------------------------------------------------------
// Double bridge
// ---------------------------------------------------------------------------

const JUNCTION: usize = 0;
const SHORT_MID: usize = 1;
const LONG_MID: usize = 2;
const DESTINATION: usize = 3;

/// Two routes from a junction to a destination, one twice as long as the
/// other. Both branches start with an edge of the same length, so ants
/// arriving at the junction see identical visibility and initially split
/// evenly; only the trail can tell the branches apart.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BridgeConfig {
    pub aco: AcoParams,
    pub iterations: usize,
    pub seed: u64,
    pub short_length: f64,
    pub long_length: f64,
}

impl Default for BridgeConfig {
    fn default() -> Self {
        Self {
            aco: AcoParams {
                tau0: Some(1.0),
                ..AcoParams::default()
            },
            iterations: 50,
            seed: 1,
            short_length: 1.0,
            long_length: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BridgeRecord {
    pub iteration: usize,
    pub tau_short: f64,
    pub tau_long: f64,
    /// Ants that took the short branch this iteration.
    pub short_ants: usize,
    pub ants: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BridgeReport {
    pub config: BridgeConfig,
    /// Iteration 0 is the initial state.
    pub records: Vec<BridgeRecord>,
}

pub const BRIDGE_CSV_HEADER: &str = "iteration,tau_short,tau_long,short_ants,ants";

impl BridgeReport {
    pub fn final_record(&self) -> &BridgeRecord {
        self.records.last().expect("initial record always present")
    }

    pub fn short_dominates(&self) -> bool {
        let r = self.final_record();
        r.tau_short > r.tau_long
    }

    /// Share of ants choosing the short branch over the last `window` iterations.
    pub fn short_fraction(&self, window: usize) -> f64 {
        let tail: Vec<&BridgeRecord> = self.records[1..].iter().rev().take(window).collect();
        let short: usize = tail.iter().map(|r| r.short_ants).sum();
        let total: usize = tail.iter().map(|r| r.ants).sum();
        short as f64 / total.max(1) as f64
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("{BRIDGE_CSV_HEADER}\n");
        for r in &self.records {
            let _ = writeln!(s, "{},{},{},{},{}", r.iteration, r.tau_short, r.tau_long, r.short_ants, r.ants);
        }
        s
    }
}

fn bridge_instance(short: f64, long: f64) -> Result<Instance> {
    let hop = short / 2.0;
    let mut d = vec![vec![0.0; 4]; 4];
    let mut set = |a: usize, b: usize, v: f64| {
        d[a][b] = v;
        d[b][a] = v;
    };
    set(JUNCTION, SHORT_MID, hop);
    set(SHORT_MID, DESTINATION, short - hop);
    set(JUNCTION, LONG_MID, hop);
    set(LONG_MID, DESTINATION, long - hop);
    // unused pairs; any positive value
    set(JUNCTION, DESTINATION, long);
    set(SHORT_MID, LONG_MID, long);
    Ok(Instance::from_matrix(d)?.with_name("double-bridge"))
}

/// Runs the double-bridge colony: each iteration every ant picks a branch
/// at the junction by the transition rule, trails evaporate, and each ant
/// deposits `q / L` on both edges of the branch it took.
pub fn run_bridge(config: &BridgeConfig) -> Result<BridgeReport> {
    config.aco.validate()?;
    if !(config.short_length > 0.0 && config.long_length > config.short_length) {
        return Err(ParamError::new("long-length", "branches must satisfy 0 < short < long").into());
    }
    let inst = bridge_instance(config.short_length, config.long_length)?;
    let tau0 = config.aco.tau0.unwrap_or(1.0);
    let mut tau = PheromoneMatrix::uniform(4, tau0);
    let mut records = vec![BridgeRecord {
        iteration: 0,
        tau_short: tau.get(JUNCTION, SHORT_MID),
        tau_long: tau.get(JUNCTION, LONG_MID),
        short_ants: 0,
        ants: 0,
    }];
    for iteration in 1..=config.iterations {
        // the destination is tabu, leaving exactly the two branches
        let at_junction = AntState::from_path(4, &[DESTINATION, JUNCTION]);
        let probs = transition_probabilities(&tau, &inst, &at_junction, &config.aco)?;
        let choices: Vec<usize> = (0..config.aco.ants)
            .map(|ant| {
                let draw = stream_for(StreamKey::new(config.seed, iteration, ant, Purpose::Transition))
                    .gen::<f64>();
                select_next_city(&probs, draw)
            })
            .collect();
        tau.evaporate(config.aco.delta)?;
        for &mid in &choices {
            let length = inst.dist(JUNCTION, mid) + inst.dist(mid, DESTINATION);
            tau.deposit_edges([(JUNCTION, mid), (mid, DESTINATION)], config.aco.q / length);
        }
        records.push(BridgeRecord {
            iteration,
            tau_short: tau.get(JUNCTION, SHORT_MID),
            tau_long: tau.get(JUNCTION, LONG_MID),
            short_ants: choices.iter().filter(|&&c| c == SHORT_MID).count(),
            ants: choices.len(),
        });
    }
    Ok(BridgeReport {
        config: config.clone(),
        records,
    })
}

// ---------------------------------------------------------------------------
// Speedup benchmark
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub threads: usize,
    pub construction_secs: f64,
    pub total_secs: f64,
    /// Construction-phase speedup relative to the single-worker row (or the
    /// first row when 1 is not in the list).
    pub speedup: f64,
    pub best_length: f64,
}

pub const BENCH_CSV_HEADER: &str = "threads,construction_secs,total_secs,speedup,best_length";

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut s = format!("{BENCH_CSV_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            r.threads, r.construction_secs, r.total_secs, r.speedup, r.best_length
        );
    }
    s
}

/// Runs the same seeded solve once per worker count. Fails if any run's best
/// tour or trace values differ from the first.
pub fn bench(inst: &Instance, params: &HybridParams, thread_list: &[usize]) -> Result<Vec<BenchRow>> {
    if thread_list.is_empty() {
        return Err(ParamError::new("threads", "thread list is empty").into());
    }
    let mut rows = Vec::with_capacity(thread_list.len());
    let mut reference = None;
    for &threads in thread_list {
        let params = HybridParams {
            threads,
            ..params.clone()
        };
        let start = Instant::now();
        let (best, trace) = solve(inst, &params)?;
        let total_secs = start.elapsed().as_secs_f64();
        match &reference {
            None => reference = Some((threads, trace.clone())),
            Some((t0, first)) => {
                if !first.same_values(&trace) {
                    return Err(Error::Nondeterministic(format!(
                        "run with {threads} workers differs from run with {t0}"
                    )));
                }
            }
        }
        rows.push(BenchRow {
            threads,
            construction_secs: trace.total_secs().0,
            total_secs,
            speedup: 1.0,
            best_length: best.length(),
        });
    }
    let base = rows
        .iter()
        .find(|r| r.threads == 1)
        .unwrap_or(&rows[0])
        .construction_secs;
    for r in &mut rows {
        r.speedup = if r.construction_secs > 0.0 {
            base / r.construction_secs
        } else {
            1.0
        };
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_sweep_is_always_optimal() {
        let params = HybridParams { max_iterations: 3, ..HybridParams::default() };
        let report = oracle_sweep(3, &[1, 2, 3, 4], &params).unwrap();
        assert_eq!(report.optimal_count(), 4);
        assert!(report.rows.iter().all(|r| r.gap == 0.0));
    }

    #[test]
    fn sweep_refuses_large_instances() {
        let err = oracle_sweep(17, &[1], &HybridParams::default()).unwrap_err();
        assert!(matches!(err, Error::Instance(InstanceError::TooLarge { n: 17, .. })));
    }

    #[test]
    fn bridge_starts_even_and_favours_the_short_branch() {
        let report = run_bridge(&BridgeConfig::default()).unwrap();
        let first = &report.records[0];
        assert_eq!(first.tau_short, first.tau_long);
        assert_eq!(report.records.len(), 51);
        assert!(report.short_dominates());
        assert_eq!(run_bridge(&BridgeConfig::default()).unwrap().to_csv(), report.to_csv());
    }

    #[test]
    fn bridge_graph_shape() {
        let inst = bridge_instance(1.0, 2.0).unwrap();
        assert_eq!(inst.dist(JUNCTION, SHORT_MID), inst.dist(JUNCTION, LONG_MID));
        assert_eq!(inst.dist(JUNCTION, SHORT_MID) + inst.dist(SHORT_MID, DESTINATION), 1.0);
        assert_eq!(inst.dist(JUNCTION, LONG_MID) + inst.dist(LONG_MID, DESTINATION), 2.0);
        let bad = BridgeConfig { long_length: 0.5, ..BridgeConfig::default() };
        assert!(run_bridge(&bad).is_err());
    }

    #[test]
    fn single_thread_bench_has_unit_speedup() {
        let inst = random_instance(12, 1).unwrap();
        let params = HybridParams { max_iterations: 3, ..HybridParams::default() };
        let rows = bench(&inst, &params, &[1]).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].speedup, 1.0);
        assert!(bench(&inst, &params, &[]).is_err());
        let rows = bench(&inst, &params, &[1, 2, 3]).unwrap();
        assert!(rows.iter().all(|r| r.best_length == rows[0].best_length));
        assert!(bench_csv(&rows).starts_with(BENCH_CSV_HEADER));
    }
}
