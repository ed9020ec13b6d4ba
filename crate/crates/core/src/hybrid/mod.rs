//! The ACO-GA loop.
//!
//! Each iteration: ants construct tours in parallel against a frozen trail
//! snapshot (2-opt applied per ant inside the same region), then on a single
//! worker the global best is updated, trails evaporate and receive the
//! ant-cycle deposit, the iteration's tours seed one GA generation, and the
//! GA's best tour deposits one more quantum so the GA result shapes the next
//! round of construction.

mod trace;
mod two_opt;

use serde::{Deserialize, Serialize};

use crate::colony::{init_pheromone, AcoParams, PheromoneMatrix};
use crate::error::{ParamError, Result};
use crate::genetic::{evolve, GaParams, Population};
use crate::instance::{Instance, Tour};
use crate::parallel::{phase_timer, stream_for, Engine, EngineConfig, Purpose, StreamKey};

pub use trace::{IterationRecord, RunTrace, TRACE_CSV_HEADER};
pub use two_opt::{is_two_opt_optimal, two_opt};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridParams {
    pub aco: AcoParams,
    pub ga: GaParams,
    /// With the GA stage off the loop is a plain Ant System.
    pub ga_enabled: bool,
    pub max_iterations: usize,
    /// Stop after this many consecutive iterations without a new best.
    pub stagnation_limit: usize,
    pub local_search: bool,
    pub seed: u64,
    /// Worker count; 0 uses the available hardware parallelism.
    pub threads: usize,
}

impl Default for HybridParams {
    fn default() -> Self {
        let aco = AcoParams::default();
        let ga = GaParams {
            pop_size: aco.ants,
            ..GaParams::default()
        };
        Self {
            aco,
            ga,
            ga_enabled: true,
            max_iterations: 500,
            stagnation_limit: 100,
            local_search: true,
            seed: 1,
            threads: 0,
        }
    }
}

impl HybridParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        self.aco.validate()?;
        if self.ga_enabled {
            self.ga.validate()?;
        }
        if self.max_iterations == 0 {
            return Err(ParamError::new("iterations", "need at least one iteration"));
        }
        if self.stagnation_limit == 0 {
            return Err(ParamError::new("stagnation", "limit must be at least 1"));
        }
        Ok(())
    }
}

/// Mutable state of one run, advanced an iteration at a time.
#[derive(Debug)]
pub struct HybridSolver<'a> {
    inst: &'a Instance,
    params: HybridParams,
    engine: Engine,
    tau: PheromoneMatrix,
    best: Option<Tour>,
    iteration: usize,
    stagnant: usize,
    records: Vec<IterationRecord>,
    last_ant_tours: Vec<Tour>,
}

impl<'a> HybridSolver<'a> {
    pub fn new(inst: &'a Instance, params: HybridParams) -> Result<Self> {
        params.validate()?;
        let engine = Engine::new(EngineConfig::new(params.threads))?;
        let tau = init_pheromone(inst, &params.aco);
        Ok(Self {
            inst,
            params,
            engine,
            tau,
            best: None,
            iteration: 0,
            stagnant: 0,
            records: Vec::new(),
            last_ant_tours: Vec::new(),
        })
    }

    pub fn params(&self) -> &HybridParams {
        &self.params
    }

    pub fn pheromone(&self) -> &PheromoneMatrix {
        &self.tau
    }

    pub fn best(&self) -> Option<&Tour> {
        self.best.as_ref()
    }

    /// Iterations completed so far.
    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn records(&self) -> &[IterationRecord] {
        &self.records
    }

    /// Ant tours of the most recent iteration, after local search.
    pub fn last_ant_tours(&self) -> &[Tour] {
        &self.last_ant_tours
    }

    pub fn is_finished(&self) -> bool {
        self.iteration >= self.params.max_iterations
            || self.stagnant >= self.params.stagnation_limit
    }

    fn offer(&mut self, candidate: &Tour) -> bool {
        match &self.best {
            Some(b) if candidate.length() >= b.length() => false,
            _ => {
                self.best = Some(candidate.clone());
                true
            }
        }
    }

    /// Runs one iteration and returns its trace record.
    pub fn step(&mut self) -> Result<&IterationRecord> {
        let iteration = self.iteration + 1;
        self.run_iteration(iteration)
            .map_err(|e| e.at_iteration(iteration))?;
        Ok(self.records.last().expect("just pushed"))
    }

    fn run_iteration(&mut self, iteration: usize) -> Result<()> {
        let inst = self.inst;
        let p = &self.params;
        let seed = p.seed;

        let (tours, construction) = phase_timer("construction", || {
            let local_search = p.local_search;
            self.engine.construct(&self.tau, inst, &p.aco, seed, iteration, |t| {
                if local_search {
                    two_opt(inst, t)
                } else {
                    t
                }
            })
        });
        let tours = tours?;

        let ant_best = tours
            .iter()
            .reduce(|a, b| if b.length() < a.length() { b } else { a })
            .expect("at least one ant")
            .clone();
        let mean = tours.iter().map(Tour::length).sum::<f64>() / tours.len() as f64;
        let mut improved = self.offer(&ant_best);

        let aco = self.params.aco.clone();
        let (res, update) = phase_timer("update", || -> Result<()> {
            self.tau.evaporate(aco.delta)?;
            self.tau.deposit(&tours, aco.q);
            Ok(())
        });
        res?;

        let mut iteration_best = ant_best.length();
        let mut ga_secs = 0.0;
        if self.params.ga_enabled {
            let ga = self.params.ga.clone();
            let (ga_best, timing) = phase_timer("ga", || -> Result<Tour> {
                let pop = Population::new(tours.clone(), ga.pop_size);
                let mut rng = stream_for(StreamKey::new(seed, iteration, 0, Purpose::Ga));
                let mut topup = stream_for(StreamKey::new(seed, iteration, 0, Purpose::TopUp));
                let out = evolve(inst, pop, &ga, &mut rng, &mut topup)?;
                Ok(out.best().expect("population is non-empty").clone())
            });
            let ga_best = ga_best?;
            ga_secs = timing.elapsed.as_secs_f64();
            improved |= self.offer(&ga_best);
            iteration_best = iteration_best.min(ga_best.length());
            self.tau.deposit(std::slice::from_ref(&ga_best), aco.q);
        }

        self.stagnant = if improved { 0 } else { self.stagnant + 1 };
        self.iteration = iteration;
        self.last_ant_tours = tours;
        self.records.push(IterationRecord {
            iteration,
            best_so_far: self.best.as_ref().expect("set on first iteration").length(),
            iteration_best,
            mean,
            construction_secs: construction.elapsed.as_secs_f64(),
            update_secs: update.elapsed.as_secs_f64(),
            ga_secs,
        });
        Ok(())
    }

    /// Iterates until the budget or the stagnation limit is reached.
    pub fn run(mut self) -> Result<(Tour, RunTrace)> {
        while !self.is_finished() {
            self.step()?;
        }
        let best = self.best.expect("at least one iteration ran");
        Ok((
            best.clone(),
            RunTrace {
                records: self.records,
                best,
            },
        ))
    }
}

/// Solves `inst`; the result depends only on the instance and `params`
/// (worker count included or not).
pub fn solve(inst: &Instance, params: &HybridParams) -> Result<(Tour, RunTrace)> {
    HybridSolver::new(inst, params.clone())?.run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{brute_force_optimum, random_instance, Metric};

    fn unit_square() -> Instance {
        Instance::from_coords(
            vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)],
            Metric::Euclidean,
        )
        .unwrap()
    }

    fn quick(iterations: usize) -> HybridParams {
        HybridParams {
            max_iterations: iterations,
            ..HybridParams::default()
        }
    }

    #[test]
    fn two_cities_one_iteration() {
        let inst = random_instance(2, 5).unwrap();
        let (best, trace) = solve(&inst, &quick(1)).unwrap();
        assert_eq!(best.length(), 2.0 * inst.dist(0, 1));
        assert_eq!(trace.iterations(), 1);
    }

    #[test]
    fn three_cities_are_trivially_optimal() {
        let inst = random_instance(3, 5).unwrap();
        let (best, _) = solve(&inst, &quick(3)).unwrap();
        let opt = brute_force_optimum(&inst).unwrap();
        assert!((best.length() - opt.length()).abs() < 1e-12);
    }

    #[test]
    fn unit_square_reaches_perimeter_quickly() {
        let inst = unit_square();
        let mut solver = HybridSolver::new(&inst, HybridParams { seed: 1, ..quick(5) }).unwrap();
        let mut reached = None;
        for _ in 0..5 {
            let r = solver.step().unwrap();
            if r.best_so_far == 4.0 && reached.is_none() {
                reached = Some(r.iteration);
            }
        }
        assert_eq!(reached, Some(1));
    }

    #[test]
    fn stagnation_stops_the_run() {
        // the square is solved in iteration 1, so iteration 2 is stagnant
        let inst = unit_square();
        let params = HybridParams {
            stagnation_limit: 1,
            ..quick(50)
        };
        let (_, trace) = solve(&inst, &params).unwrap();
        assert_eq!(trace.iterations(), 2);
    }

    #[test]
    fn best_so_far_never_increases() {
        for seed in 0..5 {
            let inst = random_instance(25, seed).unwrap();
            let params = HybridParams {
                seed,
                local_search: seed % 2 == 0,
                ..quick(30)
            };
            let (best, trace) = solve(&inst, &params).unwrap();
            assert!(trace.is_monotone());
            assert_eq!(trace.records.last().unwrap().best_so_far, best.length());
            for r in &trace.records {
                assert!(r.iteration_best >= r.best_so_far);
                assert!(r.mean >= r.iteration_best || !params.ga_enabled);
            }
        }
    }

    #[test]
    fn recorded_ant_tours_are_two_opt_optimal() {
        let inst = random_instance(30, 2).unwrap();
        let mut solver = HybridSolver::new(&inst, quick(5)).unwrap();
        for _ in 0..5 {
            solver.step().unwrap();
            for t in solver.last_ant_tours() {
                assert!(is_two_opt_optimal(&inst, t.order()));
            }
        }
    }

    #[test]
    fn run_is_reproducible_and_seed_sensitive() {
        let inst = random_instance(30, 8).unwrap();
        let a = solve(&inst, &quick(10)).unwrap().1;
        let b = solve(&inst, &quick(10)).unwrap().1;
        assert!(a.same_values(&b));
        let c = solve(&inst, &HybridParams { seed: 2, local_search: false, ..quick(10) }).unwrap().1;
        let d = solve(&inst, &HybridParams { seed: 3, local_search: false, ..quick(10) }).unwrap().1;
        assert!(!c.same_values(&d));
    }

    #[test]
    fn invalid_params_are_rejected() {
        let inst = random_instance(5, 0).unwrap();
        let bad = HybridParams { max_iterations: 0, ..HybridParams::default() };
        assert!(solve(&inst, &bad).is_err());
        let bad = HybridParams { stagnation_limit: 0, ..HybridParams::default() };
        assert!(solve(&inst, &bad).is_err());
        let mut bad = HybridParams::default();
        bad.aco.delta = 2.0;
        assert!(solve(&inst, &bad).is_err());
        // GA params are ignored when the stage is off
        let mut ok = quick(2);
        ok.ga.pop_size = 0;
        ok.ga_enabled = false;
        assert!(solve(&inst, &ok).is_ok());
    }

    #[test]
    fn csv_trace_shape() {
        let inst = random_instance(8, 1).unwrap();
        let (_, trace) = solve(&inst, &quick(3)).unwrap();
        let csv = trace.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], TRACE_CSV_HEADER);
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("1,"));
        assert_eq!(lines[1].split(',').count(), 7);
    }
}
