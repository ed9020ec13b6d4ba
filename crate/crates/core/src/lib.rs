//! Hybrid Ant Colony Optimization + Genetic Algorithm solver for the
//! symmetric Travelling Salesman Problem.
//!
//! The crate is organised the way a run flows:
//!
//! - [`instance`]: problem representation, TSPLIB ingestion, tour arithmetic
//!   and exact oracles for small instances.
//! - [`colony`]: the Ant System core (pheromone state, transition rule,
//!   tour construction, evaporation and deposit).
//! - [`genetic`]: the GA stage over populations of tours.
//! - [`parallel`]: keyed random streams and the data-parallel construction
//!   engine whose output does not depend on the worker count.
//! - [`hybrid`]: the ACO-GA loop, 2-opt local search and the run trace.
//! - [`harness`]: drivers for oracle sweeps, the double-bridge experiment and
//!   the speedup benchmark.

pub mod colony;
pub mod error;
pub mod genetic;
pub mod harness;
pub mod hybrid;
pub mod instance;
pub mod parallel;

pub use colony::{AcoParams, AntState, PheromoneMatrix};
pub use error::{Error, Result};
pub use genetic::{GaParams, Population};
pub use hybrid::{solve, HybridParams, HybridSolver, IterationRecord, RunTrace};
pub use instance::{Instance, Tour};
pub use parallel::{stream_for, EngineConfig, Purpose, StreamKey};
