use std::fmt::Write as _;

use serde::Serialize;

use crate::instance::Tour;

pub const TRACE_CSV_HEADER: &str =
    "iteration,best_so_far,iteration_best,mean,construction_secs,update_secs,ga_secs";

/// One row of the convergence trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    /// 1-based.
    pub iteration: usize,
    pub best_so_far: f64,
    /// Shortest tour seen this iteration, ants and GA together.
    pub iteration_best: f64,
    /// Mean ant tour length after local search.
    pub mean: f64,
    pub construction_secs: f64,
    pub update_secs: f64,
    pub ga_secs: f64,
}

impl IterationRecord {
    /// The columns that must not depend on scheduling.
    pub fn values(&self) -> (usize, f64, f64, f64) {
        (self.iteration, self.best_so_far, self.iteration_best, self.mean)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunTrace {
    pub records: Vec<IterationRecord>,
    pub best: Tour,
}

impl RunTrace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn is_monotone(&self) -> bool {
        self.records
            .windows(2)
            .all(|w| w[1].best_so_far <= w[0].best_so_far)
    }

    /// Bitwise comparison of everything except timings.
    pub fn same_values(&self, other: &RunTrace) -> bool {
        self.best == other.best
            && self.records.len() == other.records.len()
            && self
                .records
                .iter()
                .zip(&other.records)
                .all(|(a, b)| {
                    let (x, y) = (a.values(), b.values());
                    x.0 == y.0
                        && x.1.to_bits() == y.1.to_bits()
                        && x.2.to_bits() == y.2.to_bits()
                        && x.3.to_bits() == y.3.to_bits()
                })
    }

    pub fn total_secs(&self) -> (f64, f64, f64) {
        self.records.iter().fold((0.0, 0.0, 0.0), |acc, r| {
            (
                acc.0 + r.construction_secs,
                acc.1 + r.update_secs,
                acc.2 + r.ga_secs,
            )
        })
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(TRACE_CSV_HEADER);
        s.push('\n');
        for r in &self.records {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                r.iteration,
                r.best_so_far,
                r.iteration_best,
                r.mean,
                r.construction_secs,
                r.update_secs,
                r.ga_secs
            );
        }
        s
    }
}
