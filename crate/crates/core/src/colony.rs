//! Ant System core: pheromone trails, the probabilistic transition rule with
//! tabu exclusion, tour construction, evaporation and ant-cycle deposit.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::ParamError;
use crate::instance::{Instance, Tour};

/// Above this exponent, weights are computed in log space.
pub const LOG_SPACE_EXPONENT: f64 = 8.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ColonyError {
    #[error("visibility undefined between city {i} and city {j}")]
    UndefinedVisibility { i: usize, j: usize },
    #[error("transition weights from city {city} are all zero or non-finite")]
    DegenerateDistribution { city: usize },
    #[error("no unvisited city left for ant at city {city}")]
    TourComplete { city: usize },
    #[error("pheromone matrix is {tau} x {tau} but instance has {n} cities")]
    SizeMismatch { tau: usize, n: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcoParams {
    /// Trail exponent.
    pub alpha: f64,
    /// Visibility exponent.
    pub beta: f64,
    /// Fraction of the trail retained by each evaporation step.
    pub delta: f64,
    /// Number of ants.
    pub ants: usize,
    /// Ant-cycle deposit constant: each ant adds `q / L` to the edges of its tour.
    pub q: f64,
    /// Initial trail; `None` means `ants / L_nn`.
    pub tau0: Option<f64>,
}

impl Default for AcoParams {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 2.0,
            delta: 0.9,
            ants: 20,
            q: 1.0,
            tau0: None,
        }
    }
}

impl AcoParams {
    pub fn new(alpha: f64, beta: f64, delta: f64, ants: usize, q: f64) -> Result<Self, ParamError> {
        let p = Self {
            alpha,
            beta,
            delta,
            ants,
            q,
            tau0: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(ParamError::new("alpha", format!("{} is not a finite value >= 0", self.alpha)));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(ParamError::new("beta", format!("{} is not a finite value >= 0", self.beta)));
        }
        check_delta(self.delta)?;
        if self.ants == 0 {
            return Err(ParamError::new("ants", "need at least one ant"));
        }
        if !(self.q > 0.0 && self.q.is_finite()) {
            return Err(ParamError::new("q", format!("{} is not a finite value > 0", self.q)));
        }
        if let Some(t) = self.tau0 {
            if !(t > 0.0 && t.is_finite()) {
                return Err(ParamError::new("tau0", format!("{t} is not a finite value > 0")));
            }
        }
        Ok(())
    }

    fn log_space(&self) -> bool {
        self.alpha > LOG_SPACE_EXPONENT || self.beta > LOG_SPACE_EXPONENT
    }
}

fn check_delta(delta: f64) -> Result<(), ParamError> {
    if delta > 0.0 && delta <= 1.0 {
        Ok(())
    } else {
        Err(ParamError::new("delta", format!("{delta} is outside (0, 1]")))
    }
}

/// Symmetric matrix of trail intensities plus the update counter `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct PheromoneMatrix {
    n: usize,
    tau: Vec<f64>,
    t: usize,
}

impl PheromoneMatrix {
    /// Every off-diagonal entry set to `tau0`, zero diagonal, `t = 0`.
    pub fn uniform(n: usize, tau0: f64) -> Self {
        let mut tau = vec![tau0; n * n];
        for i in 0..n {
            tau[i * n + i] = 0.0;
        }
        Self { n, tau, t: 0 }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of evaporation steps applied so far.
    pub fn t(&self) -> usize {
        self.t
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.tau[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.tau[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.tau
    }

    /// Multiplies every trail by `delta` and advances `t`.
    pub fn evaporate(&mut self, delta: f64) -> Result<(), ParamError> {
        check_delta(delta)?;
        if delta != 1.0 {
            for v in &mut self.tau {
                *v *= delta;
            }
        }
        self.t += 1;
        Ok(())
    }

    /// Ant-cycle deposit: for each tour of length `L`, adds `q / L` to both
    /// directions of every edge on it.
    pub fn deposit(&mut self, tours: &[Tour], q: f64) {
        for tour in tours {
            let amount = q / tour.length();
            self.deposit_edges(tour.edges(), amount);
        }
    }

    /// Adds `amount` to both directions of each edge.
    pub fn deposit_edges(&mut self, edges: impl IntoIterator<Item = (usize, usize)>, amount: f64) {
        let n = self.n;
        for (a, b) in edges {
            self.tau[a * n + b] += amount;
            self.tau[b * n + a] += amount;
        }
    }

    /// Full matrix as CSV, one row per line.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for i in 0..self.n {
            let row: Vec<String> = self.row(i).iter().map(f64::to_string).collect();
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }
}

/// Trail matrix for a new run: `tau0` from the params, or `ants / L_nn`
/// where `L_nn` is the nearest-neighbour tour from city 0.
pub fn init_pheromone(inst: &Instance, p: &AcoParams) -> PheromoneMatrix {
    let tau0 = p.tau0.unwrap_or_else(|| {
        let l_nn = inst
            .nearest_neighbor_tour(0)
            .expect("city 0 exists")
            .length();
        p.ants as f64 / l_nn
    });
    PheromoneMatrix::uniform(inst.n(), tau0)
}

/// An ant part-way through its tour. `visited` is the tabu set.
#[derive(Debug, Clone, PartialEq)]
pub struct AntState {
    current: usize,
    visited: Vec<bool>,
    partial: Vec<usize>,
}

impl AntState {
    pub fn new(n: usize, start: usize) -> Self {
        let mut visited = vec![false; n];
        visited[start] = true;
        let mut partial = Vec::with_capacity(n);
        partial.push(start);
        Self {
            current: start,
            visited,
            partial,
        }
    }

    /// Ant that has walked `path` in order. Panics if `path` repeats a city.
    pub fn from_path(n: usize, path: &[usize]) -> Self {
        let mut ant = Self::new(n, path[0]);
        for &c in &path[1..] {
            ant.visit(c);
        }
        ant
    }

    pub fn visit(&mut self, city: usize) {
        assert!(!self.visited[city], "city {city} already visited");
        self.visited[city] = true;
        self.partial.push(city);
        self.current = city;
    }

    pub fn current(&self) -> usize {
        self.current
    }

    pub fn is_visited(&self, city: usize) -> bool {
        self.visited[city]
    }

    pub fn partial(&self) -> &[usize] {
        &self.partial
    }

    pub fn is_complete(&self) -> bool {
        self.partial.len() == self.visited.len()
    }

    pub fn into_path(self) -> Vec<usize> {
        self.partial
    }
}

/// Visibility `1 / d(i, j)`.
pub fn visibility(inst: &Instance, i: usize, j: usize) -> Result<f64, ColonyError> {
    let d = inst.dist(i, j);
    if i == j || d <= 0.0 {
        return Err(ColonyError::UndefinedVisibility { i, j });
    }
    Ok(1.0 / d)
}

/// Unnormalised score of an edge: `tau^alpha * eta^beta`, or its logarithm
/// when `log_space` is set.
#[inline]
fn edge_score(tau: f64, dist: f64, alpha: f64, beta: f64, log_space: bool) -> f64 {
    if log_space {
        alpha * tau.ln() - beta * dist.ln()
    } else {
        tau.powf(alpha) * (1.0 / dist).powf(beta)
    }
}

/// Turns the scores of row `current` into probabilities over unvisited
/// cities. Visited entries come out exactly 0.
fn normalize_into(
    scores: &[f64],
    log_space: bool,
    ant: &AntState,
    out: &mut [f64],
) -> Result<(), ColonyError> {
    let city = ant.current;
    if ant.is_complete() {
        return Err(ColonyError::TourComplete { city });
    }
    if log_space {
        let mut max = f64::NEG_INFINITY;
        for (j, &s) in scores.iter().enumerate() {
            if !ant.visited[j] && s > max {
                max = s;
            }
        }
        if !max.is_finite() {
            return Err(ColonyError::DegenerateDistribution { city });
        }
        for (j, o) in out.iter_mut().enumerate() {
            *o = if ant.visited[j] { 0.0 } else { (scores[j] - max).exp() };
        }
    } else {
        for (j, o) in out.iter_mut().enumerate() {
            *o = if ant.visited[j] { 0.0 } else { scores[j] };
        }
    }
    let sum: f64 = out.iter().sum();
    if !(sum > 0.0 && sum.is_finite()) {
        return Err(ColonyError::DegenerateDistribution { city });
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
    Ok(())
}

/// Probability of moving from the ant's current city to each city: zero on
/// the tabu set, proportional to `tau^alpha * eta^beta` elsewhere.
pub fn transition_probabilities(
    tau: &PheromoneMatrix,
    inst: &Instance,
    ant: &AntState,
    p: &AcoParams,
) -> Result<Vec<f64>, ColonyError> {
    let n = inst.n();
    if tau.n() != n {
        return Err(ColonyError::SizeMismatch { tau: tau.n(), n });
    }
    let i = ant.current;
    let log_space = p.log_space();
    let scores: Vec<f64> = (0..n)
        .map(|j| {
            if j == i {
                0.0
            } else {
                edge_score(tau.get(i, j), inst.dist(i, j), p.alpha, p.beta, log_space)
            }
        })
        .collect();
    let mut out = vec![0.0; n];
    normalize_into(&scores, log_space, ant, &mut out)?;
    Ok(out)
}

/// Roulette selection: the first city whose cumulative probability exceeds
/// `draw`. If round-off leaves the total short of `draw`, the last city with
/// non-zero probability is returned.
pub fn select_next_city(probs: &[f64], draw: f64) -> usize {
    let mut cumulative = 0.0;
    let mut last = 0;
    for (j, &pj) in probs.iter().enumerate() {
        if pj > 0.0 {
            cumulative += pj;
            if cumulative > draw {
                return j;
            }
            last = j;
        }
    }
    last
}

/// Edge scores for one trail snapshot, computed once and shared by every ant
/// constructing against that snapshot.
#[derive(Debug, Clone)]
pub struct ChoiceTable<'a> {
    inst: &'a Instance,
    scores: Vec<f64>,
    log_space: bool,
}

impl<'a> ChoiceTable<'a> {
    pub fn new(tau: &PheromoneMatrix, inst: &'a Instance, p: &AcoParams) -> Result<Self, ColonyError> {
        let n = inst.n();
        if tau.n() != n {
            return Err(ColonyError::SizeMismatch { tau: tau.n(), n });
        }
        let log_space = p.log_space();
        let mut scores = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    scores[i * n + j] =
                        edge_score(tau.get(i, j), inst.dist(i, j), p.alpha, p.beta, log_space);
                }
            }
        }
        Ok(Self {
            inst,
            scores,
            log_space,
        })
    }

    pub fn instance(&self) -> &'a Instance {
        self.inst
    }

    /// Builds one tour from `start`, drawing one uniform number per move.
    pub fn construct<R: Rng + ?Sized>(&self, start: usize, rng: &mut R) -> Result<Tour, ColonyError> {
        let n = self.inst.n();
        let mut ant = AntState::new(n, start);
        let mut probs = vec![0.0; n];
        while !ant.is_complete() {
            let i = ant.current;
            normalize_into(&self.scores[i * n..(i + 1) * n], self.log_space, &ant, &mut probs)?;
            let next = select_next_city(&probs, rng.gen::<f64>());
            ant.visit(next);
        }
        Ok(Tour::from_valid(self.inst, ant.into_path()))
    }
}

/// One ant's tour from `start`. Reads `tau`, never writes it.
pub fn construct_tour<R: Rng + ?Sized>(
    tau: &PheromoneMatrix,
    inst: &Instance,
    p: &AcoParams,
    start: usize,
    rng: &mut R,
) -> Result<Tour, ColonyError> {
    ChoiceTable::new(tau, inst, p)?.construct(start, rng)
}
