//! Symmetric TSP instances and tours over them.

pub mod oracle;
pub mod tsplib;

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use oracle::{brute_force_optimum, enumerate_optimum, held_karp_optimum};
pub use tsplib::parse_tsplib;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InstanceError {
    #[error("instance needs at least 2 cities, got {0}")]
    TooFewCities(usize),
    #[error("distance matrix is not square: row {row} has {len} entries, expected {n}")]
    NotSquare { row: usize, len: usize, n: usize },
    #[error("distance matrix is not symmetric at ({i}, {j}): {a} != {b}")]
    NotSymmetric { i: usize, j: usize, a: f64, b: f64 },
    #[error("distance matrix diagonal entry ({i}, {i}) is {value}, expected 0")]
    NonZeroDiagonal { i: usize, value: f64 },
    #[error("cities {i} and {j} are at distance {value}; off-diagonal distances must be positive and finite")]
    NonPositiveDistance { i: usize, j: usize, value: f64 },
    #[error("invalid tour: {0}")]
    InvalidTour(String),
    #[error("instance has {n} cities, exact oracle limit is {limit}")]
    TooLarge { n: usize, limit: usize },
}

/// How coordinates are turned into edge weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// Exact Euclidean distance.
    Euclidean,
    /// TSPLIB `EUC_2D`: Euclidean distance rounded to the nearest integer.
    Euc2d,
    /// TSPLIB `CEIL_2D`: Euclidean distance rounded up.
    Ceil2d,
}

impl Metric {
    fn apply(self, a: (f64, f64), b: (f64, f64)) -> f64 {
        let d = (a.0 - b.0).hypot(a.1 - b.1);
        match self {
            Metric::Euclidean => d,
            Metric::Euc2d => (d + 0.5).floor(),
            Metric::Ceil2d => d.ceil(),
        }
    }
}

/// A symmetric TSP instance with a dense distance matrix.
///
/// Invariants (checked at construction): the matrix is symmetric, has a zero
/// diagonal, and every off-diagonal entry is positive and finite. The last one
/// rules out co-located cities, for which visibility `1/d` is undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    name: Option<String>,
    n: usize,
    coords: Option<Vec<(f64, f64)>>,
    dist: Vec<f64>,
}

impl Instance {
    pub fn from_coords(coords: Vec<(f64, f64)>, metric: Metric) -> Result<Self, InstanceError> {
        let n = coords.len();
        if n < 2 {
            return Err(InstanceError::TooFewCities(n));
        }
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = metric.apply(coords[i], coords[j]);
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        let inst = Self {
            name: None,
            n,
            coords: Some(coords),
            dist,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn from_matrix(rows: Vec<Vec<f64>>) -> Result<Self, InstanceError> {
        let n = rows.len();
        if n < 2 {
            return Err(InstanceError::TooFewCities(n));
        }
        let mut dist = Vec::with_capacity(n * n);
        for (row, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(InstanceError::NotSquare {
                    row,
                    len: r.len(),
                    n,
                });
            }
            dist.extend_from_slice(r);
        }
        let inst = Self {
            name: None,
            n,
            coords: None,
            dist,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    fn validate(&self) -> Result<(), InstanceError> {
        let n = self.n;
        for i in 0..n {
            let d = self.dist[i * n + i];
            if d != 0.0 {
                return Err(InstanceError::NonZeroDiagonal { i, value: d });
            }
            for j in (i + 1)..n {
                let (a, b) = (self.dist[i * n + j], self.dist[j * n + i]);
                if a != b {
                    return Err(InstanceError::NotSymmetric { i, j, a, b });
                }
                if !(a > 0.0 && a.is_finite()) {
                    return Err(InstanceError::NonPositiveDistance { i, j, value: a });
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    /// Number of cities.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coords(&self) -> Option<&[(f64, f64)]> {
        self.coords.as_deref()
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    /// Row `i` of the distance matrix.
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.dist[i * self.n..(i + 1) * self.n]
    }

    /// Length of the closed tour `order`, validating that it is a permutation.
    pub fn tour_length(&self, order: &[usize]) -> Result<f64, InstanceError> {
        check_permutation(order, self.n)?;
        Ok(self.closed_length(order))
    }

    /// Closed tour length without validation.
    pub(crate) fn closed_length(&self, order: &[usize]) -> f64 {
        let n = order.len();
        let mut total = 0.0;
        for k in 0..n {
            total += self.dist(order[k], order[(k + 1) % n]);
        }
        total
    }

    /// Greedy tour from `start`; ties go to the lowest city index.
    pub fn nearest_neighbor_tour(&self, start: usize) -> Result<Tour, InstanceError> {
        if start >= self.n {
            return Err(InstanceError::InvalidTour(format!(
                "start city {start} out of range for {} cities",
                self.n
            )));
        }
        let mut visited = vec![false; self.n];
        let mut order = Vec::with_capacity(self.n);
        let mut current = start;
        visited[current] = true;
        order.push(current);
        for _ in 1..self.n {
            let row = self.row(current);
            let mut next = usize::MAX;
            let mut best = f64::INFINITY;
            for (j, &d) in row.iter().enumerate() {
                if !visited[j] && d < best {
                    best = d;
                    next = j;
                }
            }
            visited[next] = true;
            order.push(next);
            current = next;
        }
        Ok(Tour::from_valid(self, order))
    }
}

/// `Instance::tour_length` as a free function.
pub fn tour_length(inst: &Instance, order: &[usize]) -> Result<f64, InstanceError> {
    inst.tour_length(order)
}

pub(crate) fn check_permutation(order: &[usize], n: usize) -> Result<(), InstanceError> {
    if order.len() != n {
        return Err(InstanceError::InvalidTour(format!(
            "expected {n} cities, got {}",
            order.len()
        )));
    }
    let mut seen = vec![false; n];
    for &c in order {
        if c >= n {
            return Err(InstanceError::InvalidTour(format!(
                "city {c} out of range for {n} cities"
            )));
        }
        if std::mem::replace(&mut seen[c], true) {
            return Err(InstanceError::InvalidTour(format!("city {c} appears twice")));
        }
    }
    Ok(())
}

/// `n` points uniform in the unit square, drawn from a ChaCha8 generator
/// seeded with `seed`. Distances are exact Euclidean.
///
/// A point that lands on top of an earlier one is redrawn from the same
/// stream, so the result stays reproducible.
pub fn random_instance(n: usize, seed: u64) -> Result<Instance, InstanceError> {
    if n < 2 {
        return Err(InstanceError::TooFewCities(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords: Vec<(f64, f64)> = Vec::with_capacity(n);
    while coords.len() < n {
        let p = (rng.gen::<f64>(), rng.gen::<f64>());
        if coords.iter().all(|q| (p.0 - q.0).hypot(p.1 - q.1) > 0.0) {
            coords.push(p);
        }
    }
    Ok(Instance::from_coords(coords, Metric::Euclidean)?.with_name(format!("random-{n}-{seed}")))
}

/// Unique representative of a tour's rotations and reflections: city 0
/// first, then the direction whose second city is the smaller neighbour of 0.
pub fn canonical_form(order: &[usize]) -> Vec<usize> {
    let n = order.len();
    let Some(pos) = order.iter().position(|&c| c == 0) else {
        return order.to_vec();
    };
    let mut out: Vec<usize> = (0..n).map(|k| order[(pos + k) % n]).collect();
    if n > 2 && out[1] > out[n - 1] {
        out[1..].reverse();
    }
    out
}

/// A closed tour: a permutation of the cities plus its cached length.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Tour {
    order: Vec<usize>,
    length: f64,
}

impl Tour {
    pub fn new(inst: &Instance, order: Vec<usize>) -> Result<Self, InstanceError> {
        let length = inst.tour_length(&order)?;
        Ok(Self { order, length })
    }

    /// Caller guarantees `order` is a permutation of the instance's cities.
    pub(crate) fn from_valid(inst: &Instance, order: Vec<usize>) -> Self {
        debug_assert!(check_permutation(&order, inst.n()).is_ok());
        let length = inst.closed_length(&order);
        Self { order, length }
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn into_order(self) -> Vec<usize> {
        self.order
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn canonical(&self) -> Vec<usize> {
        canonical_form(&self.order)
    }

    /// Undirected edges `(a, b)` in tour order, including the closing edge.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.order.len();
        (0..n).map(move |k| (self.order[k], self.order[(k + 1) % n]))
    }

    /// Tour file text: a `TOUR n <length>` line followed by one city per line.
    pub fn to_tour_file(&self) -> String {
        let mut s = format!("TOUR {} {}\n", self.order.len(), self.length);
        for c in &self.order {
            let _ = writeln!(s, "{c}");
        }
        s
    }

    /// Reads the format written by [`Tour::to_tour_file`]; the length is
    /// recomputed against `inst`.
    pub fn from_tour_file(inst: &Instance, text: &str) -> Result<Self, InstanceError> {
        let bad = |msg: String| InstanceError::InvalidTour(msg);
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| bad("empty tour file".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let n = match fields.as_slice() {
            ["TOUR", n, _len] => n
                .parse::<usize>()
                .map_err(|_| bad(format!("bad city count in header: {header}")))?,
            _ => return Err(bad(format!("bad tour header: {header}"))),
        };
        let order = lines
            .map(|l| {
                l.trim()
                    .parse::<usize>()
                    .map_err(|_| bad(format!("bad city index: {l}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if order.len() != n {
            return Err(bad(format!("header says {n} cities, file lists {}", order.len())));
        }
        Tour::new(inst, order)
    }
}
