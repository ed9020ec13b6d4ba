use crate::instance::{Instance, Tour};

/// Minimum gain for a move to count as improving.
const MIN_GAIN: f64 = 1e-10;

#[inline]
fn gain(inst: &Instance, order: &[usize], i: usize, j: usize) -> f64 {
    let n = order.len();
    let (a, b) = (order[i], order[i + 1]);
    let (c, d) = (order[j], order[(j + 1) % n]);
    inst.dist(a, b) + inst.dist(c, d) - inst.dist(a, c) - inst.dist(b, d)
}

/// Candidate moves `(i, j)`: replace edges `(i, i+1)` and `(j, j+1)`,
/// lexicographic, skipping pairs of adjacent edges.
fn moves(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n.saturating_sub(1)).flat_map(move |i| {
        let last = if i == 0 { n - 1 } else { n };
        (i + 2..last).map(move |j| (i, j))
    })
}

/// First-improvement 2-opt. Scans moves lexicographically, reversing
/// `order[i+1..=j]` whenever that shortens the tour, and repeats full scans
/// until one finds nothing.
pub fn two_opt(inst: &Instance, tour: Tour) -> Tour {
    let n = tour.len();
    if n < 4 {
        return tour;
    }
    let mut order = tour.into_order();
    loop {
        let mut improved = false;
        for (i, j) in moves(n) {
            if gain(inst, &order, i, j) > MIN_GAIN {
                order[i + 1..=j].reverse();
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
    Tour::from_valid(inst, order)
}

/// True when no 2-opt move improves `order`.
pub fn is_two_opt_optimal(inst: &Instance, order: &[usize]) -> bool {
    let n = order.len();
    n < 4 || moves(n).all(|(i, j)| gain(inst, order, i, j) <= MIN_GAIN)
}
