//! Exact optima for small instances. City 0 is fixed first in every tour
//! these return.

use super::{Instance, InstanceError, Tour};

pub const HELD_KARP_LIMIT: usize = 16;
pub const ENUMERATION_LIMIT: usize = 10;

/// Exact optimum via Held-Karp.
pub fn brute_force_optimum(inst: &Instance) -> Result<Tour, InstanceError> {
    held_karp_optimum(inst)
}

/// Held-Karp dynamic programme over subsets of cities `1..n`.
///
/// `cost[mask][e]` is the shortest path that starts at city 0, visits exactly
/// the cities in `mask` and ends at `e + 1` (bit `e` of `mask` is city `e + 1`).
pub fn held_karp_optimum(inst: &Instance) -> Result<Tour, InstanceError> {
    let n = inst.n();
    if n > HELD_KARP_LIMIT {
        return Err(InstanceError::TooLarge {
            n,
            limit: HELD_KARP_LIMIT,
        });
    }
    if n <= 3 {
        return Ok(Tour::from_valid(inst, (0..n).collect()));
    }
    let k = n - 1;
    let full = (1usize << k) - 1;
    let mut cost = vec![f64::INFINITY; (full + 1) * k];
    let mut parent = vec![u8::MAX; (full + 1) * k];
    for e in 0..k {
        cost[(1 << e) * k + e] = inst.dist(0, e + 1);
    }
    for mask in 1..=full {
        for e in 0..k {
            if mask & (1 << e) == 0 {
                continue;
            }
            let here = cost[mask * k + e];
            if here == f64::INFINITY {
                continue;
            }
            for f in 0..k {
                if mask & (1 << f) != 0 {
                    continue;
                }
                let next = mask | (1 << f);
                let c = here + inst.dist(e + 1, f + 1);
                if c < cost[next * k + f] {
                    cost[next * k + f] = c;
                    parent[next * k + f] = e as u8;
                }
            }
        }
    }
    let mut last = 0;
    let mut best = f64::INFINITY;
    for e in 0..k {
        let c = cost[full * k + e] + inst.dist(e + 1, 0);
        if c < best {
            best = c;
            last = e;
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut mask = full;
    let mut e = last;
    loop {
        order.push(e + 1);
        let p = parent[mask * k + e];
        mask &= !(1 << e);
        if p == u8::MAX {
            break;
        }
        e = p as usize;
    }
    order.push(0);
    order.reverse();
    Ok(Tour::from_valid(inst, order))
}

/// Exhaustive enumeration of all tours starting at city 0, in lexicographic
/// order; the first tour of minimal length wins.
pub fn enumerate_optimum(inst: &Instance) -> Result<Tour, InstanceError> {
    let n = inst.n();
    if n > ENUMERATION_LIMIT {
        return Err(InstanceError::TooLarge {
            n,
            limit: ENUMERATION_LIMIT,
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut best_order = order.clone();
    let mut best = inst.closed_length(&order);
    while next_permutation(&mut order[1..]) {
        let l = inst.closed_length(&order);
        if l < best {
            best = l;
            best_order.copy_from_slice(&order);
        }
    }
    Ok(Tour::from_valid(inst, best_order))
}

fn next_permutation(xs: &mut [usize]) -> bool {
    if xs.len() < 2 {
        return false;
    }
    let Some(i) = (0..xs.len() - 1).rev().find(|&i| xs[i] < xs[i + 1]) else {
        return false;
    };
    let j = (i + 1..xs.len()).rev().find(|&j| xs[j] > xs[i]).unwrap();
    xs.swap(i, j);
    xs[i + 1..].reverse();
    true
}
