//! GA stage over populations of tours: fitness, roulette selection, order
//! crossover, swap mutation and duplicate removal.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::colony::select_next_city;
use crate::error::ParamError;
use crate::instance::{Instance, Tour};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GaError {
    #[error("population is empty")]
    EmptyPopulation,
    #[error("parents have {0} and {1} cities")]
    InstanceMismatch(usize, usize),
    #[error("invalid crossover cuts ({cut1}, {cut2}) for {n} cities")]
    InvalidCuts { cut1: usize, cut2: usize, n: usize },
    #[error("position {pos} out of range for {n} cities")]
    InvalidPosition { pos: usize, n: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaParams {
    pub pop_size: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    /// Best members copied unchanged into the next generation.
    pub elitism: usize,
}

impl Default for GaParams {
    fn default() -> Self {
        Self {
            pop_size: 20,
            crossover_rate: 0.9,
            mutation_rate: 0.1,
            elitism: 1,
        }
    }
}

impl GaParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        if self.pop_size < 2 {
            return Err(ParamError::new("pop-size", "population needs at least 2 members"));
        }
        for (name, rate) in [
            ("crossover-rate", self.crossover_rate),
            ("mutation-rate", self.mutation_rate),
        ] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(ParamError::new(name, format!("{rate} is outside [0, 1]")));
            }
        }
        if self.elitism < 1 || self.elitism > self.pop_size {
            return Err(ParamError::new(
                "elitism",
                format!("{} is outside [1, pop-size]", self.elitism),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub members: Vec<Tour>,
    pub capacity: usize,
}

impl Population {
    pub fn new(members: Vec<Tour>, capacity: usize) -> Self {
        Self { members, capacity }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn best(&self) -> Option<&Tour> {
        self.members
            .iter()
            .reduce(|a, b| if b.length() < a.length() { b } else { a })
    }

    fn total_length(&self) -> Result<f64, GaError> {
        if self.members.is_empty() {
            return Err(GaError::EmptyPopulation);
        }
        Ok(self.members.iter().map(Tour::length).sum())
    }

    /// Share of the population's total path length taken by member `idx`.
    /// Smaller is better.
    pub fn fitness(&self, idx: usize) -> Result<f64, GaError> {
        Ok(self.members[idx].length() / self.total_length()?)
    }

    pub fn fitness_values(&self) -> Result<Vec<f64>, GaError> {
        let total = self.total_length()?;
        Ok(self.members.iter().map(|m| m.length() / total).collect())
    }

    /// Selection probabilities proportional to `1 - fitness`, so shorter
    /// tours are picked more often. A single member gets probability 1.
    pub fn selection_probabilities(&self) -> Result<Vec<f64>, GaError> {
        let fitness = self.fitness_values()?;
        if fitness.len() == 1 {
            return Ok(vec![1.0]);
        }
        let weights: Vec<f64> = fitness.iter().map(|f| 1.0 - f).collect();
        let sum: f64 = weights.iter().sum();
        Ok(weights.into_iter().map(|w| w / sum).collect())
    }
}

/// Order crossover: the child keeps `parent1[cut1..cut2]` in place and the
/// other positions, left to right, take `parent2`'s remaining cities in
/// `parent2` order.
pub fn crossover_ox(
    inst: &Instance,
    parent1: &Tour,
    parent2: &Tour,
    cut1: usize,
    cut2: usize,
) -> Result<Tour, GaError> {
    let n = parent1.len();
    if parent2.len() != n || inst.n() != n {
        return Err(GaError::InstanceMismatch(n, parent2.len()));
    }
    if !(cut1 < cut2 && cut2 <= n) {
        return Err(GaError::InvalidCuts { cut1, cut2, n });
    }
    let p1 = parent1.order();
    let mut taken = vec![false; n];
    for &c in &p1[cut1..cut2] {
        taken[c] = true;
    }
    let mut donor = parent2.order().iter().copied().filter(|&c| !taken[c]);
    let mut child = Vec::with_capacity(n);
    for pos in 0..n {
        if (cut1..cut2).contains(&pos) {
            child.push(p1[pos]);
        } else {
            child.push(donor.next().expect("donor covers the remaining cities"));
        }
    }
    Ok(Tour::from_valid(inst, child))
}

/// Exchanges the cities at positions `i` and `j`.
pub fn mutate_swap(inst: &Instance, member: &Tour, i: usize, j: usize) -> Result<Tour, GaError> {
    let n = member.len();
    for pos in [i, j] {
        if pos >= n {
            return Err(GaError::InvalidPosition { pos, n });
        }
    }
    if i == j {
        return Ok(member.clone());
    }
    let mut order = member.order().to_vec();
    order.swap(i, j);
    Ok(Tour::from_valid(inst, order))
}

/// Keeps the first member of each rotation/reflection class, preserving order.
pub fn remove_duplicates(pop: Population) -> Population {
    let mut seen = HashSet::with_capacity(pop.members.len());
    let members = pop
        .members
        .into_iter()
        .filter(|m| seen.insert(m.canonical()))
        .collect();
    Population {
        members,
        capacity: pop.capacity,
    }
}

/// One generation.
///
/// Sorts by length, keeps the `elitism` best, breeds the rest by roulette
/// selection, order crossover and swap mutation, removes duplicates and tops
/// the population back up with random permutations drawn from `topup_rng`.
pub fn evolve<R: Rng + ?Sized, T: Rng + ?Sized>(
    inst: &Instance,
    mut pop: Population,
    params: &GaParams,
    rng: &mut R,
    topup_rng: &mut T,
) -> Result<Population, GaError> {
    if pop.is_empty() {
        return Err(GaError::EmptyPopulation);
    }
    let n = inst.n();
    pop.members.sort_by(|a, b| a.length().total_cmp(&b.length()));
    let probs = pop.selection_probabilities()?;

    let mut next: Vec<Tour> = Vec::with_capacity(params.pop_size);
    next.extend(pop.members.iter().take(params.elitism).cloned());
    while next.len() < params.pop_size {
        let a = &pop.members[select_next_city(&probs, rng.gen::<f64>())];
        let b = &pop.members[select_next_city(&probs, rng.gen::<f64>())];
        let mut child = if rng.gen::<f64>() < params.crossover_rate {
            let cut1 = rng.gen_range(0..n);
            let cut2 = rng.gen_range(cut1 + 1..=n);
            crossover_ox(inst, a, b, cut1, cut2)?
        } else if b.length() < a.length() {
            b.clone()
        } else {
            a.clone()
        };
        if rng.gen::<f64>() < params.mutation_rate {
            let i = rng.gen_range(0..n);
            let j = rng.gen_range(0..n);
            child = mutate_swap(inst, &child, i, j)?;
        }
        next.push(child);
    }

    let mut out = remove_duplicates(Population::new(next, params.pop_size));
    while out.members.len() < params.pop_size {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(topup_rng);
        out.members.push(Tour::from_valid(inst, order));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{check_permutation, random_instance, Metric};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn line(n: usize) -> Instance {
        Instance::from_coords((0..n).map(|i| (i as f64, 0.5 * (i % 2) as f64)).collect(), Metric::Euclidean)
            .unwrap()
    }

    fn tour(inst: &Instance, order: &[usize]) -> Tour {
        Tour::new(inst, order.to_vec()).unwrap()
    }

    fn random_tour(inst: &Instance, rng: &mut ChaCha8Rng) -> Tour {
        let mut order: Vec<usize> = (0..inst.n()).collect();
        order.shuffle(rng);
        Tour::new(inst, order).unwrap()
    }

    #[test]
    fn fitness_examples() {
        let inst = random_instance(5, 1).unwrap();
        let t = tour(&inst, &[0, 1, 2, 3, 4]);
        let single = Population::new(vec![t.clone()], 2);
        assert_eq!(single.fitness(0).unwrap(), 1.0);
        assert_eq!(single.selection_probabilities().unwrap(), vec![1.0]);

        let pair = Population::new(vec![t.clone(), tour(&inst, &[1, 2, 3, 4, 0])], 2);
        let f = pair.fitness_values().unwrap();
        assert!((f[0] - 0.5).abs() < 1e-15 && (f[1] - 0.5).abs() < 1e-15);
        let s = pair.selection_probabilities().unwrap();
        assert!((s[0] - 0.5).abs() < 1e-15);

        assert_eq!(
            Population::new(vec![], 2).fitness_values(),
            Err(GaError::EmptyPopulation)
        );
    }

    #[test]
    fn selection_for_lengths_one_and_three() {
        // path lengths 1 and 3 on a 2-city instance: edges 0.5 and 1.5
        let short = Instance::from_matrix(vec![vec![0.0, 0.5], vec![0.5, 0.0]]).unwrap();
        let long = Instance::from_matrix(vec![vec![0.0, 1.5], vec![1.5, 0.0]]).unwrap();
        let pop = Population::new(vec![tour(&short, &[0, 1]), tour(&long, &[0, 1])], 2);
        assert_eq!(pop.fitness_values().unwrap(), vec![0.25, 0.75]);
        assert_eq!(pop.selection_probabilities().unwrap(), vec![0.75, 0.25]);
    }

    #[test]
    fn ox_golden_child() {
        // segment [2, 3, 4] from p1; the rest in p2 order: 7 6 5 1 0
        let inst = line(8);
        let p1 = tour(&inst, &[0, 1, 2, 3, 4, 5, 6, 7]);
        let p2 = tour(&inst, &[7, 6, 5, 4, 3, 2, 1, 0]);
        let child = crossover_ox(&inst, &p1, &p2, 2, 5).unwrap();
        assert_eq!(child.order(), &[7, 6, 2, 3, 4, 5, 1, 0]);
        assert_eq!(child.length(), inst.tour_length(child.order()).unwrap());
    }

    #[test]
    fn ox_degenerate_cases() {
        let inst = line(6);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p1 = random_tour(&inst, &mut rng);
        let p2 = random_tour(&inst, &mut rng);
        assert_eq!(crossover_ox(&inst, &p1, &p1, 1, 4).unwrap(), p1);
        assert_eq!(crossover_ox(&inst, &p1, &p2, 0, 6).unwrap(), p1);
        assert!(matches!(
            crossover_ox(&inst, &p1, &p2, 3, 3),
            Err(GaError::InvalidCuts { .. })
        ));
        let other = line(5);
        let q = tour(&other, &[0, 1, 2, 3, 4]);
        assert_eq!(
            crossover_ox(&inst, &p1, &q, 0, 2),
            Err(GaError::InstanceMismatch(6, 5))
        );
    }

    #[test]
    fn swap_mutation() {
        let inst = line(3);
        let t = tour(&inst, &[0, 1, 2]);
        assert_eq!(mutate_swap(&inst, &t, 1, 1).unwrap(), t);
        assert_eq!(mutate_swap(&inst, &t, 0, 1).unwrap().order(), &[1, 0, 2]);
        assert!(mutate_swap(&inst, &t, 0, 3).is_err());
    }

    #[test]
    fn duplicate_removal() {
        let inst = line(6);
        let a = tour(&inst, &[0, 1, 2, 3, 4, 5]);
        let a_rot = tour(&inst, &[3, 4, 5, 0, 1, 2]);
        let a_rev = tour(&inst, &[5, 4, 3, 2, 1, 0]);
        let b = tour(&inst, &[0, 2, 1, 3, 4, 5]);
        let c = tour(&inst, &[0, 1, 2, 3, 5, 4]);

        let pop = remove_duplicates(Population::new(vec![a.clone(), a_rot.clone()], 2));
        assert_eq!(pop.members, vec![a.clone()]);

        let distinct = Population::new(vec![b.clone(), a.clone(), c.clone()], 3);
        assert_eq!(remove_duplicates(distinct.clone()), distinct);

        let mixed = Population::new(
            vec![a_rev.clone(), b.clone(), a.clone(), c.clone(), b.clone(), a_rot],
            6,
        );
        let out = remove_duplicates(mixed);
        assert_eq!(out.members, vec![a_rev, b, c]);
        assert_eq!(remove_duplicates(out.clone()), out);
    }

    #[test]
    fn evolve_collapses_identical_population() {
        let inst = random_instance(7, 2).unwrap();
        let t = tour(&inst, &[0, 1, 2, 3, 4, 5, 6]);
        let pop = Population::new(vec![t.clone(); 6], 6);
        let params = GaParams {
            pop_size: 6,
            mutation_rate: 0.0,
            ..GaParams::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut topup = ChaCha8Rng::seed_from_u64(2);
        let out = evolve(&inst, pop, &params, &mut rng, &mut topup).unwrap();
        assert_eq!(out.len(), 6);
        assert_eq!(out.members[0], t);
        // the rest are the top-up draws, in order
        let mut topup = ChaCha8Rng::seed_from_u64(2);
        for m in &out.members[1..] {
            let mut order: Vec<usize> = (0..7).collect();
            order.shuffle(&mut topup);
            assert_eq!(m.order(), order.as_slice());
        }
    }

    #[test]
    fn evolve_keeps_the_elite() {
        let inst = random_instance(9, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let members: Vec<Tour> = (0..10).map(|_| random_tour(&inst, &mut rng)).collect();
        let best = Population::new(members.clone(), 10).best().unwrap().clone();
        let out = evolve(
            &inst,
            Population::new(members, 10),
            &GaParams { pop_size: 10, ..GaParams::default() },
            &mut rng,
            &mut ChaCha8Rng::seed_from_u64(0),
        )
        .unwrap();
        assert_eq!(out.members[0], best);
    }

    #[test]
    fn repeated_evolution_never_loses_the_best() {
        let inst = random_instance(10, 77).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let members: Vec<Tour> = (0..12).map(|_| random_tour(&inst, &mut rng)).collect();
        let params = GaParams { pop_size: 12, ..GaParams::default() };
        let mut pop = Population::new(members, 12);
        let mut best = pop.best().unwrap().length();
        for _ in 0..100 {
            pop = evolve(&inst, pop, &params, &mut rng, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
            let b = pop.best().unwrap().length();
            assert!(b <= best);
            best = b;
        }
    }

    #[test]
    fn evolve_rejects_empty() {
        let inst = line(4);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            evolve(&inst, Population::new(vec![], 2), &GaParams::default(), &mut rng, &mut ChaCha8Rng::seed_from_u64(0)),
            Err(GaError::EmptyPopulation)
        );
    }

    #[test]
    fn param_validation() {
        assert!(GaParams::default().validate().is_ok());
        let bad = |p: GaParams| p.validate().unwrap_err().name;
        assert_eq!(bad(GaParams { pop_size: 1, elitism: 1, ..GaParams::default() }), "pop-size");
        assert_eq!(bad(GaParams { crossover_rate: 1.1, ..GaParams::default() }), "crossover-rate");
        assert_eq!(bad(GaParams { mutation_rate: -0.1, ..GaParams::default() }), "mutation-rate");
        assert_eq!(bad(GaParams { elitism: 0, ..GaParams::default() }), "elitism");
    }

    fn population_strategy() -> impl Strategy<Value = (Instance, Vec<Tour>)> {
        (3usize..12, 2usize..10, any::<u64>()).prop_map(|(n, size, seed)| {
            let inst = random_instance(n, seed).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37);
            let members = (0..size).map(|_| random_tour(&inst, &mut rng)).collect();
            (inst, members)
        })
    }

    proptest! {
        #[test]
        fn operators_preserve_permutations((inst, members) in population_strategy(), a in any::<u64>()) {
            let n = inst.n();
            let mut rng = ChaCha8Rng::seed_from_u64(a);
            let cut1 = rng.gen_range(0..n);
            let cut2 = rng.gen_range(cut1 + 1..=n);
            let child = crossover_ox(&inst, &members[0], &members[1], cut1, cut2).unwrap();
            prop_assert!(check_permutation(child.order(), n).is_ok());
            let m = mutate_swap(&inst, &members[0], rng.gen_range(0..n), rng.gen_range(0..n)).unwrap();
            prop_assert!(check_permutation(m.order(), n).is_ok());
            prop_assert!((m.length() - inst.tour_length(m.order()).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn fitness_sums_to_one((_inst, members) in population_strategy()) {
            let pop = Population::new(members, 2);
            let sum: f64 = pop.fitness_values().unwrap().iter().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn shorter_tours_are_never_less_likely((_inst, members) in population_strategy()) {
            let pop = Population::new(members, 2);
            let probs = pop.selection_probabilities().unwrap();
            for i in 0..pop.len() {
                prop_assert!(probs[i] > 0.0);
                for j in 0..pop.len() {
                    if pop.members[i].length() < pop.members[j].length() {
                        prop_assert!(probs[i] >= probs[j]);
                    }
                }
            }
        }

        #[test]
        fn evolve_is_elitist_and_valid((inst, members) in population_strategy(), seed in any::<u64>()) {
            let best_in = Population::new(members.clone(), 8).best().unwrap().length();
            let params = GaParams { pop_size: 8, ..GaParams::default() };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let out = evolve(&inst, Population::new(members, 8), &params, &mut rng, &mut ChaCha8Rng::seed_from_u64(!seed)).unwrap();
            prop_assert_eq!(out.len(), 8);
            prop_assert!(out.best().unwrap().length() <= best_in);
            for m in &out.members {
                prop_assert!(check_permutation(m.order(), inst.n()).is_ok());
            }
        }

        #[test]
        fn duplicate_removal_is_idempotent((inst, mut members) in population_strategy(), r in 0usize..12) {
            let n = inst.n();
            let rotated: Vec<usize> = (0..n).map(|k| members[0].order()[(k + r) % n]).collect();
            members.push(Tour::new(&inst, rotated).unwrap());
            let once = remove_duplicates(Population::new(members, 4));
            prop_assert_eq!(remove_duplicates(once.clone()), once.clone());
            let mut seen = HashSet::new();
            for m in &once.members {
                prop_assert!(seen.insert(m.canonical()));
            }
        }
    }
}
