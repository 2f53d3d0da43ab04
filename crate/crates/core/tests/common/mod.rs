//! Seeded random instance families shared by the integration tests.
#![allow(dead_code)]

use nonsubmax::{
    ConstraintSpec, Coverage, GroundSet, ItemSet, LatencyProfile, Modular, ProblemInstance, Table,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Monotone table over `n` items: each set's value is the largest value of
/// its maximal proper subsets plus a random increment, zero one time in five.
pub fn random_monotone_values(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let mut values = vec![0.0; 1 << n];
    for mask in 1usize..1 << n {
        let base = (0..n)
            .filter(|v| mask >> v & 1 == 1)
            .map(|v| values[mask ^ (1 << v)])
            .fold(0.0, f64::max);
        let inc = if rng.random_bool(0.2) {
            0.0
        } else {
            rng.random::<f64>()
        };
        values[mask] = base + inc;
    }
    values
}

pub fn random_table(rng: &mut impl Rng, n: usize) -> Table {
    Table::new(n, random_monotone_values(rng, n)).unwrap()
}

/// Submodular table: weighted coverage with point weights on a 1/64 grid,
/// so the table is exactly submodular in floating point.
pub fn random_submodular_values(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let points = rng.random_range(2..=7);
    let covers = (0..n)
        .map(|_| (0..points).filter(|_| rng.random_bool(0.4)).collect())
        .collect();
    let weights = (0..points)
        .map(|_| f64::from(rng.random_range(1..=64u32)) / 64.0)
        .collect();
    let c = Coverage::weighted(covers, weights).unwrap();
    (0..1u64 << n)
        .map(|m| nonsubmax::SetFunction::value(&c, &ItemSet::from_mask(n, m)).unwrap())
        .collect()
}

/// Modular table with weights on a 1/64 grid, so every subset sum and every
/// marginal is exact in floating point.
pub fn random_modular_values(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n)
        .map(|_| f64::from(rng.random_range(0..64u32)) / 64.0)
        .collect();
    (0..1usize << n)
        .map(|m| (0..n).filter(|v| m >> v & 1 == 1).map(|v| w[v]).sum())
        .collect()
}

pub fn random_coverage(rng: &mut impl Rng, n: usize) -> Coverage {
    let points = rng.random_range(2..=7);
    let covers = (0..n)
        .map(|_| (0..points).filter(|_| rng.random_bool(0.4)).collect())
        .collect();
    let weights = (0..points).map(|_| rng.random_range(0.1..1.0)).collect();
    Coverage::weighted(covers, weights).unwrap()
}

pub fn random_modular(rng: &mut impl Rng, n: usize) -> Modular {
    Modular::new((0..n).map(|_| rng.random_range(0.0..1.0)).collect())
}

/// Latency profile meeting the transmission-dominance assumption:
/// compute latencies in `[0, 1)`, transmit latencies in `[1, 2)`.
pub fn random_latency(rng: &mut impl Rng, n: usize) -> LatencyProfile {
    let c = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
    let t = (0..n).map(|_| rng.random_range(1.0..2.0)).collect();
    LatencyProfile::new(c, t).unwrap()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObjKind {
    Modular,
    Coverage,
    Table,
}

pub fn random_objective(
    rng: &mut impl Rng,
    n: usize,
) -> (ObjKind, Box<dyn nonsubmax::SetFunction>) {
    match rng.random_range(0..3) {
        0 => (ObjKind::Modular, Box::new(random_modular(rng, n))),
        1 => (ObjKind::Coverage, Box::new(random_coverage(rng, n))),
        _ => (ObjKind::Table, Box::new(random_table(rng, n))),
    }
}

/// Budget or latency constraint over a scope of `size` items, with a budget
/// between 20% and 90% of the full scope's cost.
pub fn random_constraint(rng: &mut impl Rng, size: usize, block: usize) -> ConstraintSpec {
    let frac = rng.random_range(0.2..0.9);
    if rng.random_bool(0.5) {
        let costs: Vec<f64> = (0..size).map(|_| rng.random_range(0.1..1.0)).collect();
        let total: f64 = costs.iter().sum();
        ConstraintSpec::new(Modular::new(costs), block, frac * total)
    } else {
        let p = random_latency(rng, size);
        let full = p.h_c(&ItemSet::full(size));
        ConstraintSpec::new(p, block, frac * full)
    }
}

struct Boxed(Box<dyn nonsubmax::SetFunction>);

impl std::fmt::Debug for Boxed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

impl nonsubmax::SetFunction for Boxed {
    fn universe(&self) -> usize {
        self.0.universe()
    }
    fn value(&self, set: &ItemSet) -> nonsubmax::Result<f64> {
        self.0.value(set)
    }
    fn kind(&self) -> &'static str {
        self.0.kind()
    }
    fn ratio_bounds(&self) -> Option<nonsubmax::Result<nonsubmax::RatioBounds>> {
        self.0.ratio_bounds()
    }
}

/// Up to three disjoint blocks of one to four items, one constraint each.
pub fn disjoint_instance(seed: u64) -> (ObjKind, ProblemInstance) {
    let mut rng = rng(seed);
    let blocks = rng.random_range(1..=3);
    let sizes: Vec<usize> = (0..blocks).map(|_| rng.random_range(1..=4)).collect();
    let n: usize = sizes.iter().sum();
    let (kind, f) = random_objective(&mut rng, n);
    let constraints = sizes
        .iter()
        .enumerate()
        .map(|(b, &s)| random_constraint(&mut rng, s, b))
        .collect();
    let inst =
        ProblemInstance::new(GroundSet::disjoint(&sizes), Boxed(f), constraints, true).unwrap();
    (kind, inst)
}

/// Up to three possibly overlapping scopes of one to four items over a
/// ground set of at most eight items.
pub fn overlapping_instance(seed: u64) -> (ObjKind, ProblemInstance) {
    let mut rng = rng(seed);
    let n = rng.random_range(1..=8usize);
    let k = rng.random_range(1..=3usize);
    let mut scopes: Vec<Vec<usize>> = vec![Vec::new(); k];
    // Every item lands in one scope, then scopes pick up extra items.
    for v in 0..n {
        let open: Vec<usize> = (0..k).filter(|&i| scopes[i].len() < 4).collect();
        let i = if open.is_empty() {
            rng.random_range(0..k)
        } else {
            open[rng.random_range(0..open.len())]
        };
        scopes[i].push(v);
    }
    for scope in scopes.iter_mut() {
        for v in 0..n {
            if scope.len() < 4 && !scope.contains(&v) && rng.random_bool(0.3) {
                scope.push(v);
            }
        }
        if scope.is_empty() {
            scope.push(rng.random_range(0..n));
        }
        scope.sort_unstable();
    }
    let names: Vec<Vec<String>> = scopes
        .iter()
        .map(|s| s.iter().map(|v| format!("x{v}")).collect())
        .collect();
    let ground = GroundSet::from_blocks(&names).unwrap();
    // Item ids follow first appearance, so the objective is drawn over the
    // ground set as built.
    let n = ground.len();
    let (kind, f) = random_objective(&mut rng, n);
    let constraints = scopes
        .iter()
        .enumerate()
        .map(|(i, s)| random_constraint(&mut rng, s.len(), i))
        .collect();
    let inst = ProblemInstance::new(ground, Boxed(f), constraints, false).unwrap();
    (kind, inst)
}
