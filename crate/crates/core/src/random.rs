//! Seeded random instances for property suites, benches and tests.
//!
//! All randomness descends from one 64-bit seed: every consumer asks the
//! [`SeedTree`] for a generator by name and case index, so cases can be
//! evaluated in any order (or in parallel) and still reproduce exactly.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::space::{CoredSpace, FunctionOnU, MeasureSpace, OrderedCoreSpec};

pub type CaseRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedTree {
    seed: u64,
}

impl SeedTree {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Generator for case `index` of the stream called `name`.
    pub fn rng(&self, name: &str, index: u64) -> CaseRng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&fnv1a(name.as_bytes()).to_le_bytes());
        key[16..24].copy_from_slice(&index.to_le_bytes());
        ChaCha8Rng::from_seed(key)
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}

/// Size limits for generated instances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstanceShape {
    pub max_points: usize,
    pub max_atoms: usize,
}

impl InstanceShape {
    pub const fn new(max_points: usize, max_atoms: usize) -> Self {
        Self { max_points, max_atoms }
    }
}

fn random_weight(rng: &mut CaseRng) -> f64 {
    if rng.random_bool(0.3) {
        f64::from(rng.random_range(1..=4u32))
    } else {
        rng.random_range(0.2..3.0)
    }
}

/// A random space with `1..=max_points` points and a random full chain.
pub fn random_cored_space(rng: &mut CaseRng, shape: InstanceShape) -> CoredSpace {
    let n = rng.random_range(1..=shape.max_points.max(1));
    let k = rng.random_range(1..=shape.max_atoms.clamp(1, n));
    random_cored_space_sized(rng, n, k)
}

/// A random space with exactly `n` points and `k ≤ n` atoms.
pub fn random_cored_space_sized(rng: &mut CaseRng, n: usize, k: usize) -> CoredSpace {
    assert!(1 <= k && k <= n, "need 1 <= k <= n");
    let weights = (0..n).map(|_| random_weight(rng)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut cuts: Vec<usize> = (1..n).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<usize> = cuts.into_iter().take(k - 1).collect();
    cuts.push(n);
    cuts.sort_unstable();
    let chain: Vec<BTreeSet<usize>> = cuts.iter().map(|&c| order[..c].iter().copied().collect()).collect();
    let space = MeasureSpace::from_weights(weights).expect("weights are positive");
    CoredSpace::new(space, &OrderedCoreSpec::from_lists(chain)).expect("generated chain is valid")
}

fn random_value(rng: &mut CaseRng, hi: f64) -> f64 {
    match rng.random_range(0..10u32) {
        0 => 0.0,
        1 | 2 => f64::from(rng.random_range(0..=(hi as u32).max(1))),
        _ => rng.random_range(0.0..hi),
    }
}

/// Nonnegative values in `[0, hi]`, with occasional zeros and ties.
pub fn random_nonnegative(rng: &mut CaseRng, n: usize, hi: f64) -> FunctionOnU {
    FunctionOnU::new((0..n).map(|_| random_value(rng, hi)).collect()).expect("finite")
}

/// Values in `[-hi, hi]`.
pub fn random_signed(rng: &mut CaseRng, n: usize, hi: f64) -> FunctionOnU {
    FunctionOnU::new(
        (0..n)
            .map(|_| {
                let v = random_value(rng, hi);
                if rng.random_bool(0.5) {
                    -v
                } else {
                    v
                }
            })
            .collect(),
    )
    .expect("finite")
}

/// A random core decreasing function with values in `[0, hi]`.
pub fn random_core_decreasing(rng: &mut CaseRng, cs: &CoredSpace, hi: f64) -> FunctionOnU {
    let mut atom_values: Vec<f64> = (0..cs.k()).map(|_| random_value(rng, hi)).collect();
    atom_values.sort_by(|a, b| b.total_cmp(a));
    cs.atoms().extend(&atom_values)
}

/// A random atom-constant function with values in `[0, hi]`.
pub fn random_atom_constant(rng: &mut CaseRng, cs: &CoredSpace, hi: f64) -> FunctionOnU {
    let atom_values: Vec<f64> = (0..cs.k()).map(|_| random_value(rng, hi)).collect();
    cs.atoms().extend(&atom_values)
}
