//! `L^p` norms, down norms `L^p↓` and tilde norms `L̃^p`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::constructions::{chain_integrals, least_core_decreasing_majorant, level_function, LevelResult};
use crate::error::{Error, Result};
use crate::par::Execution;
use crate::random::{random_core_decreasing, random_signed, SeedTree};
use crate::space::{CoredSpace, FunctionOnU, MeasureSpace};

/// An exponent `p ∈ [1, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

impl Exponent {
    pub const ONE: Exponent = Exponent::Finite(1.0);

    pub fn new(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Ok(Exponent::Infinite)
        } else if p >= 1.0 && p.is_finite() {
            Ok(Exponent::Finite(p))
        } else {
            Err(Error::BadExponent(p))
        }
    }

    /// `p' = p/(p-1)`, with `1 ↔ ∞` mapped explicitly.
    pub fn conjugate(self) -> Self {
        match self {
            Exponent::Infinite => Exponent::ONE,
            Exponent::Finite(1.0) => Exponent::Infinite,
            Exponent::Finite(p) => Exponent::Finite(p / (p - 1.0)),
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Infinite => f64::INFINITY,
        }
    }

    pub fn is_one(self) -> bool {
        self == Exponent::ONE
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Exponent::Infinite),
            other => Exponent::new(other.parse().map_err(|_| Error::BadExponent(f64::NAN))?),
        }
    }
}

/// A rearrangement invariant norm on functions over a weighted point set.
///
/// Down and tilde norms of any such `X` are `‖f^o‖_X` and `‖g̃‖_X`; only the
/// `L^p` scale ships.
pub trait RearrangementInvariantNorm: Sync {
    fn norm(&self, weights: &[f64], values: &[f64]) -> f64;
}

impl RearrangementInvariantNorm for Exponent {
    fn norm(&self, weights: &[f64], values: &[f64]) -> f64 {
        match *self {
            Exponent::Infinite => values.iter().fold(0.0, |acc: f64, v| acc.max(v.abs())),
            Exponent::Finite(1.0) => weights.iter().zip(values).map(|(w, v)| w * v.abs()).sum(),
            Exponent::Finite(p) => {
                let scale = values.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()));
                if scale == 0.0 {
                    return 0.0;
                }
                let s: f64 = weights.iter().zip(values).map(|(w, v)| w * (v.abs() / scale).powf(p)).sum();
                scale * s.powf(1.0 / p)
            }
        }
    }
}

fn check_len(space: &MeasureSpace, f: &FunctionOnU) -> Result<()> {
    if f.len() != space.len() {
        return Err(Error::LengthMismatch { expected: space.len(), found: f.len() });
    }
    Ok(())
}

/// Weighted `‖f‖_{L^p_μ}`; `p = ∞` is the maximum over points.
pub fn lp_norm(space: &MeasureSpace, f: &FunctionOnU, p: Exponent) -> Result<f64> {
    check_len(space, f)?;
    Ok(p.norm(space.weights(), f.values()))
}

/// Why a down norm has the value it has.
#[derive(Debug, Clone, PartialEq)]
pub enum DownWitness {
    /// `p = 1`: the constant function 1 attains the supremum.
    ConstantOne,
    /// `p = ∞`: the chain set with the largest mean of `|f|`.
    ChainSet { chain_index: usize, points: Vec<usize> },
    /// `1 < p < ∞`: the level function.
    Level(LevelResult),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DownNorm {
    pub norm: f64,
    pub witness: DownWitness,
}

/// `‖f‖_{L^p↓}`: `‖f‖_1` for `p = 1`, the largest chain mean of `|f|` for
/// `p = ∞`, and `‖f^o‖_p` in between.
pub fn down_norm(cs: &CoredSpace, f: &FunctionOnU, p: Exponent) -> Result<f64> {
    Ok(down_norm_with_witness(cs, f, p)?.norm)
}

pub fn down_norm_with_witness(cs: &CoredSpace, f: &FunctionOnU, p: Exponent) -> Result<DownNorm> {
    cs.check(f)?;
    match p {
        Exponent::Finite(1.0) => Ok(DownNorm { norm: lp_norm(cs.space(), f, p)?, witness: DownWitness::ConstantOne }),
        Exponent::Infinite => {
            let (chain_index, norm) = max_chain_mean(cs, &f.abs());
            let points = if chain_index == 0 { Vec::new() } else { cs.atoms().chain_set(chain_index - 1).collect() };
            Ok(DownNorm { norm, witness: DownWitness::ChainSet { chain_index, points } })
        }
        Exponent::Finite(_) => {
            let lv = level_function(cs, f)?;
            Ok(DownNorm { norm: p.norm(cs.weights(), lv.level.values()), witness: DownWitness::Level(lv) })
        }
    }
}

/// `max_j μ(A_j)⁻¹ ∫_{A_j} f dμ` with its chain index; `(0, 0)` if `f = 0`.
fn max_chain_mean(cs: &CoredSpace, f: &FunctionOnU) -> (usize, f64) {
    let theta = chain_integrals(cs, f);
    let mut best = (0, 0.0);
    for (j, (&t, &m)) in theta[1..].iter().zip(cs.atoms().cumulative_measures()).enumerate() {
        if t / m > best.1 {
            best = (j + 1, t / m);
        }
    }
    best
}

/// `‖f^o‖_X` for an arbitrary rearrangement invariant `X`.
pub fn down_norm_in<X: RearrangementInvariantNorm + ?Sized>(cs: &CoredSpace, f: &FunctionOnU, x: &X) -> Result<f64> {
    let lv = level_function(cs, f)?;
    Ok(x.norm(cs.weights(), lv.level.values()))
}

/// `‖g‖_{L̃^p} = ‖g̃‖_{L^p}`.
pub fn tilde_norm(cs: &CoredSpace, g: &FunctionOnU, p: Exponent) -> Result<f64> {
    tilde_norm_in(cs, g, &p)
}

pub fn tilde_norm_in<X: RearrangementInvariantNorm + ?Sized>(cs: &CoredSpace, g: &FunctionOnU, x: &X) -> Result<f64> {
    let tilde = least_core_decreasing_majorant(cs, g)?;
    Ok(x.norm(cs.weights(), tilde.values()))
}

/// Falsification probe for `(L^p↓)' = L̃^{p'}`: the largest sampled value of
/// `∫|fg| dμ − ‖f‖_{L^p↓} ‖g‖_{L̃^{p'}}`, which Hölder keeps `≤ 0`.
///
/// Sample `i` draws from stream `"associate_gap"` case `i` of `seed`.
/// Returns `-∞` when `samples == 0`.
pub fn associate_gap(
    cs: &CoredSpace,
    f: &FunctionOnU,
    p: Exponent,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<f64> {
    let down = down_norm(cs, f, p)?;
    let dual = p.conjugate();
    let tree = SeedTree::new(seed);
    let gaps = exec.map(samples, |i| -> Result<f64> {
        let mut rng = tree.rng("associate_gap", i as u64);
        let g = match rng.random_range(0..3u32) {
            0 => random_signed(&mut rng, cs.n(), 5.0),
            1 => random_core_decreasing(&mut rng, cs, 5.0),
            _ => {
                let j = rng.random_range(0..cs.k());
                let mut atom = vec![0.0; cs.k()];
                atom[j] = 1.0;
                cs.atoms().extend(&atom)
            }
        };
        let pairing = cs.integral_product(&f.abs(), &g.abs());
        Ok(pairing - down * tilde_norm(cs, &g, dual)?)
    });
    gaps.into_iter().try_fold(f64::NEG_INFINITY, |acc, g| Ok(acc.max(g?)))
}
