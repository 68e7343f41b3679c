//! Level function, least core decreasing majorant and the decomposition
//! family `D_f(γ)` on a cored space.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::halfline::{classical_ldm, classical_level, ConcaveMajorant};
use crate::space::{CoredSpace, FunctionOnU};
use crate::transfer::{q_map, r_map};

#[derive(Debug, Clone, PartialEq)]
pub struct LevelResult {
    /// `f^o`, core decreasing.
    pub level: FunctionOnU,
    /// Leveling intervals, as ranges of atom indices.
    pub blocks: Vec<Range<usize>>,
    pub hull: ConcaveMajorant,
}

/// `f^o = Q((R|f|)^o)`.
pub fn level_function(cs: &CoredSpace, f: &FunctionOnU) -> Result<LevelResult> {
    let rf = r_map(cs, &f.abs())?;
    let (level, hull) = classical_level(rf.values(), cs.atoms().atom_weights())?;
    Ok(LevelResult { level: q_map(cs, &level)?, blocks: hull.blocks.clone(), hull })
}

/// Smallest core decreasing function dominating `|g|`.
pub fn least_core_decreasing_majorant(cs: &CoredSpace, g: &FunctionOnU) -> Result<FunctionOnU> {
    cs.check(g)?;
    let atoms = cs.atoms();
    let atom_max: Vec<f64> =
        (0..atoms.k()).map(|j| atoms.members(j).iter().fold(0.0, |acc: f64, &u| acc.max(g[u].abs()))).collect();
    Ok(atoms.extend(classical_ldm(&atom_max)?.values()))
}

/// `Θ(A_j) = ∫_{A_j} f dμ` for `j = 0..=k`, starting with `Θ(∅) = 0`.
pub fn chain_integrals(cs: &CoredSpace, f: &FunctionOnU) -> Vec<f64> {
    let mut theta = Vec::with_capacity(cs.k() + 1);
    theta.push(0.0);
    let mut acc = 0.0;
    for v in cs.atom_integrals(f) {
        acc += v;
        theta.push(acc);
    }
    theta
}

/// `D_f(γ)` together with the bracketing chain integrals.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionPiece {
    pub d: FunctionOnU,
    pub gamma: f64,
    pub a_gamma: f64,
    /// `+∞` when `γ` exceeds `∫_U f dμ`.
    pub b_gamma: f64,
    /// Chain index of `N_{a_γ}`.
    pub lower_set: usize,
    /// Chain index of `N_{b_γ}` when `D_f(γ)` interpolates.
    pub upper_set: Option<usize>,
}

/// Builds `D_f(γ)` for `f ≥ 0`.
///
/// `N_x` is the smallest chain set with `Θ = x`. When `a_γ < γ < b_γ < ∞`
/// the result interpolates between `χ_{N_{a_γ}}` and `χ_{N_{b_γ}}`,
/// otherwise it is `χ_{N_{a_γ}}`.
pub fn decompose_d(cs: &CoredSpace, f: &FunctionOnU, gamma: f64) -> Result<DecompositionPiece> {
    cs.check(f)?;
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::NegativeGamma(gamma));
    }
    if let Some(index) = f.values().iter().position(|&v| v < 0.0) {
        return Err(Error::NegativeFunction { index, value: f[index] });
    }
    let theta = chain_integrals(cs, f);
    let a_gamma = theta.iter().copied().filter(|&x| x <= gamma).fold(0.0, f64::max);
    let b_gamma = theta.iter().copied().filter(|&x| x >= gamma).fold(f64::INFINITY, f64::min);
    let smallest = |x: f64| theta.iter().position(|&t| t == x).expect("x is a chain integral");
    let lower_set = smallest(a_gamma);

    // per-atom value of D; atom i lies in chain set A_j iff i < j
    let k = cs.k();
    let (atom_values, upper_set): (Vec<f64>, _) = if a_gamma < gamma && b_gamma.is_finite() {
        let upper = smallest(b_gamma);
        let alpha = (b_gamma - gamma) / (b_gamma - a_gamma);
        let vals = (0..k)
            .map(|i| {
                let lo = if i < lower_set { alpha } else { 0.0 };
                let hi = if i < upper { 1.0 - alpha } else { 0.0 };
                lo + hi
            })
            .collect();
        (vals, Some(upper))
    } else {
        ((0..k).map(|i| if i < lower_set { 1.0 } else { 0.0 }).collect(), None)
    };
    Ok(DecompositionPiece { d: cs.atoms().extend(&atom_values), gamma, a_gamma, b_gamma, lower_set, upper_set })
}
