//! Exact K-functionals.
//!
//! * `(L¹, L^∞)`: `∫_0^t f*`
//! * `(L¹, L^∞↓)`: `∫_0^t (f^o)*`
//! * `(L̃¹, L^∞)`: `∫_0^t (g̃)*`
//!
//! plus an independent evaluation of the second couple by minimizing over
//! the decomposition family `D_f(γ)`.

use std::fmt;
use std::str::FromStr;

use crate::constructions::{chain_integrals, decompose_d, least_core_decreasing_majorant, level_function};
use crate::error::{Error, Result};
use crate::halfline::{classical_ldm, classical_level, rearrange, StepFunction, TailoredMeasure};
use crate::norms::{down_norm, lp_norm, Exponent};
use crate::par::Execution;
use crate::space::{CoredSpace, FunctionOnU, MeasureSpace};

/// Interior points added to every gap between consecutive chain integrals.
pub const GAP_REFINEMENTS: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Couple {
    /// `(L¹, L^∞)`
    L1Linf,
    /// `(L¹, L^∞↓)`
    L1DownInf,
    /// `(L̃¹, L^∞)`
    TildeL1Linf,
}

impl Couple {
    pub const ALL: [Couple; 3] = [Couple::L1Linf, Couple::L1DownInf, Couple::TildeL1Linf];

    pub fn name(self) -> &'static str {
        match self {
            Couple::L1Linf => "l1-linf",
            Couple::L1DownInf => "l1-dinf",
            Couple::TildeL1Linf => "tl1-linf",
        }
    }
}

impl fmt::Display for Couple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Couple {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Couple::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Instance(format!("unknown couple `{s}` (l1-linf | l1-dinf | tl1-linf)")))
    }
}

fn check_t(t: f64) -> Result<()> {
    if !(t >= 0.0) {
        return Err(Error::NegativeT(t));
    }
    Ok(())
}

/// `K(f, t; L¹, L^∞) = ∫_0^t f*`.
pub fn k_l1_linf(space: &MeasureSpace, f: &FunctionOnU, t: f64) -> Result<f64> {
    check_t(t)?;
    if f.len() != space.len() {
        return Err(Error::LengthMismatch { expected: space.len(), found: f.len() });
    }
    Ok(rearrange(f.abs().values(), space.weights())?.integral_upto(t))
}

/// `K(f, t; L¹, L^∞↓) = ∫_0^t (f^o)*`.
pub fn k_l1_dinf(cs: &CoredSpace, f: &FunctionOnU, t: f64) -> Result<f64> {
    check_t(t)?;
    let lv = level_function(cs, f)?;
    Ok(rearrange(lv.level.values(), cs.weights())?.integral_upto(t))
}

/// `K(g, t; L̃¹, L^∞) = ∫_0^t (g̃)*`.
pub fn k_tl1_linf(cs: &CoredSpace, g: &FunctionOnU, t: f64) -> Result<f64> {
    check_t(t)?;
    let tilde = least_core_decreasing_majorant(cs, g)?;
    Ok(rearrange(tilde.values(), cs.weights())?.integral_upto(t))
}

/// The split `g = g₁ + g_∞` attaining `K(g, t; L̃¹, L^∞)`:
/// `|g₁| = max(0, |g| − y)` with `y = (g̃)*(t)`.
pub fn tl1_linf_optimal_split(cs: &CoredSpace, g: &FunctionOnU, t: f64) -> Result<(FunctionOnU, FunctionOnU)> {
    check_t(t)?;
    let tilde = least_core_decreasing_majorant(cs, g)?;
    let y = rearrange(tilde.values(), cs.weights())?.value_at(t);
    let g1 = g.map(|v| v.signum() * (v.abs() - y).max(0.0));
    let ginf = g.zip_with(&g1, |a, b| a - b);
    Ok((g1, ginf))
}

pub fn k_couple(couple: Couple, cs: &CoredSpace, f: &FunctionOnU, t: f64) -> Result<f64> {
    match couple {
        Couple::L1Linf => k_l1_linf(cs.space(), f, t),
        Couple::L1DownInf => k_l1_dinf(cs, f, t),
        Couple::TildeL1Linf => k_tl1_linf(cs, f, t),
    }
}

/// `K(φ, t; L¹_λ, L^∞_λ↓) = ∫_0^t (φ^o)*` on the half line.
pub fn k_l1_dinf_halfline(m: &TailoredMeasure, phi: &StepFunction, t: f64) -> Result<f64> {
    check_t(t)?;
    let (level, _) = classical_level(phi.abs().values(), m.masses())?;
    Ok(rearrange(level.values(), m.masses())?.integral_upto(t))
}

/// `K(ψ, t; L̃¹_λ, L^∞_λ) = ∫_0^t (ψ̃)*` on the half line.
pub fn k_tl1_linf_halfline(m: &TailoredMeasure, psi: &StepFunction, t: f64) -> Result<f64> {
    check_t(t)?;
    let tilde = classical_ldm(psi.abs().values())?;
    Ok(rearrange(tilde.values(), m.masses())?.integral_upto(t))
}

/// `‖D(γ)|f|‖₁ + t ‖(1 − D(γ))|f|‖_{∞↓}` with `D = D_{|f|}`.
pub fn decomposition_objective(cs: &CoredSpace, f: &FunctionOnU, gamma: f64, t: f64) -> Result<f64> {
    let f = f.abs();
    let piece = decompose_d(cs, &f, gamma)?;
    let low = piece.d.zip_with(&f, |d, v| d * v);
    let high = piece.d.zip_with(&f, |d, v| (1.0 - d) * v);
    Ok(lp_norm(cs.space(), &low, Exponent::ONE)? + t * down_norm(cs, &high, Exponent::Infinite)?)
}

/// Candidate `γ` values for [`k_via_decomposition`].
///
/// On each gap `(a, b)` between consecutive chain integrals of `|f|` both
/// terms of the objective are affine in `γ` per chain set, so the objective is
/// convex piecewise linear there with kinks only where two chain-set lines
/// cross. The grid holds every chain integral, every such crossing and
/// `refinements` equispaced interior points per gap; the minimum over it is
/// the exact infimum.
pub fn decomposition_gamma_grid(cs: &CoredSpace, f: &FunctionOnU, refinements: usize) -> Result<Vec<f64>> {
    cs.check(f)?;
    let theta = chain_integrals(cs, &f.abs());
    let measures = cs.atoms().cumulative_measures();
    let mut distinct: Vec<f64> = theta.clone();
    distinct.dedup();
    let smallest = |x: f64| theta.iter().position(|&t| t == x).expect("chain integral");

    let mut grid = distinct.clone();
    for pair in distinct.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        for r in 1..=refinements {
            grid.push(a + (b - a) * r as f64 / (refinements + 1) as f64);
        }
        let (ia, ib) = (smallest(a), smallest(b));
        // chain set A_j contributes c_j + s d_j with γ = a + s (b - a)
        let lines: Vec<(f64, f64)> = (1..theta.len())
            .map(|j| {
                let lo = theta[j.min(ia)];
                let hi = theta[j.min(ib)];
                ((theta[j] - lo) / measures[j - 1], (lo - hi) / measures[j - 1])
            })
            .collect();
        for (i, &(ci, di)) in lines.iter().enumerate() {
            for &(cj, dj) in &lines[i + 1..] {
                if di != dj {
                    let s = (ci - cj) / (dj - di);
                    if s > 0.0 && s < 1.0 {
                        grid.push(a + s * (b - a));
                    }
                }
            }
        }
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    Ok(grid)
}

/// `min_{γ ∈ grid} ‖D(γ)|f|‖₁ + t ‖(1 − D(γ))|f|‖_{∞↓}`.
pub fn k_via_decomposition(cs: &CoredSpace, f: &FunctionOnU, t: f64, gamma_grid: &[f64]) -> Result<f64> {
    check_t(t)?;
    if gamma_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    gamma_grid.iter().map(|&g| decomposition_objective(cs, f, g, t)).try_fold(f64::INFINITY, |acc, v| Ok(acc.min(v?)))
}

/// A K-functional sampled on a grid of `t` values.
#[derive(Debug, Clone, PartialEq)]
pub struct KCurve {
    pub couple: Couple,
    pub t_grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl KCurve {
    pub fn is_nondecreasing(&self, tol: f64) -> bool {
        self.values.windows(2).all(|p| p[1] >= p[0] - tol)
    }

    /// Slopes between consecutive samples never increase.
    pub fn is_concave(&self, tol: f64) -> bool {
        let slopes: Vec<f64> =
            self.t_grid.windows(2).zip(self.values.windows(2)).map(|(t, v)| (v[1] - v[0]) / (t[1] - t[0])).collect();
        slopes.windows(2).all(|s| s[1] <= s[0] + tol)
    }
}

/// Parses `a:b:n` into `n` equispaced values from `a` to `b`.
pub fn parse_t_range(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::BadGrid(format!("expected a:b:n, got `{spec}`"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [a, b, n] = parts.as_slice() else { return Err(bad()) };
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    match n {
        0 => Err(Error::BadGrid("n must be positive".into())),
        1 => Ok(vec![a]),
        _ => Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()),
    }
}

/// Evaluates the K-functional of `couple` on `t_grid`, which must be
/// nonnegative and strictly increasing, and checks the curve is
/// nondecreasing and concave.
pub fn k_curve(couple: Couple, cs: &CoredSpace, f: &FunctionOnU, t_grid: &[f64], exec: Execution) -> Result<KCurve> {
    if let Some(&t) = t_grid.iter().find(|&&t| !(t >= 0.0) || !t.is_finite()) {
        return Err(Error::BadGrid(format!("t = {t} is not a nonnegative real")));
    }
    if t_grid.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::BadGrid("t grid must be strictly increasing".into()));
    }
    let values =
        exec.map(t_grid.len(), |i| k_couple(couple, cs, f, t_grid[i])).into_iter().collect::<Result<Vec<_>>>()?;
    let curve = KCurve { couple, t_grid: t_grid.to_vec(), values };
    let scale = 1e-9 * curve.values.iter().fold(1.0, |acc: f64, v| acc.max(v.abs()));
    if !curve.is_nondecreasing(scale) {
        return Err(Error::CurveShape("monotonicity"));
    }
    if !curve.is_concave(scale) {
        return Err(Error::CurveShape("concavity"));
    }
    Ok(curve)
}
