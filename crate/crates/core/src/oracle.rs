//! Slow, independent reference computations.
//!
//! Nothing here calls the level function, the hull, or the rearrangement
//! code: the suprema are solved as optimization problems over core
//! decreasing functions and the K-functionals by exhaustive search over
//! splits. They exist to certify the fast paths on small instances.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kfunc::Couple;
use crate::norms::Exponent;
use crate::par::Execution;
use crate::space::{CoredSpace, FunctionOnU};

pub const MAX_PBALL_ATOMS: usize = 6;
pub const MAX_LP_ATOMS: usize = 5;
pub const MAX_EXHAUSTIVE_POINTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Iteration cap for projected ascent.
    pub max_iters: usize,
    /// Cancels long searches with [`Error::DeadlineExceeded`].
    pub deadline: Option<Instant>,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { max_iters: 10_000, deadline: None }
    }
}

impl OracleOptions {
    fn check_deadline(&self) -> Result<()> {
        match self.deadline {
            Some(d) if Instant::now() >= d => Err(Error::DeadlineExceeded),
            _ => Ok(()),
        }
    }
}

/// Weighted least-squares projection onto nonincreasing, nonnegative vectors.
///
/// Pool adjacent violators: a block whose mean rises above its predecessor's
/// is merged into it, then negative pooled means are clipped to zero.
pub fn antitonic_projection(y: &[f64], w: &[f64]) -> Vec<f64> {
    // (weighted sum, weight, length)
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(y.len());
    for (&yi, &wi) in y.iter().zip(w) {
        let mut cur = (yi * wi, wi, 1);
        while let Some(&(s, m, len)) = blocks.last() {
            if cur.0 / cur.1 <= s / m {
                break;
            }
            blocks.pop();
            cur = (cur.0 + s, cur.1 + m, cur.2 + len);
        }
        blocks.push(cur);
    }
    blocks.into_iter().flat_map(|(s, m, len)| std::iter::repeat_n((s / m).max(0.0), len)).collect()
}

/// Maximizes `c·x` subject to `A x ≤ b` over a bounded polytope by
/// enumerating every basis of active constraints. `None` if infeasible.
fn lp_max_by_vertices(c: &[f64], a: &[Vec<f64>], b: &[f64], opts: &OracleOptions) -> Result<Option<f64>> {
    let dim = c.len();
    let m = a.len();
    let mut best: Option<f64> = None;
    let mut subset: Vec<usize> = (0..dim).collect();
    if dim > m {
        return Ok(None);
    }
    loop {
        opts.check_deadline()?;
        let mat = DMatrix::from_fn(dim, dim, |r, col| a[subset[r]][col]);
        let rhs = DVector::from_fn(dim, |r, _| b[subset[r]]);
        if let Some(x) = mat.lu().solve(&rhs) {
            let feasible = a.iter().zip(b).all(|(row, &bi)| {
                let lhs: f64 = row.iter().zip(x.iter()).map(|(r, xi)| r * xi).sum();
                lhs <= bi + 1e-9 * (1.0 + bi.abs())
            });
            if feasible && x.iter().all(|v| v.is_finite()) {
                let value: f64 = c.iter().zip(x.iter()).map(|(ci, xi)| ci * xi).sum();
                best = Some(best.map_or(value, |b| b.max(value)));
            }
        }
        // next combination of `dim` constraint indices out of `m`
        let Some(i) = (0..dim).rev().find(|&i| subset[i] < m - dim + i) else { break };
        subset[i] += 1;
        for j in i + 1..dim {
            subset[j] = subset[j - 1] + 1;
        }
    }
    Ok(best)
}

/// Rows `x_{j+1} - x_j ≤ 0` and `-x_k ≤ 0`.
fn monotone_cone_rows(k: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rows = Vec::with_capacity(k);
    for j in 0..k.saturating_sub(1) {
        let mut r = vec![0.0; k];
        r[j] = -1.0;
        r[j + 1] = 1.0;
        rows.push(r);
    }
    let mut last = vec![0.0; k];
    last[k - 1] = -1.0;
    rows.push(last);
    let b = vec![0.0; rows.len()];
    (rows, b)
}

/// `sup { ∫|f| g dμ : g core decreasing, ‖g‖_{L^q} ≤ 1 }` with `q = p_dual`.
///
/// `q ∈ {1, ∞}` are linear programs solved by vertex enumeration; otherwise
/// projected gradient ascent over the monotone cone followed by a
/// pattern-search refinement on the cone generators.
pub fn sup_decreasing_pball(cs: &CoredSpace, f: &FunctionOnU, p_dual: Exponent, opts: &OracleOptions) -> Result<f64> {
    cs.check(f)?;
    let k = cs.k();
    if k > MAX_PBALL_ATOMS {
        return Err(Error::TooManyAtoms { found: k, limit: MAX_PBALL_ATOMS });
    }
    let v = cs.atom_integrals(&f.abs());
    let w = cs.atoms().atom_weights().to_vec();
    if v.iter().all(|&x| x == 0.0) {
        return Ok(0.0);
    }
    match p_dual {
        Exponent::Infinite => {
            let (mut rows, mut b) = monotone_cone_rows(k);
            let mut top = vec![0.0; k];
            top[0] = 1.0;
            rows.push(top);
            b.push(1.0);
            Ok(lp_max_by_vertices(&v, &rows, &b, opts)?.unwrap_or(0.0))
        }
        Exponent::Finite(1.0) => {
            let (mut rows, mut b) = monotone_cone_rows(k);
            rows.push(w.clone());
            b.push(1.0);
            Ok(lp_max_by_vertices(&v, &rows, &b, opts)?.unwrap_or(0.0))
        }
        Exponent::Finite(q) => pball_ascent(&v, &w, q, opts),
    }
}

fn weighted_q_norm(g: &[f64], w: &[f64], q: f64) -> f64 {
    g.iter().zip(w).map(|(x, wi)| wi * x.powf(q)).sum::<f64>().powf(1.0 / q)
}

fn ratio(v: &[f64], w: &[f64], g: &[f64], q: f64) -> f64 {
    let n = weighted_q_norm(g, w, q);
    if n == 0.0 {
        return 0.0;
    }
    v.iter().zip(g).map(|(a, b)| a * b).sum::<f64>() / n
}

fn pball_ascent(v: &[f64], w: &[f64], q: f64, opts: &OracleOptions) -> Result<f64> {
    let k = v.len();
    let u: Vec<f64> = v.iter().zip(w).map(|(a, b)| a / b).collect();
    // Φ(g) = v·g − Σ w g^q / q is concave on the cone; its maximizer is a
    // positive multiple of the constrained maximizer.
    let phi = |g: &[f64]| -> f64 { g.iter().zip(v).zip(w).map(|((x, vi), wi)| vi * x - wi * x.powf(q) / q).sum() };
    let u_max = u.iter().fold(0.0, |a: f64, &b| a.max(b));
    let scale = u_max.powf(1.0 / (q - 1.0));
    let mut g = vec![scale; k];
    let mut step = 1.0 / ((q - 1.0) * scale.powf(q - 2.0)).max(1e-12);
    let mut value = phi(&g);
    for _ in 0..opts.max_iters {
        opts.check_deadline()?;
        let grad: Vec<f64> = u.iter().zip(&g).map(|(ui, x)| ui - x.powf(q - 1.0)).collect();
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<f64> = g.iter().zip(&grad).map(|(x, d)| x + step * d).collect();
            let next = antitonic_projection(&trial, w);
            let moved: f64 = next.iter().zip(&g).zip(w).map(|((a, b), wi)| wi * (a - b).powi(2)).sum();
            let next_value = phi(&next);
            if next_value >= value + moved / (2.0 * step) - 1e-15 * value.abs() {
                accepted = moved > 0.0 && next_value > value;
                g = next;
                value = next_value;
                step *= 1.5;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    refine_on_generators(v, w, q, &g, opts)
}

/// Coordinate pattern search on `c_j = g_j − g_{j+1} ≥ 0`, halving the step
/// from 1/200 of the largest generator down to round-off.
fn refine_on_generators(v: &[f64], w: &[f64], q: f64, start: &[f64], opts: &OracleOptions) -> Result<f64> {
    let k = start.len();
    let from_generators = |c: &[f64]| -> Vec<f64> {
        let mut g = vec![0.0; k];
        let mut acc = 0.0;
        for j in (0..k).rev() {
            acc += c[j];
            g[j] = acc;
        }
        g
    };
    let mut c: Vec<f64> = (0..k).map(|j| start[j] - start.get(j + 1).copied().unwrap_or(0.0)).collect();
    let mut best = ratio(v, w, &from_generators(&c), q);
    let top = c.iter().fold(0.0, |a: f64, &b| a.max(b)).max(start[0]).max(1e-300);
    let mut h = top / 200.0;
    while h > 1e-13 * top {
        opts.check_deadline()?;
        let mut improved = false;
        for j in 0..k {
            for dir in [1.0, -1.0] {
                let mut trial = c.clone();
                trial[j] = (trial[j] + dir * h).max(0.0);
                let r = ratio(v, w, &from_generators(&trial), q);
                if r > best {
                    best = r;
                    c = trial;
                    improved = true;
                }
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    Ok(best)
}

/// `sup { ∫|f| h dμ : h core decreasing, ∫_A h ≤ ∫_A g for every chain set A }`,
/// as a linear program in the atom values of `h`.
pub fn level_defining_sup(cs: &CoredSpace, f: &FunctionOnU, g: &FunctionOnU, opts: &OracleOptions) -> Result<f64> {
    cs.check(f)?;
    cs.check(g)?;
    let k = cs.k();
    if k > MAX_LP_ATOMS {
        return Err(Error::TooManyAtoms { found: k, limit: MAX_LP_ATOMS });
    }
    if !cs.atoms().is_core_decreasing(g) {
        return Err(Error::GNotDecreasing);
    }
    let v = cs.atom_integrals(&f.abs());
    let w = cs.atoms().atom_weights();
    let g_atoms = cs.atom_integrals(g);
    let (mut rows, mut b) = monotone_cone_rows(k);
    let mut budget = 0.0;
    for (j, gj) in g_atoms.iter().enumerate() {
        budget += gj;
        rows.push((0..k).map(|i| if i <= j { w[i] } else { 0.0 }).collect());
        b.push(budget);
    }
    Ok(lp_max_by_vertices(&v, &rows, &b, opts)?.unwrap_or(0.0))
}

/// Result of an exhaustive split search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExhaustiveK {
    /// Smallest objective over the grid; never below the true K.
    pub value: f64,
    /// Objective-scale grid resolution: the grid minimum exceeds the true K
    /// by at most this much.
    pub resolution: f64,
}

/// Brute-force `K(f, t)` over splits `f₀ + f₁ = |f|` with
/// `f₀(u) ∈ {0, |f(u)|/N, …, |f(u)|}`, `N = grid_per_point`.
pub fn k_exhaustive(
    cs: &CoredSpace,
    f: &FunctionOnU,
    t: f64,
    couple: Couple,
    grid_per_point: usize,
    exec: Execution,
) -> Result<ExhaustiveK> {
    cs.check(f)?;
    let n = cs.n();
    if n > MAX_EXHAUSTIVE_POINTS {
        return Err(Error::TooManyPoints { found: n, limit: MAX_EXHAUSTIVE_POINTS });
    }
    if !(t >= 0.0) {
        return Err(Error::NegativeT(t));
    }
    let grid = grid_per_point.max(1);
    let abs: Vec<f64> = f.values().iter().map(|v| v.abs()).collect();
    let w = cs.weights();
    let atom = cs.atoms().atom_of_point();
    let k = cs.k();
    let total_mass: f64 = w.iter().sum();
    let chain_mass: Vec<f64> = (0..k).map(|j| (0..n).filter(|&u| atom[u] <= j).map(|u| w[u]).sum()).collect();

    let objective = |f0: &[f64]| -> f64 {
        let f1: Vec<f64> = abs.iter().zip(f0).map(|(a, b)| a - b).collect();
        let sup_f1 = f1.iter().fold(0.0, |a: f64, &b| a.max(b));
        match couple {
            Couple::L1Linf => w.iter().zip(f0).map(|(wi, x)| wi * x).sum::<f64>() + t * sup_f1,
            Couple::L1DownInf => {
                let first: f64 = w.iter().zip(f0).map(|(wi, x)| wi * x).sum();
                let second = (0..k)
                    .map(|j| (0..n).filter(|&u| atom[u] <= j).map(|u| w[u] * f1[u]).sum::<f64>() / chain_mass[j])
                    .fold(0.0, f64::max);
                first + t * second
            }
            Couple::TildeL1Linf => {
                // g̃(u) = max |f₀(v)| over v with u ≤ v
                let first: f64 = (0..n)
                    .map(|u| w[u] * (0..n).filter(|&v| atom[u] <= atom[v]).map(|v| f0[v]).fold(0.0, f64::max))
                    .sum();
                first + t * sup_f1
            }
        }
    };

    let per_point = grid + 1;
    let combos = per_point.pow(n as u32);
    let outer = per_point;
    let inner = combos / outer;
    let mins = exec.map(outer, |first| {
        let mut f0 = vec![0.0; n];
        let mut best = f64::INFINITY;
        for rest in 0..inner {
            let mut code = first * inner + rest;
            for u in (0..n).rev() {
                f0[u] = abs[u] * (code % per_point) as f64 / grid as f64;
                code /= per_point;
            }
            best = best.min(objective(&f0));
        }
        best
    });
    let value = mins.into_iter().fold(f64::INFINITY, f64::min);
    let step = abs.iter().fold(0.0, |a: f64, &b| a.max(b)) / grid as f64;
    Ok(ExhaustiveK { value, resolution: 0.5 * step * (total_mass + t) })
}
