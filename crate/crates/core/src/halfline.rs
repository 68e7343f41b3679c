//! The tailored atomic measure on `[0, ∞)` and the classical machinery for
//! nonincreasing functions there: rearrangement, least concave majorant,
//! level function and least decreasing majorant.
//!
//! The measure `λ` puts mass `γ_j - γ_{j-1}` at each `γ_j` of
//! `Γ = {0 = γ_0 < γ_1 < … < γ_k}`, so that `λ([0, x]) = a(x)`, the largest
//! element of `Γ` not exceeding `x`. Functions on the half line are known
//! `λ`-a.e. once their value at each `γ_j`, `j ≥ 1`, is known.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SLOPE_REL_TOL: f64 = 1e-12;
const SLOPE_ABS_TOL: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub struct TailoredMeasure {
    gamma: Vec<f64>,
    masses: Vec<f64>,
}

/// Builds `λ` from `Γ`, which must start at 0 and strictly increase.
pub fn tailored_measure(gamma: Vec<f64>) -> Result<TailoredMeasure> {
    if let Some(&value) = gamma.iter().find(|&&g| g < 0.0) {
        return Err(Error::NegativeEntry { value });
    }
    if let Some(index) = gamma.iter().position(|g| !g.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    match gamma.first() {
        Some(&0.0) => {}
        Some(&value) => return Err(Error::MissingOrigin { value }),
        None => return Err(Error::MissingOrigin { value: f64::NAN }),
    }
    if let Some(i) = gamma.windows(2).position(|p| p[1] <= p[0]) {
        return Err(Error::NotSorted { index: i + 1 });
    }
    let masses = gamma.windows(2).map(|p| p[1] - p[0]).collect();
    Ok(TailoredMeasure { gamma, masses })
}

impl TailoredMeasure {
    pub fn k(&self) -> usize {
        self.masses.len()
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    /// Atom locations `γ_1, …, γ_k`.
    pub fn positions(&self) -> &[f64] {
        &self.gamma[1..]
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn total_mass(&self) -> f64 {
        *self.gamma.last().expect("gamma holds the origin")
    }

    /// `a(x) = sup([0, x] ∩ Γ)`.
    pub fn a(&self, x: f64) -> f64 {
        let idx = self.gamma.partition_point(|&g| g <= x);
        if idx == 0 {
            0.0
        } else {
            self.gamma[idx - 1]
        }
    }

    /// `b(x) = inf([x, ∞) ∩ Γ)`, infinite above `γ_k`.
    pub fn b(&self, x: f64) -> f64 {
        let idx = self.gamma.partition_point(|&g| g < x);
        self.gamma.get(idx).copied().unwrap_or(f64::INFINITY)
    }

    /// `λ([0, x])` by summing atom masses.
    pub fn measure_upto(&self, x: f64) -> f64 {
        self.positions().iter().zip(&self.masses).filter(|(&p, _)| p <= x).fold(0.0, |acc, (_, m)| acc + m)
    }

    /// Index of the atom at `γ_{j+1}` containing `x`, if `x` lies in `Γ \ {0}`.
    pub fn atom_at(&self, x: f64) -> Option<usize> {
        self.positions().iter().position(|&p| p == x)
    }

    fn check(&self, phi: &StepFunction) -> Result<()> {
        if phi.len() != self.k() {
            return Err(Error::LengthMismatch { expected: self.k(), found: phi.len() });
        }
        Ok(())
    }

    /// `∫_{[0,x]} φ dλ`.
    pub fn integrate_upto(&self, phi: &StepFunction, x: f64) -> Result<f64> {
        self.check(phi)?;
        Ok(self
            .positions()
            .iter()
            .zip(&self.masses)
            .zip(phi.values())
            .take_while(|((&p, _), _)| p <= x)
            .fold(0.0, |acc, ((_, m), v)| acc + m * v))
    }

    /// `∫ φ ψ dλ` over the whole half line.
    pub fn integral_product(&self, phi: &StepFunction, psi: &StepFunction) -> Result<f64> {
        self.check(phi)?;
        self.check(psi)?;
        Ok(self.masses.iter().zip(phi.values()).zip(psi.values()).map(|((m, a), b)| m * a * b).sum())
    }

    pub fn l1_norm(&self, phi: &StepFunction) -> Result<f64> {
        self.check(phi)?;
        Ok(self.masses.iter().zip(phi.values()).map(|(m, v)| m * v.abs()).sum())
    }

    pub fn linf_norm(&self, phi: &StepFunction) -> Result<f64> {
        self.check(phi)?;
        Ok(phi.values().iter().fold(0.0, |acc: f64, v| acc.max(v.abs())))
    }

    /// `sup_x λ([0,x])⁻¹ ∫_{[0,x]} |φ| dλ`, the norm of `L^∞_λ↓`.
    pub fn down_linf_norm(&self, phi: &StepFunction) -> Result<f64> {
        self.check(phi)?;
        let mut acc = 0.0;
        let mut best: f64 = 0.0;
        for ((m, g), v) in self.masses.iter().zip(self.positions()).zip(phi.values()) {
            acc += m * v.abs();
            best = best.max(acc / g);
        }
        Ok(best)
    }
}

/// `∫_{[0,x]} φ dλ = Σ_{γ_j ≤ a(x)} mass_j φ_j`.
pub fn integrate_lambda(m: &TailoredMeasure, phi: &StepFunction, x: f64) -> Result<f64> {
    m.integrate_upto(phi, x)
}

/// One value per atom of `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction(Vec<f64>);

impl StepFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn abs(&self) -> Self {
        Self(self.0.iter().map(|v| v.abs()).collect())
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.0.windows(2).all(|p| p[1] <= p[0])
    }

    pub fn to_record(&self, m: &TailoredMeasure) -> StepFunctionRecord {
        StepFunctionRecord { positions: m.positions().to_vec(), masses: m.masses().to_vec(), values: self.0.clone() }
    }
}

/// Wire form of a [`StepFunction`] together with its measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunctionRecord {
    pub positions: Vec<f64>,
    pub masses: Vec<f64>,
    pub values: Vec<f64>,
}

impl StepFunctionRecord {
    pub fn into_parts(self) -> Result<(TailoredMeasure, StepFunction)> {
        if self.masses.len() != self.positions.len() {
            return Err(Error::LengthMismatch { expected: self.positions.len(), found: self.masses.len() });
        }
        let gamma = std::iter::once(0.0).chain(self.positions.iter().copied()).collect();
        let m = tailored_measure(gamma)?;
        let phi = StepFunction::new(self.values)?;
        m.check(&phi)?;
        Ok((m, phi))
    }
}

/// A nonincreasing step function on `[0, total)`, as `(length, value)` pieces.
#[derive(Debug, Clone, PartialEq)]
pub struct RearrangedFunction {
    pieces: Vec<(f64, f64)>,
}

impl RearrangedFunction {
    pub fn pieces(&self) -> &[(f64, f64)] {
        &self.pieces
    }

    pub fn total_length(&self) -> f64 {
        self.pieces.iter().map(|p| p.0).sum()
    }

    /// `f*(t)`, right-continuous; zero from the total length on.
    pub fn value_at(&self, t: f64) -> f64 {
        let mut start = 0.0;
        for &(len, v) in &self.pieces {
            start += len;
            if t < start {
                return v;
            }
        }
        0.0
    }

    /// `∫_0^t f*`.
    pub fn integral_upto(&self, t: f64) -> f64 {
        let mut left = t.max(0.0);
        let mut acc = 0.0;
        for &(len, v) in &self.pieces {
            if left <= 0.0 {
                break;
            }
            let take = len.min(left);
            acc += take * v;
            left -= take;
        }
        acc
    }

    pub fn integral(&self) -> f64 {
        self.pieces.iter().map(|(l, v)| l * v).sum()
    }
}

/// Decreasing rearrangement of a nonnegative function given by values and masses.
pub fn rearrange(values: &[f64], masses: &[f64]) -> Result<RearrangedFunction> {
    if values.len() != masses.len() {
        return Err(Error::LengthMismatch { expected: values.len(), found: masses.len() });
    }
    for (index, &value) in values.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFinite { index });
        }
        if value < 0.0 {
            return Err(Error::NegativeValue { index, value });
        }
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
    let mut pieces: Vec<(f64, f64)> = Vec::with_capacity(order.len());
    for i in order {
        match pieces.last_mut() {
            Some(last) if last.1 == values[i] => last.0 += masses[i],
            _ => pieces.push((masses[i], values[i])),
        }
    }
    Ok(RearrangedFunction { pieces })
}

/// Upper concave hull of `(0,0), (W_1,V_1), …, (W_k,V_k)`.
///
/// `blocks[b]` is the range of atoms covered by hull segment `b`; `slopes[b]`
/// is its slope and `knots[b]` its right end abscissa `W`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcaveMajorant {
    pub knots: Vec<f64>,
    pub slopes: Vec<f64>,
    pub blocks: Vec<Range<usize>>,
}

impl ConcaveMajorant {
    pub fn slope_per_atom(&self) -> Vec<f64> {
        self.blocks.iter().zip(&self.slopes).flat_map(|(b, &s)| b.clone().map(move |_| s)).collect()
    }

    /// The hull evaluated at `x ∈ [0, W_k]`.
    pub fn value_at(&self, x: f64) -> f64 {
        let mut left = 0.0;
        let mut acc = 0.0;
        for (&knot, &slope) in self.knots.iter().zip(&self.slopes) {
            if x <= knot {
                return acc + slope * (x - left);
            }
            acc += slope * (knot - left);
            left = knot;
        }
        acc
    }
}

fn slope_not_below(later: f64, earlier: f64) -> bool {
    let tol = (SLOPE_REL_TOL * later.abs().max(earlier.abs())).max(SLOPE_ABS_TOL);
    later >= earlier - tol
}

struct Block {
    atoms: Range<usize>,
    mass: f64,
    value: f64,
}

impl Block {
    fn slope(&self) -> f64 {
        self.value / self.mass
    }
}

/// Hull from per-atom increments; a single left-to-right stack pass.
fn hull_from_increments(masses: &[f64], increments: &[f64]) -> ConcaveMajorant {
    let mut stack: Vec<Block> = Vec::with_capacity(masses.len());
    for (j, (&m, &v)) in masses.iter().zip(increments).enumerate() {
        let mut cur = Block { atoms: j..j + 1, mass: m, value: v };
        while let Some(prev) = stack.last() {
            if !slope_not_below(cur.slope(), prev.slope()) {
                break;
            }
            let prev = stack.pop().expect("checked non-empty");
            cur = Block {
                atoms: prev.atoms.start..cur.atoms.end,
                mass: prev.mass + cur.mass,
                value: prev.value + cur.value,
            };
        }
        stack.push(cur);
    }
    let mut knots = Vec::with_capacity(stack.len());
    let mut w = 0.0;
    for b in &stack {
        w += b.mass;
        knots.push(w);
    }
    ConcaveMajorant {
        knots,
        slopes: stack.iter().map(Block::slope).collect(),
        blocks: stack.into_iter().map(|b| b.atoms).collect(),
    }
}

/// Least concave majorant of the cumulative data `(W_j, V_j)` with origin `(0,0)`.
pub fn least_concave_majorant(cum_mass: &[f64], cum_value: &[f64]) -> Result<ConcaveMajorant> {
    if cum_mass.len() != cum_value.len() {
        return Err(Error::LengthMismatch { expected: cum_mass.len(), found: cum_value.len() });
    }
    let mut prev = 0.0;
    for (index, &w) in cum_mass.iter().enumerate() {
        if !(w > prev) || !w.is_finite() {
            return Err(Error::NotIncreasingMass { index });
        }
        prev = w;
    }
    if let Some(index) = cum_value.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    let diffs = |xs: &[f64]| -> Vec<f64> {
        xs.iter()
            .scan(0.0, |p, &x| {
                let d = x - *p;
                *p = x;
                Some(d)
            })
            .collect()
    };
    Ok(hull_from_increments(&diffs(cum_mass), &diffs(cum_value)))
}

fn check_nonnegative(values: &[f64]) -> Result<()> {
    for (index, &value) in values.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFinite { index });
        }
        if value < 0.0 {
            return Err(Error::NegativeValue { index, value });
        }
    }
    Ok(())
}

/// Level function `φ^o` of a nonnegative density `φ` against atom masses.
///
/// Within each hull block `φ^o` is the mass-weighted average of `φ`.
pub fn classical_level(values: &[f64], masses: &[f64]) -> Result<(StepFunction, ConcaveMajorant)> {
    if values.len() != masses.len() {
        return Err(Error::LengthMismatch { expected: masses.len(), found: values.len() });
    }
    check_nonnegative(values)?;
    if let Some(index) = masses.iter().position(|&m| !(m > 0.0 && m.is_finite())) {
        return Err(Error::NotIncreasingMass { index });
    }
    let increments: Vec<f64> = values.iter().zip(masses).map(|(v, m)| v * m).collect();
    let hull = hull_from_increments(masses, &increments);
    Ok((StepFunction(hull.slope_per_atom()), hull))
}

/// Least decreasing majorant: the suffix running maximum.
pub fn classical_ldm(values: &[f64]) -> Result<StepFunction> {
    check_nonnegative(values)?;
    let mut out = values.to_vec();
    for j in (0..out.len().saturating_sub(1)).rev() {
        out[j] = out[j].max(out[j + 1]);
    }
    Ok(StepFunction(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measure_from_gamma() {
        let m = tailored_measure(vec![0.0, 1.0, 3.0, 4.0]).unwrap();
        assert_eq!(m.masses(), &[1.0, 2.0, 1.0]);
        assert_eq!(m.positions(), &[1.0, 3.0, 4.0]);
        assert_eq!(m.a(2.0), 1.0);
        assert_eq!(m.b(2.0), 3.0);
        assert_eq!(m.a(3.0), 3.0);
        assert_eq!(m.b(3.0), 3.0);
        assert_eq!(m.b(4.5), f64::INFINITY);
        assert_eq!(m.a(9.0), 4.0);
    }

    #[test]
    fn measure_rejects_bad_gamma() {
        assert!(matches!(tailored_measure(vec![0.0, 2.0, 1.0]), Err(Error::NotSorted { index: 2 })));
        assert!(matches!(tailored_measure(vec![0.0, 1.0, 1.0]), Err(Error::NotSorted { .. })));
        assert!(matches!(tailored_measure(vec![-1.0, 0.0]), Err(Error::NegativeEntry { .. })));
        assert!(matches!(tailored_measure(vec![1.0, 2.0]), Err(Error::MissingOrigin { .. })));
    }

    #[test]
    fn integrate_basic() {
        let m = tailored_measure(vec![0.0, 1.0, 3.0, 4.0]).unwrap();
        let one = StepFunction::new(vec![1.0; 3]).unwrap();
        assert_eq!(integrate_lambda(&m, &one, 4.0).unwrap(), 4.0);
        let phi = StepFunction::new(vec![5.0, 7.0, 11.0]).unwrap();
        assert_eq!(integrate_lambda(&m, &phi, 2.0).unwrap(), 5.0);
        assert_eq!(integrate_lambda(&m, &phi, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn rearrange_two_points_and_constant() {
        let r = rearrange(&[1.0, 3.0], &[1.0, 1.0]).unwrap();
        assert_eq!(r.pieces(), &[(1.0, 3.0), (1.0, 1.0)]);
        let c = rearrange(&[2.0, 2.0, 2.0], &[0.5, 1.0, 2.0]).unwrap();
        assert_eq!(c.pieces(), &[(3.5, 2.0)]);
        assert_eq!(r.value_at(0.5), 3.0);
        assert_eq!(r.value_at(1.0), 1.0);
        assert_eq!(r.value_at(2.0), 0.0);
        assert_eq!(r.integral_upto(1.5), 3.5);
        assert!(matches!(rearrange(&[1.0], &[1.0, 2.0]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn hull_of_worked_data() {
        let h = least_concave_majorant(&[1.0, 3.0, 4.0], &[4.0, 6.0, 8.0]).unwrap();
        assert_eq!(h.knots, vec![1.0, 4.0]);
        assert_eq!(h.blocks, vec![0..1, 1..3]);
        assert_eq!(h.slopes[0], 4.0);
        assert!((h.slopes[1] - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn hull_single_atom_and_concave_data() {
        let h = least_concave_majorant(&[2.0], &[3.0]).unwrap();
        assert_eq!(h.slopes, vec![1.5]);
        let h = least_concave_majorant(&[1.0, 2.0, 3.0], &[3.0, 5.0, 6.0]).unwrap();
        assert_eq!(h.blocks, vec![0..1, 1..2, 2..3]);
        assert_eq!(h.slopes, vec![3.0, 2.0, 1.0]);
        assert!(matches!(least_concave_majorant(&[1.0, 1.0], &[0.0, 0.0]), Err(Error::NotIncreasingMass { index: 1 })));
    }

    #[test]
    fn equal_slopes_share_a_block() {
        let h = least_concave_majorant(&[1.0, 2.0, 3.0], &[2.0, 4.0, 5.0]).unwrap();
        assert_eq!(h.blocks, vec![0..2, 2..3]);
    }

    #[test]
    fn level_of_worked_density() {
        let (level, hull) = classical_level(&[4.0, 1.0, 2.0], &[1.0, 2.0, 1.0]).unwrap();
        assert_eq!(hull.blocks, vec![0..1, 1..3]);
        let expected = [4.0, 4.0 / 3.0, 4.0 / 3.0];
        for (a, b) in level.values().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        let decreasing = [5.0, 3.0, 3.0, 1.0];
        let (same, _) = classical_level(&decreasing, &[1.0, 0.5, 2.0, 1.0]).unwrap();
        assert_eq!(same.values(), &decreasing);
        assert!(matches!(classical_level(&[-1.0], &[1.0]), Err(Error::NegativeValue { .. })));
    }

    #[test]
    fn ldm_is_suffix_max() {
        assert_eq!(classical_ldm(&[1.0, 3.0, 2.0]).unwrap().values(), &[3.0, 3.0, 2.0]);
        assert_eq!(classical_ldm(&[4.0, 2.0, 1.0]).unwrap().values(), &[4.0, 2.0, 1.0]);
        assert!(classical_ldm(&[0.0, -2.0]).is_err());
    }

    #[test]
    fn halfline_down_norm() {
        let m = tailored_measure(vec![0.0, 1.0, 3.0, 4.0]).unwrap();
        let phi = StepFunction::new(vec![4.0, 1.0, 2.0]).unwrap();
        assert_eq!(m.down_linf_norm(&phi).unwrap(), 4.0);
    }
}
