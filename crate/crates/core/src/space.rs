//! Finite measure spaces carrying an ordered core.
//!
//! A core is a chain `∅ = A_0 ⊂ A_1 ⊂ … ⊂ A_k = U` of point sets. Its atoms
//! `A_j \ A_{j-1}` carry all of the order structure: `u ≤ v` exactly when the
//! atom of `u` comes no later than the atom of `v`.

use std::collections::{BTreeSet, HashSet};
use std::ops::Index;

use crate::error::{Error, Result};

/// Points with strictly positive masses.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSpace {
    ids: Vec<String>,
    weights: Vec<f64>,
}

impl MeasureSpace {
    pub fn new(ids: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        if ids.len() != weights.len() {
            return Err(Error::LengthMismatch { expected: ids.len(), found: weights.len() });
        }
        if ids.is_empty() {
            return Err(Error::EmptySpace);
        }
        let mut seen = HashSet::with_capacity(ids.len());
        for (id, &w) in ids.iter().zip(&weights) {
            if !seen.insert(id.as_str()) {
                return Err(Error::DuplicatePointId(id.clone()));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::NonPositiveWeight { id: id.clone(), weight: w });
            }
        }
        Ok(Self { ids, weights })
    }

    /// Labels the points `u0, u1, …`.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let ids = (0..weights.len()).map(|i| format!("u{i}")).collect();
        Self::new(ids, weights)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    /// μ(set).
    pub fn measure_of<'a>(&self, set: impl IntoIterator<Item = &'a usize>) -> f64 {
        set.into_iter().fold(0.0, |acc, &i| acc + self.weights[i])
    }

    /// The subspace on `keep`, plus the old index of every retained point.
    pub fn restrict(&self, keep: &BTreeSet<usize>) -> Result<(MeasureSpace, Vec<usize>)> {
        let old: Vec<usize> = keep.iter().copied().collect();
        if let Some(&bad) = old.iter().find(|&&i| i >= self.len()) {
            return Err(Error::IndexOutOfRange { index: bad, len: self.len() });
        }
        let ids = old.iter().map(|&i| self.ids[i].clone()).collect();
        let weights = old.iter().map(|&i| self.weights[i]).collect();
        Ok((MeasureSpace::new(ids, weights)?, old))
    }
}

/// A chain of point-index sets in declared order, smallest first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderedCoreSpec {
    pub chain: Vec<BTreeSet<usize>>,
}

impl OrderedCoreSpec {
    pub fn new(chain: Vec<BTreeSet<usize>>) -> Self {
        Self { chain }
    }

    /// Builds the chain from index lists, prepending `∅` when missing.
    pub fn from_lists<I, S>(sets: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: IntoIterator<Item = usize>,
    {
        let mut chain: Vec<BTreeSet<usize>> = sets.into_iter().map(|s| s.into_iter().collect()).collect();
        if chain.first().is_none_or(|s| !s.is_empty()) {
            chain.insert(0, BTreeSet::new());
        }
        Self { chain }
    }

    /// The chain `∅ ⊂ {0} ⊂ {0,1} ⊂ …` of a totally ordered space.
    pub fn singletons(n: usize) -> Self {
        Self::from_lists((1..=n).map(|j| 0..j))
    }

    pub fn union(&self) -> BTreeSet<usize> {
        self.chain.iter().flatten().copied().collect()
    }
}

/// Atoms `A_j \ A_{j-1}` of a validated chain.
#[derive(Debug, Clone, PartialEq)]
pub struct CoreAtoms {
    atom_of_point: Vec<usize>,
    atom_weights: Vec<f64>,
    cumulative: Vec<f64>,
    members: Vec<Vec<usize>>,
}

impl CoreAtoms {
    pub fn k(&self) -> usize {
        self.atom_weights.len()
    }

    pub fn atom_of_point(&self) -> &[usize] {
        &self.atom_of_point
    }

    pub fn atom_of(&self, u: usize) -> usize {
        self.atom_of_point[u]
    }

    pub fn atom_weights(&self) -> &[f64] {
        &self.atom_weights
    }

    /// `μ(A_1) < … < μ(A_k)`.
    pub fn cumulative_measures(&self) -> &[f64] {
        &self.cumulative
    }

    /// Points of atom `j`, ascending.
    pub fn members(&self, j: usize) -> &[usize] {
        &self.members[j]
    }

    /// Points of the chain set `A_{j+1} = atoms 0..=j`.
    pub fn chain_set(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        self.members[..=j].iter().flatten().copied()
    }

    /// `u ≤_A v`: every chain set containing `v` also contains `u`.
    pub fn order_leq(&self, u: usize, v: usize) -> Result<bool> {
        let n = self.atom_of_point.len();
        for i in [u, v] {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, len: n });
            }
        }
        Ok(self.atom_of_point[u] <= self.atom_of_point[v])
    }

    /// Nonnegative, constant on atoms and nonincreasing along the chain.
    pub fn is_core_decreasing(&self, f: &FunctionOnU) -> bool {
        if f.len() != self.atom_of_point.len() || f.values().iter().any(|&x| x < 0.0) {
            return false;
        }
        let mut prev = f64::INFINITY;
        for members in &self.members {
            let first = f[members[0]];
            if members.iter().any(|&u| f[u] != first) || first > prev {
                return false;
            }
            prev = first;
        }
        true
    }

    /// Atom-wise integrals `∫_{atom j} f dμ`.
    pub fn atom_integrals(&self, weights: &[f64], f: &[f64]) -> Vec<f64> {
        self.members.iter().map(|m| m.iter().map(|&u| f[u] * weights[u]).sum()).collect()
    }

    /// Spreads one value per atom onto the points.
    pub fn extend(&self, atom_values: &[f64]) -> FunctionOnU {
        FunctionOnU(self.atom_of_point.iter().map(|&j| atom_values[j]).collect())
    }
}

/// Validates `spec` against `space` and derives the atoms.
pub fn validate_core(space: &MeasureSpace, spec: &OrderedCoreSpec) -> Result<CoreAtoms> {
    let n = space.len();
    for set in &spec.chain {
        if let Some(&bad) = set.iter().find(|&&i| i >= n) {
            return Err(Error::IndexOutOfRange { index: bad, len: n });
        }
    }
    match spec.chain.first() {
        Some(s) if s.is_empty() => {}
        _ => return Err(Error::EmptyFirstMissing),
    }
    for (i, pair) in spec.chain.windows(2).enumerate() {
        if pair[0] == pair[1] {
            return Err(Error::DuplicateChainSet { first: i, second: i + 1 });
        }
        if !pair[0].is_subset(&pair[1]) {
            return Err(Error::NotNested { index: i + 1 });
        }
    }
    let last = spec.chain.last().expect("chain is non-empty");
    if last.len() != n {
        return Err(Error::NotFull { missing: n - last.len() });
    }

    let k = spec.chain.len() - 1;
    let mut atom_of_point = vec![usize::MAX; n];
    let mut members = Vec::with_capacity(k);
    for (j, pair) in spec.chain.windows(2).enumerate() {
        let atom: Vec<usize> = pair[1].difference(&pair[0]).copied().collect();
        for &u in &atom {
            atom_of_point[u] = j;
        }
        members.push(atom);
    }
    let atom_weights: Vec<f64> = members.iter().map(|m| space.measure_of(m)).collect();
    let cumulative = atom_weights
        .iter()
        .scan(0.0, |acc, &w| {
            *acc += w;
            Some(*acc)
        })
        .collect();
    Ok(CoreAtoms { atom_of_point, atom_weights, cumulative, members })
}

/// The canonical maximal chain with the same order relation.
///
/// In a finite space every union or intersection of chain sets is already a
/// chain set, so this only drops repeats (and inserts a missing `∅`) before
/// validating.
pub fn enrich(space: &MeasureSpace, spec: &OrderedCoreSpec) -> Result<OrderedCoreSpec> {
    let mut chain: Vec<BTreeSet<usize>> = Vec::with_capacity(spec.chain.len() + 1);
    if spec.chain.first().is_none_or(|s| !s.is_empty()) {
        chain.push(BTreeSet::new());
    }
    for set in &spec.chain {
        if !chain.contains(set) {
            chain.push(set.clone());
        }
    }
    let out = OrderedCoreSpec::new(chain);
    validate_core(space, &out)?;
    Ok(out)
}

/// `Γ = {0} ∪ {μ(A) : A in the chain}`, strictly increasing.
pub fn gamma_set(atoms: &CoreAtoms) -> Vec<f64> {
    std::iter::once(0.0).chain(atoms.cumulative.iter().copied()).collect()
}

/// One finite real value per point.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionOnU(Vec<f64>);

impl FunctionOnU {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self(values))
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self(vec![c; n])
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

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|&v| v >= 0.0)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self(self.0.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(&a, &b)| f(a, b)).collect())
    }
}

impl Index<usize> for FunctionOnU {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// A measure space together with the atoms of a validated full core.
#[derive(Debug, Clone, PartialEq)]
pub struct CoredSpace {
    space: MeasureSpace,
    atoms: CoreAtoms,
}

impl CoredSpace {
    pub fn new(space: MeasureSpace, spec: &OrderedCoreSpec) -> Result<Self> {
        let atoms = validate_core(&space, spec)?;
        Ok(Self { space, atoms })
    }

    /// Weights `w` with the totally ordered chain of singletons.
    pub fn chain_of_singletons(weights: Vec<f64>) -> Result<Self> {
        let n = weights.len();
        Self::new(MeasureSpace::from_weights(weights)?, &OrderedCoreSpec::singletons(n))
    }

    pub fn space(&self) -> &MeasureSpace {
        &self.space
    }

    pub fn atoms(&self) -> &CoreAtoms {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        self.space.weights()
    }

    pub fn n(&self) -> usize {
        self.space.len()
    }

    pub fn k(&self) -> usize {
        self.atoms.k()
    }

    pub fn function(&self, values: Vec<f64>) -> Result<FunctionOnU> {
        let f = FunctionOnU::new(values)?;
        self.check(&f)?;
        Ok(f)
    }

    pub(crate) fn check(&self, f: &FunctionOnU) -> Result<()> {
        if f.len() != self.n() {
            return Err(Error::LengthMismatch { expected: self.n(), found: f.len() });
        }
        Ok(())
    }

    /// `∫_{atom j} f dμ` for every atom.
    pub fn atom_integrals(&self, f: &FunctionOnU) -> Vec<f64> {
        self.atoms.atom_integrals(self.space.weights(), f.values())
    }

    /// `∫_U f g dμ`.
    pub fn integral_product(&self, f: &FunctionOnU, g: &FunctionOnU) -> f64 {
        self.weights().iter().zip(f.values()).zip(g.values()).map(|((w, a), b)| w * a * b).sum()
    }

    pub fn integral(&self, f: &FunctionOnU) -> f64 {
        self.weights().iter().zip(f.values()).map(|(w, a)| w * a).sum()
    }
}
