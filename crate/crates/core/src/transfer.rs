//! Transfer between functions on the cored space and on the half line.
//!
//! `R` averages over atoms, `Q` extends atom values back onto the points.
//! Both preserve chain integrals: `∫_{[0,μ(A)]} Rf dλ = ∫_A f dμ` and
//! `∫_A Qφ dμ = ∫_{[0,μ(A)]} φ dλ` for every chain set `A`.

use crate::error::{Error, Result};
use crate::halfline::{tailored_measure, StepFunction, TailoredMeasure};
use crate::space::{gamma_set, CoredSpace, FunctionOnU};

impl CoredSpace {
    /// `λ` built on `Γ = μ(chain)`.
    pub fn tailored_measure(&self) -> TailoredMeasure {
        tailored_measure(gamma_set(self.atoms())).expect("chain measures are strictly increasing")
    }
}

/// `(Rf)_j = μ(atom j)⁻¹ ∫_{atom j} f dμ`.
pub fn r_map(cs: &CoredSpace, f: &FunctionOnU) -> Result<StepFunction> {
    cs.check(f)?;
    let values =
        cs.atom_integrals(f).into_iter().zip(cs.atoms().atom_weights()).map(|(integral, w)| integral / w).collect();
    StepFunction::new(values)
}

/// `(Qφ)(u) = φ_j` for `u` in atom `j`.
pub fn q_map(cs: &CoredSpace, phi: &StepFunction) -> Result<FunctionOnU> {
    if phi.len() != cs.k() {
        return Err(Error::LengthMismatch { expected: cs.k(), found: phi.len() });
    }
    Ok(cs.atoms().extend(phi.values()))
}
