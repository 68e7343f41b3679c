//! Level functions, least core decreasing majorants, down-space norms and
//! exact K-functionals on finite measure spaces carrying an ordered core.
//!
//! A cored space is a weighted finite set together with a full chain
//! `∅ ⊂ A₁ ⊂ … ⊂ A_k = U`. The maps [`r_map`] and [`q_map`] move functions
//! between the space and a discrete measure on the half-line, where the
//! classical level-function and majorant constructions apply.
//!
//! ```
//! use downcore::{level_function, CoredSpace, down_norm, Exponent};
//!
//! let cs = CoredSpace::chain_of_singletons(vec![1.0, 2.0, 1.0]).unwrap();
//! let f = cs.function(vec![4.0, 1.0, 2.0]).unwrap();
//! let level = level_function(&cs, &f).unwrap().level;
//! assert!((level.values()[1] - 4.0 / 3.0).abs() < 1e-15);
//! assert_eq!(down_norm(&cs, &f, Exponent::Infinite).unwrap(), 4.0);
//! ```

// Comparisons like `!(x >= 0.0)` are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod check;
pub mod constructions;
pub mod error;
pub mod halfline;
pub mod instance;
pub mod kfunc;
pub mod norms;
pub mod oracle;
pub mod par;
pub mod random;
pub mod space;
pub mod transfer;

pub use constructions::{
    chain_integrals, decompose_d, least_core_decreasing_majorant, level_function, DecompositionPiece, LevelResult,
};
pub use error::{Error, Result};
pub use halfline::{tailored_measure, StepFunction, TailoredMeasure};
pub use instance::Instance;
pub use kfunc::{k_couple, k_curve, k_l1_dinf, k_l1_linf, k_tl1_linf, Couple, KCurve};
pub use norms::{down_norm, down_norm_with_witness, lp_norm, tilde_norm, DownNorm, DownWitness, Exponent};
pub use par::Execution;
pub use space::{enrich, gamma_set, validate_core, CoredSpace, FunctionOnU, MeasureSpace, OrderedCoreSpec};
pub use transfer::{q_map, r_map};
