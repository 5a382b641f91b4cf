//! Finite-lattice laboratory for unitary Laurent operators, GGT matrices,
//! conjugate operators and their commutator calculus.
//!
//! Operators live on odd boxes of ℤᵈ with centered coordinates. Spectral
//! work uses periodic boxes; anything that involves the position operator
//! uses open boxes restricted to interior windows.

// `!(x > 0.0)` style guards reject NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arc;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod ggt;
pub mod lattice;
pub mod linalg;
pub mod mourre;
pub mod par;
pub mod spectra;
pub mod symbol;

pub use arc::PhaseArc;
pub use error::{Error, Result};
pub use lattice::{Boundary, LatticeBox, LatticeOperator};
pub use linalg::{CMat, CVec, C64};
pub use symbol::Symbol;
