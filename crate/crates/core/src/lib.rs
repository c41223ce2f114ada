//! Dense simulator for the two-state-vector formalism.
//!
//! A closed system is described by a forward-evolving state `|Ψ⟩` prepared
//! at an initial time and a backward-evolving state `⟨Φ|` fixed at a final
//! time. This crate provides:
//!
//! - [`hilbert`]: labeled tensor-product spaces, states, operators, partial
//!   traces and time-ordered propagators.
//! - [`twostate`]: the pair `⟨Φ| |Ψ⟩`, its density operator, two-time
//!   evolution, reduction and weak values.
//! - [`rules`]: the ABL rule, its Born limit and the ensemble-of-final-states
//!   sampler.
//! - [`measurement`]: von Neumann couplings, forward and backward
//!   decoherence, final-boundary branch selection and the built-in
//!   measurement scenarios.
//! - [`robustness`]: partial collapse of product environments, robustness
//!   ratios and their scaling.
//!
//! All computations use `ħ = 1`. Composite indices follow a single
//! convention: the first-listed subsystem is the most significant digit.

pub mod error;
pub mod hilbert;
pub mod measurement;
pub mod robustness;
pub mod rules;
pub mod twostate;

pub use error::{Error, Result};
pub use hilbert::{
    embed_operator, partial_trace, time_ordered_unitary, Operator, PiecewiseHamiltonian,
    PureState, SubsystemLayout, Tensor,
};
pub use num_complex::Complex64;
pub use twostate::{TwoState, TwoStateDensity};

/// Shorthand for building a complex number.
#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
