//! Complex linear algebra over labeled tensor-product spaces.

mod hamiltonian;
mod index;
mod layout;
mod operator;
mod state;

pub use hamiltonian::{expm_hermitian, time_ordered_unitary, PiecewiseHamiltonian};
pub use index::IndexSplit;
pub use layout::{Subsystem, SubsystemLayout, DENSE_CAP};
pub use operator::{embed_operator, partial_trace, partial_trace_outer, Operator};
pub use state::{inner_product, PureState};
pub(crate) use state::apply_local_raw;

/// Relative tolerance for hermiticity checks.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Absolute tolerance for `U†U = I`.
pub const UNITARY_TOL: f64 = 1e-10;
/// Tolerance for orthonormality checks.
pub const ORTHO_TOL: f64 = 1e-12;

/// Kronecker product of two objects on disjoint layouts.
pub trait Tensor<Rhs = Self> {
    type Output;
    fn tensor(&self, rhs: &Rhs) -> crate::Result<Self::Output>;
}
