//! Kirkwood-Dirac joint quasi-probabilities for pairs of non-commuting observables on
//! finite-dimensional Hilbert spaces.
//!
//! * [`hilbert`]: states, bases, operators, product traces and seeded random generation.
//! * [`kd`]: the KD transform, its inverse, marginals, weak values and the total-probability
//!   decomposition.
//! * [`audit`]: pluggable operator families and mechanical checks of the marginal,
//!   eigenstate and orthogonality requirements, plus the span test against ordered
//!   projector products.
//! * [`wigner`]: the odd-dimensional discrete Wigner function and its double-slit failure.
//! * [`weak`]: a von Neumann pointer simulation that reads weak values off a pointer.
//! * [`io`]: the `kdq/1` JSON and CSV formats used by the `kdq` binary.

pub mod audit;
pub mod error;
pub mod hilbert;
pub mod io;
pub mod kd;
pub mod tolerance;
pub mod weak;
pub mod wigner;

pub use error::{Error, Result};
pub use hilbert::{
    computational_basis, fourier_basis, make_pure_density, overlap, product_trace, random_basis,
    random_density, random_state, random_state_orthogonal_to, DensityOperator, LinearOperator,
    OrthonormalBasis, StateVector, C64,
};
pub use kd::{
    conditional_weak_value, kd_inverse, kd_marginal_a, kd_marginal_b, kd_operator, kd_transform,
    total_probability, KdDistribution, Ordering,
};
pub use tolerance::Tolerances;
