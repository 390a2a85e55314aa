//! Numerical toolkit for two-mode beam-splitter interference in a truncated
//! Fock space.
//!
//! The central question the crate answers: which pairs of input fields exit a
//! beam splitter as *factorizable* (completely uncorrelated) output fields?
//! The answer — Gaussian inputs with identical second moments, differing at
//! most by displacements — is verified here along three independent routes:
//!
//! * full density-matrix simulation in a truncated Fock basis ([`fock`]),
//! * symplectic propagation of means and covariances ([`gaussian`]),
//! * the exponent-tensor machinery: symmetric coefficient tensors of the
//!   operator exponent and their vanishing-cross-term conditions ([`tensor`]).
//!
//! Phase-space representations (Wigner grids, the thermal-mix P function and
//! the conditional non-Gaussian state it engineers) live in [`wigner`];
//! end-to-end scenario orchestration in [`experiments`].
//!
//! Quadrature convention throughout: `q = (a† + a)/√2`, `p = i(a† − a)/√2`,
//! so the vacuum variance is 1/2 and `[q, p] = i`.

// Force linkage of the system BLAS/LAPACK provider.
use openblas_src as _;

pub mod acceptance;
pub mod descriptor;
pub mod error;
pub mod experiments;
pub mod fock;
pub mod gaussian;
pub mod linalg;
pub mod tensor;
pub mod wigner;

pub use descriptor::StateKind;
pub use error::{Error, Result};
pub use fock::{BeamSplitter, DensityMatrix, Mode};
pub use gaussian::{CovarianceState, GaussianParams};
pub use tensor::{ExponentSeries, MomentTensor};
