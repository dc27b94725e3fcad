//! Spherical Hecke algebra of PGL₂ over a non-archimedean local field with
//! residue cardinality `q`, as a computational object.
//!
//! The algebra 𝓗(G,K) of compactly supported K-bi-invariant functions on
//! G = PGL₂(F) under convolution is commutative, generated by the coset sum
//! T(𝔭), and isomorphic (as a *-probability space with the Plancherel state)
//! to polynomials under a compactly supported orthogonality measure on [−2,2].
//! This crate realizes both sides and the maps between them:
//!
//! * [`exact`] — exact scalars: rationals and the quadratic extension
//!   ℚ(√q, √(q+1)) that all structure constants live in.
//! * [`hecke`] — algebra elements in five bases, exact convolution, the
//!   *-involution, inner products, and the radial action of T′(𝔭).
//! * [`coset`] — explicit left-coset enumeration for small prime q: the
//!   ground-truth oracle certifying volumes and the convolution recurrence.
//! * [`fock`] — the interacting Fock space picture: Jacobi coefficients,
//!   creation/annihilation/preservation operators, moment computations.
//! * [`spectral`] — the Kesten orthogonality measure: density, Stieltjes
//!   transform (closed form and continued fraction), quadrature, orthogonal
//!   polynomials.
//! * [`plancherel`] — spherical functions, the Plancherel measure, and the
//!   spherical Fourier transform pair.
//! * [`report`] / [`verify`] — machine-readable verification reports and the
//!   full cross-check battery the CLI and acceptance suite run.

pub mod coset;
pub mod exact;
pub mod fock;
pub mod hecke;
pub mod plancherel;
pub mod report;
pub mod spectral;
pub mod verify;

use thiserror::Error;

/// Value-level failures. Mixing different `q` contexts in arithmetic is a
/// programming error and panics instead of returning one of these.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("division by zero in exact arithmetic")]
    DivisionByZero,
    #[error("resource limit: {0}")]
    ResourceLimit(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("accuracy failure: {0}")]
    Accuracy(String),
    #[error("truncation too small: {0}")]
    Truncation(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
