//! Construction and verification of Fiedler pencils for Rosenbrock system
//! matrices of multivariable state-space systems.
//!
//! A system is described by the block matrix
//!
//! ```text
//! S(λ) = [ A(λ)  -B   ]
//!        [  C    D(λ) ]
//! ```
//!
//! with `A(λ)` an `n×n` regular matrix polynomial, `D(λ)` an `m×m` matrix
//! polynomial, and constant coupling matrices `B`, `C`. The crate builds the
//! Fiedler factor family of `S(λ)`, assembles the pencil `λ𝕄_d − 𝕄_σ` for an
//! arbitrary factor ordering `σ`, and checks — structurally, algebraically and
//! spectrally — that every such pencil is a linearization of `S(λ)` that
//! preserves the state/output block structure.
//!
//! Modules:
//! - [`matpoly`]: dense complex matrix polynomials (evaluation, Horner shifts,
//!   interpolated determinants, unimodularity and regularity tests).
//! - [`rosenbrock`]: the system matrix, its transfer function and the
//!   determinant-interpolation oracle for invariant zeros.
//! - [`fiedler`]: Fiedler factors, orderings and their consecution–inversion
//!   structure, pencil assembly (product and operation-free), companion forms,
//!   corner-structure checks and the block transpose.
//! - [`equivalence`]: auxiliary unimodular families and the constructive
//!   reduction of a Fiedler pencil to `I ⊕ S(λ) ⊕ I`, with certificates.
//! - [`spectra`]: pencil eigenvalues, spectrum comparison against the oracle,
//!   eigenvector recovery from the first companion form.
//! - [`random`]: seeded generation of test systems.

pub mod equivalence;
pub mod fiedler;
pub mod matpoly;
pub mod random;
pub mod rosenbrock;
pub mod spectra;

pub use matpoly::{CMatrix, Cx, MatrixPolynomial, ScalarPolynomial};
pub use rosenbrock::SystemMatrix;
