//! Exact and numeric verification laboratory for tau-functions of integrable
//! hierarchies and their q-deformed counterparts.
//!
//! The crate is organized in layers:
//!
//! - [`scalars`]: exact rationals and rational functions in the formal
//!   deformation variable `u = q^{1/2}`, plus the q-combinatorics
//!   ([`scalars::qnum`], [`scalars::qfactorial`], ...) used everywhere else.
//! - [`poly`]: a sparse commutative multivariate Laurent-polynomial engine
//!   with exact derivations, multiplicative q-shifts and q-difference
//!   operators.
//! - [`ncring`]: a small noncommutative rewriting engine with declared
//!   quadratic relations and PBW normal forms (FRT coordinate rings,
//!   q-planes, the Borel ring of the universal T-operator).
//! - [`schur`]: classical and q-deformed Schur polynomials, the s -> t time
//!   map and Miwa point multisets.
//! - [`grassmann`]: classical tau-functions from finite moment data,
//!   Toda bilinear identities, Toda-molecule reductions and the
//!   one-parameter-per-root tau in parametrization A.
//! - [`fock`]: a numeric finite free-fermion Fock space (Jordan-Wigner
//!   realization) used as an independent oracle for the correlator
//!   definition of tau and for the operator bilinear identity.
//! - [`sl2q`]: U_q(sl2) Verma modules, classical and quantum SL(2)
//!   bilinear identities, the noncommutative tau in A(SL_q(2)) and the
//!   universal T-operator.
//! - [`fundrep`]: fundamental representations of SL(p) and SL_q(p),
//!   classical and quantum Pluecker identities, determinant tau-functions
//!   and the twisted two-row tau.
//! - [`kos`]: the difference (KOS) hierarchy in q-Schur times.
//! - [`whittaker`]: numerics for Toda/Liouville quantum mechanics
//!   (Macdonald functions, Whittaker integrals, Harish-Chandra asymptotics,
//!   reflection S-matrices) and the exact regular-representation checks.
//! - [`report`]: machine-readable verification reports shared with the CLI.
//!
//! Everything on the exact side is computed over arbitrary-precision
//! rationals; every identity is verified as an exact zero. The numeric side
//! ([`fock`], [`whittaker`]) states explicit tolerances.

pub mod error;
pub mod fock;
pub mod fundrep;
pub mod grassmann;
pub mod kos;
pub mod ncring;
pub mod poly;
pub mod report;
pub mod scalars;
pub mod schur;
pub mod sl2q;
pub mod textio;
pub mod whittaker;

pub use error::Error;
pub use scalars::{ExactScalar, HalfInt};
