//! Exact arithmetic for orthogonal modular forms of signature (n, 2).
//!
//! The crate builds sparse Fourier expansions of Borcherds products and
//! Gritsenko lifts over the rationals, applies the holomorphic Laplace
//! operator and the associated differential brackets, and certifies
//! congruences of the shape "singular modulo p": every Fourier coefficient
//! a(lambda) with Q(lambda) nonzero mod p vanishes mod p.
//!
//! Layout:
//! * [`exact`] - integer and rational utilities (valuations, factoring,
//!   Bernoulli numbers, divisor sums).
//! * [`series`] - truncated sparse series: q-series, Jacobi forms, and
//!   three-variable expansions on the degree-two tube domain.
//! * [`classical`] - eta, theta and Eisenstein building blocks together
//!   with the weight structure of index-1 Jacobi forms.
//! * [`igusa`] - the degree-two Siegel generators E4, E6, chi10, chi12
//!   seen through the orthogonal group O(3, 2), and the odd forms
//!   Psi5, Phi30, Phi35 derived from them.
//! * [`bracket`] - the Laplace operator and holomorphic Rankin-Cohen
//!   style brackets it induces.
//! * [`congruence`] - certificates for singular-mod-p claims, prime
//!   prediction from bracket coefficients, and the built-in catalog of
//!   reflective products on lattices 2U + R.
//! * [`catalog`] - lattice labels, root system data, and the claim tables
//!   driving the regression engine.
//! * [`selftest`] - the end-to-end criteria gate shared by the test suite
//!   and the command line tool.

pub mod bracket;
pub mod catalog;
pub mod classical;
pub mod congruence;
pub mod exact;
pub mod igusa;
pub mod selftest;
pub mod series;

pub use exact::{Int, Rat};
pub use series::ortho::{Axis, IndexKey, OrthoSeries, Parity};
