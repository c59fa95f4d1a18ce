//! Verification workbench for the minimal representation attached to a
//! non-Euclidean Jordan algebra.
//!
//! The crate is split along the same lines as the mathematics:
//!
//! * [`catalog`]: classification data (multiplicities `d`, `e`, rank `n`,
//!   dual pairs) for the eleven group families.
//! * [`liealg`]: exact rational matrix models of `g = n̄ ⊕ l ⊕ n` for
//!   `O(2n,2n)` and `GL(2n,R)`, with Cartan involution, invariant form,
//!   sl2 triples, the character `ν`, the Casimir-type operator and stabilizers.
//! * [`bessel`]: `K_τ`, the radial profile `φ_τ(z) = K_τ(√z)/√z^τ` and the
//!   operator `Dφ = 4zφ'' + 4(τ+1)φ' − φ`.
//! * [`orbit`]: sampling of the minimal orbit, radial quadrature and Monte
//!   Carlo estimates of orbit integrals such as the Fourier transform `Φ`.
//! * [`sphver`]: the finite identities behind K-invariance of `Φ` and the
//!   direct Monte Carlo cancellation test.
//! * [`tensor`]: stabilizers of rank-`k` points and dual pair audits.
//!
//! Everything structural runs in exact arithmetic; floating point enters only
//! in `bessel`, `quadrature` and `orbit`. The crate is `no_std` (with `alloc`)
//! so that it carries no IO; the `minrep` crate provides the CLI and file
//! formats.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod bessel;
pub mod catalog;
pub mod error;
pub mod linalg;
pub mod liealg;
pub mod montecarlo;
pub mod orbit;
pub mod poly;
pub mod quadrature;
pub mod rational;
pub mod report;
pub mod sphver;
pub mod tensor;

mod fmath;

pub use error::{Error, Result};
pub use rational::{HalfInt, Q};
pub use report::{CheckKind, CheckOutcome, Status, VerificationReport};
