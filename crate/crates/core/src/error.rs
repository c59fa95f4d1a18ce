use alloc::string::String;

use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("no matrix model for {family} (available: O_2n2n, GL_2n(R))")]
    UnsupportedFamily { family: String },

    #[error("rank n = {n} outside the supported range {min}..={max}")]
    RankOutOfRange { n: usize, min: usize, max: usize },

    #[error("element is not in the span of the model basis")]
    NotInSpan,

    #[error("element has components outside grade {expected}")]
    WrongGrade { expected: i8 },

    #[error("k = {k} outside the admissible range {min}..{max_exclusive}")]
    KOutOfRange {
        k: usize,
        min: usize,
        max_exclusive: usize,
    },

    #[error("{family} has no dual pair column")]
    NoDualPair { family: String },

    #[error("argument z = {z} outside the domain ({reason})")]
    Domain { z: f64, reason: &'static str },

    #[error("quadrature did not converge: estimate {estimate}, error {error}")]
    Nonconvergent { estimate: f64, error: f64 },

    #[error("radial integral diverges: pole order 4τ = {four_tau} is not below dn-1 = {radial}")]
    Divergent { four_tau: i64, radial: i64 },

    #[error("broken model invariant: {0}")]
    Invariant(String),

    #[error("degenerate pairing: {0}")]
    Degenerate(String),

    #[error("parse error: {0}")]
    Parse(String),
}
