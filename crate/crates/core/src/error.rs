use num_complex::Complex64;
use thiserror::Error;

/// Errors produced by the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point {re} + {im}i is not inside the open unit disk")]
    OutsideDisk { re: f64, im: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A node that is only defined on the disk received an argument outside it.
    #[error("{node} evaluated outside the unit disk at {point}")]
    Domain { node: &'static str, point: Complex64 },

    #[error("non-finite value encountered at {point}")]
    NonFinite { point: Complex64 },

    #[error("map is not a self-map of the disk: |phi({witness})| = {modulus}")]
    NotSelfMap { witness: Complex64, modulus: f64 },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid node at {path}: {message}")]
    Semantic { path: String, message: String },

    #[error("composition operator is not bounded ({0})")]
    NotBounded(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
