use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::expr::{EvalError, ParseError};

/// Which matrix-valued function of a structured system a term belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    K,
    B,
    C,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::K => "K",
            Role::B => "B",
            Role::C => "C",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Eval(#[from] EvalError),

    #[error("coefficient of {role}-term {index}: {source}")]
    Term {
        role: Role,
        index: usize,
        source: EvalError,
    },

    #[error("K(s, p) is numerically singular at s = {s}, p = {param:?} (condition estimate {cond:e})")]
    Singular {
        s: Complex64,
        param: Vec<f64>,
        cond: f64,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("SVD failed to converge on a {rows}x{cols} matrix")]
    SvdFailed { rows: usize, cols: usize },

    #[error("indefinite Gramian: smallest eigenvalue {min_eig:e} below -1e-10 * trace ({trace:e})")]
    IndefiniteGramian { min_eig: f64, trace: f64 },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
