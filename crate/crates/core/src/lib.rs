//! Structure-preserving interpolatory model reduction for generalized linear
//! parametric systems
//!
//! ```text
//! H(s, p) = C(s, p) K(s, p)⁻¹ B(s, p),   K(s, p) = Σ κᵢ(s, p) Aᵢ  (likewise B, C)
//! ```
//!
//! The reduction samples `K⁻¹B` and `K⁻ᵀCᵀ` at frequency/parameter points,
//! compresses the sampled bases through SVDs of the stacked projected
//! operators `[WᵀA₁V … WᵀAₗV]` and `[WᵀA₁V; …; WᵀAₗV]`, and projects every
//! term, so the reduced system keeps the coefficient functions of the
//! original.
//!
//! This crate is `no_std` (with `alloc`); file formats and the command line
//! live in the `dropmor` crate.

#![no_std]

extern crate alloc;

pub mod analysis;
pub mod benchmarks;
pub mod error;
pub mod expr;
pub mod linalg;
pub mod projection;
pub mod reduce;
pub mod sampling;
pub mod system;

pub use error::{Error, Result, Role};
pub use expr::{parse_coeff, Expr};
pub use linalg::{CMatrix, RMatrix, SparseMatrix, TermMatrix};
pub use num_complex::Complex64;
pub use projection::{BasisForm, ProjectionOptions, ProjectionPair};
pub use reduce::{OrderPolicy, ReducedSystem, Sidedness, SvdReport};
pub use sampling::{SamplePoint, SampleSet, SampleSpec};
pub use system::{StructuredSystem, StructuredTerm, SystemMeta};
