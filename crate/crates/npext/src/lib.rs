//! Norm-preserving holomorphic extension of matrix-valued Schur-class
//! functions from two crossed analytic discs to the symmetrized bidisc or
//! the diamond, plus the numerical machinery around it: realization of
//! Schur functions by unitary colligations, a discretized Bergman-space
//! minimal-norm linear extension, and the computations showing that no
//! linear isometric extension exists on the symmetrized bidisc.

pub mod bergman;
pub mod counterexample;
pub mod domains;
pub mod error;
pub mod extension;
pub mod schur;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
