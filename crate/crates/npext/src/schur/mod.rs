//! Schur-class function machinery: Möbius and magic functions, matrix
//! polynomials, unitary colligations with their transfer functions, the
//! lurking-isometry realization, and unitary eigendecomposition.

pub mod colligation;
pub mod eig;
pub mod inner;
pub mod moebius;
pub mod poly;
pub mod realize;

pub use colligation::{pad_pair, Colligation};
pub use eig::{random_unitary, unitary_eig, UnitaryEigen};
pub use inner::{inner_embedding, realize_exact};
pub use moebius::{operator_moebius, MagicFunction, MoebiusMap};
pub use poly::MatrixPolynomial;
pub use realize::{chebyshev_nodes, realize, realize_from_samples};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

pub type CMatrix = DMatrix<C64>;

/// Spectral-norm tolerance for accepting a block operator as unitary.
pub const UNITARITY_TOL: f64 = 1e-10;

/// Largest singular value.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

/// `||U^* U - I||` in spectral norm.
pub fn unitarity_residual(u: &CMatrix) -> f64 {
    let n = u.ncols();
    spectral_norm(&(u.adjoint() * u - CMatrix::identity(n, n)))
}
