//! Lurking-isometry realization of Schur-class functions on the disc.
//!
//! Given samples `g(l_i)` of a Schur function, the block Pick kernel
//! `K_ij = (I - g(l_i)^* g(l_j)) / (1 - conj(l_i) l_j)` is positive; a
//! pivoted Cholesky factor `K = M^* M` yields vectors `u_i` (the block
//! columns of `M`) with
//!
//! `<h, h'> - <g_j h, g_i h'> = (1 - conj(l_i) l_j) <u_j h, u_i h'>`,
//!
//! so the map `[h; l_i u_i h] -> [g(l_i) h; u_i h]` is isometric on its
//! span and completes to a unitary colligation whose classical transfer
//! function interpolates `g` at the nodes.

use num_complex::Complex64 as C64;

use super::{spectral_norm, Colligation, MatrixPolynomial};
use crate::error::{Error, Result};

/// Rank cutoff for the pivoted Cholesky factorization of the Pick kernel,
/// relative to the largest diagonal entry.
pub const KERNEL_RANK_CUTOFF: f64 = 1e-11;

/// Pivots below this negative threshold mean the kernel is not positive.
const KERNEL_NEG_TOL: f64 = 1e-9;

/// Default radius for interpolation nodes.
const NODE_RADIUS: f64 = 0.8;

/// Chebyshev-distributed interior nodes on `(-r, r)`, never including 0.
pub fn chebyshev_nodes(n: usize) -> Vec<C64> {
    let n = if n % 2 == 1 { n + 1 } else { n };
    (1..=n)
        .map(|k| {
            let t = (2.0 * k as f64 - 1.0) * std::f64::consts::PI / (2.0 * n as f64);
            C64::new(NODE_RADIUS * t.cos(), 0.0)
        })
        .collect()
}

type CMatrix = super::CMatrix;

/// Pivoted Cholesky of a Hermitian positive semidefinite matrix.
/// Returns `m` with `a ~= m^* m`, `m` of shape `rank x n`.
fn pivoted_cholesky(a: &CMatrix, rel_cutoff: f64, neg_tol: f64) -> Result<CMatrix> {
    let n = a.nrows();
    let mut diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    let cutoff = rel_cutoff * diag.iter().cloned().fold(1.0_f64, f64::max);
    let mut cols: Vec<Vec<C64>> = Vec::new();

    loop {
        let (piv, &dmax) = match diag
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.partial_cmp(y.1).unwrap())
        {
            Some(p) => p,
            None => break,
        };
        if dmax < -neg_tol {
            return Err(Error::NotSchur(format!(
                "Pick kernel has a negative pivot {dmax:.3e}"
            )));
        }
        if dmax <= cutoff {
            break;
        }
        let root = dmax.sqrt();
        let mut col: Vec<C64> = (0..n).map(|i| a[(i, piv)]).collect();
        for prev in &cols {
            let f = prev[piv].conj();
            for i in 0..n {
                col[i] -= prev[i] * f;
            }
        }
        for z in col.iter_mut() {
            *z /= root;
        }
        for i in 0..n {
            diag[i] -= col[i].norm_sqr();
        }
        diag[piv] = f64::NEG_INFINITY; // used
        cols.push(col);
        if cols.len() == n {
            break;
        }
    }

    let rank = cols.len();
    // a = L L^* with L columns as computed; return m = L^* (rank x n)
    Ok(CMatrix::from_fn(rank, n, |k, i| cols[k][i].conj()))
}

/// Orthonormal basis of the orthogonal complement of the (orthonormal)
/// columns of `q` in the full space.
pub(crate) fn complement_basis(q: &CMatrix) -> CMatrix {
    let m = q.nrows();
    let r = q.ncols();
    let proj = CMatrix::identity(m, m) - q * q.adjoint();
    let eig = nalgebra::SymmetricEigen::new(proj);
    let mut keep: Vec<usize> = (0..m).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
    keep.sort();
    debug_assert_eq!(keep.len(), m - r);
    let mut out = CMatrix::zeros(m, keep.len());
    for (col, &i) in keep.iter().enumerate() {
        out.set_column(col, &eig.eigenvectors.column(i));
    }
    out
}

/// Realization from samples of a Schur function at interior nodes.
///
/// The caller is responsible for the Schur certificate; `values[i]` must be
/// `g(nodes[i])` for square matrices of a common size.
pub fn realize_from_samples(nodes: &[C64], values: &[CMatrix], tol: f64) -> Result<Colligation> {
    if nodes.is_empty() || nodes.len() != values.len() {
        return Err(Error::DimensionMismatch(
            "need one sample value per node".into(),
        ));
    }
    let dh = values[0].nrows();
    if values.iter().any(|v| v.shape() != (dh, dh)) {
        return Err(Error::DimensionMismatch(
            "sample values must be square of a common size".into(),
        ));
    }
    let n = nodes.len();
    let nd = n * dh;

    // block Pick kernel
    let mut kern = CMatrix::zeros(nd, nd);
    for i in 0..n {
        for j in 0..n {
            let denom = C64::new(1.0, 0.0) - nodes[i].conj() * nodes[j];
            let block = (CMatrix::identity(dh, dh) - values[i].adjoint() * &values[j])
                / denom;
            kern.view_mut((i * dh, j * dh), (dh, dh)).copy_from(&block);
        }
    }
    let m = pivoted_cholesky(&kern, KERNEL_RANK_CUTOFF, KERNEL_NEG_TOL)?;
    let rank = m.nrows();

    // domain and range span matrices on H (+) C^rank
    let dim = dh + rank;
    let mut dom = CMatrix::zeros(dim, nd);
    let mut ran = CMatrix::zeros(dim, nd);
    for i in 0..n {
        let u_i: CMatrix = m.view((0, i * dh), (rank, dh)).into();
        dom.view_mut((0, i * dh), (dh, dh))
            .copy_from(&CMatrix::identity(dh, dh));
        dom.view_mut((dh, i * dh), (rank, dh))
            .copy_from(&(&u_i * nodes[i]));
        ran.view_mut((0, i * dh), (dh, dh)).copy_from(&values[i]);
        ran.view_mut((dh, i * dh), (rank, dh)).copy_from(&u_i);
    }

    // isometry on the domain span, via the SVD of the span matrix
    let svd = dom.clone().svd(true, true);
    let p_full = svd
        .u
        .ok_or_else(|| Error::NumericalFailure("SVD failed".into()))?;
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::NumericalFailure("SVD failed".into()))?;
    let smax = svd.singular_values.max();
    let r = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > smax * 1e-12)
        .count();
    let p_r: CMatrix = p_full.columns(0, r).into();
    let mut x = &ran * v_t.rows(0, r).adjoint();
    for j in 0..r {
        let s = C64::new(1.0 / svd.singular_values[j], 0.0);
        x.column_mut(j).scale_mut(s.re);
    }

    // unitary completion of the isometry, then a polar correction
    let p_perp = complement_basis(&p_r);
    let x_perp = complement_basis(&x);
    if p_perp.ncols() != x_perp.ncols() {
        return Err(Error::NumericalFailure(
            "isometry completion dimensions disagree".into(),
        ));
    }
    let u0 = &x * p_r.adjoint() + &x_perp * p_perp.adjoint();
    let polar = u0.svd(true, true);
    let u = polar.u.unwrap() * polar.v_t.unwrap();

    let col = Colligation::from_unitary(&u, dh)?;
    let mut worst = 0.0_f64;
    for (lam, val) in nodes.iter().zip(values) {
        let t = col.transfer_classical(*lam)?;
        worst = worst.max(spectral_norm(&(t - val)));
    }
    if worst > tol {
        return Err(Error::NumericalFailure(format!(
            "realization misses the interpolation data by {worst:.3e} (tol {tol:.3e})"
        )));
    }
    Ok(col)
}

/// Realization of a matrix polynomial in the Schur class.
///
/// Certifies `sup ||g|| <= 1 + 1e-10` on 512 boundary samples, interpolates
/// at `n_samples` Chebyshev-distributed interior nodes, and returns a
/// colligation whose classical transfer function matches `g` there to `tol`.
pub fn realize(g: &MatrixPolynomial, n_samples: usize, tol: f64) -> Result<Colligation> {
    let (rows, cols) = g.shape();
    if rows != cols {
        return Err(Error::DimensionMismatch(
            "realization needs square matrix values".into(),
        ));
    }
    let sup = g.boundary_sup_norm(512);
    if sup > 1.0 + 1e-10 {
        return Err(Error::NotSchur(format!(
            "boundary sup-norm {sup} exceeds 1"
        )));
    }
    let nodes = chebyshev_nodes(n_samples.max(2 * (g.degree() + 1)));
    let values: Vec<CMatrix> = nodes.iter().map(|&l| g.eval(l)).collect();
    realize_from_samples(&nodes, &values, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::sample_disc;
    use crate::schur::{random_unitary, unitarity_residual};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn scalar_poly(cs: &[C64]) -> MatrixPolynomial {
        MatrixPolynomial::new(cs.iter().map(|&z| CMatrix::from_element(1, 1, z)).collect())
            .unwrap()
    }

    #[test]
    fn constant_contraction_interpolates_at_nodes() {
        // a constant strict contraction is not inner, so the unitary
        // realization can only match it at the nodes; the everywhere-exact
        // route goes through realize_exact and its inner embedding
        let g0 = CMatrix::from_row_slice(
            2,
            2,
            &[c(0.3, 0.1), c(0.0, 0.0), c(0.2, 0.0), c(-0.4, 0.2)],
        );
        let g = MatrixPolynomial::constant(g0.clone());
        let col = realize(&g, 8, 1e-10).unwrap();
        assert!(col.unitarity_residual() <= 1e-10);
        for lam in chebyshev_nodes(8) {
            let t = col.transfer_classical(lam).unwrap();
            assert!(spectral_norm(&(t - &g0)) < 1e-10);
        }
    }

    #[test]
    fn identity_function_realizes_exactly() {
        let g = scalar_poly(&[c(0.0, 0.0), c(1.0, 0.0)]);
        let col = realize(&g, 8, 1e-10).unwrap();
        assert!(col.unitarity_residual() <= 1e-10);
        for lam in sample_disc(100, 17) {
            let t = col.transfer_classical(lam).unwrap();
            assert!((t[(0, 0)] - lam).norm() < 1e-10, "lambda = {lam}");
        }
    }

    #[test]
    fn random_matrix_polynomial_interpolates_at_nodes() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let tol = 1e-10;
        let raw = MatrixPolynomial::new(
            (0..4)
                .map(|_| random_unitary(2, &mut rng))
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let g = raw.scaled(0.9 / raw.boundary_sup_norm(512));
        let col = realize(&g, 16, tol).unwrap();
        assert!(col.unitarity_residual() <= 1e-10);
        let mut worst = 0.0_f64;
        for lam in chebyshev_nodes(16) {
            let t = col.transfer_classical(lam).unwrap();
            worst = worst.max(spectral_norm(&(t - g.eval(lam))));
        }
        assert!(worst <= tol, "node mismatch {worst:.3e}");
    }

    #[test]
    fn rejects_non_schur_input() {
        let g = scalar_poly(&[c(0.0, 0.0), c(1.2, 0.0)]);
        assert!(matches!(realize(&g, 8, 1e-10), Err(Error::NotSchur(_))));
    }

    #[test]
    fn unimodular_constant_realizes_with_empty_k() {
        let g = scalar_poly(&[c(0.0, 1.0)]);
        let col = realize(&g, 8, 1e-12).unwrap();
        assert_eq!((col.dim_h(), col.dim_k()), (1, 0));
        assert!(unitarity_residual(&col.assemble()) < 1e-12);
    }
}
