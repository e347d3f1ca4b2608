//! Inner (boundary-unitary) embedding of matrix-polynomial Schur functions.
//!
//! A finite unitary colligation has a rational inner transfer function, so a
//! non-inner Schur polynomial `g` can never equal such a transfer function
//! off the interpolation nodes.  The classical remedy is a Darlington-type
//! embedding: factor the boundary defect `I - g*g = k*k` (matrix spectral
//! factorization, Wilson's Newton iteration), stack the lossless column
//! `[g; k]`, peel it into degree-one lossless factors, and complete the
//! constant remainder to a unitary.  The product is a square matrix
//! polynomial `G`, unitary on the whole unit circle, whose upper-left corner
//! is exactly `g`.  `G` is rational inner, so the lurking-isometry
//! realization reproduces it everywhere, and the corner of the transfer
//! function reproduces `g` everywhere.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};

use super::realize::complement_basis;
use super::{realize_from_samples, spectral_norm, CMatrix, Colligation, MatrixPolynomial};
use crate::domains::sample_disc;
use crate::error::{Error, Result};

/// Boundary defect below which a polynomial already counts as inner.
pub const INNER_DEFECT_TOL: f64 = 1e-10;

/// Convergence target for the Wilson spectral-factorization iteration.
const WILSON_TOL: f64 = 5e-14;

/// Tikhonov floor added to the defect before factorization so the iteration
/// never meets an exactly singular spectral density.
const DEFECT_FLOOR: f64 = 1e-13;

/// Relative Frobenius cutoff for the effective degree during factor
/// extraction.
const DEGREE_CUTOFF: f64 = 1e-11;

/// Certification tolerance for the embedding (boundary unitarity and corner
/// identity) and for the realized transfer function on fresh samples.
const EMBED_CERT_TOL: f64 = 1e-9;

pub(crate) fn unit_root(m: usize, t: usize) -> C64 {
    C64::from_polar(1.0, std::f64::consts::TAU * t as f64 / m as f64)
}

/// Entrywise forward FFT of matrix values on the equispaced circle grid,
/// normalized so the output are the Fourier coefficients: index `j` holds
/// the coefficient of `e^{ij theta}` (negative frequencies wrap to `m - |j|`).
pub(crate) fn grid_to_coeffs(fft: &Arc<dyn Fft<f64>>, values: &[CMatrix]) -> Vec<CMatrix> {
    let m = values.len();
    let (r, c) = values[0].shape();
    let mut out = vec![CMatrix::zeros(r, c); m];
    let mut buf = vec![C64::new(0.0, 0.0); m];
    let scale = 1.0 / m as f64;
    for i in 0..r {
        for j in 0..c {
            for (t, v) in values.iter().enumerate() {
                buf[t] = v[(i, j)];
            }
            fft.process(&mut buf);
            for t in 0..m {
                out[t][(i, j)] = buf[t] * scale;
            }
        }
    }
    out
}

/// Evaluate a causal coefficient list on the circle grid.
fn coeffs_to_grid(coeffs: &[CMatrix], m: usize) -> Vec<CMatrix> {
    (0..m)
        .map(|t| {
            let z = unit_root(m, t);
            let mut acc = coeffs[coeffs.len() - 1].clone();
            for c in coeffs.iter().rev().skip(1) {
                acc *= z;
                acc += c;
            }
            acc
        })
        .collect()
}

/// Wilson's Newton iteration for the right spectral factor: given the
/// values `r_values` of a Hermitian positive trigonometric polynomial `R` of
/// degree `deg` on the grid, returns polynomial coefficients `K_0..K_deg`
/// with `k(z)* k(z) = R(z)` on the circle and `k` outer.
fn wilson_factor(r_values: &[CMatrix], deg: usize) -> Result<Vec<CMatrix>> {
    let m = r_values.len();
    let dh = r_values[0].nrows();
    let fft = FftPlanner::new().plan_fft_forward(m);

    // the scale must be invariant under unitary conjugation of R (a
    // diagonal-entry maximum is not), or conjugated inputs would start the
    // iteration at different points and converge to different unitary
    // gauges of the factor, breaking the equivariance of the embedding
    let scale = r_values
        .iter()
        .map(|r| r.trace().re / dh as f64)
        .fold(0.0, f64::max)
        .max(DEFECT_FLOOR);
    // constant initial guess keeps the iterate outer
    let mut k_values: Vec<CMatrix> =
        vec![CMatrix::identity(dh, dh) * C64::new(scale.sqrt(), 0.0); m];

    let mut residual = f64::INFINITY;
    for _ in 0..100 {
        // E = k^{-*} R k^{-1} - I, Hermitian on the grid
        let mut e_values = Vec::with_capacity(m);
        residual = 0.0;
        for (kt, rt) in k_values.iter().zip(r_values) {
            let kinv = kt.clone().try_inverse().ok_or_else(|| {
                Error::NumericalFailure("spectral factor iterate became singular".into())
            })?;
            let e = kinv.adjoint() * rt * &kinv - CMatrix::identity(dh, dh);
            residual = residual.max(spectral_norm(&(kt.adjoint() * kt - rt)));
            e_values.push(e);
        }
        if residual <= WILSON_TOL * (1.0 + scale) {
            break;
        }
        // phi = analytic half of E (half weight at lag zero), so that
        // phi + phi* = E; the Newton update is k <- (I + phi) k
        let mut coeffs = grid_to_coeffs(&fft, &e_values);
        coeffs[0] *= C64::new(0.5, 0.0);
        for c in coeffs.iter_mut().take(m).skip(m / 2) {
            c.fill(C64::new(0.0, 0.0));
        }
        let phi_values = coeffs_to_grid(&coeffs[..m / 2], m);
        for (kt, pt) in k_values.iter_mut().zip(&phi_values) {
            let update = (CMatrix::identity(dh, dh) + pt) * &*kt;
            *kt = update;
        }
        // project back onto causal polynomials of the factor degree
        let mut kc = grid_to_coeffs(&fft, &k_values);
        for c in kc.iter_mut().take(m).skip(deg + 1) {
            c.fill(C64::new(0.0, 0.0));
        }
        k_values = coeffs_to_grid(&kc[..deg + 1], m);
    }
    if residual > 1e-10 * (1.0 + scale) {
        return Err(Error::NumericalFailure(format!(
            "spectral factorization stalled at residual {residual:.3e}"
        )));
    }
    let mut kc = grid_to_coeffs(&fft, &k_values);
    kc.truncate(deg + 1);
    Ok(kc)
}

/// Completes the isometric column `c0 = [a; b]` (`2dh x dh`) to a unitary
/// `[c0 | comp]` with the canonical Julia-type block
/// `comp = [(I - aa*)^{1/2}; -ba*(I - aa*)^{-1/2}]`.
///
/// Unlike an arbitrary orthonormal complement, this choice is equivariant
/// under constant unitaries: completing `diag(V, W) c0 V'` yields the
/// complement `diag(V, W) comp V*`.  The extension pipeline relies on this
/// to transform covariantly when the input data is conjugated by fixed
/// unitaries.  If `I - aa*` is numerically singular the formula degenerates
/// and an arbitrary complement is used instead.
fn unitary_completion(c0: &CMatrix) -> CMatrix {
    let dh = c0.ncols();
    let a: CMatrix = c0.view((0, 0), (dh, dh)).into();
    let b: CMatrix = c0.view((dh, 0), (dh, dh)).into();
    let eig = nalgebra::SymmetricEigen::new(&a * a.adjoint());
    let gap = eig
        .eigenvalues
        .iter()
        .map(|l| 1.0 - l)
        .fold(f64::INFINITY, f64::min);
    let comp = if gap > 1e-8 {
        let e = &eig.eigenvectors;
        let mut half = CMatrix::zeros(dh, dh);
        let mut inv_half = CMatrix::zeros(dh, dh);
        for i in 0..dh {
            let d = (1.0 - eig.eigenvalues[i]).max(1e-16);
            half[(i, i)] = C64::new(d.sqrt(), 0.0);
            inv_half[(i, i)] = C64::new(1.0 / d.sqrt(), 0.0);
        }
        let x = e * half * e.adjoint();
        let y = -(&b * a.adjoint()) * (e * inv_half * e.adjoint());
        let mut comp = CMatrix::zeros(2 * dh, dh);
        comp.view_mut((0, 0), (dh, dh)).copy_from(&x);
        comp.view_mut((dh, 0), (dh, dh)).copy_from(&y);
        comp
    } else {
        complement_basis(c0)
    };
    let mut q = CMatrix::zeros(2 * dh, 2 * dh);
    q.view_mut((0, 0), (2 * dh, dh)).copy_from(c0);
    q.view_mut((0, dh), (2 * dh, dh)).copy_from(&comp);
    q
}

/// Inner embedding: returns `(G, r)` where `G` is a square inner matrix
/// polynomial whose upper-left `dh x dh` corner is `g`, and `r` is the
/// number of defect rows/columns added (0 when `g` is already inner and
/// `force_embed` is false, otherwise `dh`).
pub fn inner_embedding(g: &MatrixPolynomial, force_embed: bool) -> Result<(MatrixPolynomial, usize)> {
    let (rows, cols) = g.shape();
    if rows != cols {
        return Err(Error::DimensionMismatch(
            "inner embedding needs square matrix values".into(),
        ));
    }
    let dh = rows;
    let d = g.degree();
    let m = (8 * (d + 1)).next_power_of_two().max(64);

    // boundary defect R = I - g*g (plus a tiny floor), on the grid
    let mut defect_sup = 0.0_f64;
    let mut boundary_sup = 0.0_f64;
    let r_values: Vec<CMatrix> = (0..m)
        .map(|t| {
            let gv = g.eval(unit_root(m, t));
            boundary_sup = boundary_sup.max(spectral_norm(&gv));
            let r = CMatrix::identity(dh, dh) * C64::new(1.0 + DEFECT_FLOOR, 0.0)
                - gv.adjoint() * gv;
            defect_sup = defect_sup.max(spectral_norm(&r));
            r
        })
        .collect();
    if boundary_sup > 1.0 + 1e-9 {
        return Err(Error::NotSchur(format!(
            "boundary sup-norm {boundary_sup} exceeds 1: input is not in the Schur class"
        )));
    }
    if defect_sup <= INNER_DEFECT_TOL + DEFECT_FLOOR {
        if !force_embed {
            return Ok((g.clone(), 0));
        }
        // already inner but a defect block is requested: pad with identity
        let coeffs: Vec<CMatrix> = g
            .coeffs()
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let mut big = CMatrix::zeros(2 * dh, 2 * dh);
                big.view_mut((0, 0), (dh, dh)).copy_from(c);
                if j == 0 {
                    big.view_mut((dh, dh), (dh, dh))
                        .copy_from(&CMatrix::identity(dh, dh));
                }
                big
            })
            .collect();
        return Ok((MatrixPolynomial::new(coeffs)?, dh));
    }

    // lossless column [g; k] with k*k = I - g*g on the circle
    let k_coeffs = wilson_factor(&r_values, d)?;
    let mut col: Vec<CMatrix> = (0..=d)
        .map(|j| {
            let mut c = CMatrix::zeros(2 * dh, dh);
            c.view_mut((0, 0), (dh, dh)).copy_from(&g.coeffs()[j]);
            c.view_mut((dh, 0), (dh, dh)).copy_from(&k_coeffs[j]);
            c
        })
        .collect();

    // peel degree-one lossless factors V(z) = (I - vv*) + z vv* from the
    // left; each step removes one dimension from the range of the leading
    // coefficient, so the loop terminates after at most dh * degree steps
    let max_norm = col.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut factors: Vec<nalgebra::DVector<C64>> = Vec::new();
    let guard = 2 * dh * (d + 1) + 4;
    loop {
        let mdeg = (0..col.len())
            .rev()
            .find(|&j| col[j].norm() > DEGREE_CUTOFF * max_norm)
            .unwrap_or(0);
        if mdeg == 0 {
            break;
        }
        if factors.len() > guard {
            return Err(Error::NumericalFailure(
                "lossless factor extraction did not terminate".into(),
            ));
        }
        // dominant range direction of the leading coefficient, via the
        // Hermitian eigenproblem of C_m C_m* (the complex SVD loses several
        // digits on rank-deficient coefficients, which poisons the column)
        let gram = &col[mdeg] * col[mdeg].adjoint();
        let eig = nalgebra::SymmetricEigen::new(gram);
        let top = (0..eig.eigenvalues.len())
            .max_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap())
            .ok_or_else(|| Error::NumericalFailure("empty eigenproblem".into()))?;
        let v: nalgebra::DVector<C64> = eig.eigenvectors.column(top).into();
        // the peeling identity C(z) = V(z) C'(z) + v (v* C_0) is exact only
        // when v is orthogonal to range(C_0); paraunitarity gives that up to
        // the factorization residual, which is not small relative to
        // noise-scale leading coefficients, so enforce it by projection
        // (the range projector is basis-free, keeping the step equivariant)
        let qo = col[0].clone().qr().q();
        let v_perp = &v - &qo * (qo.adjoint() * &v);
        let vn = v_perp.norm();
        if vn < 0.5 {
            // the leading coefficient lies inside range(C_0): it is spectral
            // factorization noise, safe to drop outright
            if col[mdeg].norm() > 1e-8 * max_norm {
                return Err(Error::NumericalFailure(
                    "lossless factor extraction met a degenerate leading coefficient".into(),
                ));
            }
            col.truncate(mdeg);
            while col.len() > 1 && col.last().unwrap().norm() <= DEGREE_CUTOFF * max_norm {
                col.pop();
            }
            continue;
        }
        let v = v_perp / C64::new(vn, 0.0);
        // C_j <- (I - vv*) C_j + vv* C_{j+1}
        for j in 0..=mdeg {
            let mut shift = -(v.adjoint() * &col[j]);
            if j < mdeg {
                shift += v.adjoint() * &col[j + 1];
            }
            col[j] += &v * shift;
        }
        // the new leading coefficient (I - vv*) C_m keeps degree m with one
        // less range dimension; only trim coefficients once they vanish
        while col.len() > 1 && col.last().unwrap().norm() <= DEGREE_CUTOFF * max_norm {
            col.pop();
        }
        factors.push(v);
    }

    // constant remainder must be an isometry; clean it up by polar rounding
    let c0 = col[0].clone();
    if spectral_norm(&(c0.adjoint() * &c0 - CMatrix::identity(dh, dh))) > 1e-8 {
        return Err(Error::NumericalFailure(
            "lossless column did not reduce to an isometry".into(),
        ));
    }
    let svd = c0.svd(true, true);
    let c0 = svd.u.unwrap() * svd.v_t.unwrap();
    let q = unitary_completion(&c0);

    // G(z) = V_1(z) ... V_m(z) Q, multiplied out as a matrix polynomial
    let mut coeffs: Vec<CMatrix> = vec![q];
    for v in factors.iter().rev() {
        let mut next = vec![CMatrix::zeros(2 * dh, 2 * dh); coeffs.len() + 1];
        for (j, c) in coeffs.iter().enumerate() {
            let vc = v * (v.adjoint() * c);
            next[j] += c - &vc;
            next[j + 1] += vc;
        }
        coeffs = next;
    }
    let big_g = MatrixPolynomial::new(coeffs)?;

    // certify: boundary unitarity and the corner identity
    let mc = (4 * (big_g.degree() + 1)).next_power_of_two().max(256);
    for t in 0..mc {
        let gv = big_g.eval(unit_root(mc, t));
        let res = spectral_norm(&(gv.adjoint() * &gv - CMatrix::identity(2 * dh, 2 * dh)));
        if res > EMBED_CERT_TOL {
            return Err(Error::NumericalFailure(format!(
                "inner embedding failed boundary unitarity ({res:.3e})"
            )));
        }
    }
    for lam in sample_disc(64, 20260823) {
        let corner: CMatrix = big_g.eval(lam).view((0, 0), (dh, dh)).into();
        let res = spectral_norm(&(corner - g.eval(lam)));
        if res > EMBED_CERT_TOL {
            return Err(Error::NumericalFailure(format!(
                "inner embedding failed the corner identity ({res:.3e})"
            )));
        }
    }
    Ok((big_g, dh))
}

/// Exact realization through the inner embedding: returns a unitary
/// colligation on `(dh + r) + dK` dimensions whose transfer function equals
/// the embedding `G` everywhere on the disc (certified on fresh samples),
/// so its upper-left `dh x dh` corner equals `g` everywhere.
pub fn realize_exact(
    g: &MatrixPolynomial,
    n_nodes: usize,
    tol: f64,
    force_embed: bool,
) -> Result<(Colligation, usize)> {
    let (big_g, r) = inner_embedding(g, force_embed)?;
    let mut n = n_nodes.max(2 * (big_g.degree() + 1)).max(8);
    let cert = tol.max(EMBED_CERT_TOL);
    let fresh = sample_disc(64, 20260824);
    let mut last_err = None;
    for attempt in 0..3 {
        let nodes = super::chebyshev_nodes(n);
        let values: Vec<CMatrix> = nodes.iter().map(|&l| big_g.eval(l)).collect();
        // The node interpolation check inside `realize_from_samples` can miss
        // `cert` marginally for high-degree embeddings; the binding contract
        // is the fresh-sample certification below, so allow some slack here
        // and retry with more nodes when either check fails.
        match realize_from_samples(&nodes, &values, 10.0 * cert) {
            Ok(col) => {
                let worst = fresh
                    .iter()
                    .map(|&l| {
                        spectral_norm(&(col.transfer_classical(l).unwrap() - big_g.eval(l)))
                    })
                    .fold(0.0, f64::max);
                if worst <= cert {
                    return Ok((col, r));
                }
                last_err = Some(Error::NumericalFailure(format!(
                    "exact realization missed fresh samples by {worst:.3e}"
                )));
            }
            Err(e) => last_err = Some(e),
        }
        if attempt < 2 {
            n *= 2;
        }
    }
    Err(last_err.unwrap())
}
