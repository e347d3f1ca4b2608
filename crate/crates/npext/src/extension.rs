//! Norm-preserving extension of matrix-valued Schur functions given on two
//! crossed discs to the whole domain.
//!
//! Pipeline: divide each branch function by the branch parameter, embed the
//! quotient into a square inner matrix polynomial (so a finite unitary
//! colligation can reproduce it exactly), realize both embeddings, pad the
//! colligations to a common space `M = H (+) K1 (+) K2`, diagonalize
//! `U = U1^* U2 = W diag(tau) W^*`, and extend each eigendirection with the
//! scalar Schur function that maps the first branch to `lambda` and the
//! second to `tau lambda`.  The extension value is the upper-left corner of
//! the feedback transform of `U1 W diag(g_k(z)) W^*` with respect to the
//! splitting `H (+) K`; on the branches the feedback transform collapses to
//! `lambda G_i(lambda)`, whose corner is the branch function exactly.

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::domains::{branch_point, in_diamond, in_g2, sample_disc, Branch, DomainTag};
use crate::error::{Error, Result};
use crate::schur::inner::{grid_to_coeffs, unit_root};
use crate::schur::{
    operator_moebius, pad_pair, realize_exact, spectral_norm, unitary_eig, CMatrix, Colligation,
    MagicFunction, MatrixPolynomial,
};

/// Tolerance for the two branches agreeing at the base point.
pub const BASE_CONSISTENCY_TOL: f64 = 1e-12;

/// Strict-contraction margin required of the base-point value.
pub const BASE_CONTRACTION_MARGIN: f64 = 1e-6;

const BOUNDARY_CERT_SAMPLES: usize = 512;
const BOUNDARY_CERT_TOL: f64 = 1e-10;

/// Degree cap for the polynomial approximation of a Möbius-normalized
/// branch; the coefficients decay geometrically with the analyticity radius,
/// so hitting the cap means the data is too close to the boundary case.
const MOEBIUS_DEGREE_CAP: usize = 512;

/// Schur-class data on a crossed-disc variety: the two branch restrictions
/// as matrix polynomials of the branch parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "VarietyFunctionRepr", into = "VarietyFunctionRepr")]
pub struct VarietyFunction {
    branch1: MatrixPolynomial,
    branch2: MatrixPolynomial,
    domain: DomainTag,
}

impl VarietyFunction {
    pub fn new(
        branch1: MatrixPolynomial,
        branch2: MatrixPolynomial,
        domain: DomainTag,
    ) -> Result<Self> {
        if branch1.shape() != branch2.shape() {
            return Err(Error::DimensionMismatch(format!(
                "branch shapes differ: {:?} vs {:?}",
                branch1.shape(),
                branch2.shape()
            )));
        }
        let (r, c) = branch1.shape();
        if r != c {
            return Err(Error::DimensionMismatch(
                "branch values must be square matrices".into(),
            ));
        }
        let mismatch = spectral_norm(&(branch1.coeffs()[0].clone() - &branch2.coeffs()[0]));
        if mismatch > BASE_CONSISTENCY_TOL {
            return Err(Error::InvalidParameter(format!(
                "branches disagree at the base point by {mismatch:.3e} (tolerance {BASE_CONSISTENCY_TOL:.0e})"
            )));
        }
        for (name, b) in [("branch1", &branch1), ("branch2", &branch2)] {
            let sup = b.boundary_sup_norm(BOUNDARY_CERT_SAMPLES);
            if sup > 1.0 + BOUNDARY_CERT_TOL {
                return Err(Error::NotSchur(format!(
                    "{name} has boundary sup-norm {sup}"
                )));
            }
        }
        Ok(VarietyFunction {
            branch1,
            branch2,
            domain,
        })
    }

    pub fn domain(&self) -> DomainTag {
        self.domain
    }

    pub fn dim(&self) -> usize {
        self.branch1.shape().0
    }

    pub fn branch(&self, branch: Branch) -> &MatrixPolynomial {
        match branch {
            Branch::Branch1 => &self.branch1,
            Branch::Branch2 => &self.branch2,
        }
    }

    pub fn eval_branch(&self, branch: Branch, lambda: C64) -> CMatrix {
        self.branch(branch).eval(lambda)
    }

    /// The common value at the base point.
    pub fn base_value(&self) -> CMatrix {
        self.branch1.coeffs()[0].clone()
    }
}

#[derive(Serialize, Deserialize)]
struct VarietyFunctionRepr {
    domain: DomainTag,
    branch1: MatrixPolynomial,
    branch2: MatrixPolynomial,
}

impl From<VarietyFunction> for VarietyFunctionRepr {
    fn from(f: VarietyFunction) -> Self {
        VarietyFunctionRepr {
            domain: f.domain,
            branch1: f.branch1,
            branch2: f.branch2,
        }
    }
}

impl TryFrom<VarietyFunctionRepr> for VarietyFunction {
    type Error = Error;

    fn try_from(r: VarietyFunctionRepr) -> Result<Self> {
        VarietyFunction::new(r.branch1, r.branch2, r.domain)
    }
}

/// The scalar Schur function of the domain interpolating `lambda` on the
/// first branch and `tau lambda` on the second.
#[derive(Debug, Clone, Copy)]
pub enum ScalarExtender {
    /// The magic function `Phi_tau` of the symmetrized bidisc.
    G2(MagicFunction),
    /// `z -> z1 + tau z2` on the diamond.
    Diamond { tau: C64 },
}

pub fn branch_extender(domain: DomainTag, tau: C64) -> Result<ScalarExtender> {
    match domain {
        DomainTag::G2 => Ok(ScalarExtender::G2(MagicFunction::new(tau)?)),
        DomainTag::Diamond => {
            if (tau.norm() - 1.0).abs() > 1e-14 {
                return Err(Error::InvalidParameter("tau must be unimodular".into()));
            }
            Ok(ScalarExtender::Diamond { tau })
        }
    }
}

impl ScalarExtender {
    pub fn eval(&self, z: [C64; 2]) -> Result<C64> {
        match self {
            ScalarExtender::G2(phi) => phi.eval(z[0], z[1]),
            ScalarExtender::Diamond { tau } => Ok(z[0] + tau * z[1]),
        }
    }
}

/// Node count and interpolation tolerance for the realization step.
#[derive(Debug, Clone, Copy)]
pub struct RealizeParams {
    pub n_nodes: usize,
    pub tol: f64,
}

impl Default for RealizeParams {
    fn default() -> Self {
        RealizeParams {
            n_nodes: 16,
            tol: 1e-10,
        }
    }
}

/// Evaluator data for the constructed extension.
///
/// `dim_h` is the dimension of the output space `H` of the realized branch
/// quotients; after an inner embedding it is twice the matrix dimension
/// `dim_out` of the input data, and evaluation returns the upper-left
/// `dim_out x dim_out` corner of the feedback transform.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "ExtensionRepr", into = "ExtensionRepr")]
pub struct ExtensionFunction {
    u1: CMatrix,
    w: CMatrix,
    taus: Vec<C64>,
    dim_h: usize,
    dim_out: usize,
    domain: DomainTag,
    /// Base-point value when nonzero; evaluation wraps the feedback
    /// transform in the corresponding ball automorphism.
    base_value: Option<CMatrix>,
}

impl ExtensionFunction {
    pub fn domain(&self) -> DomainTag {
        self.domain
    }

    pub fn dim_h(&self) -> usize {
        self.dim_h
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn dim_total(&self) -> usize {
        self.u1.nrows()
    }

    pub fn taus(&self) -> &[C64] {
        &self.taus
    }

    pub fn evaluator(&self) -> Result<Evaluator<'_>> {
        Evaluator::new(self)
    }

    /// One-off evaluation; use [`ExtensionFunction::evaluator`] in loops.
    pub fn eval(&self, z: [C64; 2]) -> Result<CMatrix> {
        self.evaluator()?.eval(z)
    }
}

#[derive(Serialize, Deserialize)]
struct ExtensionRepr {
    domain: DomainTag,
    dim_h: usize,
    dim_out: usize,
    u1: Vec<Vec<[f64; 2]>>,
    w: Vec<Vec<[f64; 2]>>,
    taus: Vec<[f64; 2]>,
    base_value: Option<Vec<Vec<[f64; 2]>>>,
}

impl From<ExtensionFunction> for ExtensionRepr {
    fn from(f: ExtensionFunction) -> Self {
        use crate::schur::poly::matrix_to_repr;
        ExtensionRepr {
            domain: f.domain,
            dim_h: f.dim_h,
            dim_out: f.dim_out,
            u1: matrix_to_repr(&f.u1),
            w: matrix_to_repr(&f.w),
            taus: f.taus.iter().map(|t| [t.re, t.im]).collect(),
            base_value: f.base_value.as_ref().map(matrix_to_repr),
        }
    }
}

impl TryFrom<ExtensionRepr> for ExtensionFunction {
    type Error = Error;

    fn try_from(r: ExtensionRepr) -> Result<Self> {
        use crate::schur::poly::matrix_from_repr;
        let n = r.taus.len();
        if r.dim_out == 0 || r.dim_out > r.dim_h || r.dim_h > n {
            return Err(Error::InvalidParameter(
                "extension dimensions are inconsistent".into(),
            ));
        }
        let f = ExtensionFunction {
            u1: matrix_from_repr(n, n, &r.u1)?,
            w: matrix_from_repr(n, n, &r.w)?,
            taus: r.taus.iter().map(|t| C64::new(t[0], t[1])).collect(),
            dim_h: r.dim_h,
            dim_out: r.dim_out,
            domain: r.domain,
            base_value: match r.base_value {
                Some(b) => Some(matrix_from_repr(r.dim_out, r.dim_out, &b)?),
                None => None,
            },
        };
        if crate::schur::unitarity_residual(&f.u1) > 1e-9
            || crate::schur::unitarity_residual(&f.w) > 1e-9
        {
            return Err(Error::InvalidParameter(
                "extension data is not unitary".into(),
            ));
        }
        Ok(f)
    }
}

/// Polynomial approximation of `m_base(poly(lambda)) / lambda` on the closed
/// disc, accurate enough that un-doing the Möbius normalization after
/// extension stays within the restriction tolerance.
///
/// The normalized branch is holomorphic on a disc of radius > 1 (the branch
/// is a strict contraction at the base point), so its Taylor coefficients
/// decay geometrically; they are read off a boundary FFT and truncated when
/// the tail is below the budget, then certified on fresh boundary points.
fn moebius_normalized_poly(base: &CMatrix, poly: &MatrixPolynomial) -> Result<MatrixPolynomial> {
    let m = 2048usize;
    let fft = FftPlanner::new().plan_fft_forward(m);
    let values = (0..m)
        .map(|t| {
            let z = unit_root(m, t);
            Ok(operator_moebius(base, &poly.eval(z))? * z.conj())
        })
        .collect::<Result<Vec<_>>>()?;
    let coeffs = grid_to_coeffs(&fft, &values);

    // tolerance budget: the inverse Möbius wrap amplifies errors by about
    // (1 + ||b||)/(1 - ||b||), and the downstream restriction check allows
    // 1e-8; keep an order of magnitude in hand
    let base_norm = spectral_norm(base);
    let tol = (1e-9 * (1.0 - base_norm) / 2.0).max(1e-13);

    // the function is analytic, so true negative frequencies vanish; sum the
    // tail of coefficient norms (indices past 3m/4 are aliasing noise)
    let norms: Vec<f64> = coeffs[..3 * m / 4].iter().map(|c| c.norm()).collect();
    let mut suffix = vec![0.0_f64; norms.len() + 1];
    for j in (0..norms.len()).rev() {
        suffix[j] = suffix[j + 1] + norms[j];
    }
    let degree = (0..=MOEBIUS_DEGREE_CAP.min(norms.len() - 1))
        .find(|&d| suffix[d + 1] <= 0.5 * tol)
        .ok_or_else(|| {
            Error::NumericalFailure(format!(
                "Möbius-normalized branch needs polynomial degree beyond {MOEBIUS_DEGREE_CAP}"
            ))
        })?;
    let p = MatrixPolynomial::new(coeffs[..=degree].to_vec())?;

    // certify on boundary points offset from the FFT grid
    let nc = 733usize;
    let mut worst = 0.0_f64;
    for t in 0..nc {
        let z = C64::from_polar(1.0, std::f64::consts::TAU * (t as f64 + 0.5) / nc as f64);
        let want = operator_moebius(base, &poly.eval(z))? * z.conj();
        worst = worst.max(spectral_norm(&(p.eval(z) - want)));
    }
    if worst > tol {
        return Err(Error::NumericalFailure(format!(
            "Möbius normalization certification failed ({worst:.3e} > {tol:.3e})"
        )));
    }

    // the exact quotient is Schur (Schwarz lemma); nudge the approximation
    // back inside if truncation pushed the sup-norm over 1
    let sup = p.boundary_sup_norm(BOUNDARY_CERT_SAMPLES);
    if sup > 1.0 {
        Ok(p.scaled((1.0 - 1e-12) / sup))
    } else {
        Ok(p)
    }
}

/// Realizes both branch quotients exactly, forcing a defect embedding on one
/// branch when only the other needs it so the output spaces match.
fn realize_matched(
    g1: &MatrixPolynomial,
    g2: &MatrixPolynomial,
    params: &RealizeParams,
) -> Result<(Colligation, Colligation, usize)> {
    let (col1, r1) = realize_exact(g1, params.n_nodes, params.tol, false)?;
    let (col2, r2) = realize_exact(g2, params.n_nodes, params.tol, false)?;
    if r1 == r2 {
        return Ok((col1, col2, r1));
    }
    if r1 == 0 {
        let (col1f, r1f) = realize_exact(g1, params.n_nodes, params.tol, true)?;
        debug_assert_eq!(r1f, r2);
        Ok((col1f, col2, r2))
    } else {
        let (col2f, r2f) = realize_exact(g2, params.n_nodes, params.tol, true)?;
        debug_assert_eq!(r2f, r1);
        Ok((col1, col2f, r1))
    }
}

/// Builds the norm-preserving extension of `f`.
///
/// Requires `||f(a)|| <= 1 - 1e-6`; a nonzero base value is first moved to
/// the origin with the operator Möbius transform and moved back at
/// evaluation time.
pub fn build_extension(f: &VarietyFunction, params: &RealizeParams) -> Result<ExtensionFunction> {
    let base = f.base_value();
    let base_norm = spectral_norm(&base);
    if base_norm > 1.0 - BASE_CONTRACTION_MARGIN {
        return Err(Error::InvalidParameter(format!(
            "base-point value has norm {base_norm}; the boundary case is out of scope"
        )));
    }
    let vanishing = base_norm <= BASE_CONSISTENCY_TOL;

    let normalized = |poly: &MatrixPolynomial| -> Result<MatrixPolynomial> {
        if vanishing {
            // division by lambda is an exact coefficient shift
            poly.shift_down(BASE_CONSISTENCY_TOL)
        } else {
            moebius_normalized_poly(&base, poly)
        }
    };
    let g1 = normalized(&f.branch1)?;
    let g2 = normalized(&f.branch2)?;
    let (col1, col2, r) = realize_matched(&g1, &g2, params)?;

    let (p1, p2) = pad_pair(&col1, &col2)?;
    let u1 = p1.assemble();
    let u2 = p2.assemble();
    let eig = unitary_eig(&(u1.adjoint() * &u2))?;

    Ok(ExtensionFunction {
        u1,
        w: eig.w,
        taus: eig.taus,
        dim_h: f.dim() + r,
        dim_out: f.dim(),
        domain: f.domain,
        base_value: if vanishing { None } else { Some(base) },
    })
}

/// Reusable evaluation workspace; all buffers are preallocated so that the
/// per-point cost is pure arithmetic.
///
/// The corner of the feedback transform of `Phi = Q D(z) R` (with
/// `Q = U1 W`, `R = W^*`, `D(z) = diag(g_k(z))`) is computed through the
/// push-through identity
/// `F(z) = Q_H D (I - S D)^{-1} R_H` with `S = R[:, K] Q[K, :]`,
/// which replaces the large matrix products of the blockwise formula by a
/// single linear solve.
pub struct Evaluator<'a> {
    f: &'a ExtensionFunction,
    extenders: Vec<ScalarExtender>,
    /// rows `0..dim_out` of `U1 W`, fixed.
    q_c: CMatrix,
    /// columns `0..dim_out` of `W^*`, fixed.
    r_c: CMatrix,
    /// `W^*[:, K] (U1 W)[K, :]`, fixed.
    s: CMatrix,
    gvals: Vec<C64>,
    lu: CMatrix,
    x: CMatrix,
    corner: CMatrix,
    gram: CMatrix,
}

impl<'a> Evaluator<'a> {
    fn new(f: &'a ExtensionFunction) -> Result<Self> {
        let m = f.dim_total();
        let dh = f.dim_h;
        let dk = m - dh;
        let dout = f.dim_out;
        let extenders = f
            .taus
            .iter()
            .map(|&t| branch_extender(f.domain, t))
            .collect::<Result<Vec<_>>>()?;
        let q = &f.u1 * &f.w;
        let wh = f.w.adjoint();
        Ok(Evaluator {
            f,
            extenders,
            q_c: q.rows(0, dout).into(),
            r_c: wh.columns(0, dout).into(),
            s: wh.columns(dh, dk) * q.rows(dh, dk),
            gvals: vec![C64::new(0.0, 0.0); m],
            lu: CMatrix::zeros(m, m),
            x: CMatrix::zeros(m, dout),
            corner: CMatrix::zeros(dout, dout),
            gram: CMatrix::zeros(dout, dout),
        })
    }

    /// Evaluates the extension at an interior point of the domain.
    pub fn eval(&mut self, z: [C64; 2]) -> Result<CMatrix> {
        self.eval_feedback(z)?;
        match &self.f.base_value {
            None => Ok(self.corner.clone()),
            Some(base) => operator_moebius(base, &self.corner),
        }
    }

    /// Spectral norm of the extension value, via a Jacobi sweep on the
    /// small Gram matrix.
    pub fn eval_norm(&mut self, z: [C64; 2]) -> Result<f64> {
        let dout = self.f.dim_out;
        match &self.f.base_value {
            None => {
                self.eval_feedback(z)?;
                self.corner.adjoint().mul_to(&self.corner, &mut self.gram);
            }
            Some(_) => {
                let v = self.eval(z)?;
                v.adjoint().mul_to(&v, &mut self.gram);
            }
        }
        Ok(hermitian_max_eig(&mut self.gram, dout).max(0.0).sqrt())
    }

    fn eval_feedback(&mut self, z: [C64; 2]) -> Result<()> {
        let interior = match self.f.domain {
            DomainTag::G2 => in_g2(z[0], z[1]),
            DomainTag::Diamond => in_diamond(z[0], z[1]),
        };
        if !interior {
            return Err(Error::OutsideDomain {
                domain: match self.f.domain {
                    DomainTag::G2 => "G2",
                    DomainTag::Diamond => "diamond",
                },
                detail: format!("({}, {})", z[0], z[1]),
            });
        }
        let m = self.f.dim_total();
        let dout = self.f.dim_out;

        for (g, ext) in self.gvals.iter_mut().zip(&self.extenders) {
            *g = ext.eval(z)?;
        }
        // lu = I - S diag(g)
        for j in 0..m {
            let g = self.gvals[j];
            for i in 0..m {
                self.lu[(i, j)] = -(self.s[(i, j)] * g);
            }
            self.lu[(j, j)] += C64::new(1.0, 0.0);
        }
        self.x.copy_from(&self.r_c);
        solve_in_place(&mut self.lu, &mut self.x)?;
        // x <- diag(g) x
        for i in 0..m {
            let g = self.gvals[i];
            for j in 0..dout {
                self.x[(i, j)] *= g;
            }
        }
        self.q_c.mul_to(&self.x, &mut self.corner);
        Ok(())
    }
}

/// In-place partial-pivot Gaussian elimination; `a` is destroyed and `b`
/// becomes the solution.  The pivot ratio serves as a cheap condition
/// estimate for the feedback inverse.
fn solve_in_place(a: &mut CMatrix, b: &mut CMatrix) -> Result<()> {
    let n = a.nrows();
    let nrhs = b.ncols();
    let mut piv_max = 0.0_f64;
    for col in 0..n {
        let mut best = col;
        let mut best_val = a[(col, col)].norm_sqr();
        for r in col + 1..n {
            let v = a[(r, col)].norm_sqr();
            if v > best_val {
                best = r;
                best_val = v;
            }
        }
        if best != col {
            a.swap_rows(col, best);
            b.swap_rows(col, best);
        }
        let piv = a[(col, col)];
        let pn = piv.norm();
        piv_max = piv_max.max(pn);
        if pn == 0.0 || piv_max / pn > 1e12 {
            return Err(Error::IllConditionedFeedback {
                cond: if pn > 0.0 { piv_max / pn } else { f64::INFINITY },
            });
        }
        let inv = C64::new(1.0, 0.0) / piv;
        for r in col + 1..n {
            let factor = a[(r, col)] * inv;
            if factor.norm_sqr() == 0.0 {
                continue;
            }
            for c in col + 1..n {
                let t = a[(col, c)] * factor;
                a[(r, c)] -= t;
            }
            for c in 0..nrhs {
                let t = b[(col, c)] * factor;
                b[(r, c)] -= t;
            }
        }
    }
    // back substitution
    for col in (0..n).rev() {
        let inv = C64::new(1.0, 0.0) / a[(col, col)];
        for c in 0..nrhs {
            let mut acc = b[(col, c)];
            for k in col + 1..n {
                acc -= a[(col, k)] * b[(k, c)];
            }
            b[(col, c)] = acc * inv;
        }
    }
    Ok(())
}

/// Largest eigenvalue of a small Hermitian matrix by cyclic Jacobi; the
/// buffer is overwritten.
fn hermitian_max_eig(a: &mut CMatrix, n: usize) -> f64 {
    if n == 1 {
        return a[(0, 0)].re;
    }
    for _sweep in 0..8 {
        let mut off = 0.0_f64;
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.norm_sqr() < 1e-34 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let phase = apq / apq.norm();
                let theta = 0.5 * (2.0 * apq.norm()).atan2(app - aqq);
                let (s, c) = theta.sin_cos();
                let sp = phase * s;
                // columns
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip * c + aiq * sp.conj();
                    a[(i, q)] = -aip * sp + aiq * c;
                }
                // rows
                for i in 0..n {
                    let api = a[(p, i)];
                    let aqi = a[(q, i)];
                    a[(p, i)] = api * c + aqi * sp;
                    a[(q, i)] = -api * sp.conj() + aqi * c;
                }
            }
        }
    }
    (0..n).map(|i| a[(i, i)].re).fold(f64::NEG_INFINITY, f64::max)
}

/// A single sampled witness: point and value norm.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Witness {
    pub point: [C64; 2],
    pub norm: f64,
}

/// Sampled restriction errors and sup-norm estimate for an extension.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub restriction_max_error: f64,
    pub supnorm_estimate: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub witnesses: Vec<Witness>,
}

/// Checks the extension against its variety data: max restriction error
/// over `n` samples per branch and sup-norm estimate over `n` interior
/// samples, with the top-10 norm witnesses.
pub fn verify_extension(
    ext: &ExtensionFunction,
    f: &VarietyFunction,
    n: usize,
    seed: u64,
) -> Result<VerificationReport> {
    let mut ev = ext.evaluator()?;
    let mut restriction_max_error = 0.0_f64;
    for (offset, branch) in [(0u64, Branch::Branch1), (1, Branch::Branch2)] {
        for lam in sample_disc(n, seed.wrapping_add(offset)) {
            let z = branch_point(f.domain(), branch, lam);
            let got = ev.eval(z)?;
            let want = f.eval_branch(branch, lam);
            restriction_max_error =
                restriction_max_error.max(spectral_norm(&(got - want)));
        }
    }

    let set = crate::domains::sample_domain(
        f.domain(),
        n,
        seed.wrapping_add(2),
        crate::domains::SampleKind::Interior,
    );
    let mut supnorm_estimate = 0.0_f64;
    let mut witnesses: Vec<Witness> = Vec::new();
    for &z in &set.points {
        let norm = ev.eval_norm(z)?;
        supnorm_estimate = supnorm_estimate.max(norm);
        if witnesses.len() < 10 {
            witnesses.push(Witness { point: z, norm });
            witnesses.sort_by(|a, b| b.norm.partial_cmp(&a.norm).unwrap());
        } else if norm > witnesses[9].norm {
            witnesses[9] = Witness { point: z, norm };
            witnesses.sort_by(|a, b| b.norm.partial_cmp(&a.norm).unwrap());
        }
    }

    Ok(VerificationReport {
        restriction_max_error,
        supnorm_estimate,
        n_samples: n,
        seed,
        witnesses,
    })
}

/// The linear extension on the diamond: `z -> f(z1, 0) + f(0, z2)` for `f`
/// vanishing at the crossing point.
#[derive(Debug, Clone)]
pub struct DiamondLinearExtension {
    branch1: MatrixPolynomial,
    branch2: MatrixPolynomial,
}

pub fn diamond_linear_extension(f: &VarietyFunction) -> Result<DiamondLinearExtension> {
    if f.domain() != DomainTag::Diamond {
        return Err(Error::InvalidParameter(
            "the linear extension is defined on the diamond".into(),
        ));
    }
    if spectral_norm(&f.base_value()) > BASE_CONSISTENCY_TOL {
        return Err(Error::InvalidParameter(
            "the linear extension needs data vanishing at the crossing point".into(),
        ));
    }
    Ok(DiamondLinearExtension {
        branch1: f.branch(Branch::Branch1).clone(),
        branch2: f.branch(Branch::Branch2).clone(),
    })
}

impl DiamondLinearExtension {
    pub fn eval(&self, z: [C64; 2]) -> CMatrix {
        self.branch1.eval(z[0]) + self.branch2.eval(z[1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{sample_domain, SampleKind};
    use crate::schur::random_unitary;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn scalar_poly(cs: &[C64]) -> MatrixPolynomial {
        MatrixPolynomial::new(cs.iter().map(|&z| CMatrix::from_element(1, 1, z)).collect())
            .unwrap()
    }

    /// Random matrix polynomial of the given size and degree, vanishing at
    /// 0, scaled to the given boundary sup-norm.
    pub(crate) fn random_variety_function(
        dim: usize,
        degree: usize,
        sup: f64,
        domain: DomainTag,
        rng: &mut ChaCha8Rng,
    ) -> VarietyFunction {
        let mk = |rng: &mut ChaCha8Rng| {
            let mut coeffs = vec![CMatrix::zeros(dim, dim)];
            for _ in 0..degree {
                coeffs.push(CMatrix::from_fn(dim, dim, |_, _| {
                    C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
                }));
            }
            let p = MatrixPolynomial::new(coeffs).unwrap();
            p.scaled(sup / p.boundary_sup_norm(512))
        };
        let b1 = mk(rng);
        let b2 = mk(rng);
        VarietyFunction::new(b1, b2, domain).unwrap()
    }

    #[test]
    fn branch_extender_examples() {
        let g = branch_extender(DomainTag::G2, c(1.0, 0.0)).unwrap();
        let l = c(0.4, 0.0);
        assert!((g.eval([2.0 * l, l * l]).unwrap() - l).norm() < 1e-14);
        let gi = branch_extender(DomainTag::G2, c(0.0, 1.0)).unwrap();
        assert!((gi.eval([c(0.0, 0.0), c(0.5, 0.0)]).unwrap() - c(0.0, 0.5)).norm() < 1e-14);
        let d = branch_extender(DomainTag::Diamond, c(-1.0, 0.0)).unwrap();
        assert!((d.eval([c(0.3, 0.0), c(0.2, 0.0)]).unwrap() - c(0.1, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn scalar_pair_gives_magic_function() {
        // f = [lambda, lambda] extends to Phi_1
        let f = VarietyFunction::new(
            scalar_poly(&[c(0.0, 0.0), c(1.0, 0.0)]),
            scalar_poly(&[c(0.0, 0.0), c(1.0, 0.0)]),
            DomainTag::G2,
        )
        .unwrap();
        let ext = build_extension(&f, &RealizeParams::default()).unwrap();
        let v = ext.eval([c(0.6, 0.0), c(0.09, 0.0)]).unwrap();
        assert!((v[(0, 0)] - c(0.3, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn scalar_unimodular_pair_matches_alpha_phi_omega() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..5 {
            let alpha = C64::from_polar(1.0, rng.gen::<f64>() * std::f64::consts::TAU);
            let beta = C64::from_polar(1.0, rng.gen::<f64>() * std::f64::consts::TAU);
            let f = VarietyFunction::new(
                scalar_poly(&[c(0.0, 0.0), alpha]),
                scalar_poly(&[c(0.0, 0.0), beta]),
                DomainTag::G2,
            )
            .unwrap();
            let ext = build_extension(&f, &RealizeParams::default()).unwrap();
            assert_eq!(ext.taus().len(), 1);
            assert!((ext.taus()[0] - beta / alpha).norm() < 1e-10);
            let phi = MagicFunction::new(beta / alpha).unwrap();
            let mut ev = ext.evaluator().unwrap();
            let set = sample_domain(DomainTag::G2, 1000, 77, SampleKind::Interior);
            for &z in &set.points {
                let got = ev.eval(z).unwrap()[(0, 0)];
                let want = alpha * phi.eval(z[0], z[1]).unwrap();
                assert!((got - want).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn extension_vanishes_at_base_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let f = random_variety_function(2, 3, 0.9, DomainTag::G2, &mut rng);
        let ext = build_extension(&f, &RealizeParams::default()).unwrap();
        let v = ext.eval([c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(spectral_norm(&v) < 1e-12);
    }

    #[test]
    fn fast_evaluator_matches_blockwise_feedback() {
        // oracle: the textbook feedback transform computed blockwise from
        // Phi = U1 W diag(g_k) W^*
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let f = random_variety_function(2, 2, 0.9, DomainTag::G2, &mut rng);
        let ext = build_extension(&f, &RealizeParams::default()).unwrap();
        let mut ev = ext.evaluator().unwrap();
        let m = ext.dim_total();
        let dh = ext.dim_h();
        let dout = ext.dim_out();
        let dk = m - dh;
        let extenders: Vec<ScalarExtender> = ext
            .taus
            .iter()
            .map(|&t| branch_extender(ext.domain, t).unwrap())
            .collect();
        let set = sample_domain(DomainTag::G2, 100, 51, SampleKind::Interior);
        for &z in &set.points {
            let mut d = CMatrix::zeros(m, m);
            for (k, e) in extenders.iter().enumerate() {
                d[(k, k)] = e.eval(z).unwrap();
            }
            let phi = &ext.u1 * &ext.w * d * ext.w.adjoint();
            let phi1: CMatrix = phi.view((0, 0), (dh, dh)).into();
            let phi2: CMatrix = phi.view((0, dh), (dh, dk)).into();
            let phi3: CMatrix = phi.view((dh, 0), (dk, dh)).into();
            let phi4: CMatrix = phi.view((dh, dh), (dk, dk)).into();
            let inv = (CMatrix::identity(dk, dk) - phi4).try_inverse().unwrap();
            let full = phi1 + phi2 * inv * phi3;
            let want: CMatrix = full.view((0, 0), (dout, dout)).into();
            let got = ev.eval(z).unwrap();
            assert!(spectral_norm(&(got - want)) < 1e-11);
        }
    }

    #[test]
    fn restriction_identity_on_both_branches() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for domain in [DomainTag::G2, DomainTag::Diamond] {
            let f = random_variety_function(2, 3, 0.9, domain, &mut rng);
            let ext = build_extension(&f, &RealizeParams::default()).unwrap();
            let mut ev = ext.evaluator().unwrap();
            for branch in [Branch::Branch1, Branch::Branch2] {
                for lam in sample_disc(200, 5) {
                    let z = branch_point(domain, branch, lam);
                    let got = ev.eval(z).unwrap();
                    let want = f.eval_branch(branch, lam);
                    assert!(
                        spectral_norm(&(got - want)) <= 1e-8,
                        "domain {domain:?} branch {branch:?} lambda {lam}"
                    );
                }
            }
        }
    }

    #[test]
    fn verify_reports_contraction_and_restriction() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let f = random_variety_function(3, 2, 0.9, DomainTag::G2, &mut rng);
        let ext = build_extension(&f, &RealizeParams::default()).unwrap();
        let rep = verify_extension(&ext, &f, 2000, 11).unwrap();
        assert!(rep.restriction_max_error <= 1e-8);
        assert!(rep.supnorm_estimate <= 1.0 + 1e-8);
        assert_eq!(rep.witnesses.len(), 10);
        // reproducibility
        let rep2 = verify_extension(&ext, &f, 2000, 11).unwrap();
        assert_eq!(rep.restriction_max_error, rep2.restriction_max_error);
        assert_eq!(rep.supnorm_estimate, rep2.supnorm_estimate);
    }

    #[test]
    fn zero_function_extends_to_zero() {
        let f = VarietyFunction::new(
            MatrixPolynomial::zero(2, 2),
            MatrixPolynomial::zero(2, 2),
            DomainTag::G2,
        )
        .unwrap();
        let ext = build_extension(&f, &RealizeParams::default()).unwrap();
        let rep = verify_extension(&ext, &f, 500, 3).unwrap();
        assert!(rep.supnorm_estimate < 1e-12);
        assert!(rep.restriction_max_error < 1e-12);
    }

    #[test]
    fn nonvanishing_base_value_is_wrapped() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        // scalar case with a shifted pair
        let b = c(0.4, 0.1);
        let f = VarietyFunction::new(
            scalar_poly(&[b, c(0.3, 0.0)]),
            scalar_poly(&[b, c(0.0, 0.25)]),
            DomainTag::G2,
        )
        .unwrap();
        let ext = build_extension(&f, &RealizeParams::default()).unwrap();
        let mut ev = ext.evaluator().unwrap();
        for branch in [Branch::Branch1, Branch::Branch2] {
            for lam in sample_disc(100, 6) {
                let z = branch_point(DomainTag::G2, branch, lam);
                let got = ev.eval(z).unwrap();
                let want = f.eval_branch(branch, lam);
                assert!(spectral_norm(&(got - want)) <= 1e-8);
            }
        }
        // matrix case
        let base = random_unitary(2, &mut rng) * c(0.3, 0.0);
        let mk = |lin: CMatrix| {
            MatrixPolynomial::new(vec![base.clone(), lin * c(0.3, 0.0)]).unwrap()
        };
        let f = VarietyFunction::new(
            mk(random_unitary(2, &mut rng)),
            mk(random_unitary(2, &mut rng)),
            DomainTag::G2,
        )
        .unwrap();
        let ext = build_extension(&f, &RealizeParams::default()).unwrap();
        let rep = verify_extension(&ext, &f, 500, 4).unwrap();
        assert!(rep.restriction_max_error <= 1e-7, "{}", rep.restriction_max_error);
        assert!(rep.supnorm_estimate <= 1.0 + 1e-8);
    }

    #[test]
    fn rejects_near_boundary_base_value() {
        let f = VarietyFunction::new(
            scalar_poly(&[c(1.0 - 1e-8, 0.0)]),
            scalar_poly(&[c(1.0 - 1e-8, 0.0)]),
            DomainTag::G2,
        )
        .unwrap();
        assert!(build_extension(&f, &RealizeParams::default()).is_err());
    }

    #[test]
    fn unitary_conjugation_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(36);
        let f = random_variety_function(2, 2, 0.9, DomainTag::G2, &mut rng);
        let v = random_unitary(2, &mut rng);
        let vp = random_unitary(2, &mut rng);
        let conj_poly = |p: &MatrixPolynomial| {
            MatrixPolynomial::new(p.coeffs().iter().map(|m| &v * m * &vp).collect()).unwrap()
        };
        let fc = VarietyFunction::new(
            conj_poly(f.branch(Branch::Branch1)),
            conj_poly(f.branch(Branch::Branch2)),
            DomainTag::G2,
        )
        .unwrap();
        let e1 = build_extension(&f, &RealizeParams::default()).unwrap();
        let e2 = build_extension(&fc, &RealizeParams::default()).unwrap();
        let mut ev1 = e1.evaluator().unwrap();
        let mut ev2 = e2.evaluator().unwrap();
        let set = sample_domain(DomainTag::G2, 300, 21, SampleKind::Interior);
        for &z in &set.points {
            let a = &v * ev1.eval(z).unwrap() * &vp;
            let b = ev2.eval(z).unwrap();
            assert!(spectral_norm(&(a - b)) <= 1e-8);
        }
    }

    #[test]
    fn diamond_linear_extension_examples() {
        let f = VarietyFunction::new(
            scalar_poly(&[c(0.0, 0.0), c(1.0, 0.0)]),
            scalar_poly(&[c(0.0, 0.0), c(1.0, 0.0)]),
            DomainTag::Diamond,
        )
        .unwrap();
        let lin = diamond_linear_extension(&f).unwrap();
        let v = lin.eval([c(0.3, 0.0), c(0.4, 0.0)]);
        assert!((v[(0, 0)] - c(0.7, 0.0)).norm() < 1e-15);
        let set = sample_domain(DomainTag::Diamond, 100_000, 8, SampleKind::Interior);
        for &z in &set.points {
            assert!(lin.eval(z)[(0, 0)].norm() < 1.0);
        }
    }

    #[test]
    fn diamond_linear_extension_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let f = random_variety_function(1, 3, 0.5, DomainTag::Diamond, &mut rng);
        let g = random_variety_function(1, 3, 0.4, DomainTag::Diamond, &mut rng);
        let sum = VarietyFunction::new(
            MatrixPolynomial::new(
                f.branch(Branch::Branch1)
                    .coeffs()
                    .iter()
                    .zip(g.branch(Branch::Branch1).coeffs())
                    .map(|(a, b)| a + b)
                    .collect(),
            )
            .unwrap(),
            MatrixPolynomial::new(
                f.branch(Branch::Branch2)
                    .coeffs()
                    .iter()
                    .zip(g.branch(Branch::Branch2).coeffs())
                    .map(|(a, b)| a + b)
                    .collect(),
            )
            .unwrap(),
            DomainTag::Diamond,
        )
        .unwrap();
        let lf = diamond_linear_extension(&f).unwrap();
        let lg = diamond_linear_extension(&g).unwrap();
        let ls = diamond_linear_extension(&sum).unwrap();
        let set = sample_domain(DomainTag::Diamond, 500, 9, SampleKind::Interior);
        for &z in &set.points {
            let lhs = ls.eval(z);
            let rhs = lf.eval(z) + lg.eval(z);
            assert!(spectral_norm(&(lhs - rhs)) < 1e-12);
        }
    }

    #[test]
    fn diamond_linear_extension_rejects_nonvanishing() {
        let f = VarietyFunction::new(
            scalar_poly(&[c(0.2, 0.0), c(0.3, 0.0)]),
            scalar_poly(&[c(0.2, 0.0), c(0.3, 0.0)]),
            DomainTag::Diamond,
        )
        .unwrap();
        assert!(diamond_linear_extension(&f).is_err());
    }

    #[test]
    fn eval_rejects_exterior_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(38);
        let f = random_variety_function(1, 1, 0.9, DomainTag::G2, &mut rng);
        let ext = build_extension(&f, &RealizeParams::default()).unwrap();
        assert!(ext.eval([c(2.0, 0.0), c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn extension_json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(39);
        let f = random_variety_function(2, 2, 0.9, DomainTag::G2, &mut rng);
        let ext = build_extension(&f, &RealizeParams::default()).unwrap();
        let s = serde_json::to_string(&ext).unwrap();
        let back: ExtensionFunction = serde_json::from_str(&s).unwrap();
        let set = sample_domain(DomainTag::G2, 50, 10, SampleKind::Interior);
        for &z in &set.points {
            let a = ext.eval(z).unwrap();
            let b = back.eval(z).unwrap();
            assert!(spectral_norm(&(a - b)) < 1e-12);
        }
    }
}
