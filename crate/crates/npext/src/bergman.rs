//! Discretized minimal-norm linear extension: given values on variety
//! samples, find the polynomial of bounded total degree that interpolates
//! them and minimizes a Gaussian-weighted Monte Carlo Bergman norm over the
//! domain.  The map from values to coefficients is linear and precomputed.
//!
//! The minimization is an equality-constrained least-squares problem solved
//! by the nullspace method: an SVD of the constraint matrix splits the
//! coefficient space into a particular interpolant plus the constraint
//! nullspace, and the weighted Gram matrix is minimized over the nullspace.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::domains::{branch_point, sample_disc, Branch, DomainTag, SampleKind, SampleSet};
use crate::error::{Error, Result};
use crate::schur::CMatrix;

/// Tikhonov regularization added to the Gram matrix; monomial bases are
/// ill-conditioned at moderate degree.
pub const GRAM_REGULARIZATION: f64 = 1e-12;

/// Relative singular-value cutoff for the constraint-matrix rank.
const CONSTRAINT_RANK_CUTOFF: f64 = 1e-10;

/// Per-application feasibility tolerance on the constraint residual.
const FEASIBILITY_TOL: f64 = 1e-8;

/// Exponent pairs `(i, j)` of the monomials of total degree at most
/// `degree`, ordered by total degree, then by the first exponent.
pub fn monomial_exponents(degree: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity((degree + 1) * (degree + 2) / 2);
    for d in 0..=degree {
        for i in (0..=d).rev() {
            out.push((i, d - i));
        }
    }
    out
}

/// Evaluates a coefficient vector against the monomial basis of the degree.
pub fn eval_poly(coeffs: &[C64], degree: usize, z: [C64; 2]) -> C64 {
    monomial_exponents(degree)
        .iter()
        .zip(coeffs)
        .map(|(&(i, j), &c)| c * z[0].powu(i as u32) * z[1].powu(j as u32))
        .sum()
}

/// Variety samples balanced across the two branches: the same disc
/// parameters on each, which keeps the constraint rows symmetric.
pub fn balanced_variety_samples(domain: DomainTag, per_branch: usize, seed: u64) -> SampleSet {
    let params = sample_disc(per_branch, seed);
    let mut points = Vec::with_capacity(2 * per_branch);
    let mut variety = Vec::with_capacity(2 * per_branch);
    for branch in [Branch::Branch1, Branch::Branch2] {
        for &lam in &params {
            points.push(branch_point(domain, branch, lam));
            variety.push((branch, lam));
        }
    }
    SampleSet {
        domain,
        kind: SampleKind::Variety,
        seed,
        points,
        variety,
    }
}

/// A discretized weighted Bergman extension problem.
#[derive(Debug, Clone)]
pub struct BergmanProblem {
    domain: DomainTag,
    degree: usize,
    domain_samples: SampleSet,
    /// Gaussian weight `exp(-|z|^2)` per domain sample.
    weights: Vec<f64>,
    variety_samples: SampleSet,
}

impl BergmanProblem {
    /// Builds a problem from fresh seeded samples: `n_domain` interior
    /// points and `per_branch` variety parameters on each branch.
    pub fn new(
        domain: DomainTag,
        degree: usize,
        n_domain: usize,
        per_branch: usize,
        seed: u64,
    ) -> Result<Self> {
        Self::from_sets(
            crate::domains::sample_domain(domain, n_domain, seed, SampleKind::Interior),
            balanced_variety_samples(domain, per_branch, seed.wrapping_add(1)),
            degree,
        )
    }

    /// Builds a problem from explicit sample sets.
    pub fn from_sets(
        domain_samples: SampleSet,
        variety_samples: SampleSet,
        degree: usize,
    ) -> Result<Self> {
        if domain_samples.domain != variety_samples.domain {
            return Err(Error::DimensionMismatch(
                "domain and variety samples come from different domains".into(),
            ));
        }
        if variety_samples.variety.len() != variety_samples.points.len() {
            return Err(Error::InvalidParameter(
                "variety samples must carry branch parameters".into(),
            ));
        }
        let needed = 2 * degree + 1;
        for branch in [Branch::Branch1, Branch::Branch2] {
            let count = variety_samples
                .variety
                .iter()
                .filter(|(b, _)| *b == branch)
                .count();
            if count < needed {
                return Err(Error::InvalidParameter(format!(
                    "{branch:?} has {count} samples; determining a degree-{degree} \
                     restriction needs at least {needed}"
                )));
            }
        }
        let weights = domain_samples
            .points
            .iter()
            .map(|z| (-(z[0].norm_sqr() + z[1].norm_sqr())).exp())
            .collect();
        Ok(BergmanProblem {
            domain: domain_samples.domain,
            degree,
            domain_samples,
            weights,
            variety_samples,
        })
    }

    pub fn domain(&self) -> DomainTag {
        self.domain
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_basis(&self) -> usize {
        (self.degree + 1) * (self.degree + 2) / 2
    }

    pub fn variety_samples(&self) -> &SampleSet {
        &self.variety_samples
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Basis row at a point, in [`monomial_exponents`] order.
    fn basis_row(&self, z: [C64; 2]) -> Vec<C64> {
        monomial_exponents(self.degree)
            .iter()
            .map(|&(i, j)| z[0].powu(i as u32) * z[1].powu(j as u32))
            .collect()
    }

    /// Samples of a variety function: one value per variety sample, from
    /// per-branch closures of the branch parameter.
    pub fn variety_values<F, G>(&self, branch1: F, branch2: G) -> Vec<C64>
    where
        F: Fn(C64) -> C64,
        G: Fn(C64) -> C64,
    {
        self.variety_samples
            .variety
            .iter()
            .map(|&(b, lam)| match b {
                Branch::Branch1 => branch1(lam),
                Branch::Branch2 => branch2(lam),
            })
            .collect()
    }
}

/// Precomputed linear map from variety values to minimal-norm polynomial
/// coefficients.
#[derive(Debug, Clone)]
pub struct LinearExtensionOperator {
    degree: usize,
    /// Coefficients = `t * values`.
    t: CMatrix,
    /// Constraint matrix (variety rows by basis columns), kept for the
    /// per-application residual check.
    constraints: CMatrix,
    /// Regularized weighted Gram matrix of the basis.
    gram: CMatrix,
    /// Orthonormal basis of the constraint nullspace.
    nullspace: CMatrix,
}

/// Builds the linear extension operator for a problem.
pub fn build_bergman_operator(problem: &BergmanProblem) -> Result<LinearExtensionOperator> {
    let samples = &problem.variety_samples.variety;
    for (i, &(b1, l1)) in samples.iter().enumerate() {
        for (j, &(b2, l2)) in samples.iter().enumerate().skip(i + 1) {
            if b1 == b2 && (l1 - l2).norm() < 1e-10 {
                return Err(Error::RankDeficientConstraints(format!(
                    "variety samples {i} and {j} coincide ({b1:?} at {l1})"
                )));
            }
        }
    }

    let nb = problem.n_basis();
    let m = samples.len();
    let n = problem.domain_samples.points.len();

    // weighted design matrix rows scaled by sqrt(w)
    let mut design = CMatrix::zeros(n, nb);
    for (r, (&z, &w)) in problem
        .domain_samples
        .points
        .iter()
        .zip(&problem.weights)
        .enumerate()
    {
        let row = problem.basis_row(z);
        let scale = C64::new(w.sqrt(), 0.0);
        for (cidx, v) in row.into_iter().enumerate() {
            design[(r, cidx)] = v * scale;
        }
    }
    let gram = design.adjoint() * &design
        + CMatrix::identity(nb, nb) * C64::new(GRAM_REGULARIZATION, 0.0);

    let mut constraints = CMatrix::zeros(m, nb);
    for (r, &z) in problem.variety_samples.points.iter().enumerate() {
        for (cidx, v) in problem.basis_row(z).into_iter().enumerate() {
            constraints[(r, cidx)] = v;
        }
    }

    // SVD split: particular solution through the pseudo-inverse, nullspace
    // for the minimization.
    let svd = constraints.clone().svd(true, true);
    let u = svd
        .u
        .as_ref()
        .ok_or_else(|| Error::NumericalFailure("constraint SVD failed".into()))?;
    let v_t = svd
        .v_t
        .as_ref()
        .ok_or_else(|| Error::NumericalFailure("constraint SVD failed".into()))?;
    let smax = svd.singular_values.max();
    let rank = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > smax * CONSTRAINT_RANK_CUTOFF)
        .count();
    if rank == 0 {
        return Err(Error::RankDeficientConstraints(
            "constraint matrix is numerically zero".into(),
        ));
    }

    // pinv = V_r S_r^{-1} U_r^*  (nb x m)
    let mut pinv = CMatrix::zeros(nb, m);
    for k in 0..rank {
        let vk = v_t.row(k).adjoint(); // nb x 1
        let uk = u.column(k);
        let s_inv = 1.0 / svd.singular_values[k];
        for a in 0..nb {
            for b in 0..m {
                pinv[(a, b)] += vk[a] * uk[b].conj() * C64::new(s_inv, 0.0);
            }
        }
    }

    // orthonormal nullspace basis of the constraints
    let v_r: CMatrix = v_t.rows(0, rank).adjoint();
    let proj = CMatrix::identity(nb, nb) - &v_r * v_r.adjoint();
    let eig = nalgebra::SymmetricEigen::new(proj);
    let keep: Vec<usize> = (0..nb).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
    let mut nullspace = CMatrix::zeros(nb, keep.len());
    for (col, &i) in keep.iter().enumerate() {
        nullspace.set_column(col, &eig.eigenvectors.column(i));
    }

    // T = (I - N (N* G N)^{-1} N* G) pinv
    let t = if nullspace.ncols() == 0 {
        pinv
    } else {
        let ng = nullspace.adjoint() * &gram;
        let core = &ng * &nullspace;
        let rhs = &ng * &pinv;
        let y = core.lu().solve(&rhs).ok_or_else(|| {
            Error::NumericalFailure("reduced Gram system is singular".into())
        })?;
        &pinv - &nullspace * y
    };

    Ok(LinearExtensionOperator {
        degree: problem.degree,
        t,
        constraints,
        gram,
        nullspace,
    })
}

impl LinearExtensionOperator {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_basis(&self) -> usize {
        self.t.nrows()
    }

    /// Orthonormal basis of polynomials vanishing on all variety samples.
    pub fn vanishing_basis(&self) -> &CMatrix {
        &self.nullspace
    }

    /// The discrete weighted Bergman norm squared of a coefficient vector.
    pub fn objective(&self, coeffs: &[C64]) -> Result<f64> {
        if coeffs.len() != self.n_basis() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} coefficients, got {}",
                self.n_basis(),
                coeffs.len()
            )));
        }
        let x = CMatrix::from_fn(coeffs.len(), 1, |i, _| coeffs[i]);
        Ok((x.adjoint() * &self.gram * &x)[(0, 0)].re)
    }
}

/// Applies the extension operator: variety values in, minimal-norm
/// polynomial coefficients out.  Values inconsistent with any polynomial
/// restriction of the trial space are rejected, naming the worst samples.
pub fn apply_extension(op: &LinearExtensionOperator, values: &[C64]) -> Result<Vec<C64>> {
    let m = op.constraints.nrows();
    if values.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "expected {m} variety values, got {}",
            values.len()
        )));
    }
    let f = CMatrix::from_fn(m, 1, |i, _| values[i]);
    let x = &op.t * &f;
    let residual = &op.constraints * &x - &f;
    let scale = 1.0_f64.max(values.iter().map(|v| v.norm()).fold(0.0, f64::max));
    let mut offending: Vec<(usize, f64)> = (0..m)
        .map(|i| (i, residual[(i, 0)].norm()))
        .filter(|&(_, r)| r > FEASIBILITY_TOL * scale)
        .collect();
    if !offending.is_empty() {
        offending.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
        offending.truncate(5);
        return Err(Error::InfeasibleConstraints(format!(
            "no trial-space polynomial matches the given values; worst samples {:?}",
            offending
                .iter()
                .map(|&(i, r)| format!("#{i} (residual {r:.3e})"))
                .collect::<Vec<_>>()
        )));
    }
    Ok((0..x.nrows()).map(|i| x[(i, 0)]).collect())
}

/// Sampled lower estimate of the region where every dictionary function
/// extends to modulus below 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SublevelEntry {
    pub point: [C64; 2],
    pub max_abs: f64,
    pub inside: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SublevelReport {
    pub entries: Vec<SublevelEntry>,
}

impl SublevelReport {
    /// CSV with one row per grid point.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("re1,im1,re2,im2,max_abs,inside\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                e.point[0].re, e.point[0].im, e.point[1].re, e.point[1].im, e.max_abs, e.inside
            ));
        }
        out
    }
}

/// For each grid point, the max over the dictionary (given as variety-value
/// vectors) of the extended polynomial's modulus; `inside` marks the
/// sampled sublevel region where the max stays below 1.
pub fn sublevel_estimate(
    op: &LinearExtensionOperator,
    dictionary: &[Vec<C64>],
    grid: &[[C64; 2]],
) -> Result<SublevelReport> {
    let coeff_vecs: Vec<Vec<C64>> = dictionary
        .iter()
        .map(|values| apply_extension(op, values))
        .collect::<Result<_>>()?;
    let entries = grid
        .iter()
        .map(|&point| {
            let max_abs = coeff_vecs
                .iter()
                .map(|c| eval_poly(c, op.degree, point).norm())
                .fold(0.0, f64::max);
            SublevelEntry {
                point,
                max_abs,
                inside: max_abs < 1.0,
            }
        })
        .collect();
    Ok(SublevelReport { entries })
}
