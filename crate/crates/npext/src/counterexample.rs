//! Numerical demonstration that no linear isometric extension operator
//! exists from the Schur class of the crossed discs `V` in the symmetrized
//! bidisc (vanishing at a base point `a`) to the Schur class of `G2`.
//!
//! The argument runs a family of royal pairs `[m_{b}(alpha l), m_{b}(beta l)]`
//! through their unique norm-preserving extensions, expands both sides of
//! the resulting operator identity in Fourier series over the unimodular
//! parameter `omega`, and exhibits the coefficient-level contradictions:
//! in Case I (`a` on the flat disc) the order-0 coefficients disagree by a
//! computable margin; in Case II (`a` on the royal disc) the forced
//! candidate extension of `[0, l]` exceeds modulus 1 inside `G2`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::domains::{in_g2, pi_map, sample_disc, Branch};
use crate::error::{Error, Result};
use crate::schur::{MagicFunction, MoebiusMap};

/// Guard for Case I right-hand-side evaluation points: the order-1
/// coefficient divides by `s`.
pub const CASE_S_GUARD: f64 = 0.05;

const ALIASING_TOL: f64 = 1e-6;

/// A royal variety pair `[m_{beta l0}(alpha l), m_{beta l0}(beta l)]`
/// together with its unique norm-preserving extension
/// `m_{beta l0}(alpha Phi_{beta/alpha})`.
#[derive(Debug, Clone, Copy)]
pub struct RoyalPair {
    alpha: C64,
    beta: C64,
    lambda0: C64,
    outer: MoebiusMap,
    magic: MagicFunction,
}

/// Constructs the unique norm-preserving extension data for unimodular
/// `alpha`, `beta` and `lambda0` in the open disc.
pub fn unique_extension(alpha: C64, beta: C64, lambda0: C64) -> Result<RoyalPair> {
    for (name, z) in [("alpha", alpha), ("beta", beta)] {
        if (z.norm() - 1.0).abs() > 1e-14 {
            return Err(Error::InvalidParameter(format!(
                "{name} must be unimodular, got modulus {}",
                z.norm()
            )));
        }
    }
    Ok(RoyalPair {
        alpha,
        beta,
        lambda0,
        outer: MoebiusMap::new(beta * lambda0)?,
        magic: MagicFunction::new(beta / alpha)?,
    })
}

impl RoyalPair {
    pub fn alpha(&self) -> C64 {
        self.alpha
    }

    pub fn beta(&self) -> C64 {
        self.beta
    }

    pub fn lambda0(&self) -> C64 {
        self.lambda0
    }

    /// The extension value `m_{beta l0}(alpha Phi_{beta/alpha}(s, p))`.
    pub fn eval(&self, s: C64, p: C64) -> Result<C64> {
        Ok(self.outer.eval(self.alpha * self.magic.eval(s, p)?))
    }

    /// The defining value on a branch of the variety.
    pub fn branch_value(&self, branch: Branch, lambda: C64) -> C64 {
        match branch {
            Branch::Branch1 => self.outer.eval(self.alpha * lambda),
            Branch::Branch2 => self.outer.eval(self.beta * lambda),
        }
    }
}

/// Fourier or Taylor coefficients of an analytic family, with the sampling
/// geometry recorded.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoefficientSeries {
    pub coeffs: Vec<C64>,
    pub radius: f64,
    pub n_samples: usize,
}

/// Fit of a disc slice against a fractional-linear model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SliceFitReport {
    /// `(a, b, c)` in the model `l -> (a l + b) / (c l + 1)`.
    pub coeffs: [C64; 3],
    pub deviation: f64,
    pub degenerate: bool,
}

/// Fits `l -> F(pi(l, omega l)) / l` with a Möbius model through three
/// points and reports the worst deviation on `n_fit` further points; a
/// genuine Möbius slice fits to roundoff, anything with higher-order
/// structure does not.
pub fn mobius_slice_probe<F>(f: F, omega: C64, n_fit: usize) -> Result<SliceFitReport>
where
    F: Fn(C64, C64) -> Result<C64>,
{
    if (omega.norm() - 1.0).abs() > 1e-14 {
        return Err(Error::InvalidParameter("omega must be unimodular".into()));
    }
    let slice = |lambda: C64| -> Result<C64> {
        let (s, p) = pi_map(lambda, omega * lambda);
        Ok(f(s, p)? / lambda)
    };
    let fit_pts: Vec<C64> = (0..3)
        .map(|k| C64::from_polar(0.5, std::f64::consts::TAU * k as f64 / 3.0))
        .collect();
    let h: Vec<C64> = fit_pts.iter().map(|&l| slice(l)).collect::<Result<_>>()?;

    let degenerate = (h[1] - h[0]).norm() < 1e-12 && (h[2] - h[0]).norm() < 1e-12;
    let coeffs = if degenerate {
        [C64::new(0.0, 0.0), h[0], C64::new(0.0, 0.0)]
    } else {
        // a l_i + b - c h_i l_i = h_i
        let mut m = crate::schur::CMatrix::zeros(3, 3);
        let mut rhs = crate::schur::CMatrix::zeros(3, 1);
        for i in 0..3 {
            m[(i, 0)] = fit_pts[i];
            m[(i, 1)] = C64::new(1.0, 0.0);
            m[(i, 2)] = -h[i] * fit_pts[i];
            rhs[(i, 0)] = h[i];
        }
        let sol = m
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::NumericalFailure("degenerate slice fit system".into()))?;
        [sol[(0, 0)], sol[(1, 0)], sol[(2, 0)]]
    };

    let mut deviation = 0.0_f64;
    for k in 0..n_fit.max(1) {
        let r = if k % 2 == 0 { 0.3 } else { 0.62 };
        let l = C64::from_polar(r, std::f64::consts::TAU * (k as f64 + 0.37) / n_fit.max(1) as f64);
        let model = (coeffs[0] * l + coeffs[1]) / (coeffs[2] * l + C64::new(1.0, 0.0));
        deviation = deviation.max((slice(l)? - model).norm());
    }
    Ok(SliceFitReport {
        coeffs,
        deviation,
        degenerate,
    })
}

/// Taylor coefficients of `l -> F(pi(l, omega l))` up to the given order,
/// by discrete Cauchy integrals on a circle of radius 0.5.
pub fn slice_taylor<F>(f: F, omega: C64, orders: usize) -> Result<CoefficientSeries>
where
    F: Fn(C64, C64) -> Result<C64>,
{
    if (omega.norm() - 1.0).abs() > 1e-14 {
        return Err(Error::InvalidParameter("omega must be unimodular".into()));
    }
    let n = 256;
    let radius = 0.5;
    let mut values = Vec::with_capacity(n);
    for j in 0..n {
        let l = C64::from_polar(radius, std::f64::consts::TAU * j as f64 / n as f64);
        let (s, p) = pi_map(l, omega * l);
        values.push(f(s, p)?);
    }
    let coeffs = (0..=orders)
        .map(|k| {
            let mut acc = C64::new(0.0, 0.0);
            for (j, v) in values.iter().enumerate() {
                let phase =
                    C64::from_polar(1.0, -std::f64::consts::TAU * (k * j) as f64 / n as f64);
                acc += v * phase;
            }
            acc / (n as f64 * radius.powi(k as i32))
        })
        .collect();
    Ok(CoefficientSeries {
        coeffs,
        radius,
        n_samples: n,
    })
}

/// Which coefficient-comparison case of the no-linear-extension argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseTag {
    /// Base point `a = (0, l0)` on the flat disc; expansion in conj(omega).
    I,
    /// Base point `a = (2 l0, l0^2)` on the royal disc; expansion in omega.
    II,
}

/// Which side of the operator identity to expand, and where to evaluate it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SideArg {
    /// The variety side, as a function of the branch parameter.
    Lhs { branch: Branch, lambda: C64 },
    /// The extension side at a fixed point of `G2`.
    Rhs { s: C64, p: C64 },
}

/// Fourier coefficients in the expansion variable (`conj(omega)` for Case I,
/// `omega` for Case II) of the indicated side, by uniform sampling over
/// unimodular `omega`.  All sampled coefficients beyond `order` — including
/// wrong-sided frequencies — must fall below 1e-6, else the order is
/// reported as too low.
pub fn omega_fourier(
    case: CaseTag,
    lambda0: C64,
    side: SideArg,
    order: usize,
    samples: usize,
) -> Result<CoefficientSeries> {
    if lambda0.norm() >= 1.0 {
        return Err(Error::InvalidParameter(
            "lambda0 must lie in the open unit disc".into(),
        ));
    }
    if case == CaseTag::II && lambda0.norm() == 0.0 {
        return Err(Error::InvalidParameter(
            "Case II requires a nonzero lambda0".into(),
        ));
    }
    let n = samples.max(4 * (order + 1)).max(16);
    if let (CaseTag::I, SideArg::Rhs { s, .. }) = (case, side) {
        if s.norm() < CASE_S_GUARD {
            return Err(Error::InvalidParameter(format!(
                "Case I evaluation needs |s| >= {CASE_S_GUARD}, got {}",
                s.norm()
            )));
        }
    }
    if let SideArg::Rhs { s, p } = side {
        if !in_g2(s, p) {
            return Err(Error::OutsideDomain {
                domain: "G2",
                detail: format!("({s}, {p})"),
            });
        }
    }

    let one = C64::new(1.0, 0.0);
    let value_at = |omega: C64| -> Result<C64> {
        match (case, side) {
            (CaseTag::I, SideArg::Lhs { branch, lambda }) => Ok(match branch {
                Branch::Branch1 => {
                    (lambda0 - lambda * omega.conj())
                        / (one - lambda * lambda0.conj() * omega.conj())
                }
                Branch::Branch2 => (lambda0 - lambda) / (one - lambda * lambda0.conj()),
            }),
            (CaseTag::I, SideArg::Rhs { s, p }) => {
                let phi = MagicFunction::new(omega)?.eval(s, p)?;
                let x = omega.conj() * phi;
                Ok((lambda0 - x) / (one - lambda0.conj() * x))
            }
            (CaseTag::II, SideArg::Lhs { branch, lambda }) => {
                let x = match branch {
                    Branch::Branch1 => lambda,
                    Branch::Branch2 => omega * lambda,
                };
                Ok((lambda0 - x) / (one - lambda0.conj() * x))
            }
            (CaseTag::II, SideArg::Rhs { s, p }) => {
                let phi = MagicFunction::new(omega)?.eval(s, p)?;
                Ok((lambda0 - phi) / (one - lambda0.conj() * phi))
            }
        }
    };

    let values: Vec<C64> = (0..n)
        .map(|j| value_at(C64::from_polar(1.0, std::f64::consts::TAU * j as f64 / n as f64)))
        .collect::<Result<_>>()?;

    // Full circle spectrum a_m with values(omega) = sum_m a_m omega^m; the
    // expansion variable flips the index sign for Case I.
    let mut spectrum = Vec::with_capacity(n);
    for m in 0..n {
        let mut acc = C64::new(0.0, 0.0);
        for (j, v) in values.iter().enumerate() {
            let phase = C64::from_polar(1.0, -std::f64::consts::TAU * (m * j % n) as f64 / n as f64);
            acc += v * phase;
        }
        spectrum.push(acc / n as f64);
    }
    let coeff_index = |k: usize| -> usize {
        match case {
            CaseTag::I => {
                if k == 0 {
                    0
                } else {
                    n - k
                }
            }
            CaseTag::II => k,
        }
    };
    let wanted: Vec<usize> = (0..=order).map(coeff_index).collect();
    for (m, a) in spectrum.iter().enumerate() {
        if !wanted.contains(&m) && a.norm() >= ALIASING_TOL {
            return Err(Error::OrderTooLow(format!(
                "spectral index {m} has magnitude {:.3e} beyond order {order}",
                a.norm()
            )));
        }
    }
    Ok(CoefficientSeries {
        coeffs: wanted.into_iter().map(|m| spectrum[m]).collect(),
        radius: 1.0,
        n_samples: n,
    })
}

/// The contradiction margin of Case I: the order-0 coefficient of the
/// variety side is `m_{l0}(l)` on the flat-disc branch, while the extension
/// side forces the constant `l0`.  Reports the largest sampled gap and the
/// branch parameter attaining it.
pub fn contradiction_margin(lambda0: C64, n: usize, seed: u64) -> Result<(f64, C64)> {
    let m = MoebiusMap::new(lambda0)?;
    let mut best = (0.0_f64, C64::new(0.0, 0.0));
    for lam in sample_disc(n, seed) {
        let gap = (m.eval(lam) - lambda0).norm();
        if gap > best.0 {
            best = (gap, lam);
        }
    }
    Ok(best)
}

/// The forced Case II candidate extension of `[0, l]`:
/// `(p - (s/2)^2) / (1 - conj(l0) s/2)^2`.
pub fn case2_candidate(lambda0: C64, s: C64, p: C64) -> Result<C64> {
    if !in_g2(s, p) {
        return Err(Error::OutsideDomain {
            domain: "G2",
            detail: format!("({s}, {p})"),
        });
    }
    let denom = C64::new(1.0, 0.0) - lambda0.conj() * s * 0.5;
    if denom.norm() < 1e-10 {
        return Err(Error::SingularEvaluation(format!(
            "1 - conj(lambda0) s/2 = {denom}"
        )));
    }
    Ok((p - (s * 0.5) * (s * 0.5)) / (denom * denom))
}

/// A pair `(l, mu)` in the closed bidisc violating the Case II inequality
/// `|(l - mu)/2| <= |1 - conj(l0)(l + mu)/2|`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Eqe5Witness {
    pub lambda: C64,
    pub mu: C64,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

/// Searches the closed bidisc for a violation of the Case II inequality.
/// Returns `None` for `lambda0 = 0` (where `|l - mu| <= 2` settles it) and
/// a witness for every nonzero `lambda0`.
pub fn check_eqe5(lambda0: C64, grid_n: usize) -> Option<Eqe5Witness> {
    if lambda0.norm() == 0.0 {
        return None;
    }
    // Rotating (l, mu) by the phase of lambda0 reduces to real t = |l0|;
    // the extremal pairs are conjugate unimodular points.
    let phase = C64::from_polar(1.0, lambda0.arg());
    let mut best: Option<Eqe5Witness> = None;
    for &r in &[1.0, 1.0 - 1e-6, 0.999] {
        for k in 0..grid_n.max(8) {
            let theta = std::f64::consts::PI * k as f64 / grid_n.max(8) as f64;
            let lambda = phase * C64::from_polar(r, theta);
            let mu = phase * C64::from_polar(r, -theta);
            let lhs = ((lambda - mu) * 0.5).norm();
            let rhs = (C64::new(1.0, 0.0) - lambda0.conj() * (lambda + mu) * 0.5).norm();
            let gap = lhs - rhs;
            if gap > 0.0 && best.as_ref().map_or(true, |b| gap > b.gap) {
                best = Some(Eqe5Witness {
                    lambda,
                    mu,
                    lhs,
                    rhs,
                    gap,
                });
            }
        }
    }
    best
}

/// Boundary form of the Case II inequality at `l = e^{i theta}`,
/// `mu = e^{-i theta}`: with `|l - mu|^2 = 2 - 2 cos(2 theta)` and
/// `|2 - t(l + mu)|^2 = 4 - 8 t cos(theta) + 2 t^2 (1 + cos(2 theta))`,
/// the inequality reads `eq8_lhs(t, theta) <= 2 + 2 t^2`.
pub fn eq8_lhs(t: f64, theta: f64) -> f64 {
    -2.0 * (1.0 + t * t) * (2.0 * theta).cos() + 8.0 * t * theta.cos()
}

/// Closed-form analysis of the boundary inequality: the left side is
/// maximized at `cos(theta) = t / (1 + t^2)` with maximum
/// `2 (1 + 4 t^2 + t^4) / (1 + t^2)`, against the bound `2 (1 + t^2)`.
/// Returns `(lhs_max, rhs, gap)`; the gap `4 t^2 / (1 + t^2)` is positive
/// exactly when `t > 0`.
pub fn eq8_gap(t: f64) -> Result<(f64, f64, f64)> {
    if !(0.0..1.0).contains(&t) {
        return Err(Error::InvalidParameter(format!(
            "t must lie in [0, 1), got {t}"
        )));
    }
    let t2 = t * t;
    let lhs_max = 2.0 * (1.0 + 4.0 * t2 + t2 * t2) / (1.0 + t2);
    let rhs = 2.0 * (1.0 + t2);
    Ok((lhs_max, rhs, lhs_max - rhs))
}

/// An interior point of `G2` where the Case II candidate exceeds modulus 1.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Case2Witness {
    pub s: C64,
    pub p: C64,
    pub modulus: f64,
}

/// Scans near-boundary points `pi(r l, r mu)` along the extremal family of
/// [`check_eqe5`] for a modulus-1 violation of the candidate.
pub fn case2_witness(lambda0: C64, grid_n: usize) -> Result<Option<Case2Witness>> {
    let phase = C64::from_polar(1.0, lambda0.arg());
    let mut best: Option<Case2Witness> = None;
    for &r in &[1.0 - 1e-7, 1.0 - 1e-4, 0.999] {
        for k in 0..grid_n.max(8) {
            let theta = std::f64::consts::PI * k as f64 / grid_n.max(8) as f64;
            let lambda = phase * C64::from_polar(r, theta);
            let mu = phase * C64::from_polar(r, -theta);
            let (s, p) = pi_map(lambda, mu);
            let value = match case2_candidate(lambda0, s, p) {
                Ok(v) => v,
                Err(Error::SingularEvaluation(_)) => continue,
                Err(e) => return Err(e),
            };
            let modulus = value.norm();
            if modulus > 1.0 && best.as_ref().map_or(true, |b| modulus > b.modulus) {
                best = Some(Case2Witness { s, p, modulus });
            }
        }
    }
    Ok(best)
}

/// One candidate in the uniqueness falsification scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UniquenessEntry {
    pub epsilon: f64,
    /// Exponents `(i, j)` of the monomial factor `s^i p^j`.
    pub exponents: (usize, usize),
    pub sup_estimate: f64,
    pub slice_deviation: f64,
    /// Whether the candidate fails the norm bound or the Möbius-slice
    /// property (every perturbed candidate must).
    pub rejected: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub seed: u64,
    pub entries: Vec<UniquenessEntry>,
}

/// Perturbs the extension `alpha Phi_{beta/alpha}` by
/// `epsilon s (s^2 - 4p) s^i p^j` — which vanishes on both variety
/// branches, so every perturbed candidate still extends the same data —
/// and checks that each perturbation is rejected by the sampled sup-norm
/// or by the Möbius-slice property.  Falsification evidence, not a proof.
pub fn uniqueness_scan(
    alpha: C64,
    beta: C64,
    exponents: &[(usize, usize)],
    epsilon: f64,
    n: usize,
    seed: u64,
) -> Result<UniquenessReport> {
    let magic = MagicFunction::new(beta / alpha)?;
    let set = crate::domains::sample_domain(
        crate::domains::DomainTag::G2,
        n,
        seed,
        crate::domains::SampleKind::Interior,
    );
    let mut entries = Vec::new();
    let mut cases: Vec<(f64, (usize, usize))> = vec![(0.0, (0, 0))];
    cases.extend(exponents.iter().map(|&e| (epsilon, e)));
    for (eps, (i, j)) in cases {
        let candidate = |s: C64, p: C64| -> Result<C64> {
            let q = s * (s * s - 4.0 * p) * s.powu(i as u32) * p.powu(j as u32);
            Ok(alpha * magic.eval(s, p)? + eps * q)
        };
        let mut sup = 0.0_f64;
        for &z in &set.points {
            sup = sup.max(candidate(z[0], z[1])?.norm());
        }
        let probe = mobius_slice_probe(&candidate, C64::new(0.0, 1.0), 64)?;
        let rejected = sup > 1.0 || probe.deviation > 1e-4;
        entries.push(UniquenessEntry {
            epsilon: eps,
            exponents: (i, j),
            sup_estimate: sup,
            slice_deviation: probe.deviation,
            rejected,
        });
    }
    Ok(UniquenessReport { seed, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{sample_domain, DomainTag, SampleKind};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn unimodular(rng: &mut ChaCha8Rng) -> C64 {
        C64::from_polar(1.0, rng.gen::<f64>() * std::f64::consts::TAU)
    }

    #[test]
    fn unique_extension_trivial_case() {
        let ext = unique_extension(c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        // m_0 is negation, so the extension is -Phi_1; at (0, p) it is -p
        for p in sample_disc(100, 1) {
            assert!((ext.eval(c(0.0, 0.0), p).unwrap() + p).norm() < 1e-14);
        }
    }

    #[test]
    fn unique_extension_restricts_on_both_branches() {
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        let alpha = unimodular(&mut rng);
        let beta = unimodular(&mut rng);
        let lambda0 = crate::domains::unit_disc_sample(&mut rng);
        let ext = unique_extension(alpha, beta, lambda0).unwrap();
        for lam in sample_disc(10_000, 2) {
            let royal = ext.eval(2.0 * lam, lam * lam).unwrap();
            assert!((royal - ext.branch_value(Branch::Branch1, lam)).norm() < 1e-12);
            let flat = ext.eval(c(0.0, 0.0), lam).unwrap();
            assert!((flat - ext.branch_value(Branch::Branch2, lam)).norm() < 1e-12);
        }
    }

    #[test]
    fn unique_extension_is_schur() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let ext =
            unique_extension(unimodular(&mut rng), unimodular(&mut rng), c(0.3, -0.2)).unwrap();
        let set = sample_domain(DomainTag::G2, 100_000, 3, SampleKind::Interior);
        for &z in &set.points {
            assert!(ext.eval(z[0], z[1]).unwrap().norm() < 1.0);
        }
    }

    #[test]
    fn slice_probe_accepts_magic_extensions() {
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        for _ in 0..20 {
            let alpha = unimodular(&mut rng);
            let omega = unimodular(&mut rng);
            let slice_dir = unimodular(&mut rng);
            let magic = MagicFunction::new(omega).unwrap();
            let f = |s: C64, p: C64| Ok(alpha * magic.eval(s, p)?);
            let rep = mobius_slice_probe(f, slice_dir, 64).unwrap();
            assert!(rep.deviation <= 1e-8, "deviation {:.3e}", rep.deviation);
        }
    }

    #[test]
    fn slice_probe_accepts_p_coordinate() {
        let f = |_s: C64, p: C64| Ok(p);
        let rep = mobius_slice_probe(f, c(0.0, 1.0), 64).unwrap();
        assert!(rep.deviation <= 1e-10);
    }

    #[test]
    fn slice_probe_flags_constant_slice() {
        let f = |_s: C64, _p: C64| Ok(c(0.0, 0.0));
        // F = 0: slice/lambda is identically 0, a constant
        let rep = mobius_slice_probe(f, c(1.0, 0.0), 16).unwrap();
        assert!(rep.degenerate);
        assert!(rep.deviation < 1e-14);
    }

    #[test]
    fn slice_probe_rejects_case2_candidate() {
        let lambda0 = c(0.5, 0.0);
        let f = |s: C64, p: C64| case2_candidate(lambda0, s, p);
        let rep = mobius_slice_probe(f, c(0.0, 1.0), 64).unwrap();
        assert!(rep.deviation > 1e-3, "deviation {:.3e}", rep.deviation);
    }

    #[test]
    fn slice_taylor_matches_displayed_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..100 {
            let alpha = unimodular(&mut rng);
            let beta = unimodular(&mut rng);
            let omega = unimodular(&mut rng);
            let magic = MagicFunction::new(beta / alpha).unwrap();
            let f = |s: C64, p: C64| Ok(alpha * magic.eval(s, p)?);
            let series = slice_taylor(f, omega, 2).unwrap();
            let one = c(1.0, 0.0);
            let c1 = alpha * (one + omega) * 0.5;
            let half = (one - omega) * 0.5;
            let c2 = -beta * half * half;
            assert!(series.coeffs[0].norm() < 1e-10);
            assert!((series.coeffs[1] - c1).norm() < 1e-8);
            assert!((series.coeffs[2] - c2).norm() < 1e-8);
        }
    }

    #[test]
    fn slice_taylor_degenerate_omegas() {
        let magic = MagicFunction::new(c(1.0, 0.0)).unwrap();
        let f = |s: C64, p: C64| magic.eval(s, p);
        // omega = 1: the quadratic term vanishes
        let series = slice_taylor(f, c(1.0, 0.0), 2).unwrap();
        assert!((series.coeffs[1] - c(1.0, 0.0)).norm() < 1e-10);
        assert!(series.coeffs[2].norm() < 1e-10);
        // omega = -1: the linear term vanishes and c2 = -beta = -1
        let series = slice_taylor(f, c(-1.0, 0.0), 2).unwrap();
        assert!(series.coeffs[1].norm() < 1e-10);
        assert!((series.coeffs[2] + c(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn case1_lhs_coefficients() {
        let lambda0 = c(0.5, 0.0);
        let m = MoebiusMap::new(lambda0).unwrap();
        for lam in sample_disc(50, 4) {
            // flat-disc branch: independent of omega
            let s2 = omega_fourier(
                CaseTag::I,
                lambda0,
                SideArg::Lhs {
                    branch: Branch::Branch2,
                    lambda: lam,
                },
                2,
                256,
            )
            .unwrap();
            assert!((s2.coeffs[0] - m.eval(lam)).norm() < 1e-8);
            assert!(s2.coeffs[1].norm() < 1e-8);

            // royal branch: constant lambda0, then (|lambda0|^2 - 1) lambda;
            // coefficients decay like (|lambda| |lambda0|)^k, so the order
            // must be generous for parameters near the circle
            let s1 = omega_fourier(
                CaseTag::I,
                lambda0,
                SideArg::Lhs {
                    branch: Branch::Branch1,
                    lambda: lam,
                },
                48,
                256,
            )
            .unwrap();
            assert!((s1.coeffs[0] - lambda0).norm() < 1e-8);
            let want = (lambda0.norm_sqr() - 1.0) * lam;
            assert!((s1.coeffs[1] - want).norm() < 1e-8, "lambda = {lam}");
        }
    }

    #[test]
    fn case1_rhs_coefficients() {
        let lambda0 = c(0.5, 0.0);
        let (s, p) = (c(0.6, 0.0), c(0.09, 0.0));
        let series =
            omega_fourier(CaseTag::I, lambda0, SideArg::Rhs { s, p }, 12, 256).unwrap();
        assert!((series.coeffs[0] - lambda0).norm() < 1e-6);
        let want = -(2.0 * p / s) * (1.0 - lambda0.norm_sqr());
        assert!(
            (series.coeffs[1] - want).norm() < 1e-6,
            "got {}, want {want}",
            series.coeffs[1]
        );
    }

    #[test]
    fn case1_contradiction_margin() {
        let (margin, witness) = contradiction_margin(c(0.5, 0.0), 10_000, 5).unwrap();
        assert!(margin > 0.1, "margin {margin}");
        assert!(witness.norm() < 1.0);
        // deterministic
        let again = contradiction_margin(c(0.5, 0.0), 10_000, 5).unwrap();
        assert_eq!(margin, again.0);
    }

    #[test]
    fn case2_lhs_and_rhs_coefficients_agree_with_candidate() {
        let lambda0 = c(0.4, 0.3);
        // LHS order 1 on the flat branch is (|l0|^2 - 1) lambda
        for lam in sample_disc(20, 6) {
            let s = omega_fourier(
                CaseTag::II,
                lambda0,
                SideArg::Lhs {
                    branch: Branch::Branch2,
                    lambda: lam,
                },
                48,
                256,
            )
            .unwrap();
            assert!((s.coeffs[0] - lambda0).norm() < 1e-8);
            let want = (lambda0.norm_sqr() - 1.0) * lam;
            assert!((s.coeffs[1] - want).norm() < 1e-8);
        }
        // RHS order 1 over (|l0|^2 - 1) reproduces the candidate; points are
        // pulled inward so the series decays well within the guard order
        let set = sample_domain(DomainTag::G2, 50, 7, SampleKind::Interior);
        for &z in &set.points {
            let (s, p) = (0.7 * z[0], 0.49 * z[1]);
            let series =
                omega_fourier(CaseTag::II, lambda0, SideArg::Rhs { s, p }, 48, 256).unwrap();
            let forced = series.coeffs[1] / (lambda0.norm_sqr() - 1.0);
            let want = case2_candidate(lambda0, s, p).unwrap();
            assert!(
                (forced - want).norm() < 1e-6,
                "at ({}, {}): {forced} vs {want}",
                z[0],
                z[1]
            );
        }
    }

    #[test]
    fn aliasing_guard_rejects_low_order() {
        let lambda0 = c(0.5, 0.0);
        let err = omega_fourier(
            CaseTag::I,
            lambda0,
            SideArg::Rhs {
                s: c(0.6, 0.0),
                p: c(0.09, 0.0),
            },
            0,
            256,
        );
        assert!(matches!(err, Err(Error::OrderTooLow(_))));
    }

    #[test]
    fn case_i_rhs_guards_small_s() {
        let err = omega_fourier(
            CaseTag::I,
            c(0.5, 0.0),
            SideArg::Rhs {
                s: c(0.0, 0.0),
                p: c(0.1, 0.0),
            },
            4,
            256,
        );
        assert!(err.is_err());
    }

    #[test]
    fn case2_candidate_examples() {
        // lambda0 = 0 is the consistent case: at pi(l, -l) = (0, -l^2)
        for lam in sample_disc(100, 8) {
            let v = case2_candidate(c(0.0, 0.0), c(0.0, 0.0), -lam * lam).unwrap();
            assert!((v + lam * lam).norm() < 1e-14);
            assert!(v.norm() < 1.0);
            // vanishes on the royal disc
            let v = case2_candidate(c(0.5, 0.0), 2.0 * lam, lam * lam).unwrap();
            assert!(v.norm() < 1e-13);
        }
    }

    #[test]
    fn case2_witness_found_for_nonzero_lambda0() {
        for t in [0.05, 0.1, 0.3, 0.5, 0.9] {
            let w = case2_witness(C64::from_polar(t, 0.8), 2000).unwrap();
            let w = w.unwrap_or_else(|| panic!("no witness for t = {t}"));
            assert!(w.modulus > 1.0);
            assert!(in_g2(w.s, w.p));
            // the witness is reproducible through the public evaluator
            let again = case2_candidate(C64::from_polar(t, 0.8), w.s, w.p).unwrap();
            assert!((again.norm() - w.modulus).abs() < 1e-12);
        }
    }

    #[test]
    fn eqe5_no_witness_at_zero_and_witness_otherwise() {
        assert!(check_eqe5(c(0.0, 0.0), 1000).is_none());
        for t in [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9] {
            let w = check_eqe5(C64::from_polar(t, 1.1), 4000)
                .unwrap_or_else(|| panic!("no witness for t = {t}"));
            assert!(w.gap > 0.0);
            assert!(w.lambda.norm() <= 1.0 + 1e-15 && w.mu.norm() <= 1.0 + 1e-15);
            // the reported numbers are consistent with the inequality sides
            assert!((w.lhs - ((w.lambda - w.mu) * 0.5).norm()).abs() < 1e-15);
        }
    }

    #[test]
    fn eqe5_optimal_angle_violates_for_each_t() {
        for k in 1..10 {
            let t = k as f64 / 10.0;
            let theta = (t / (1.0 + t * t)).acos();
            let lambda = C64::from_polar(1.0, theta);
            let mu = C64::from_polar(1.0, -theta);
            let lhs = ((lambda - mu) * 0.5).norm();
            let rhs = (c(1.0, 0.0) - c(t, 0.0) * (lambda + mu) * 0.5).norm();
            assert!(lhs > rhs, "t = {t}: {lhs} <= {rhs}");
        }
    }

    #[test]
    fn eq8_gap_examples_and_grid_oracle() {
        let (l, r, g) = eq8_gap(0.0).unwrap();
        assert!((l - 2.0).abs() < 1e-14 && (r - 2.0).abs() < 1e-14 && g.abs() < 1e-14);
        let (l, r, g) = eq8_gap(1.0 - 1e-12).unwrap();
        assert!((l - 6.0).abs() < 1e-9 && (r - 4.0).abs() < 1e-9 && (g - 2.0).abs() < 1e-9);
        let (l, r, g) = eq8_gap(0.5).unwrap();
        assert!((l - 3.3).abs() < 1e-14);
        assert!((r - 2.5).abs() < 1e-14);
        assert!((g - 0.8).abs() < 1e-14);

        // closed form vs dense theta grid, and positivity on a 99-point grid
        for k in 1..100 {
            let t = k as f64 / 100.0;
            let (lhs_max, _, gap) = eq8_gap(t).unwrap();
            assert!(gap > 0.0);
            let grid_max = (0..20_000)
                .map(|j| eq8_lhs(t, std::f64::consts::PI * j as f64 / 20_000.0))
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(
                (grid_max - lhs_max).abs() < 1e-6,
                "t = {t}: grid {grid_max} vs closed form {lhs_max}"
            );
        }
    }

    #[test]
    fn uniqueness_scan_rejects_perturbations() {
        let mut rng = ChaCha8Rng::seed_from_u64(54);
        let alpha = unimodular(&mut rng);
        let beta = unimodular(&mut rng);
        let exps = [(0, 0), (1, 0), (0, 1), (2, 0)];
        let rep = uniqueness_scan(alpha, beta, &exps, 0.1, 100_000, 9).unwrap();
        assert_eq!(rep.entries.len(), 5);
        assert!(!rep.entries[0].rejected, "unperturbed candidate must pass");
        for e in &rep.entries[1..] {
            assert!(
                e.rejected,
                "perturbation {:?} passed: sup {} slice {:.3e}",
                e.exponents, e.sup_estimate, e.slice_deviation
            );
        }
        // determinism
        let again = uniqueness_scan(alpha, beta, &exps, 0.1, 100_000, 9).unwrap();
        assert_eq!(rep.entries[1].sup_estimate, again.entries[1].sup_estimate);
    }
}
