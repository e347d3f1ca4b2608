//! Scalar Möbius maps, the magic functions of the symmetrized bidisc, and
//! the operator Möbius transform (disc automorphisms of the operator ball).

use num_complex::Complex64 as C64;

use super::CMatrix;
use crate::error::{Error, Result};

const UNIMODULAR_TOL: f64 = 1e-14;

/// `lambda -> prefactor * (b - lambda) / (1 - conj(b) lambda)` with `|b| < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoebiusMap {
    b: C64,
    prefactor: C64,
}

impl MoebiusMap {
    pub fn new(b: C64) -> Result<Self> {
        Self::with_prefactor(b, C64::new(1.0, 0.0))
    }

    pub fn with_prefactor(b: C64, prefactor: C64) -> Result<Self> {
        if !(b.norm() < 1.0) {
            return Err(Error::InvalidParameter(format!("|b| = {} >= 1", b.norm())));
        }
        if (prefactor.norm() - 1.0).abs() > UNIMODULAR_TOL {
            return Err(Error::InvalidParameter(format!(
                "prefactor modulus {} is not unimodular",
                prefactor.norm()
            )));
        }
        Ok(MoebiusMap { b, prefactor })
    }

    pub fn b(&self) -> C64 {
        self.b
    }

    /// Maps the closed disc to itself; the pole `1/conj(b)` lies outside.
    pub fn eval(&self, lambda: C64) -> C64 {
        self.prefactor * (self.b - lambda) / (C64::new(1.0, 0.0) - self.b.conj() * lambda)
    }
}

/// The magic function `Phi_omega(s, p) = (s/2 + omega p) / (1 + omega s/2)`
/// for unimodular `omega`, a Schur function of the symmetrized bidisc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagicFunction {
    omega: C64,
}

impl MagicFunction {
    pub fn new(omega: C64) -> Result<Self> {
        if (omega.norm() - 1.0).abs() > UNIMODULAR_TOL {
            return Err(Error::InvalidParameter(format!(
                "omega modulus {} is not unimodular",
                omega.norm()
            )));
        }
        Ok(MagicFunction { omega })
    }

    pub fn omega(&self) -> C64 {
        self.omega
    }

    pub fn eval(&self, s: C64, p: C64) -> Result<C64> {
        let denom = C64::new(1.0, 0.0) + self.omega * s * 0.5;
        if denom.norm() < 1e-13 {
            return Err(Error::SingularEvaluation(format!(
                "1 + omega s/2 = {denom} at s = {s}"
            )));
        }
        Ok((s * 0.5 + self.omega * p) / denom)
    }
}

/// Inverse square root of a Hermitian positive definite matrix, eigenvalues
/// clamped at zero before inversion.
fn hermitian_pow(m: &CMatrix, pow: f64) -> Result<CMatrix> {
    let n = m.nrows();
    let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = nalgebra::SymmetricEigen::new(herm);
    let mut d = CMatrix::zeros(n, n);
    for i in 0..n {
        let ev = eig.eigenvalues[i].max(0.0);
        if pow < 0.0 && ev < 1e-14 {
            return Err(Error::NumericalFailure(
                "singular factor in operator Möbius transform".into(),
            ));
        }
        d[(i, i)] = C64::new(ev.powf(pow), 0.0);
    }
    Ok(&eig.eigenvectors * d * eig.eigenvectors.adjoint())
}

/// The ball automorphism determined by a strict contraction `w`:
///
/// `m_w(x) = (I - w w^*)^{-1/2} (w - x) (I - w^* x)^{-1} (I - w^* w)^{1/2}`.
///
/// Sends `w` to `0`, `0` to `w`, and is an involution on the closed ball.
pub fn operator_moebius(w: &CMatrix, x: &CMatrix) -> Result<CMatrix> {
    let n = w.nrows();
    if w.ncols() != n || x.nrows() != n || x.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "operator Möbius needs square matrices of equal size, got {}x{} and {}x{}",
            w.nrows(),
            w.ncols(),
            x.nrows(),
            x.ncols()
        )));
    }
    let wn = super::spectral_norm(w);
    if wn > 1.0 - 1e-6 {
        return Err(Error::InvalidParameter(format!(
            "base point norm {wn} exceeds the strict-contraction margin 1 - 1e-6"
        )));
    }
    if super::spectral_norm(x) > 1.0 + 1e-8 {
        return Err(Error::InvalidParameter(
            "argument is not a contraction".into(),
        ));
    }
    let id = CMatrix::identity(n, n);
    let left = hermitian_pow(&(&id - w * w.adjoint()), -0.5)?;
    let right = hermitian_pow(&(&id - w.adjoint() * w), 0.5)?;
    let core = &id - w.adjoint() * x;
    let inv = core.lu().try_inverse().ok_or_else(|| {
        Error::SingularEvaluation("I - w^* x is singular in operator Möbius transform".into())
    })?;
    Ok(left * (w - x) * inv * right)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schur::{random_unitary, spectral_norm};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn moebius_examples() {
        let m0 = MoebiusMap::new(c(0.0, 0.0)).unwrap();
        assert_eq!(m0.eval(c(0.4, 0.0)), c(-0.4, 0.0));
        let mb = MoebiusMap::new(c(0.3, 0.2)).unwrap();
        assert!(mb.eval(c(0.3, 0.2)).norm() < 1e-15);
        let mh = MoebiusMap::new(c(0.5, 0.0)).unwrap();
        assert!((mh.eval(c(-0.5, 0.0)) - c(0.8, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn moebius_maps_circle_to_circle() {
        let m = MoebiusMap::new(c(0.4, -0.1)).unwrap();
        for k in 0..64 {
            let t = std::f64::consts::TAU * k as f64 / 64.0;
            let z = C64::from_polar(1.0, t);
            assert!((m.eval(z).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn magic_examples() {
        let phi_i = MagicFunction::new(c(0.0, 1.0)).unwrap();
        let l = c(0.3, 0.0);
        assert!((phi_i.eval(2.0 * l, l * l).unwrap() - l).norm() < 1e-15);

        let phi_m1 = MagicFunction::new(c(-1.0, 0.0)).unwrap();
        assert!((phi_m1.eval(c(0.0, 0.0), c(0.25, 0.0)).unwrap() - c(-0.25, 0.0)).norm() < 1e-15);

        let phi_1 = MagicFunction::new(c(1.0, 0.0)).unwrap();
        assert!((phi_1.eval(c(0.6, 0.0), c(0.09, 0.0)).unwrap() - c(0.3, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn magic_identity_on_royal_disc() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10_000 {
            let omega = C64::from_polar(1.0, rng.gen::<f64>() * std::f64::consts::TAU);
            let lam = crate::domains::unit_disc_sample(&mut rng);
            let phi = MagicFunction::new(omega).unwrap();
            assert!((phi.eval(2.0 * lam, lam * lam).unwrap() - lam).norm() < 1e-12);
        }
    }

    #[test]
    fn magic_is_contractive_on_g2() {
        let set =
            crate::domains::sample_domain(crate::domains::DomainTag::G2, 100_000, 9, crate::domains::SampleKind::Interior);
        let phi = MagicFunction::new(C64::from_polar(1.0, 0.7)).unwrap();
        for q in &set.points {
            assert!(phi.eval(q[0], q[1]).unwrap().norm() < 1.0);
        }
    }

    #[test]
    fn operator_moebius_zero_base_negates() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random_unitary(3, &mut rng) * C64::new(0.9, 0.0);
        let w = CMatrix::zeros(3, 3);
        let y = operator_moebius(&w, &x).unwrap();
        assert!(spectral_norm(&(y + &x)) < 1e-12);
    }

    #[test]
    fn operator_moebius_base_to_origin_and_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let w = random_unitary(4, &mut rng) * C64::new(0.6, 0.0);
        assert!(spectral_norm(&operator_moebius(&w, &w).unwrap()) < 1e-12);
        let x = random_unitary(4, &mut rng) * C64::new(0.95, 0.0);
        let y = operator_moebius(&w, &x).unwrap();
        assert!(spectral_norm(&y) <= 1.0 + 1e-10);
        let back = operator_moebius(&w, &y).unwrap();
        assert!(spectral_norm(&(back - &x)) < 1e-8);
    }

    #[test]
    fn operator_moebius_scalar_matches_moebius_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..100 {
            let b = crate::domains::unit_disc_sample(&mut rng) * 0.9;
            let lam = crate::domains::unit_disc_sample(&mut rng);
            let w = CMatrix::from_element(1, 1, b);
            let x = CMatrix::from_element(1, 1, lam);
            let got = operator_moebius(&w, &x).unwrap()[(0, 0)];
            let want = MoebiusMap::new(b).unwrap().eval(lam);
            assert!((got - want).norm() < 1e-10, "b = {b}, lambda = {lam}");
        }
    }

    #[test]
    fn operator_moebius_rejects_near_boundary_base() {
        let w = CMatrix::from_element(1, 1, c(1.0 - 1e-8, 0.0));
        let x = CMatrix::zeros(1, 1);
        assert!(operator_moebius(&w, &x).is_err());
    }
}
