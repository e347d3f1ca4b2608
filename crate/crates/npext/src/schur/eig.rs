//! Eigendecomposition of unitary matrices.
//!
//! Finite unitaries are normal, so the complex Schur form is diagonal up to
//! roundoff; we take the Schur basis as the eigenvector matrix.  The
//! residual invariants are the contract, not the algorithm.

use num_complex::Complex64 as C64;
use rand::Rng;

use super::{spectral_norm, unitarity_residual, CMatrix};
use crate::error::{Error, Result};

/// `W` unitary and unimodular `taus` with `U W = W diag(taus)`.
#[derive(Debug, Clone)]
pub struct UnitaryEigen {
    pub w: CMatrix,
    pub taus: Vec<C64>,
}

impl UnitaryEigen {
    /// `||U W - W diag(taus)||` in spectral norm.
    pub fn residual(&self, u: &CMatrix) -> f64 {
        let n = self.taus.len();
        let d = CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                self.taus[i]
            } else {
                C64::new(0.0, 0.0)
            }
        });
        spectral_norm(&(u * &self.w - &self.w * d))
    }
}

fn arg_in_two_pi(z: C64) -> f64 {
    let a = z.arg();
    if a < 0.0 {
        a + std::f64::consts::TAU
    } else {
        a
    }
}

/// Diagonalizes a unitary matrix.  Eigenvalues are normalized to unit
/// modulus and sorted by argument in `[0, 2pi)` for reproducibility.
pub fn unitary_eig(u: &CMatrix) -> Result<UnitaryEigen> {
    let n = u.nrows();
    if u.ncols() != n {
        return Err(Error::DimensionMismatch("matrix must be square".into()));
    }
    if n == 0 {
        return Ok(UnitaryEigen {
            w: CMatrix::zeros(0, 0),
            taus: vec![],
        });
    }
    if unitarity_residual(u) > 1e-8 {
        return Err(Error::InvalidParameter(
            "matrix is not unitary to 1e-8".into(),
        ));
    }
    let schur = u
        .clone()
        .try_schur(1e-15, 10_000)
        .ok_or_else(|| Error::NumericalFailure("Schur iteration did not converge".into()))?;
    let (q, t) = schur.unpack();

    let mut idx: Vec<usize> = (0..n).collect();
    let taus_raw: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
    idx.sort_by(|&i, &j| {
        arg_in_two_pi(taus_raw[i])
            .partial_cmp(&arg_in_two_pi(taus_raw[j]))
            .unwrap()
    });

    let mut w = CMatrix::zeros(n, n);
    let mut taus = Vec::with_capacity(n);
    for (col, &i) in idx.iter().enumerate() {
        w.set_column(col, &q.column(i));
        let t = taus_raw[i];
        if t.norm() < 0.5 {
            return Err(Error::NumericalFailure(format!(
                "eigenvalue {t} of a unitary is far from the circle"
            )));
        }
        taus.push(t / t.norm());
    }

    let out = UnitaryEigen { w, taus };
    if unitarity_residual(&out.w) > 1e-10 {
        return Err(Error::NumericalFailure(
            "eigenvector basis lost unitarity".into(),
        ));
    }
    if out.residual(u) > 1e-9 {
        return Err(Error::NumericalFailure(
            "eigendecomposition residual exceeds 1e-9".into(),
        ));
    }
    Ok(out)
}

/// Haar-ish random unitary: QR of a complex Gaussian matrix.
pub fn random_unitary<R: Rng>(n: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| {
        // Box-Muller
        let u1: f64 = rng.gen::<f64>().max(1e-300);
        let u2: f64 = rng.gen();
        let r = (-2.0 * u1.ln()).sqrt();
        C64::new(
            r * (std::f64::consts::TAU * u2).cos(),
            r * (std::f64::consts::TAU * u2).sin(),
        )
    });
    g.qr().q()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn identity_has_unit_eigenvalues() {
        let u = CMatrix::identity(4, 4);
        let e = unitary_eig(&u).unwrap();
        for t in &e.taus {
            assert!((t - c(1.0, 0.0)).norm() < 1e-14);
        }
        assert!(e.residual(&u) < 1e-12);
    }

    #[test]
    fn diagonal_unitary_recovers_entries() {
        let entries = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0)];
        let u = CMatrix::from_fn(3, 3, |i, j| if i == j { entries[i] } else { c(0.0, 0.0) });
        let e = unitary_eig(&u).unwrap();
        let mut got = e.taus.clone();
        let mut want = entries.to_vec();
        let key = |z: &C64| (z.arg() * 1e6) as i64;
        got.sort_by_key(key);
        want.sort_by_key(key);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).norm() < 1e-12);
        }
    }

    #[test]
    fn random_unitaries_meet_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..20 {
            let u = random_unitary(8, &mut rng);
            let e = unitary_eig(&u).unwrap();
            assert!(e.residual(&u) <= 1e-9);
            assert!(unitarity_residual(&e.w) <= 1e-10);
            for t in &e.taus {
                assert!((t.norm() - 1.0).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn eigenvalues_are_unitarily_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let u = random_unitary(6, &mut rng);
        let v = random_unitary(6, &mut rng);
        let conj = &v * &u * v.adjoint();
        let e1 = unitary_eig(&u).unwrap();
        let e2 = unitary_eig(&conj).unwrap();
        // taus are sorted by argument, so they match position by position
        for (a, b) in e1.taus.iter().zip(&e2.taus) {
            assert!((a - b).norm() < 1e-8);
        }
    }

    #[test]
    fn rejects_non_unitary_input() {
        let m = CMatrix::from_element(2, 2, c(0.5, 0.0));
        assert!(unitary_eig(&m).is_err());
    }
}
