//! Matrix-coefficient polynomials in one complex variable, the concrete
//! input format for Schur-class data on a disc.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::CMatrix;
use crate::error::{Error, Result};

/// Degree-ordered matrix coefficients, all of the same shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolyRepr", into = "PolyRepr")]
pub struct MatrixPolynomial {
    coeffs: Vec<CMatrix>,
}

impl MatrixPolynomial {
    pub fn new(coeffs: Vec<CMatrix>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter(
                "polynomial needs at least one coefficient".into(),
            ));
        }
        let shape = coeffs[0].shape();
        for (k, c) in coeffs.iter().enumerate() {
            if c.shape() != shape {
                return Err(Error::DimensionMismatch(format!(
                    "coefficient {k} has shape {:?}, expected {shape:?}",
                    c.shape()
                )));
            }
            if c.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "coefficient {k} has non-finite entries"
                )));
            }
        }
        Ok(MatrixPolynomial { coeffs })
    }

    pub fn constant(m: CMatrix) -> Self {
        MatrixPolynomial { coeffs: vec![m] }
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        MatrixPolynomial {
            coeffs: vec![CMatrix::zeros(rows, cols)],
        }
    }

    pub fn coeffs(&self) -> &[CMatrix] {
        &self.coeffs
    }

    pub fn shape(&self) -> (usize, usize) {
        self.coeffs[0].shape()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Horner evaluation.
    pub fn eval(&self, lambda: C64) -> CMatrix {
        let mut acc = self.coeffs[self.coeffs.len() - 1].clone();
        for c in self.coeffs.iter().rev().skip(1) {
            acc *= lambda;
            acc += c;
        }
        acc
    }

    /// Exact division by `lambda`: drops the constant term, which must be
    /// zero up to `tol` in spectral norm.
    pub fn shift_down(&self, tol: f64) -> Result<Self> {
        let c0 = super::spectral_norm(&self.coeffs[0]);
        if c0 > tol {
            return Err(Error::InvalidParameter(format!(
                "constant term has norm {c0}, cannot divide by lambda"
            )));
        }
        if self.coeffs.len() == 1 {
            let (r, c) = self.shape();
            return Ok(Self::zero(r, c));
        }
        Ok(MatrixPolynomial {
            coeffs: self.coeffs[1..].to_vec(),
        })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        MatrixPolynomial {
            coeffs: self
                .coeffs
                .iter()
                .map(|c| c * C64::new(factor, 0.0))
                .collect(),
        }
    }

    /// Max spectral norm over `n` equispaced points of the unit circle.
    pub fn boundary_sup_norm(&self, n: usize) -> f64 {
        (0..n)
            .map(|k| {
                let z = C64::from_polar(1.0, std::f64::consts::TAU * k as f64 / n as f64);
                super::spectral_norm(&self.eval(z))
            })
            .fold(0.0, f64::max)
    }
}

pub(crate) fn matrix_to_repr(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub(crate) fn matrix_from_repr(rows: usize, cols: usize, r: &[Vec<[f64; 2]>]) -> Result<CMatrix> {
    if r.len() != rows || r.iter().any(|row| row.len() != cols) {
        return Err(Error::DimensionMismatch(format!(
            "matrix entries do not match declared shape {rows}x{cols}"
        )));
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| {
        C64::new(r[i][j][0], r[i][j][1])
    }))
}

/// JSON schema: `{ "shape": [r, c], "coeffs": [[[ [re, im], ... ]]] }`,
/// degree-major, row-major.
#[derive(Serialize, Deserialize)]
struct PolyRepr {
    shape: [usize; 2],
    coeffs: Vec<Vec<Vec<[f64; 2]>>>,
}

impl From<MatrixPolynomial> for PolyRepr {
    fn from(p: MatrixPolynomial) -> Self {
        let (r, c) = p.shape();
        PolyRepr {
            shape: [r, c],
            coeffs: p.coeffs.iter().map(matrix_to_repr).collect(),
        }
    }
}

impl TryFrom<PolyRepr> for MatrixPolynomial {
    type Error = Error;

    fn try_from(r: PolyRepr) -> Result<Self> {
        let coeffs = r
            .coeffs
            .iter()
            .map(|c| matrix_from_repr(r.shape[0], r.shape[1], c))
            .collect::<Result<Vec<_>>>()?;
        MatrixPolynomial::new(coeffs)
    }
}
