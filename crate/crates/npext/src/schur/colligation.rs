//! Unitary colligations `[[A, B], [C, D]]` on `H (+) K` and their transfer
//! functions.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::poly::{matrix_from_repr, matrix_to_repr};
use super::{unitarity_residual, CMatrix, UNITARITY_TOL};
use crate::error::{Error, Result};

/// Unitary block operator with `A: H -> H`, `B: K -> H`, `C: H -> K`,
/// `D: K -> K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ColligationRepr", into = "ColligationRepr")]
pub struct Colligation {
    a: CMatrix,
    b: CMatrix,
    c: CMatrix,
    d: CMatrix,
}

impl Colligation {
    pub fn new(a: CMatrix, b: CMatrix, c: CMatrix, d: CMatrix) -> Result<Self> {
        let dh = a.nrows();
        let dk = d.nrows();
        if a.ncols() != dh || b.nrows() != dh || b.ncols() != dk || c.nrows() != dk
            || c.ncols() != dh || d.ncols() != dk
        {
            return Err(Error::DimensionMismatch(format!(
                "inconsistent block shapes: A {:?}, B {:?}, C {:?}, D {:?}",
                a.shape(),
                b.shape(),
                c.shape(),
                d.shape()
            )));
        }
        let col = Colligation { a, b, c, d };
        let resid = col.unitarity_residual();
        if resid > UNITARITY_TOL {
            return Err(Error::InvalidParameter(format!(
                "block operator is not unitary, residual {resid:.3e}"
            )));
        }
        Ok(col)
    }

    /// Splits a unitary on `C^(dh + dk)` into its colligation blocks.
    pub fn from_unitary(u: &CMatrix, dim_h: usize) -> Result<Self> {
        let n = u.nrows();
        if u.ncols() != n || dim_h > n {
            return Err(Error::DimensionMismatch(format!(
                "cannot split a {}x{} matrix at dim_h = {dim_h}",
                u.nrows(),
                u.ncols()
            )));
        }
        let dk = n - dim_h;
        Colligation::new(
            u.view((0, 0), (dim_h, dim_h)).into(),
            u.view((0, dim_h), (dim_h, dk)).into(),
            u.view((dim_h, 0), (dk, dim_h)).into(),
            u.view((dim_h, dim_h), (dk, dk)).into(),
        )
    }

    pub fn dim_h(&self) -> usize {
        self.a.nrows()
    }

    pub fn dim_k(&self) -> usize {
        self.d.nrows()
    }

    pub fn block_a(&self) -> &CMatrix {
        &self.a
    }

    pub fn block_d(&self) -> &CMatrix {
        &self.d
    }

    /// The assembled `(dh + dk)` square unitary.
    pub fn assemble(&self) -> CMatrix {
        let dh = self.dim_h();
        let dk = self.dim_k();
        let mut u = CMatrix::zeros(dh + dk, dh + dk);
        u.view_mut((0, 0), (dh, dh)).copy_from(&self.a);
        u.view_mut((0, dh), (dh, dk)).copy_from(&self.b);
        u.view_mut((dh, 0), (dk, dh)).copy_from(&self.c);
        u.view_mut((dh, dh), (dk, dk)).copy_from(&self.d);
        u
    }

    pub fn unitarity_residual(&self) -> f64 {
        unitarity_residual(&self.assemble())
    }

    /// The classical transfer function `A + lambda B (I - lambda D)^{-1} C`.
    pub fn transfer_classical(&self, lambda: C64) -> Result<CMatrix> {
        let dk = self.dim_k();
        if dk == 0 {
            return Ok(self.a.clone());
        }
        let core = CMatrix::identity(dk, dk) - &self.d * lambda;
        let sv = core.clone().singular_values();
        if sv.min() <= 0.0 || sv.max() / sv.min() > 1e12 {
            return Err(Error::IllConditionedFeedback {
                cond: if sv.min() > 0.0 {
                    sv.max() / sv.min()
                } else {
                    f64::INFINITY
                },
            });
        }
        let x = core
            .lu()
            .solve(&self.c)
            .ok_or(Error::IllConditionedFeedback { cond: f64::INFINITY })?;
        Ok(&self.a + &self.b * x * lambda)
    }

    /// `lambda` times the classical transfer function: the normalization
    /// that vanishes at the base point.  `||result|| <= |lambda|`.
    pub fn transfer_eval(&self, lambda: C64) -> Result<CMatrix> {
        Ok(self.transfer_classical(lambda)? * lambda)
    }
}

/// Pads both colligations to act on `H (+) K1 (+) K2` with identity blocks:
/// the first keeps `K2` fixed, the second keeps `K1` fixed.  Transfer
/// functions are unchanged.
pub fn pad_pair(c1: &Colligation, c2: &Colligation) -> Result<(Colligation, Colligation)> {
    if c1.dim_h() != c2.dim_h() {
        return Err(Error::DimensionMismatch(format!(
            "colligations act on different H: {} vs {}",
            c1.dim_h(),
            c2.dim_h()
        )));
    }
    let dh = c1.dim_h();
    let k1 = c1.dim_k();
    let k2 = c2.dim_k();
    let one = C64::new(1.0, 0.0);

    let mut d1 = CMatrix::zeros(k1 + k2, k1 + k2);
    d1.view_mut((0, 0), (k1, k1)).copy_from(&c1.d);
    for i in 0..k2 {
        d1[(k1 + i, k1 + i)] = one;
    }
    let mut b1 = CMatrix::zeros(dh, k1 + k2);
    b1.view_mut((0, 0), (dh, k1)).copy_from(&c1.b);
    let mut cc1 = CMatrix::zeros(k1 + k2, dh);
    cc1.view_mut((0, 0), (k1, dh)).copy_from(&c1.c);
    let p1 = Colligation::new(c1.a.clone(), b1, cc1, d1)?;

    let mut d2 = CMatrix::zeros(k1 + k2, k1 + k2);
    d2.view_mut((k1, k1), (k2, k2)).copy_from(&c2.d);
    for i in 0..k1 {
        d2[(i, i)] = one;
    }
    let mut b2 = CMatrix::zeros(dh, k1 + k2);
    b2.view_mut((0, k1), (dh, k2)).copy_from(&c2.b);
    let mut cc2 = CMatrix::zeros(k1 + k2, dh);
    cc2.view_mut((k1, 0), (k2, dh)).copy_from(&c2.c);
    let p2 = Colligation::new(c2.a.clone(), b2, cc2, d2)?;

    Ok((p1, p2))
}

#[derive(Serialize, Deserialize)]
struct ColligationRepr {
    dim_h: usize,
    dim_k: usize,
    a: Vec<Vec<[f64; 2]>>,
    b: Vec<Vec<[f64; 2]>>,
    c: Vec<Vec<[f64; 2]>>,
    d: Vec<Vec<[f64; 2]>>,
}

impl From<Colligation> for ColligationRepr {
    fn from(c: Colligation) -> Self {
        ColligationRepr {
            dim_h: c.dim_h(),
            dim_k: c.dim_k(),
            a: matrix_to_repr(&c.a),
            b: matrix_to_repr(&c.b),
            c: matrix_to_repr(&c.c),
            d: matrix_to_repr(&c.d),
        }
    }
}

impl TryFrom<ColligationRepr> for Colligation {
    type Error = Error;

    fn try_from(r: ColligationRepr) -> Result<Self> {
        Colligation::new(
            matrix_from_repr(r.dim_h, r.dim_h, &r.a)?,
            matrix_from_repr(r.dim_h, r.dim_k, &r.b)?,
            matrix_from_repr(r.dim_k, r.dim_h, &r.c)?,
            matrix_from_repr(r.dim_k, r.dim_k, &r.d)?,
        )
    }
}
