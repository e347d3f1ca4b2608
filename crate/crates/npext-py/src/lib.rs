//! Python bindings: variety functions, norm-preserving extensions, the
//! diamond linear extension, royal-pair extensions, the Bergman linear
//! extension operator, and the no-linear-extension scans.

use num_complex::Complex64 as C64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use npext::bergman::{
    apply_extension, build_bergman_operator, eval_poly, BergmanProblem, LinearExtensionOperator,
};
use npext::counterexample::{self, RoyalPair};
use npext::domains::{Branch, DomainTag, SampleKind};
use npext::extension::{
    build_extension, diamond_linear_extension, verify_extension, DiamondLinearExtension,
    ExtensionFunction, RealizeParams, VarietyFunction,
};
use npext::schur::{CMatrix, MagicFunction, MatrixPolynomial};

fn to_py_err(e: npext::Error) -> PyErr {
    use npext::Error::*;
    match e {
        NumericalFailure(_) | IllConditionedFeedback { .. } | SingularEvaluation(_)
        | OrderTooLow(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse_domain(s: &str) -> PyResult<DomainTag> {
    match s {
        "g2" => Ok(DomainTag::G2),
        "diamond" => Ok(DomainTag::Diamond),
        other => Err(PyValueError::new_err(format!(
            "unknown domain '{other}', expected 'g2' or 'diamond'"
        ))),
    }
}

fn parse_branch(b: usize) -> PyResult<Branch> {
    match b {
        1 => Ok(Branch::Branch1),
        2 => Ok(Branch::Branch2),
        other => Err(PyValueError::new_err(format!(
            "branch must be 1 or 2, got {other}"
        ))),
    }
}

fn matrix_to_py(m: &CMatrix) -> Vec<Vec<C64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn poly_from_py(coeffs: Vec<Vec<Vec<C64>>>) -> PyResult<MatrixPolynomial> {
    let mats = coeffs
        .into_iter()
        .map(|c| {
            let rows = c.len();
            let cols = c.first().map_or(0, |r| r.len());
            if rows == 0 || cols == 0 || c.iter().any(|r| r.len() != cols) {
                return Err(PyValueError::new_err(
                    "each coefficient must be a non-empty rectangular matrix",
                ));
            }
            Ok(CMatrix::from_fn(rows, cols, |i, j| c[i][j]))
        })
        .collect::<PyResult<Vec<_>>>()?;
    MatrixPolynomial::new(mats).map_err(to_py_err)
}

/// Schur-class data on the crossed discs: two branch polynomials of the
/// branch parameter, agreeing at the base point.
#[pyclass(name = "VarietyFunction", skip_from_py_object)]
struct PyVarietyFunction {
    inner: VarietyFunction,
}

#[pymethods]
impl PyVarietyFunction {
    /// Branch coefficients are degree-ordered lists of row-major complex
    /// matrices (nested lists).
    #[new]
    fn new(domain: &str, branch1: Vec<Vec<Vec<C64>>>, branch2: Vec<Vec<Vec<C64>>>) -> PyResult<Self> {
        let inner = VarietyFunction::new(
            poly_from_py(branch1)?,
            poly_from_py(branch2)?,
            parse_domain(domain)?,
        )
        .map_err(to_py_err)?;
        Ok(PyVarietyFunction { inner })
    }

    #[staticmethod]
    fn from_json(data: &str) -> PyResult<Self> {
        Ok(PyVarietyFunction {
            inner: serde_json::from_str(data)
                .map_err(|e| PyValueError::new_err(e.to_string()))?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn domain(&self) -> String {
        self.inner.domain().to_string()
    }

    fn eval_branch(&self, branch: usize, lam: C64) -> PyResult<Vec<Vec<C64>>> {
        Ok(matrix_to_py(&self.inner.eval_branch(parse_branch(branch)?, lam)))
    }
}

/// A norm-preserving holomorphic extension of a variety function.
#[pyclass(name = "Extension")]
struct PyExtension {
    inner: ExtensionFunction,
}

#[pymethods]
impl PyExtension {
    #[staticmethod]
    fn from_json(data: &str) -> PyResult<Self> {
        Ok(PyExtension {
            inner: serde_json::from_str(data)
                .map_err(|e| PyValueError::new_err(e.to_string()))?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[getter]
    fn dim_out(&self) -> usize {
        self.inner.dim_out()
    }

    #[getter]
    fn domain(&self) -> String {
        self.inner.domain().to_string()
    }

    fn eval(&self, z1: C64, z2: C64) -> PyResult<Vec<Vec<C64>>> {
        Ok(matrix_to_py(&self.inner.eval([z1, z2]).map_err(to_py_err)?))
    }

    /// Sampled restriction error and sup-norm estimate against the data.
    fn verify(&self, f: &PyVarietyFunction, n: usize, seed: u64) -> PyResult<(f64, f64)> {
        let rep = verify_extension(&self.inner, &f.inner, n, seed).map_err(to_py_err)?;
        Ok((rep.restriction_max_error, rep.supnorm_estimate))
    }
}

/// Builds the norm-preserving extension of a variety function.
#[pyfunction]
#[pyo3(name = "build_extension")]
fn py_build_extension(f: &PyVarietyFunction) -> PyResult<PyExtension> {
    Ok(PyExtension {
        inner: build_extension(&f.inner, &RealizeParams::default()).map_err(to_py_err)?,
    })
}

/// The linear extension on the diamond, for data vanishing at the crossing.
#[pyclass(name = "DiamondLinearExtension")]
struct PyDiamondLinear {
    inner: DiamondLinearExtension,
}

#[pymethods]
impl PyDiamondLinear {
    fn eval(&self, z1: C64, z2: C64) -> Vec<Vec<C64>> {
        matrix_to_py(&self.inner.eval([z1, z2]))
    }
}

#[pyfunction]
#[pyo3(name = "diamond_linear_extension")]
fn py_diamond_linear_extension(f: &PyVarietyFunction) -> PyResult<PyDiamondLinear> {
    Ok(PyDiamondLinear {
        inner: diamond_linear_extension(&f.inner).map_err(to_py_err)?,
    })
}

/// A royal variety pair with its unique norm-preserving extension.
#[pyclass(name = "RoyalPair")]
struct PyRoyalPair {
    inner: RoyalPair,
}

#[pymethods]
impl PyRoyalPair {
    #[getter]
    fn alpha(&self) -> C64 {
        self.inner.alpha()
    }

    #[getter]
    fn beta(&self) -> C64 {
        self.inner.beta()
    }

    #[getter]
    fn lambda0(&self) -> C64 {
        self.inner.lambda0()
    }

    fn eval(&self, s: C64, p: C64) -> PyResult<C64> {
        self.inner.eval(s, p).map_err(to_py_err)
    }

    fn branch_value(&self, branch: usize, lam: C64) -> PyResult<C64> {
        Ok(self.inner.branch_value(parse_branch(branch)?, lam))
    }
}

#[pyfunction]
#[pyo3(name = "unique_extension")]
fn py_unique_extension(alpha: C64, beta: C64, lambda0: C64) -> PyResult<PyRoyalPair> {
    Ok(PyRoyalPair {
        inner: counterexample::unique_extension(alpha, beta, lambda0).map_err(to_py_err)?,
    })
}

/// The magic function `Phi_omega(s, p)` of the symmetrized bidisc.
#[pyfunction]
fn magic_function(omega: C64, s: C64, p: C64) -> PyResult<C64> {
    MagicFunction::new(omega)
        .and_then(|phi| phi.eval(s, p))
        .map_err(to_py_err)
}

/// Reproducible domain samples as a list of coordinate pairs.
#[pyfunction]
#[pyo3(signature = (domain, n, seed=1, kind="interior"))]
fn sample_domain(domain: &str, n: usize, seed: u64, kind: &str) -> PyResult<Vec<(C64, C64)>> {
    let kind = match kind {
        "interior" => SampleKind::Interior,
        "boundary" => SampleKind::Boundary,
        "variety" => SampleKind::Variety,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown sample kind '{other}'"
            )))
        }
    };
    let set = npext::domains::sample_domain(parse_domain(domain)?, n, seed, kind);
    Ok(set.points.into_iter().map(|z| (z[0], z[1])).collect())
}

/// Minimal-norm linear polynomial extension in a discretized weighted
/// Bergman space.
#[pyclass(name = "BergmanExtension")]
struct PyBergman {
    problem: BergmanProblem,
    op: LinearExtensionOperator,
}

#[pymethods]
impl PyBergman {
    #[new]
    #[pyo3(signature = (domain, degree, n_domain=500, per_branch=8, seed=1))]
    fn new(domain: &str, degree: usize, n_domain: usize, per_branch: usize, seed: u64) -> PyResult<Self> {
        let problem = BergmanProblem::new(parse_domain(domain)?, degree, n_domain, per_branch, seed)
            .map_err(to_py_err)?;
        let op = build_bergman_operator(&problem).map_err(to_py_err)?;
        Ok(PyBergman { problem, op })
    }

    #[getter]
    fn n_basis(&self) -> usize {
        self.op.n_basis()
    }

    #[getter]
    fn degree(&self) -> usize {
        self.op.degree()
    }

    /// Variety sample points, in the order `extend` expects values.
    fn variety_points(&self) -> Vec<(C64, C64)> {
        self.problem
            .variety_samples()
            .points
            .iter()
            .map(|&z| (z[0], z[1]))
            .collect()
    }

    /// Values at the variety samples in, minimal-norm coefficients out.
    fn extend(&self, values: Vec<C64>) -> PyResult<Vec<C64>> {
        apply_extension(&self.op, &values).map_err(to_py_err)
    }

    fn objective(&self, coeffs: Vec<C64>) -> PyResult<f64> {
        self.op.objective(&coeffs).map_err(to_py_err)
    }

    fn eval(&self, coeffs: Vec<C64>, z1: C64, z2: C64) -> C64 {
        eval_poly(&coeffs, self.op.degree(), [z1, z2])
    }
}

/// Case I contradiction margin `max |m_{lambda0}(lambda) - lambda0|` with
/// the witnessing branch parameter.
#[pyfunction]
fn contradiction_margin(lambda0: C64, n: usize, seed: u64) -> PyResult<(f64, C64)> {
    counterexample::contradiction_margin(lambda0, n, seed).map_err(to_py_err)
}

/// Case II boundary gap `(lhs_max, rhs, gap)` in closed form.
#[pyfunction]
fn eq8_gap(t: f64) -> PyResult<(f64, f64, f64)> {
    counterexample::eq8_gap(t).map_err(to_py_err)
}

/// The forced Case II candidate extension of `[0, lambda]`.
#[pyfunction]
fn case2_candidate(lambda0: C64, s: C64, p: C64) -> PyResult<C64> {
    counterexample::case2_candidate(lambda0, s, p).map_err(to_py_err)
}

/// An interior point of G2 where the Case II candidate exceeds modulus 1,
/// as `(s, p, modulus)`, or `None` when no violation is found.
#[pyfunction]
fn case2_witness(lambda0: C64, grid: usize) -> PyResult<Option<(C64, C64, f64)>> {
    Ok(counterexample::case2_witness(lambda0, grid)
        .map_err(to_py_err)?
        .map(|w| (w.s, w.p, w.modulus)))
}

/// A closed-bidisc pair violating the Case II inequality, as
/// `(lambda, mu, lhs, rhs)`, or `None` (only at lambda0 = 0).
#[pyfunction]
fn check_eqe5(lambda0: C64, grid: usize) -> Option<(C64, C64, f64, f64)> {
    counterexample::check_eqe5(lambda0, grid).map(|w| (w.lambda, w.mu, w.lhs, w.rhs))
}

#[pymodule]
fn _npext(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyVarietyFunction>()?;
    m.add_class::<PyExtension>()?;
    m.add_class::<PyDiamondLinear>()?;
    m.add_class::<PyRoyalPair>()?;
    m.add_class::<PyBergman>()?;
    m.add_function(wrap_pyfunction!(py_build_extension, m)?)?;
    m.add_function(wrap_pyfunction!(py_diamond_linear_extension, m)?)?;
    m.add_function(wrap_pyfunction!(py_unique_extension, m)?)?;
    m.add_function(wrap_pyfunction!(magic_function, m)?)?;
    m.add_function(wrap_pyfunction!(sample_domain, m)?)?;
    m.add_function(wrap_pyfunction!(contradiction_margin, m)?)?;
    m.add_function(wrap_pyfunction!(eq8_gap, m)?)?;
    m.add_function(wrap_pyfunction!(case2_candidate, m)?)?;
    m.add_function(wrap_pyfunction!(case2_witness, m)?)?;
    m.add_function(wrap_pyfunction!(check_eqe5, m)?)?;
    m.add("__version__", npext::VERSION)?;
    Ok(())
}
