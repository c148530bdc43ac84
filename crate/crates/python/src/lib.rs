use num_complex::Complex64;
use pyo3::exceptions::{PyNotImplementedError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use stabilcert_core::blocks::{lower_bound_p, BlockMatrix};
use stabilcert_core::certifier::{self, StabilityCertificate};
use stabilcert_core::operator;
use stabilcert_core::oracle::{self, SymbolAnalysis as CoreSymbol};
use stabilcert_core::scalar::PNorm;
use stabilcert_core::spec_io::{parse_operator_spec, spec_to_value};
use stabilcert_core::worked_example::reproduce_worked_examples;
use stabilcert_core::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Input(_) | Error::Domain(_) | Error::Parse { .. } => PyValueError::new_err(e.to_string()),
        Error::Unsupported(_) | Error::Precondition(_) => PyNotImplementedError::new_err(e.to_string()),
        Error::Resource(_) | Error::Internal(_) => PyRuntimeError::new_err(e.to_string()),
    }
}

fn parse_p(p: &str) -> PyResult<PNorm> {
    p.parse().map_err(to_py)
}

fn json<T: serde::Serialize>(v: &T) -> PyResult<String> {
    serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// A parsed operator spec.
#[pyclass(frozen, module = "stabilcert")]
struct OperatorSpec {
    inner: operator::OperatorSpec,
}

#[pymethods]
impl OperatorSpec {
    /// Parse a JSON spec document.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(OperatorSpec {
            inner: parse_operator_spec(text).map_err(to_py)?,
        })
    }

    /// Toeplitz spec from `{offset: coefficient}`.
    #[staticmethod]
    fn toeplitz(coeffs: Vec<(i64, f64)>) -> Self {
        OperatorSpec {
            inner: operator::OperatorSpec::toeplitz(coeffs),
        }
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind_name()
    }

    fn c_norm(&self) -> f64 {
        self.inner.c_norm()
    }

    fn to_json(&self) -> String {
        spec_to_value(&self.inner).to_string()
    }

    fn __repr__(&self) -> String {
        format!("OperatorSpec({})", self.to_json())
    }
}

#[pyclass(frozen, module = "stabilcert")]
struct Certificate {
    inner: StabilityCertificate,
}

#[pymethods]
impl Certificate {
    #[getter]
    fn verdict(&self) -> &'static str {
        self.inner.verdict.as_str()
    }

    #[getter]
    fn route(&self) -> &'static str {
        self.inner.route.as_str()
    }

    #[getter]
    fn p(&self) -> &'static str {
        self.inner.p.as_str()
    }

    #[getter]
    fn n0(&self) -> u64 {
        self.inner.n0
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }

    #[getter]
    fn alpha_exact(&self) -> bool {
        self.inner.alpha_exact
    }

    #[getter]
    fn threshold(&self) -> f64 {
        self.inner.threshold
    }

    #[getter]
    fn c1_lower(&self) -> f64 {
        self.inner.c1_lower
    }

    #[getter]
    fn c2_upper(&self) -> f64 {
        self.inner.c2_upper
    }

    #[getter]
    fn note(&self) -> &str {
        &self.inner.note
    }

    fn is_stable(&self) -> bool {
        self.inner.verdict == certifier::Verdict::CertifiedStable
    }

    fn to_json(&self) -> PyResult<String> {
        json(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "Certificate(verdict={}, p={}, n0={}, alpha={}, threshold={})",
            self.verdict(),
            self.p(),
            self.inner.n0,
            self.inner.alpha,
            self.inner.threshold
        )
    }
}

#[pyclass(frozen, module = "stabilcert")]
struct SymbolAnalysis {
    inner: CoreSymbol,
}

#[pymethods]
impl SymbolAnalysis {
    #[getter]
    fn verdict(&self) -> &'static str {
        self.inner.verdict.as_str()
    }

    #[getter]
    fn min_modulus_lower_bound(&self) -> f64 {
        self.inner.min_modulus_lower_bound
    }

    #[getter]
    fn min_observed(&self) -> f64 {
        self.inner.min_observed
    }

    #[getter]
    fn lipschitz(&self) -> f64 {
        self.inner.lipschitz
    }

    /// `(ξ, |â(ξ)|)` when a zero was found.
    #[getter]
    fn zero_witness(&self) -> Option<(f64, f64)> {
        self.inner.zero_witness.as_ref().map(|w| (w.xi, w.modulus))
    }

    fn to_json(&self) -> PyResult<String> {
        json(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "SymbolAnalysis(verdict={}, min_modulus_lower_bound={})",
            self.verdict(),
            self.inner.min_modulus_lower_bound
        )
    }
}

fn toeplitz_coeffs(spec: &OperatorSpec) -> PyResult<&operator::Coeffs> {
    match &spec.inner {
        operator::OperatorSpec::Toeplitz { coeffs } => Ok(coeffs),
        other => Err(PyValueError::new_err(format!(
            "symbol analysis needs a toeplitz spec, got {}",
            other.kind_name()
        ))),
    }
}

#[pyfunction]
fn kappa(p: &str, d: usize) -> PyResult<f64> {
    certifier::kappa_constant(parse_p(p)?.as_f64(), d).map_err(to_py)
}

#[pyfunction]
fn threshold(spec: &OperatorSpec, p: &str, n0: u64) -> PyResult<f64> {
    Ok(certifier::stability_threshold(&spec.inner, parse_p(p)?, n0)
        .map_err(to_py)?
        .value)
}

/// Block criterion at block size `n0` over all required centers.
#[pyfunction]
fn certify(py: Python<'_>, spec: &OperatorSpec, p: &str, n0: u64) -> PyResult<Certificate> {
    let p = parse_p(p)?;
    let inner = py
        .detach(|| certifier::certify_condition_iii(&spec.inner, p, n0))
        .map_err(to_py)?;
    Ok(Certificate { inner })
}

#[pyfunction]
fn diagonal_dominance(spec: &OperatorSpec) -> PyResult<Certificate> {
    Ok(Certificate {
        inner: certifier::diagonal_dominance_certify(&spec.inner).map_err(to_py)?,
    })
}

#[pyfunction]
fn toeplitz_block(py: Python<'_>, spec: &OperatorSpec, p: &str, n0: u64) -> PyResult<Certificate> {
    let p = parse_p(p)?;
    let inner = py
        .detach(|| certifier::toeplitz_block_certify(&spec.inner, p, n0))
        .map_err(to_py)?;
    Ok(Certificate { inner })
}

/// `[(N, alpha, threshold, certified)]` for `N` in `nmin..=nmax`.
#[pyfunction]
fn scan(py: Python<'_>, spec: &OperatorSpec, p: &str, nmin: u64, nmax: u64) -> PyResult<Vec<(u64, f64, f64, bool)>> {
    let p = parse_p(p)?;
    let table = py
        .detach(|| certifier::stability_scan(&spec.inner, p, nmin, nmax))
        .map_err(to_py)?;
    Ok(table
        .rows
        .iter()
        .map(|r| (r.n, r.alpha, r.threshold, r.certified))
        .collect())
}

#[pyfunction]
fn symbol_analysis(spec: &OperatorSpec) -> PyResult<SymbolAnalysis> {
    Ok(SymbolAnalysis {
        inner: oracle::certified_symbol_analysis(toeplitz_coeffs(spec)?),
    })
}

#[pyfunction]
fn symbol_eval(spec: &OperatorSpec, xi: f64) -> PyResult<Complex64> {
    Ok(oracle::symbol_eval(toeplitz_coeffs(spec)?, xi))
}

/// Exact `min ‖Mc‖_p/‖c‖_p` of a real matrix; returns `(bound, witness)`.
#[pyfunction]
fn lower_bound(py: Python<'_>, matrix: Vec<Vec<f64>>, p: &str) -> PyResult<(f64, Vec<f64>)> {
    let p = parse_p(p)?;
    let rows = matrix.len();
    let cols = matrix.first().map_or(0, Vec::len);
    if matrix.iter().any(|r| r.len() != cols) {
        return Err(PyValueError::new_err("matrix rows have different lengths"));
    }
    let flat: Vec<f64> = matrix.into_iter().flatten().collect();
    let m = BlockMatrix::from_real(rows, cols, &flat).map_err(to_py)?;
    let rep = py.detach(|| lower_bound_p(&m, p)).map_err(to_py)?;
    let witness = rep.witness.unwrap_or_default().iter().map(|c| c.re).collect();
    Ok((rep.lower_bound, witness))
}

/// The backward-difference reproduction as a JSON string.
#[pyfunction]
fn worked_example(py: Python<'_>) -> PyResult<String> {
    let w = py.detach(reproduce_worked_examples).map_err(to_py)?;
    json(&w)
}

#[pymodule]
fn stabilcert(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<OperatorSpec>()?;
    m.add_class::<Certificate>()?;
    m.add_class::<SymbolAnalysis>()?;
    m.add_function(wrap_pyfunction!(kappa, m)?)?;
    m.add_function(wrap_pyfunction!(threshold, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(diagonal_dominance, m)?)?;
    m.add_function(wrap_pyfunction!(toeplitz_block, m)?)?;
    m.add_function(wrap_pyfunction!(scan, m)?)?;
    m.add_function(wrap_pyfunction!(symbol_analysis, m)?)?;
    m.add_function(wrap_pyfunction!(symbol_eval, m)?)?;
    m.add_function(wrap_pyfunction!(lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(worked_example, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
