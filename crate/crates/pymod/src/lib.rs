//! Python bindings for the orthomod library.
//!
//! The module mirrors the Rust API surface: `Series` wraps a sparse
//! exact Fourier expansion, `Tower` builds the seven generator forms,
//! and the free functions cover the Laplace operator, the bracket, the
//! singular-mod-p certifier, and the prime-prediction calculus.
//! Rational coefficients cross the boundary as `fractions.Fraction`;
//! structured reports (certificates, prediction tables, catalog runs)
//! arrive as plain dicts with the same field names as the CLI's JSON
//! output.

use std::str::FromStr;

use pyo3::exceptions::{PyKeyError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use pyo3::IntoPyObjectExt;

use orthomod::catalog::{
    builtin_catalog, catalog_from_json, catalog_to_json, eisenstein_bracket_constant, parse_label,
    signature_n as signature_n_impl,
};
use orthomod::congruence::{self, Mode};
use orthomod::igusa::IgusaTower;
use orthomod::series::fser;
use orthomod::{bracket as bracket_mod, Axis, IndexKey, OrthoSeries, Parity};
use orthomod::{Int, Rat};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_parity(s: &str) -> PyResult<Parity> {
    match s {
        "integral" => Ok(Parity::Integral),
        "half-integral" => Ok(Parity::HalfIntegral),
        other => Err(PyValueError::new_err(format!(
            "parity must be \"integral\" or \"half-integral\", got {other:?}"
        ))),
    }
}

fn parity_str(p: Parity) -> &'static str {
    match p {
        Parity::Integral => "integral",
        Parity::HalfIntegral => "half-integral",
    }
}

fn parse_axis(s: &str) -> PyResult<Axis> {
    match s {
        "tau" => Ok(Axis::Tau),
        "z" => Ok(Axis::Z),
        "omega" => Ok(Axis::Omega),
        other => Err(PyValueError::new_err(format!(
            "axis must be \"tau\", \"z\" or \"omega\", got {other:?}"
        ))),
    }
}

fn parse_mode(s: &str) -> PyResult<Mode> {
    Mode::from_str(s).map_err(value_err)
}

/// Accept a Fraction or any Python integer as an exact rational.
fn to_rat(obj: &Bound<'_, PyAny>) -> PyResult<Rat> {
    if let Ok(r) = obj.extract::<Rat>() {
        return Ok(r);
    }
    if let Ok(i) = obj.extract::<Int>() {
        return Ok(Rat::from(i));
    }
    Err(PyValueError::new_err(
        "expected an int or fractions.Fraction".to_string(),
    ))
}

/// Convert any serializable report into nested Python dicts/lists.
fn to_py_report<T: serde::Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let json = serde_json::to_value(value).map_err(value_err)?;
    Ok(json_to_py(py, &json)?.unbind())
}

fn json_to_py<'py>(py: Python<'py>, value: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    use serde_json::Value;
    match value {
        Value::Null => Ok(py.None().into_bound(py)),
        Value::Bool(b) => b.into_bound_py_any(py),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_bound_py_any(py)
            } else if let Some(u) = n.as_u64() {
                u.into_bound_py_any(py)
            } else {
                n.as_f64().unwrap_or(f64::NAN).into_bound_py_any(py)
            }
        }
        Value::String(s) => s.into_bound_py_any(py),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            Ok(list.into_any())
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (key, val) in map {
                dict.set_item(key, json_to_py(py, val)?)?;
            }
            Ok(dict.into_any())
        }
    }
}

// ---------------------------------------------------------------------------
// Series
// ---------------------------------------------------------------------------

/// A sparse exact Fourier expansion indexed by doubled triples (N, R, M),
/// trusted on the layers with N + M <= 2 * prec.
#[pyclass(frozen, eq)]
#[derive(PartialEq)]
struct Series {
    inner: OrthoSeries,
}

#[pymethods]
impl Series {
    /// Build a series from explicit terms [((N, R, M), coeff), ...].
    #[new]
    fn new(
        parity: &str,
        prec: i64,
        terms: Vec<((i64, i64, i64), Bound<'_, PyAny>)>,
    ) -> PyResult<Self> {
        let parity = parse_parity(parity)?;
        let terms = terms
            .into_iter()
            .map(|((n, r, m), c)| Ok((IndexKey::new(n, r, m), to_rat(&c)?)))
            .collect::<PyResult<Vec<_>>>()?;
        let inner = OrthoSeries::from_terms(parity, prec, terms).map_err(value_err)?;
        Ok(Series { inner })
    }

    #[staticmethod]
    fn zero(parity: &str, prec: i64) -> PyResult<Self> {
        Ok(Series {
            inner: OrthoSeries::zero(parse_parity(parity)?, prec),
        })
    }

    #[staticmethod]
    fn monomial(n: i64, r: i64, m: i64, coeff: Bound<'_, PyAny>, prec: i64) -> PyResult<Self> {
        let inner = OrthoSeries::monomial(IndexKey::new(n, r, m), to_rat(&coeff)?, prec)
            .map_err(value_err)?;
        Ok(Series { inner })
    }

    /// Parse the FSER text format.
    #[staticmethod]
    fn from_fser(text: &str) -> PyResult<Self> {
        Ok(Series {
            inner: fser::read_ortho(text).map_err(value_err)?,
        })
    }

    /// Render the FSER text format (sorted, round-trip stable).
    fn to_fser(&self) -> String {
        fser::write_ortho(&self.inner)
    }

    #[getter]
    fn parity(&self) -> &'static str {
        parity_str(self.inner.parity())
    }

    #[getter]
    fn prec(&self) -> i64 {
        self.inner.prec()
    }

    fn __len__(&self) -> usize {
        self.inner.support_len()
    }

    fn is_zero(&self) -> bool {
        self.inner.is_zero()
    }

    fn is_integral(&self) -> bool {
        self.inner.is_integral()
    }

    /// The coefficient at doubled index (N, R, M); zero when absent.
    fn coeff(&self, n: i64, r: i64, m: i64) -> Rat {
        self.inner.coeff(&IndexKey::new(n, r, m))
    }

    /// All stored nonzero terms as [((N, R, M), Fraction), ...].
    fn terms(&self) -> Vec<((i64, i64, i64), Rat)> {
        self.inner
            .terms()
            .map(|(k, c)| ((k.n, k.r, k.m), c.clone()))
            .collect()
    }

    /// The stored index triples, sorted.
    fn support(&self) -> Vec<(i64, i64, i64)> {
        self.inner.terms().map(|(k, _)| (k.n, k.r, k.m)).collect()
    }

    /// Smallest total N + M with a nonzero coefficient, if any.
    fn min_order(&self) -> Option<i64> {
        self.inner.min_order()
    }

    fn truncated(&self, prec: i64) -> PyResult<Self> {
        if prec > self.inner.prec() {
            return Err(PyValueError::new_err(format!(
                "cannot extend precision {} to {prec}",
                self.inner.prec()
            )));
        }
        Ok(Series {
            inner: self.inner.truncated(prec),
        })
    }

    /// Scaled partial derivative along "tau", "z" or "omega".
    fn derivative(&self, axis: &str) -> PyResult<Self> {
        Ok(Series {
            inner: self.inner.derivative(parse_axis(axis)?),
        })
    }

    /// Exact square root (for series with a perfect-square expansion).
    fn sqrt(&self) -> PyResult<Self> {
        Ok(Series {
            inner: self.inner.sqrt().map_err(value_err)?,
        })
    }

    /// Exact division by a series that divides this one.
    fn divide_exact(&self, other: &Series) -> PyResult<Self> {
        Ok(Series {
            inner: self.inner.divide_exact(&other.inner).map_err(value_err)?,
        })
    }

    fn scale(&self, c: Bound<'_, PyAny>) -> PyResult<Self> {
        Ok(Series {
            inner: self.inner.scaled_by(&to_rat(&c)?),
        })
    }

    fn __add__(&self, other: &Series) -> PyResult<Self> {
        Ok(Series {
            inner: self.inner.add(&other.inner).map_err(value_err)?,
        })
    }

    fn __sub__(&self, other: &Series) -> PyResult<Self> {
        Ok(Series {
            inner: self.inner.sub(&other.inner).map_err(value_err)?,
        })
    }

    fn __mul__(&self, other: &Series) -> Self {
        Series {
            inner: self.inner.multiply(&other.inner),
        }
    }

    fn __neg__(&self) -> Self {
        Series {
            inner: self.inner.neg(),
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "Series(parity={:?}, prec={}, terms={})",
            parity_str(self.inner.parity()),
            self.inner.prec(),
            self.inner.support_len(),
        )
    }
}

// ---------------------------------------------------------------------------
// Tower
// ---------------------------------------------------------------------------

/// One named generator form of the tower.
#[pyclass(frozen)]
struct Form {
    #[pyo3(get)]
    name: String,
    #[pyo3(get)]
    weight: i64,
    #[pyo3(get)]
    series: Py<Series>,
}

#[pymethods]
impl Form {
    fn __repr__(&self) -> String {
        format!("Form(name={:?}, weight={})", self.name, self.weight)
    }
}

/// The seven generator forms built exactly up to a precision (at least 5).
#[pyclass(frozen)]
struct Tower {
    #[pyo3(get)]
    prec: i64,
    forms: Vec<Py<Form>>,
    jacobian_content: Rat,
}

#[pymethods]
impl Tower {
    #[new]
    fn new(py: Python<'_>, prec: i64) -> PyResult<Self> {
        if prec < 5 {
            return Err(PyValueError::new_err(format!(
                "the tower needs precision at least 5, got {prec}"
            )));
        }
        let tower = IgusaTower::build(prec).map_err(value_err)?;
        let forms = tower
            .forms()
            .iter()
            .map(|f| {
                Py::new(
                    py,
                    Form {
                        name: f.name.to_string(),
                        weight: f.weight,
                        series: Py::new(
                            py,
                            Series {
                                inner: f.series.clone(),
                            },
                        )?,
                    },
                )
            })
            .collect::<PyResult<Vec<_>>>()?;
        Ok(Tower {
            prec: tower.prec,
            forms,
            jacobian_content: tower.jacobian_content,
        })
    }

    /// The form names in tower order.
    fn names(&self, py: Python<'_>) -> Vec<String> {
        self.forms.iter().map(|f| f.borrow(py).name.clone()).collect()
    }

    /// Look up one form by name ("E4", ..., "Phi35").
    fn form(&self, py: Python<'_>, name: &str) -> PyResult<Py<Form>> {
        for f in &self.forms {
            if f.borrow(py).name == name {
                return Ok(f.clone_ref(py));
            }
        }
        Err(PyKeyError::new_err(format!(
            "unknown form {name:?}; expected one of {:?}",
            self.names(py)
        )))
    }

    /// All seven forms in tower order.
    fn forms(&self, py: Python<'_>) -> Vec<Py<Form>> {
        self.forms.iter().map(|f| f.clone_ref(py)).collect()
    }

    /// Content of the Jacobian used to normalize the odd generator.
    #[getter]
    fn jacobian_content(&self) -> Rat {
        self.jacobian_content.clone()
    }

    fn __repr__(&self) -> String {
        format!("Tower(prec={})", self.prec)
    }
}

// ---------------------------------------------------------------------------
// operators and certification
// ---------------------------------------------------------------------------

/// Apply the holomorphic Laplace operator: each coefficient is
/// multiplied by R^2 - 4NM.
#[pyfunction]
fn laplace(series: &Series) -> Series {
    Series {
        inner: bracket_mod::laplace(&series.inner),
    }
}

/// The three bracket prefactors (A, B, C) = (n/2-1-k, n/2-1-l, n/2-1-k-l).
#[pyfunction]
fn bracket_coefficients(n: i64, k: i64, l: i64) -> (Rat, Rat, Rat) {
    let co = bracket_mod::bracket_coefficients(n, k, l);
    (co.a, co.b, co.c)
}

/// The bracket [F, G] of weights k and l in signature (n, 2).
#[pyfunction]
fn bracket(f: &Series, k: i64, g: &Series, l: i64, n: i64) -> PyResult<Series> {
    Ok(Series {
        inner: bracket_mod::bracket(&f.inner, k, &g.inner, l, n).map_err(value_err)?,
    })
}

/// The N-ary bracket of [(series, weight), ...] in signature (n, 2).
#[pyfunction]
fn nary_bracket(py: Python<'_>, items: Vec<(Py<Series>, i64)>, n: i64) -> PyResult<Series> {
    let borrowed: Vec<(PyRef<'_, Series>, i64)> = items
        .iter()
        .map(|(s, k)| (s.borrow(py), *k))
        .collect();
    let refs: Vec<(&OrthoSeries, i64)> = borrowed.iter().map(|(s, k)| (&s.inner, *k)).collect();
    Ok(Series {
        inner: bracket_mod::nary_bracket(&refs, n).map_err(value_err)?,
    })
}

/// The normalized anisotropy divisor 16 / gcd(16, gcd of |D| over the
/// support); primes dividing it are excluded from certification.
#[pyfunction]
fn compute_df(series: &Series) -> PyResult<u64> {
    congruence::compute_df(&series.inner).map_err(value_err)
}

/// Certify that a series is singular modulo a prime; returns the
/// certificate as a dict (same shape as the CLI JSON).
#[pyfunction]
fn check_singular(
    py: Python<'_>,
    name: &str,
    series: &Series,
    prime: u64,
    prec: i64,
) -> PyResult<Py<PyAny>> {
    let cert =
        congruence::check_singular(name, &series.inner, prime, prec).map_err(value_err)?;
    to_py_report(py, &cert)
}

/// Run the certifier for every admissible prime up to `max_prime`.
#[pyfunction]
fn scan_primes(
    py: Python<'_>,
    name: &str,
    series: &Series,
    prec: i64,
    max_prime: u64,
) -> PyResult<Py<PyAny>> {
    let certs =
        congruence::scan_primes(name, &series.inner, prec, max_prime).map_err(value_err)?;
    to_py_report(py, &certs)
}

// ---------------------------------------------------------------------------
// prediction and catalog
// ---------------------------------------------------------------------------

/// Predict congruence primes for a family of weights on O(n, 2).
#[pyfunction]
#[pyo3(signature = (n, weights, mode = "valuation"))]
fn predict_family(py: Python<'_>, n: i64, weights: Vec<i64>, mode: &str) -> PyResult<Py<PyAny>> {
    let report = congruence::predict_family(n, &weights, parse_mode(mode)?);
    to_py_report(py, &report)
}

/// Predict congruence primes for one pair of weights on O(n, 2).
#[pyfunction]
#[pyo3(signature = (n, k, l, mode = "valuation"))]
fn predict_pair(py: Python<'_>, n: i64, k: i64, l: i64, mode: &str) -> PyResult<Py<PyAny>> {
    let report = congruence::predict_pair(n, k, l, parse_mode(mode)?);
    to_py_report(py, &report)
}

/// Predict primes from a closed bracket identity [F, G] = c F G'.
#[pyfunction]
fn predict_identity(
    py: Python<'_>,
    n: i64,
    k: i64,
    l: i64,
    constant: Bound<'_, PyAny>,
) -> PyResult<Py<PyAny>> {
    let c = to_rat(&constant)?;
    let report = congruence::predict_identity(n, k, l, &c).map_err(value_err)?;
    to_py_report(py, &report)
}

/// Replay a claim catalog through the predictor and return the report
/// as a dict.  With no `catalog_json`, the built-in table is used.
#[pyfunction]
#[pyo3(signature = (mode = "valuation", catalog_json = None))]
fn run_catalog(py: Python<'_>, mode: &str, catalog_json: Option<&str>) -> PyResult<Py<PyAny>> {
    let entries = match catalog_json {
        Some(text) => catalog_from_json(text).map_err(value_err)?,
        None => builtin_catalog().to_vec(),
    };
    let report = congruence::run_catalog(&entries, parse_mode(mode)?);
    to_py_report(py, &report)
}

/// The built-in claim catalog in the JSON interchange format.
#[pyfunction]
fn builtin_catalog_json() -> String {
    catalog_to_json(builtin_catalog())
}

/// The signature dimension n for a lattice label like "2U+2E8+A1".
#[pyfunction]
fn signature_n(label: &str) -> PyResult<i64> {
    signature_n_impl(label).map_err(value_err)
}

/// The constant c of the Eisenstein bracket identity on 2U + R for a
/// single-root lattice label.
#[pyfunction]
fn eisenstein_constant(lattice: &str, weight: i64) -> PyResult<Rat> {
    let label = parse_label(lattice).map_err(value_err)?;
    match label.roots.as_slice() {
        [(1, root)] => Ok(eisenstein_bracket_constant(root, weight)),
        _ => Err(PyValueError::new_err(format!(
            "lattice {lattice:?} must have exactly one root summand"
        ))),
    }
}

#[pymodule]
fn orthomod_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<Series>()?;
    m.add_class::<Form>()?;
    m.add_class::<Tower>()?;
    m.add_function(wrap_pyfunction!(laplace, m)?)?;
    m.add_function(wrap_pyfunction!(bracket_coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(bracket, m)?)?;
    m.add_function(wrap_pyfunction!(nary_bracket, m)?)?;
    m.add_function(wrap_pyfunction!(compute_df, m)?)?;
    m.add_function(wrap_pyfunction!(check_singular, m)?)?;
    m.add_function(wrap_pyfunction!(scan_primes, m)?)?;
    m.add_function(wrap_pyfunction!(predict_family, m)?)?;
    m.add_function(wrap_pyfunction!(predict_pair, m)?)?;
    m.add_function(wrap_pyfunction!(predict_identity, m)?)?;
    m.add_function(wrap_pyfunction!(run_catalog, m)?)?;
    m.add_function(wrap_pyfunction!(builtin_catalog_json, m)?)?;
    m.add_function(wrap_pyfunction!(signature_n, m)?)?;
    m.add_function(wrap_pyfunction!(eisenstein_constant, m)?)?;
    Ok(())
}
