//! Python module `mimicry`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use pyo3::exceptions::{PyOverflowError, PyValueError};
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use mimicry::characters as ch;
use mimicry::{dioph, expsums, extremal, mimicry as mm, multfun, theory, verify};

fn err(e: mimicry::Error) -> PyErr {
    if e.is_cap() { PyOverflowError::new_err(e.to_string()) } else { PyValueError::new_err(e.to_string()) }
}

/// Serialize through JSON into plain Python objects.
fn to_py<T: Serialize>(py: Python<'_>, v: &T) -> PyResult<Py<PyAny>> {
    let s = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (s,))?.unbind())
}

#[pyclass(name = "DirichletCharacter", module = "mimicry", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyCharacter(ch::DirichletCharacter);

#[pymethods]
impl PyCharacter {
    /// The character of canonical index `index` modulo `q`.
    #[new]
    fn new(q: u64, index: u64) -> PyResult<Self> {
        ch::DirichletCharacter::from_index(q, index).map(PyCharacter).map_err(err)
    }

    #[staticmethod]
    fn chi_minus_4() -> Self {
        PyCharacter(ch::DirichletCharacter::chi_minus_4())
    }

    #[staticmethod]
    fn legendre(p: u64) -> PyResult<Self> {
        ch::DirichletCharacter::legendre(p).map(PyCharacter).map_err(err)
    }

    #[staticmethod]
    fn principal(q: u64) -> PyResult<Self> {
        ch::DirichletCharacter::principal(q).map(PyCharacter).map_err(err)
    }

    #[getter]
    fn modulus(&self) -> u64 {
        self.0.modulus()
    }

    #[getter]
    fn index(&self) -> u64 {
        self.0.index()
    }

    #[getter]
    fn order(&self) -> u64 {
        self.0.order()
    }

    #[getter]
    fn conductor(&self) -> u64 {
        self.0.conductor()
    }

    #[getter]
    fn parity(&self) -> i8 {
        self.0.parity()
    }

    #[getter]
    fn exponents(&self) -> Vec<u64> {
        self.0.exponents().to_vec()
    }

    fn is_primitive(&self) -> bool {
        self.0.is_primitive()
    }

    fn is_principal(&self) -> bool {
        self.0.is_principal()
    }

    fn __call__(&self, n: i64) -> Complex64 {
        self.0.evaluate(n)
    }

    fn conj(&self) -> Self {
        PyCharacter(self.0.conj())
    }

    fn __mul__(&self, other: &PyCharacter) -> PyResult<Self> {
        self.0.mul(&other.0).map(PyCharacter).map_err(err)
    }

    fn __pow__(&self, k: u64, _modulo: Option<u64>) -> Self {
        PyCharacter(self.0.pow(k))
    }

    /// `(conductor, inducing primitive character)`
    fn primitive(&self) -> PyResult<(u64, PyCharacter)> {
        let (c, p) = self.0.conductor_and_primitive().map_err(err)?;
        Ok((c, PyCharacter(p)))
    }

    fn gauss_sum(&self) -> PyResult<Complex64> {
        ch::gauss_sum(&self.0).map(|g| g.value).map_err(err)
    }

    fn __eq__(&self, other: &PyCharacter) -> bool {
        self.0 == other.0
    }

    fn __hash__(&self) -> u64 {
        self.0.modulus().wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ self.0.index()
    }

    fn __repr__(&self) -> String {
        format!("DirichletCharacter({})", self.0.label())
    }
}

#[pyclass(name = "CMFunction", module = "mimicry", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyFunction(multfun::CMFunction);

#[pymethods]
impl PyFunction {
    #[staticmethod]
    fn one() -> Self {
        PyFunction(multfun::CMFunction::one())
    }

    #[staticmethod]
    fn from_character(chi: &PyCharacter) -> Self {
        PyFunction(multfun::CMFunction::from_character(&chi.0))
    }

    /// Prime values `{p: z}` for every prime up to the largest key.
    #[staticmethod]
    fn from_prime_values(values: BTreeMap<u64, Complex64>) -> PyResult<Self> {
        let pairs: Vec<(u64, Complex64)> = values.into_iter().collect();
        multfun::CMFunction::from_prime_pattern(&pairs).map(PyFunction).map_err(err)
    }

    #[staticmethod]
    fn random_unimodular(support: u64, seed: u64) -> PyResult<Self> {
        multfun::CMFunction::random_unimodular(support, &mut ChaCha8Rng::seed_from_u64(seed)).map(PyFunction).map_err(err)
    }

    #[staticmethod]
    fn random_disc(support: u64, seed: u64) -> PyResult<Self> {
        multfun::CMFunction::random_disc(support, &mut ChaCha8Rng::seed_from_u64(seed)).map(PyFunction).map_err(err)
    }

    /// `f(n) n^{it}`
    fn twist(&self, t: f64) -> Self {
        PyFunction(self.0.twist(t))
    }

    fn smooth_restrict(&self, y: f64) -> PyResult<Self> {
        self.0.smooth_restrict(y).map(PyFunction).map_err(err)
    }

    fn conj(&self) -> Self {
        PyFunction(self.0.conj())
    }

    fn __mul__(&self, other: &PyFunction) -> Self {
        PyFunction(self.0.mul(&other.0))
    }

    fn __call__(&self, n: u64) -> PyResult<Complex64> {
        self.0.evaluate(n).map_err(err)
    }

    fn values(&self, n_max: u64) -> PyResult<Vec<Complex64>> {
        self.0.values_up_to(n_max).map_err(err)
    }

    #[getter]
    fn support(&self) -> u64 {
        self.0.support()
    }
}

#[pyfunction]
fn enumerate_characters(q: u64) -> PyResult<Vec<PyCharacter>> {
    Ok(ch::enumerate_characters(q).map_err(err)?.into_iter().map(PyCharacter).collect())
}

#[pyfunction]
fn primitive_characters(q: u64) -> PyResult<Vec<PyCharacter>> {
    Ok(ch::primitive_characters(q).map_err(err)?.into_iter().map(PyCharacter).collect())
}

#[pyfunction]
fn coset_count(xi: &PyCharacter, l: i64) -> PyResult<u64> {
    ch::coset_count(&xi.0, l).map_err(err)
}

/// `Σ_{n≤t} χ(n)`
#[pyfunction]
fn char_sum(chi: &PyCharacter, t: f64) -> PyResult<Complex64> {
    expsums::char_sum(&chi.0, t).map_err(err)
}

/// `(max_{t≤q} |S_χ(t)|, smallest maximizing t)`
#[pyfunction]
fn max_char_sum(chi: &PyCharacter) -> PyResult<(f64, f64)> {
    let p = expsums::max_char_sum(&chi.0).map_err(err)?;
    Ok((p.max_abs, p.argmax))
}

/// `Σ_{n≤x, n y-smooth} f(n)/n e(nα)`
#[pyfunction]
#[pyo3(signature = (f, x, y = f64::INFINITY, alpha = 0.0))]
fn weighted_expsum(f: &PyFunction, x: f64, y: f64, alpha: f64) -> PyResult<Complex64> {
    expsums::weighted_expsum(&f.0, x, y, alpha).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (f, b, r, n_max, y = f64::INFINITY))]
fn gs_identity_sides(f: &PyFunction, b: i64, r: u64, n_max: u64, y: f64) -> PyResult<(Complex64, Complex64)> {
    let s = expsums::gs_identity_sides(&f.0, b, r, n_max, y).map_err(err)?;
    Ok((s.lhs, s.rhs))
}

#[pyfunction]
fn distance_sq(f: &PyFunction, g: &PyFunction, x: f64) -> PyResult<f64> {
    mm::distance_sq(&f.0, &g.0, x).map_err(err)
}

/// `min_{|t|≤T} 𝔻(f, n^{it}; X)²` with the minimizer, as a dict.
#[pyfunction]
fn m_quantity(py: Python<'_>, f: &PyFunction, x: f64, t_window: f64) -> PyResult<Py<PyAny>> {
    let r = py.detach(|| mm::m_quantity(&f.0, x, t_window)).map_err(err)?;
    to_py(py, &r)
}

#[pyfunction]
#[pyo3(signature = (f, y, bound, t_window = None))]
fn nearest_primitive(py: Python<'_>, f: &PyFunction, y: f64, bound: f64, t_window: Option<f64>) -> PyResult<Py<PyAny>> {
    let t = t_window.unwrap_or(y.ln().powi(2));
    let r = py.detach(|| mm::nearest_primitive_window(&f.0, y, bound, t)).map_err(err)?;
    to_py(py, &r)
}

/// `(b, r, |α − b/r|)` with `r <= M` and `|α − b/r| <= 1/(rM)`.
#[pyfunction]
fn dirichlet_approx(alpha: f64, m: f64) -> PyResult<(i64, u64, f64)> {
    let a = dioph::dirichlet_approx(alpha, m).map_err(err)?;
    Ok((a.b, a.r, a.quality))
}

#[pyfunction]
#[pyo3(signature = (alpha, y, m, window = None))]
fn classify_arc(py: Python<'_>, alpha: f64, y: f64, m: u64, window: Option<f64>) -> PyResult<Py<PyAny>> {
    to_py(py, &dioph::classify_arc(alpha, y, m, window).map_err(err)?)
}

#[pyfunction]
fn delta_g(g: u64) -> PyResult<f64> {
    theory::delta_g(g).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (suite, seed = 20240601, cases = None, q_max = None, tolerance = None))]
fn run_suite(py: Python<'_>, suite: &str, seed: u64, cases: Option<usize>, q_max: Option<u64>, tolerance: Option<f64>) -> PyResult<Py<PyAny>> {
    let s: verify::Suite = suite.parse().map_err(err)?;
    let cfg = verify::VerifyConfig { seed, cases, tolerance, q_max };
    let r = py.detach(|| verify::run_suite(s, &cfg)).map_err(err)?;
    to_py(py, &r)
}

#[pyfunction]
fn build_target(py: Python<'_>, g: u64, xi: &PyCharacter, bound: u64) -> PyResult<Py<PyAny>> {
    to_py(py, &extremal::build_target(g, &xi.0, bound).map_err(err)?)
}

/// Order-`g` characters modulo primes `q ≡ 1 (mod g)` in `[q_lo, q_hi]`
/// matching the pattern for `(g, xi, bound)` at least up to `p_star`.
#[pyfunction]
fn search_matching_character(py: Python<'_>, g: u64, xi: &PyCharacter, bound: u64, q_lo: u64, q_hi: u64, p_star: u64) -> PyResult<Py<PyAny>> {
    let pattern = extremal::build_target(g, &xi.0, bound).map_err(err)?;
    let recs = py.detach(|| extremal::search_matching_character(&pattern, q_lo, q_hi, p_star)).map_err(err)?;
    to_py(py, &recs)
}

#[pymodule]
#[pyo3(name = "mimicry")]
fn mimicry_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCharacter>()?;
    m.add_class::<PyFunction>()?;
    m.add_function(wrap_pyfunction!(enumerate_characters, m)?)?;
    m.add_function(wrap_pyfunction!(primitive_characters, m)?)?;
    m.add_function(wrap_pyfunction!(coset_count, m)?)?;
    m.add_function(wrap_pyfunction!(char_sum, m)?)?;
    m.add_function(wrap_pyfunction!(max_char_sum, m)?)?;
    m.add_function(wrap_pyfunction!(weighted_expsum, m)?)?;
    m.add_function(wrap_pyfunction!(gs_identity_sides, m)?)?;
    m.add_function(wrap_pyfunction!(distance_sq, m)?)?;
    m.add_function(wrap_pyfunction!(m_quantity, m)?)?;
    m.add_function(wrap_pyfunction!(nearest_primitive, m)?)?;
    m.add_function(wrap_pyfunction!(dirichlet_approx, m)?)?;
    m.add_function(wrap_pyfunction!(classify_arc, m)?)?;
    m.add_function(wrap_pyfunction!(delta_g, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    m.add_function(wrap_pyfunction!(build_target, m)?)?;
    m.add_function(wrap_pyfunction!(search_matching_character, m)?)?;
    Ok(())
}
