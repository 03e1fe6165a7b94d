//! Python bindings (`coded_matmul_py`) for the coded distributed
//! matrix-multiplication toolkit.
//!
//! Exposed surface:
//!
//! - [`Matrix`]: exact dense matrices over checked integers or the
//!   default prime field, with `matmul(a, b)` computing `A^T B`;
//! - [`ArrayCode`]: the built-in `[5,2,2,2]` MDS array BP-XOR code,
//!   randomized search for new ones, validation, recovery threshold and
//!   the text catalog form;
//! - blocklength bounds (`max_blocklength`, `max_blocklength_asym`,
//!   `epsilon_for_stragglers`);
//! - the latency model (`closed_form`, `mc_simulate`) and
//!   communication-cost accounting (`comm_overheads`);
//! - the experiment layer (`preset`, `run_config`, `emit_plotdata`,
//!   `selftest`).
//!
//! Schemes are named by the same strings the CLI uses: `uncoded`,
//! `poly`, `matdot`, `amds`, `asym`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use coded_matmul::{
    builtin_5222, matmul_oracle, parse_catalog, recovery_threshold, search_code, serialize_array, validate_mds, Catalog,
    DenseMatrix, DispersionVariant, LatencyParams, LogMode, Ring, SchemeKind,
};

fn py_err(err: coded_matmul::Error) -> PyErr {
    PyValueError::new_err(err.to_string())
}

fn parse_scheme(name: &str) -> PyResult<SchemeKind> {
    name.parse().map_err(py_err)
}

fn parse_mode(name: &str) -> PyResult<LogMode> {
    match name {
        "natural" => Ok(LogMode::Natural),
        "hnumber" => Ok(LogMode::HNumber),
        other => Err(PyValueError::new_err(format!(
            "unknown log mode {other:?}; expected 'natural' or 'hnumber'"
        ))),
    }
}

fn parse_variant(name: &str) -> PyResult<DispersionVariant> {
    match name {
        "sigma" => Ok(DispersionVariant::SigmaScaled),
        "powerlaw" => Ok(DispersionVariant::PowerLaw),
        other => Err(PyValueError::new_err(format!(
            "unknown dispersion variant {other:?}; expected 'sigma' or 'powerlaw'"
        ))),
    }
}

#[allow(clippy::too_many_arguments)]
fn params(
    k: usize,
    n: usize,
    b: usize,
    sigma: usize,
    p: usize,
    c: f64,
    mu: f64,
    epsilon: f64,
    delta: Option<f64>,
) -> LatencyParams {
    LatencyParams {
        k,
        n,
        b,
        sigma,
        p,
        c,
        mu,
        epsilon,
        delta,
        profile: None,
    }
}

/// An exact dense matrix over checked 128-bit integers (default) or
/// the prime field used by the decode pipelines (`field=True`).
#[pyclass(frozen)]
struct Matrix {
    inner: DenseMatrix,
}

#[pymethods]
impl Matrix {
    #[new]
    #[pyo3(signature = (rows, field = false))]
    fn new(rows: Vec<Vec<i128>>, field: bool) -> PyResult<Matrix> {
        let ring = if field { Ring::default_field() } else { Ring::Integers };
        Ok(Matrix {
            inner: DenseMatrix::from_rows(&rows, ring).map_err(py_err)?,
        })
    }

    /// A uniformly random matrix over the prime field.
    #[staticmethod]
    fn random(rows: usize, cols: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Matrix {
            inner: DenseMatrix::random(&mut rng, rows, cols, Ring::default_field()),
        }
    }

    #[getter]
    fn rows(&self) -> usize {
        self.inner.rows()
    }

    #[getter]
    fn cols(&self) -> usize {
        self.inner.cols()
    }

    fn get(&self, r: usize, c: usize) -> PyResult<i128> {
        if r >= self.inner.rows() || c >= self.inner.cols() {
            return Err(PyValueError::new_err(format!(
                "index ({r}, {c}) outside a {}x{} matrix",
                self.inner.rows(),
                self.inner.cols()
            )));
        }
        Ok(self.inner.get(r, c))
    }

    fn tolist(&self) -> Vec<Vec<i128>> {
        (0..self.inner.rows())
            .map(|r| (0..self.inner.cols()).map(|c| self.inner.get(r, c)).collect())
            .collect()
    }

    fn __repr__(&self) -> String {
        format!("Matrix({}x{}, {:?})", self.inner.rows(), self.inner.cols(), self.inner.ring())
    }

    fn __eq__(&self, other: &Matrix) -> bool {
        self.inner == other.inner
    }
}

/// The exact product `A^T B` of two matrices with equal row counts.
#[pyfunction]
fn matmul(a: &Matrix, b: &Matrix) -> PyResult<Matrix> {
    Ok(Matrix {
        inner: matmul_oracle(&a.inner, &b.inner).map_err(py_err)?,
    })
}

/// An `[n, k, b, sigma]` MDS array BP-XOR code: `n` nodes of `b` cells,
/// each cell summing at most `sigma` of the `k*b` sources, decodable by
/// peeling from any `k` nodes.
#[pyclass(frozen, name = "ArrayCode")]
struct PyArrayCode {
    inner: coded_matmul::ArrayCode,
}

#[pymethods]
impl PyArrayCode {
    /// The built-in `[5,2,2,2]` code.
    #[staticmethod]
    fn builtin() -> PyArrayCode {
        PyArrayCode { inner: builtin_5222() }
    }

    /// Randomized stochastic-repair search for an `[n,k,b,sigma]` code.
    #[staticmethod]
    fn search(n: usize, k: usize, b: usize, sigma: usize, seed: u64) -> PyResult<PyArrayCode> {
        Ok(PyArrayCode {
            inner: search_code(n, k, b, sigma, seed).map_err(py_err)?,
        })
    }

    /// Parse the `arraycode ...` text catalog form.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<PyArrayCode> {
        match parse_catalog(text).map_err(py_err)? {
            Catalog::Array(inner) => Ok(PyArrayCode { inner }),
            Catalog::Asym(_) => Err(PyValueError::new_err(
                "catalog holds an asymmetric code, not a uniform array code",
            )),
        }
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    #[getter]
    fn b(&self) -> usize {
        self.inner.b()
    }

    #[getter]
    fn sigma(&self) -> usize {
        self.inner.sigma()
    }

    /// Cell equations as `cells()[node][proc] = [source, ...]`
    /// (1-based source indices).
    fn cells(&self) -> Vec<Vec<Vec<usize>>> {
        self.inner
            .grid()
            .iter()
            .map(|col| col.iter().map(|cell| cell.sources.iter().copied().collect()).collect())
            .collect()
    }

    /// `(ok, witness)`: exhaustive check that every k-subset of nodes
    /// peels; on failure, one failing subset.
    fn is_mds(&self) -> (bool, Option<Vec<usize>>) {
        validate_mds(&self.inner)
    }

    /// Smallest cell count from which every subset of that size decodes.
    fn recovery_threshold(&self) -> PyResult<usize> {
        recovery_threshold(&self.inner).map_err(py_err)
    }

    /// Canonical text catalog form.
    fn serialize(&self) -> String {
        serialize_array(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "ArrayCode(n={}, k={}, b={}, sigma={})",
            self.inner.n(),
            self.inner.k(),
            self.inner.b(),
            self.inner.sigma()
        )
    }
}

/// Longest blocklength an `[n,k,b,sigma]` MDS array code can have.
#[pyfunction]
fn max_blocklength(k: usize, b: usize, sigma: usize) -> PyResult<usize> {
    coded_matmul::max_blocklength(k, b, sigma).map_err(py_err)
}

/// Longest blocklength once each node accepts `(1+epsilon) b` cells.
#[pyfunction]
fn max_blocklength_asym(k: usize, b: usize, sigma: usize, epsilon: f64) -> PyResult<usize> {
    coded_matmul::max_blocklength_asym(k, b, sigma, epsilon).map_err(py_err)
}

/// Smallest coding overhead whose blocklength bound reaches `n_target`.
#[pyfunction]
fn epsilon_for_stragglers(k: usize, b: usize, sigma: usize, n_target: usize) -> PyResult<f64> {
    coded_matmul::epsilon_for_stragglers(k, b, sigma, n_target).map_err(py_err)
}

/// The n-th harmonic number.
#[pyfunction]
fn harmonic(n: usize) -> f64 {
    coded_matmul::harmonic(n)
}

/// Closed-form expected latency split by phase. `mode` selects the
/// logarithm convention (`"natural"` or `"hnumber"`), `variant` the
/// array-scheme dispersion term (`"sigma"` or `"powerlaw"`).
#[pyfunction]
#[pyo3(signature = (scheme, k, n, b = 20, sigma = 7, p = 50, c = 50.0, mu = 1.0, epsilon = 0.0, delta = None, mode = "hnumber", variant = "sigma"))]
#[allow(clippy::too_many_arguments)]
fn closed_form(
    py: Python<'_>,
    scheme: &str,
    k: usize,
    n: usize,
    b: usize,
    sigma: usize,
    p: usize,
    c: f64,
    mu: f64,
    epsilon: f64,
    delta: Option<f64>,
    mode: &str,
    variant: &str,
) -> PyResult<Py<PyDict>> {
    let breakdown = coded_matmul::closed_form(
        parse_scheme(scheme)?,
        &params(k, n, b, sigma, p, c, mu, epsilon, delta),
        parse_mode(mode)?,
        parse_variant(variant)?,
    )
    .map_err(py_err)?;
    let dict = PyDict::new(py);
    dict.set_item("encode", breakdown.encode)?;
    dict.set_item("parallel", breakdown.parallel)?;
    dict.set_item("decode", breakdown.decode)?;
    dict.set_item("total", breakdown.total())?;
    Ok(dict.unbind())
}

/// Monte Carlo latency simulation: means by phase, total variance and
/// both closed-form predictions. Deterministic per seed.
#[pyfunction]
#[pyo3(signature = (scheme, k, n, b = 20, sigma = 7, p = 50, c = 50.0, mu = 1.0, epsilon = 0.0, delta = None, trials = 10_000, seed = 7))]
#[allow(clippy::too_many_arguments)]
fn mc_simulate(
    py: Python<'_>,
    scheme: &str,
    k: usize,
    n: usize,
    b: usize,
    sigma: usize,
    p: usize,
    c: f64,
    mu: f64,
    epsilon: f64,
    delta: Option<f64>,
    trials: usize,
    seed: u64,
) -> PyResult<Py<PyDict>> {
    let outcome = coded_matmul::mc_simulate(
        parse_scheme(scheme)?,
        &params(k, n, b, sigma, p, c, mu, epsilon, delta),
        trials,
        seed,
    )
    .map_err(py_err)?;
    let dict = PyDict::new(py);
    dict.set_item("trials", outcome.trials)?;
    dict.set_item("seed", outcome.seed)?;
    dict.set_item("mean_encode", outcome.mean_encode)?;
    dict.set_item("mean_parallel", outcome.mean_parallel)?;
    dict.set_item("mean_decode", outcome.mean_decode)?;
    dict.set_item("mean_total", outcome.mean_total)?;
    dict.set_item("var_total", outcome.var_total)?;
    dict.set_item("closed_form_natural", outcome.closed_form_natural.total())?;
    dict.set_item("closed_form_hnumber", outcome.closed_form_hnumber.total())?;
    Ok(dict.unbind())
}

/// Communication volumes and overheads for one scheme at operand row
/// count `s`, normalized against the uncoded baseline.
#[pyfunction]
#[pyo3(signature = (scheme, k, n, b = 20, sigma = 7, epsilon = 0.0, s = 1))]
#[allow(clippy::too_many_arguments)]
fn comm_overheads(
    py: Python<'_>,
    scheme: &str,
    k: usize,
    n: usize,
    b: usize,
    sigma: usize,
    epsilon: f64,
    s: usize,
) -> PyResult<Py<PyDict>> {
    let mut latency_params = LatencyParams::new(k, n);
    latency_params.b = b;
    latency_params.sigma = sigma;
    latency_params.epsilon = epsilon;
    let cost = coded_matmul::comm_symbols(parse_scheme(scheme)?, &latency_params, s).map_err(py_err)?;
    let dict = PyDict::new(py);
    dict.set_item("master_slave_symbols", cost.master_slave.eval(s))?;
    dict.set_item("slave_master_symbols", cost.slave_master.eval(s))?;
    dict.set_item("ms_overhead", cost.normalized_overhead_ms)?;
    dict.set_item("sm_overhead", cost.normalized_overhead_sm)?;
    dict.set_item("total_overhead", cost.total_overhead)?;
    Ok(dict.unbind())
}

/// Config text of a named preset experiment
/// (`fig1 | fig2 | fig4 | fig5 | table4`).
#[pyfunction]
fn preset(name: &str) -> PyResult<String> {
    coded_matmul::preset(name).map_err(py_err)
}

/// Run every scenario in a config text and return the CSV.
#[pyfunction]
fn run_config(text: &str) -> PyResult<String> {
    coded_matmul::run_config(text).map_err(py_err)
}

/// Split a result CSV into `(filename, contents)` plot series.
#[pyfunction]
fn emit_plotdata(csv: &str) -> PyResult<Vec<(String, String)>> {
    coded_matmul::emit_plotdata(csv).map_err(py_err)
}

/// Encode, straggle, decode and verify one scheme end to end on exact
/// operands; returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (scheme, k = 2, b = 2, sigma = 2, seed = 7))]
fn selftest(py: Python<'_>, scheme: &str, k: usize, b: usize, sigma: usize, seed: u64) -> PyResult<Py<PyDict>> {
    let report = coded_matmul::selftest(parse_scheme(scheme)?, k, b, sigma, seed).map_err(py_err)?;
    let dict = PyDict::new(py);
    dict.set_item("scheme", report.scheme.name())?;
    dict.set_item("passed", report.passed)?;
    dict.set_item("detail", report.detail)?;
    dict.set_item("peel_trace", report.peel_trace)?;
    Ok(dict.unbind())
}

#[pymodule]
fn coded_matmul_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Matrix>()?;
    m.add_class::<PyArrayCode>()?;
    m.add_function(wrap_pyfunction!(matmul, m)?)?;
    m.add_function(wrap_pyfunction!(max_blocklength, m)?)?;
    m.add_function(wrap_pyfunction!(max_blocklength_asym, m)?)?;
    m.add_function(wrap_pyfunction!(epsilon_for_stragglers, m)?)?;
    m.add_function(wrap_pyfunction!(harmonic, m)?)?;
    m.add_function(wrap_pyfunction!(closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(mc_simulate, m)?)?;
    m.add_function(wrap_pyfunction!(comm_overheads, m)?)?;
    m.add_function(wrap_pyfunction!(preset, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    m.add_function(wrap_pyfunction!(emit_plotdata, m)?)?;
    m.add_function(wrap_pyfunction!(selftest, m)?)?;
    Ok(())
}
