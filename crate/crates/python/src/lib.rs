//! Python bindings: problems, runs, scenarios and the criteria engine.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use qnls::config::ConfigFile;
use qnls::criteria::{self, ClassificationReport, ClassifyInput};
use qnls::diagnostics::write_csv;
use qnls::scenarios::Scenario;
use qnls::{InitialData, Nonlinearity, Potential, PowerTerm, ProblemSpec, RunOutcome, Sign, StepperConfig};

fn py_err(e: qnls::Error) -> PyErr {
    match e {
        qnls::Error::Hypothesis(_) | qnls::Error::Fit(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn nonlinearity(terms: Vec<(f64, f64)>) -> PyResult<Nonlinearity> {
    Nonlinearity::new(
        terms
            .into_iter()
            .map(|(coeff, exponent)| PowerTerm { coeff, exponent })
            .collect(),
    )
    .map_err(py_err)
}

fn sign(s: f64) -> PyResult<Sign> {
    Sign::from_factor(s).map_err(py_err)
}

/// A radial problem together with its stepper settings.
#[pyclass(name = "Problem", module = "qnls_py", skip_from_py_object)]
#[derive(Clone)]
pub struct PyProblem {
    spec: ProblemSpec,
    stepper: StepperConfig,
}

#[pymethods]
impl PyProblem {
    /// `h` is a list of `(coeff, exponent)` pairs; `V = sign c r^-m + bounded`.
    #[new]
    #[pyo3(signature = (
        dim = 3, radius = 16.0, grid_points = 1024, dt0 = 1e-3, t_end = 1.0,
        h = Vec::new(), c = 0.0, m = 0.0, sign = 1.0, bounded = 0.0,
        epsilon = qnls::model::DEFAULT_EPSILON, amplitude = 1.0, sigma = 1.0, chirp = 0.0,
        record_every = 10
    ))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        dim: usize,
        radius: f64,
        grid_points: usize,
        dt0: f64,
        t_end: f64,
        h: Vec<(f64, f64)>,
        c: f64,
        m: f64,
        sign: f64,
        bounded: f64,
        epsilon: f64,
        amplitude: f64,
        sigma: f64,
        chirp: f64,
        record_every: usize,
    ) -> PyResult<Self> {
        let spec = ProblemSpec {
            dim,
            h: nonlinearity(h)?,
            potential: Potential::new(c, m, self::sign(sign)?, bounded, epsilon).map_err(py_err)?,
            initial: InitialData::gaussian(amplitude, sigma, chirp),
            radius,
            grid_points,
            dt0,
            t_end,
        };
        spec.validate().map_err(py_err)?;
        let mut stepper = StepperConfig::new(dt0);
        stepper.record_every = record_every;
        stepper.validate().map_err(py_err)?;
        Ok(Self { spec, stepper })
    }

    /// Parses the TOML problem-file format.
    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        let file = ConfigFile::parse(text).map_err(py_err)?;
        Ok(Self {
            spec: file.problem().map_err(py_err)?,
            stepper: file.stepper().map_err(py_err)?,
        })
    }

    /// The pinned problem of a verification scenario.
    #[staticmethod]
    fn scenario(name: &str) -> PyResult<Self> {
        let (spec, stepper) = Scenario::from_name(name).map_err(py_err)?.problem();
        Ok(Self { spec, stepper })
    }

    fn to_toml(&self) -> PyResult<String> {
        Ok(ConfigFile::from_problem(&self.spec, &self.stepper).map_err(py_err)?.to_toml())
    }

    #[getter]
    fn dim(&self) -> usize {
        self.spec.dim
    }

    #[getter]
    fn t_end(&self) -> f64 {
        self.spec.t_end
    }

    /// Radial nodes of the grid.
    fn nodes(&self) -> PyResult<Vec<f64>> {
        let solver = qnls::Solver::new(&self.spec).map_err(py_err)?;
        Ok(solver.grid().nodes().to_vec())
    }

    /// Runs the adaptive solver to `t_end`.
    fn run(&self, py: Python<'_>) -> PyResult<PyRun> {
        let (spec, cfg) = (self.spec.clone(), self.stepper.clone());
        let outcome = py
            .detach(move || qnls::solver::run(&spec, &cfg))
            .map_err(py_err)?;
        Ok(PyRun { outcome })
    }

    /// Analytic classification, using the initial diagnostics of the data.
    fn classify(&self) -> PyResult<PyClassification> {
        let solver = qnls::Solver::new(&self.spec).map_err(py_err)?;
        let u0 = solver.initial_state().map_err(py_err)?;
        let initial = criteria::InitialDiagnostics {
            energy: qnls::diagnostics::energy(&u0, &self.spec),
            variance: qnls::diagnostics::variance_j(&u0),
            virial: qnls::diagnostics::virial_y(&u0),
        };
        let report = criteria::classify(&ClassifyInput {
            dim: self.spec.dim,
            h: self.spec.h.clone(),
            v: self.spec.potential,
            q: None,
            v1_norm: None,
            initial: Some(initial),
        })
        .map_err(py_err)?;
        Ok(PyClassification { report })
    }

    fn __repr__(&self) -> String {
        format!(
            "Problem(dim={}, radius={}, grid_points={}, t_end={})",
            self.spec.dim, self.spec.radius, self.spec.grid_points, self.spec.t_end
        )
    }
}

/// Result of a solver run.
#[pyclass(name = "Run", module = "qnls_py")]
pub struct PyRun {
    outcome: RunOutcome,
}

#[pymethods]
impl PyRun {
    #[getter]
    fn status(&self) -> &'static str {
        self.outcome.status.as_str()
    }

    #[getter]
    fn t_final(&self) -> f64 {
        self.outcome.t_final
    }

    #[getter]
    fn blowup_time_estimate(&self) -> Option<f64> {
        self.outcome.blowup_time_estimate
    }

    #[getter]
    fn accepted_steps(&self) -> usize {
        self.outcome.accepted_steps
    }

    fn mass_drift(&self) -> f64 {
        self.outcome.mass_drift()
    }

    fn energy_drift(&self) -> f64 {
        self.outcome.energy_drift()
    }

    /// Final field as `(re, im)` lists on the grid nodes.
    fn final_state(&self) -> (Vec<f64>, Vec<f64>) {
        let v = &self.outcome.final_state.values;
        (v.iter().map(|z| z.re).collect(), v.iter().map(|z| z.im).collect())
    }

    /// Diagnostics columns keyed by name.
    fn records<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let recs = &self.outcome.records;
        let d = PyDict::new(py);
        let col = |f: fn(&qnls::diagnostics::DiagnosticsRecord) -> f64| -> Vec<f64> { recs.iter().map(f).collect() };
        d.set_item("t", col(|r| r.t))?;
        d.set_item("mass2", col(|r| r.mass2))?;
        d.set_item("grad_u2", col(|r| r.grad_u2))?;
        d.set_item("grad_h2", col(|r| r.grad_h2))?;
        d.set_item("pot_term", col(|r| r.pot_term))?;
        d.set_item("energy", col(|r| r.energy))?;
        d.set_item("J", col(|r| r.variance))?;
        d.set_item("y", col(|r| r.virial))?;
        d.set_item("theta", col(|r| r.theta))?;
        d.set_item("P", col(|r| r.pseudo_conformal))?;
        d.set_item("P_residual", col(|r| r.p_residual))?;
        d.set_item("morawetz_const", col(|r| r.morawetz_const))?;
        d.set_item("morawetz_power", col(|r| r.morawetz_power))?;
        d.set_item("Lr_norm", col(|r| r.lr_norm))?;
        Ok(d)
    }

    fn csv(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        write_csv(&self.outcome.records, &mut buf).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        String::from_utf8(buf).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        format!(
            "Run(status={}, t_final={}, records={})",
            self.outcome.status,
            self.outcome.t_final,
            self.outcome.records.len()
        )
    }
}

#[pyclass(name = "Classification", module = "qnls_py")]
pub struct PyClassification {
    report: ClassificationReport,
}

#[pymethods]
impl PyClassification {
    fn summary(&self) -> String {
        self.report.summary()
    }

    fn to_text(&self) -> String {
        self.report.to_text()
    }

    #[getter]
    fn membership(&self) -> &'static str {
        self.report.membership.as_str()
    }

    #[getter]
    fn q_c(&self) -> f64 {
        self.report.q_c
    }

    /// The `key=value` block as a dict of strings.
    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        for line in self.report.to_key_values().lines() {
            if let Some((k, v)) = line.split_once('=') {
                d.set_item(k, v)?;
            }
        }
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!("Classification({})", self.report.summary())
    }
}

/// Classifies a power-law problem without simulating it.
#[pyfunction]
#[pyo3(signature = (dim, h, sign, c, m, bounded = 0.0, q = None, v1_norm = None))]
#[allow(clippy::too_many_arguments)]
fn classify(
    dim: usize,
    h: Vec<(f64, f64)>,
    sign: f64,
    c: f64,
    m: f64,
    bounded: f64,
    q: Option<f64>,
    v1_norm: Option<f64>,
) -> PyResult<PyClassification> {
    let v = Potential::new(c, m, self::sign(sign)?, bounded, qnls::model::DEFAULT_EPSILON).map_err(py_err)?;
    let report = criteria::classify(&ClassifyInput {
        dim,
        h: nonlinearity(h)?,
        v,
        q,
        v1_norm,
        initial: None,
    })
    .map_err(py_err)?;
    Ok(PyClassification { report })
}

#[pyfunction]
fn critical_exponent(alpha: f64, dim: usize) -> PyResult<f64> {
    criteria::critical_exponent(alpha, dim).map_err(py_err)
}

#[pyfunction]
fn blowup_time_bound(j0: f64, y0: f64) -> PyResult<f64> {
    criteria::blowup_time_bound(j0, y0).map_err(py_err)
}

#[pyfunction]
fn sobolev_best_constant(dim: usize) -> PyResult<f64> {
    criteria::sobolev_best_constant(dim).map_err(py_err)
}

/// Verdict string of the power-law table for `V = +r^-m`.
#[pyfunction]
fn proposition31_verdict(b: f64, alpha: f64, m: f64, dim: usize) -> PyResult<String> {
    Ok(criteria::proposition31_verdict(b, alpha, m, dim).map_err(py_err)?.describe())
}

fn scenario_names() -> Vec<&'static str> {
    Scenario::ALL.iter().map(|s| s.name()).collect()
}

/// Runs a pinned scenario; returns `(passed, check lines)`.
#[pyfunction]
fn verify(py: Python<'_>, name: &str) -> PyResult<(bool, Vec<String>)> {
    let scenario = Scenario::from_name(name).map_err(py_err)?;
    let rep = py.detach(move || scenario.run()).map_err(py_err)?;
    Ok((rep.passed(), rep.checks.iter().map(|c| c.to_string()).collect()))
}

#[pymodule]
fn qnls_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProblem>()?;
    m.add_class::<PyRun>()?;
    m.add_class::<PyClassification>()?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(critical_exponent, m)?)?;
    m.add_function(wrap_pyfunction!(blowup_time_bound, m)?)?;
    m.add_function(wrap_pyfunction!(sobolev_best_constant, m)?)?;
    m.add_function(wrap_pyfunction!(proposition31_verdict, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add("SCENARIOS", scenario_names())?;
    Ok(())
}
