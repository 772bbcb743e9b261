//! Python bindings for the `bosonmc` crate.

use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use bosonmc::config::InstanceConfig;
use bosonmc::diagnostics;
use bosonmc::integrator::{self, EnergyEstimate};
use bosonmc::linalg::{self, ComplexMatrix, PermanentMethod, UnitaryMatrix};
use bosonmc::physics::{self, BoundaryRule, EfimovParams, OrbitalSet, ParticleConfiguration, SpatialGrid};
use bosonmc::sampler::{self, GramMatrix, OccupationPattern, OutputDistribution};
use bosonmc::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Config(_) | Error::InvalidArgument(_) | Error::Data(_) | Error::Pattern(_) | Error::Dimension(_) => {
            PyValueError::new_err(e.to_string())
        }
        Error::Degenerate(_) | Error::Divergence(_) | Error::Singular(_) => PyArithmeticError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for bosonmc::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

fn matrix(rows: Vec<Vec<Complex64>>) -> PyResult<ComplexMatrix> {
    ComplexMatrix::from_rows(&rows).py()
}

fn pattern(text: &str) -> PyResult<OccupationPattern> {
    text.parse().py()
}

fn rule(name: &str) -> PyResult<BoundaryRule> {
    match name {
        "include" => Ok(BoundaryRule::Include),
        "exclude" => Ok(BoundaryRule::Exclude),
        other => Err(PyValueError::new_err(format!("boundary rule must be include or exclude, got {other}"))),
    }
}

fn gram(n: usize, s: Option<f64>, rows: Option<Vec<Vec<f64>>>) -> PyResult<GramMatrix> {
    match (s, rows) {
        (Some(_), Some(_)) => Err(PyValueError::new_err("give either s or gram, not both")),
        (Some(s), None) => GramMatrix::homogeneous(n, s).py(),
        (None, Some(rows)) => GramMatrix::from_rows(&rows).py(),
        (None, None) => Ok(GramMatrix::indistinguishable(n)),
    }
}

/// A unitary interferometer matrix.
#[pyclass(name = "Unitary", module = "bosonmc", frozen)]
struct PyUnitary(UnitaryMatrix);

#[pymethods]
impl PyUnitary {
    #[new]
    fn new(rows: Vec<Vec<Complex64>>) -> PyResult<Self> {
        Ok(PyUnitary(UnitaryMatrix::new(matrix(rows)?).py()?))
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn rows(&self) -> Vec<Vec<Complex64>> {
        self.0.matrix().to_rows()
    }

    fn unitarity_defect(&self) -> f64 {
        self.0.unitarity_defect()
    }

    fn fingerprint(&self) -> String {
        self.0.fingerprint()
    }

    fn __repr__(&self) -> String {
        format!("Unitary(dim={}, fingerprint={})", self.0.dim(), self.0.fingerprint())
    }
}

/// Probabilities over output patterns, keyed by their bit strings.
#[pyclass(name = "Distribution", module = "bosonmc", frozen)]
struct PyDistribution(OutputDistribution);

#[pymethods]
impl PyDistribution {
    fn patterns(&self) -> Vec<String> {
        self.0.patterns().iter().map(|p| p.to_string()).collect()
    }

    fn probs(&self) -> Vec<f64> {
        self.0.probs().to_vec()
    }

    fn probability(&self, pattern_text: &str) -> PyResult<f64> {
        Ok(self.0.probability(&pattern(pattern_text)?))
    }

    #[getter]
    fn postselection_mass(&self) -> f64 {
        self.0.meta().postselection_mass
    }

    fn to_json(&self) -> PyResult<String> {
        self.0.to_json().py()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("Distribution(modes={}, photons={}, patterns={})", self.0.meta().modes, self.0.meta().photons, self.0.len())
    }
}

/// First-order energy estimate.
#[pyclass(name = "Estimate", module = "bosonmc", frozen, get_all)]
struct PyEstimate {
    e1: f64,
    stderr: f64,
    i0: f64,
    samples: usize,
    modes: usize,
    estimator: String,
}

impl From<EnergyEstimate> for PyEstimate {
    fn from(e: EnergyEstimate) -> Self {
        PyEstimate {
            e1: e.e1,
            stderr: e.stderr,
            i0: e.i0,
            samples: e.samples,
            modes: e.provenance.modes,
            estimator: e.provenance.estimator,
        }
    }
}

#[pymethods]
impl PyEstimate {
    fn __repr__(&self) -> String {
        format!("Estimate(e1={:.6}, stderr={:.2e}, i0={:.4}, estimator={})", self.e1, self.stderr, self.i0, self.estimator)
    }
}

/// Problem-instance configuration.
#[pyclass(name = "Config", module = "bosonmc")]
struct PyConfig(InstanceConfig);

#[pymethods]
impl PyConfig {
    #[new]
    #[pyo3(signature = (toml = None))]
    fn new(toml: Option<&str>) -> PyResult<Self> {
        let cfg = match toml {
            Some(text) => InstanceConfig::from_toml(text).py()?,
            None => InstanceConfig::default(),
        };
        Ok(PyConfig(cfg))
    }

    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<Self> {
        Ok(PyConfig(InstanceConfig::load(&path).py()?))
    }

    fn to_toml(&self) -> PyResult<String> {
        self.0.to_toml().py()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.0.seed
    }

    #[setter]
    fn set_seed(&mut self, seed: u64) {
        self.0.seed = seed;
    }

    #[getter]
    fn coupling(&self) -> f64 {
        self.0.coupling
    }

    #[setter]
    fn set_coupling(&mut self, c: f64) {
        self.0.coupling = c;
    }

    #[getter]
    fn jitter_samples(&self) -> usize {
        self.0.jitter.samples
    }

    #[setter]
    fn set_jitter_samples(&mut self, n: usize) {
        self.0.jitter.samples = n;
    }

    /// Encoding unitary on the base grid.
    fn encode(&self) -> PyResult<PyUnitary> {
        let inst = self.0.instance().py()?;
        Ok(PyUnitary(inst.encode(&inst.base_grid).py()?.unitary))
    }

    /// Collision-free distribution on the base grid; the configured photon
    /// overlaps unless `s` or `gram` is given.
    #[pyo3(signature = (s = None, gram = None))]
    fn distribution(&self, s: Option<f64>, gram: Option<Vec<Vec<f64>>>) -> PyResult<PyDistribution> {
        let inst = self.0.instance().py()?;
        let g = if s.is_none() && gram.is_none() { inst.gram.clone() } else { self::gram(inst.photons(), s, gram)? };
        let u = inst.encode(&inst.base_grid).py()?.unitary;
        Ok(PyDistribution(inst.distribution(&u, &g).py()?))
    }

    /// Exact `E1` of `dist` on the base grid.
    fn exact_e1(&self, dist: &PyDistribution) -> PyResult<PyEstimate> {
        let inst = self.0.instance().py()?;
        Ok(inst.estimate(&dist.0, &inst.base_grid, &inst.jitter).py()?.into())
    }

    /// Monte Carlo `E1` from `count` patterns drawn from `dist`.
    fn sampled_e1(&self, dist: &PyDistribution, count: usize, seed: u64) -> PyResult<PyEstimate> {
        let inst = self.0.instance().py()?;
        let samples = sampler::sample_patterns(&dist.0, count, seed);
        Ok(integrator::sampled_e1(&samples, &inst.base_grid, &inst.params, &inst.jitter).py()?.into())
    }

    /// The simulation rows of the error budget as `(row, variant, e1, stderr)`.
    fn error_budget(&self, py: Python<'_>) -> PyResult<Vec<(String, String, f64, f64)>> {
        let cfg = self.0.clone();
        let rows = py.detach(move || bosonmc::cli::error_budget(&cfg)).py()?;
        Ok(rows.into_iter().map(|r| (r.row, r.variant, r.point.e1, r.point.stderr)).collect())
    }

    fn __repr__(&self) -> String {
        format!("Config(modes={}, photons={}, seed={})", self.0.modes, self.0.photons, self.0.seed)
    }
}

#[pyfunction]
#[pyo3(signature = (rows, method = "ryser"))]
fn permanent(rows: Vec<Vec<Complex64>>, method: &str) -> PyResult<Complex64> {
    let method = match method {
        "ryser" => PermanentMethod::Ryser,
        "glynn" => PermanentMethod::Glynn,
        other => return Err(PyValueError::new_err(format!("unknown permanent method {other}"))),
    };
    linalg::permanent_with(&matrix(rows)?, method).py()
}

/// Randomized permanent estimate as `(estimate, stderr)`.
#[pyfunction]
fn gurvits_estimate(rows: Vec<Vec<Complex64>>, num_samples: usize, seed: u64) -> PyResult<(Complex64, f64)> {
    let est = linalg::gurvits_estimate(&matrix(rows)?, num_samples, seed).py()?;
    Ok((est.estimate, est.stderr))
}

#[pyfunction]
fn nearest_unitary(rows: Vec<Vec<Complex64>>) -> PyResult<PyUnitary> {
    Ok(PyUnitary(linalg::nearest_unitary(&matrix(rows)?).py()?))
}

#[pyfunction]
fn haar_random(m: usize, seed: u64) -> PyResult<PyUnitary> {
    Ok(PyUnitary(linalg::haar_random(m, seed).py()?))
}

#[pyfunction]
fn amplitude_fidelity(u_set: &PyUnitary, u_get: &PyUnitary) -> PyResult<f64> {
    linalg::amplitude_fidelity(&u_set.0, &u_get.0).py()
}

#[pyfunction]
#[pyo3(signature = (u, mu_in, mu_out, s = None, gram = None))]
fn output_probability(
    u: &PyUnitary,
    mu_in: &str,
    mu_out: &str,
    s: Option<f64>,
    gram: Option<Vec<Vec<f64>>>,
) -> PyResult<f64> {
    let (mu_in, mu_out) = (pattern(mu_in)?, pattern(mu_out)?);
    if s.is_none() && gram.is_none() {
        return sampler::output_probability(&u.0, &mu_in, &mu_out).py();
    }
    let g = self::gram(mu_in.total(), s, gram)?;
    sampler::output_probability_partial(&u.0, &mu_in, &mu_out, &g).py()
}

#[pyfunction]
#[pyo3(signature = (u, mu_in, s = None, gram = None, collision_free = true))]
fn enumerate_distribution(
    u: &PyUnitary,
    mu_in: &str,
    s: Option<f64>,
    gram: Option<Vec<Vec<f64>>>,
    collision_free: bool,
) -> PyResult<PyDistribution> {
    let mu_in = pattern(mu_in)?;
    let g = self::gram(mu_in.total(), s, gram)?;
    Ok(PyDistribution(sampler::enumerate_distribution(&u.0, &mu_in, &g, collision_free).py()?))
}

#[pyfunction]
fn sample_patterns(dist: &PyDistribution, count: usize, seed: u64) -> Vec<String> {
    sampler::sample_patterns(&dist.0, count, seed).iter().map(|p| p.to_string()).collect()
}

/// Noisy copy of `u` and its fidelity against `u`.
#[pyfunction]
fn perturb_unitary(u: &PyUnitary, epsilon: f64, seed: u64) -> PyResult<(PyUnitary, f64)> {
    let (v, f) = sampler::perturb_unitary(&u.0, epsilon, seed).py()?;
    Ok((PyUnitary(v), f))
}

#[pyfunction]
fn orbital(i: usize, x: f64) -> f64 {
    physics::orbital(i, x)
}

/// Encoding unitary for `orbitals` on `m` uniform points in `[-a, a]`, with
/// its deviation from the raw orbital samples.
#[pyfunction]
#[pyo3(signature = (m, half_extent, orbitals = vec![0, 1, 2]))]
fn encode_unitary(m: usize, half_extent: f64, orbitals: Vec<usize>) -> PyResult<(PyUnitary, f64)> {
    let grid = SpatialGrid::uniform(m, half_extent).py()?;
    let enc = physics::encode_unitary(&OrbitalSet::new(orbitals).py()?, &grid).py()?;
    Ok((PyUnitary(enc.unitary), enc.raw_deviation))
}

#[pyfunction]
#[pyo3(signature = (positions, c = 0.0))]
fn efimov_potential(positions: Vec<f64>, c: f64) -> PyResult<f64> {
    let x = ParticleConfiguration::new(positions).py()?;
    physics::efimov_potential(&x, &EfimovParams::new(c, 1.0).py()?).py()
}

#[pyfunction]
#[pyo3(signature = (positions, d_hs, boundary_rule = "include"))]
fn hard_shell(positions: Vec<f64>, d_hs: f64, boundary_rule: &str) -> PyResult<bool> {
    let x = ParticleConfiguration::new(positions).py()?;
    Ok(physics::hard_shell(&x, d_hs, rule(boundary_rule)?))
}

#[pyfunction]
fn tvd(p: &PyDistribution, q: &PyDistribution) -> PyResult<f64> {
    diagnostics::tvd(&p.0, &q.0).py()
}

/// Distribution from a `pattern,count` CSV file.
#[pyfunction]
fn ingest_counts(path: std::path::PathBuf, modes: usize, photons: usize) -> PyResult<PyDistribution> {
    Ok(PyDistribution(diagnostics::ingest_counts_file(&path, modes, photons).py()?.distribution))
}

#[pymodule(name = "bosonmc")]
pub fn bosonmc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyUnitary>()?;
    m.add_class::<PyDistribution>()?;
    m.add_class::<PyEstimate>()?;
    m.add_class::<PyConfig>()?;
    m.add_function(wrap_pyfunction!(permanent, m)?)?;
    m.add_function(wrap_pyfunction!(gurvits_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(nearest_unitary, m)?)?;
    m.add_function(wrap_pyfunction!(haar_random, m)?)?;
    m.add_function(wrap_pyfunction!(amplitude_fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(output_probability, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(sample_patterns, m)?)?;
    m.add_function(wrap_pyfunction!(perturb_unitary, m)?)?;
    m.add_function(wrap_pyfunction!(orbital, m)?)?;
    m.add_function(wrap_pyfunction!(encode_unitary, m)?)?;
    m.add_function(wrap_pyfunction!(efimov_potential, m)?)?;
    m.add_function(wrap_pyfunction!(hard_shell, m)?)?;
    m.add_function(wrap_pyfunction!(tvd, m)?)?;
    m.add_function(wrap_pyfunction!(ingest_counts, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
