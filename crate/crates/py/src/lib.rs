//! Python bindings: bodies, kernel tables and mixed-volume estimators.

use flagvol::flag::Flag;
use flagvol::flag_measure::{omega_integrate, Body as CoreBody};
use flagvol::kernel::{self, alpha_table, c_constants, CSource, PhiTable as CoreTable};
use flagvol::mc::{McConfig, McEstimate};
use flagvol::mixed_volume;
use flagvol::multilinear::blade_from_frame;
use flagvol::oracle;
use flagvol::polytope::{self, Polytope as CorePolytope};
use flagvol::sampling::sample_rotation;
use flagvol::Error;
use nalgebra::{DMatrix, DVector};
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(_) | Error::Json(_) => PyOSError::new_err(e.to_string()),
        Error::Singular(_)
        | Error::NonFiniteSample { .. }
        | Error::Consistency(_)
        | Error::RankDeficient { .. }
        | Error::DegenerateCone(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn vector(v: Vec<f64>) -> DVector<f64> {
    DVector::from_vec(v)
}

fn matrix(rows: Vec<Vec<f64>>) -> PyResult<DMatrix<f64>> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(PyValueError::new_err("ragged matrix"));
    }
    Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().cloned().collect()).collect()
}

fn config(samples: u64, seed: u64, threads: Option<usize>) -> McConfig {
    let cfg = McConfig::new(samples, seed);
    match threads {
        Some(t) => cfg.with_threads(t),
        None => cfg,
    }
}

/// Mean and standard error of a Monte Carlo estimate.
#[pyclass(frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
pub struct Estimate {
    mean: f64,
    std_error: f64,
    n: u64,
    seed: u64,
}

impl From<McEstimate> for Estimate {
    fn from(e: McEstimate) -> Self {
        Estimate {
            mean: e.mean,
            std_error: e.std_error,
            n: e.n,
            seed: e.seed,
        }
    }
}

#[pymethods]
impl Estimate {
    fn __repr__(&self) -> String {
        format!("Estimate({} +- {}, n={})", self.mean, self.std_error, self.n)
    }
}

/// Convex polytope with its full face lattice.
#[pyclass(frozen, from_py_object)]
#[derive(Clone)]
pub struct Polytope {
    inner: CorePolytope,
}

#[pymethods]
impl Polytope {
    #[new]
    fn new(vertices: Vec<Vec<f64>>) -> PyResult<Self> {
        let pts = vertices.into_iter().map(vector).collect();
        CorePolytope::from_vertices(pts).map(|inner| Polytope { inner }).map_err(to_py)
    }

    #[staticmethod]
    fn cube(d: usize) -> PyResult<Self> {
        polytope::make_cube(d).map(|inner| Polytope { inner }).map_err(to_py)
    }

    #[staticmethod]
    fn simplex(d: usize) -> PyResult<Self> {
        polytope::make_simplex(d).map(|inner| Polytope { inner }).map_err(to_py)
    }

    #[staticmethod]
    fn cross(d: usize) -> PyResult<Self> {
        polytope::make_cross(d).map(|inner| Polytope { inner }).map_err(to_py)
    }

    #[staticmethod]
    fn square4d() -> PyResult<Self> {
        polytope::make_square4d().map(|inner| Polytope { inner }).map_err(to_py)
    }

    #[staticmethod]
    fn zonotope(generators: Vec<Vec<f64>>) -> PyResult<Self> {
        let g: Vec<_> = generators.into_iter().map(vector).collect();
        polytope::make_zonotope(&g).map(|inner| Polytope { inner }).map_err(to_py)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        CorePolytope::load(path.as_ref()).map(|inner| Polytope { inner }).map_err(to_py)
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.inner.save(path.as_ref()).map_err(to_py)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn vertices(&self) -> Vec<Vec<f64>> {
        self.inner.vertices().iter().map(|v| v.iter().cloned().collect()).collect()
    }

    fn volume(&self) -> f64 {
        self.inner.volume()
    }

    fn intrinsic_volume(&self, k: usize) -> f64 {
        self.inner.intrinsic_volume(k)
    }

    fn face_count(&self, k: usize) -> usize {
        self.inner.face_count(k)
    }

    fn rotate(&self, rotation: Vec<Vec<f64>>) -> PyResult<Self> {
        let rho = matrix(rotation)?;
        self.inner.rotate(&rho).map(|inner| Polytope { inner }).map_err(to_py)
    }

    fn translate(&self, shift: Vec<f64>) -> Self {
        Polytope {
            inner: self.inner.translate(&vector(shift)),
        }
    }

    fn scale(&self, s: f64) -> PyResult<Self> {
        self.inner.scale(s).map(|inner| Polytope { inner }).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "Polytope(dim={}, vertices={}, volume={})",
            self.inner.dim(),
            self.inner.vertices().len(),
            self.inner.volume()
        )
    }
}

/// Euclidean ball.
#[pyclass(frozen, get_all, from_py_object)]
#[derive(Clone)]
pub struct Ball {
    dim: usize,
    radius: f64,
}

#[pymethods]
impl Ball {
    #[new]
    #[pyo3(signature = (dim, radius = 1.0))]
    fn new(dim: usize, radius: f64) -> PyResult<Self> {
        if !(radius > 0.0) || dim == 0 {
            return Err(PyValueError::new_err("ball needs dim >= 1 and a positive radius"));
        }
        Ok(Ball { dim, radius })
    }
}

#[derive(FromPyObject)]
enum AnyBody {
    Polytope(Polytope),
    Ball(Ball),
}

impl AnyBody {
    fn core(&self) -> CoreBody {
        match self {
            AnyBody::Polytope(p) => CoreBody::Polytope(p.inner.clone()),
            AnyBody::Ball(b) => CoreBody::Ball {
                center: DVector::zeros(b.dim),
                radius: b.radius,
            },
        }
    }
}

/// Constants of the kernel `φ^{k,l}`.
#[pyclass(frozen)]
pub struct PhiTable {
    inner: CoreTable,
}

#[pymethods]
impl PhiTable {
    /// Closed-form constants when `samples` is `None`, Monte Carlo ones otherwise.
    #[new]
    #[pyo3(signature = (d, k, samples = None, seed = 1))]
    fn new(py: Python<'_>, d: usize, k: usize, samples: Option<u64>, seed: u64) -> PyResult<Self> {
        let source = match samples {
            None => CSource::Exact,
            Some(n) => CSource::MonteCarlo(McConfig::new(n, seed)),
        };
        py.detach(|| alpha_table(d, k, &source))
            .map(|inner| PhiTable { inner })
            .map_err(to_py)
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.d
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k
    }

    #[getter]
    fn alpha(&self) -> Vec<Vec<f64>> {
        self.inner.alpha.clone()
    }

    #[getter]
    fn d_k(&self) -> Vec<Vec<f64>> {
        self.inner.d_k.clone()
    }

    #[getter]
    fn d_l(&self) -> Vec<Vec<f64>> {
        self.inner.d_l.clone()
    }

    #[getter]
    fn kronecker(&self) -> Vec<Vec<f64>> {
        rows(&self.inner.kronecker())
    }

    fn is_exact(&self) -> bool {
        self.inner.is_exact()
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    /// `φ^{k,l}(u, U, v, V)`; `U` and `V` are spanning vectors orthogonal to `u`, `v`.
    fn phi(&self, u: Vec<f64>, big_u: Vec<Vec<f64>>, v: Vec<f64>, big_v: Vec<Vec<f64>>) -> PyResult<f64> {
        let d = self.inner.d;
        let flag = |x: Vec<f64>, span: Vec<Vec<f64>>| -> PyResult<Flag> {
            let s = blade_from_frame(d, &span.into_iter().map(vector).collect::<Vec<_>>()).map_err(to_py)?;
            Flag::new(vector(x), s).map_err(to_py)
        };
        kernel::phi(&flag(u, big_u)?, &flag(v, big_v)?, &self.inner).map_err(to_py)
    }
}

/// Result of a mixed-volume run.
#[pyclass(frozen, get_all)]
pub struct MixedVolume {
    value: f64,
    std_error: f64,
    n: u64,
    seed: u64,
    mode: String,
    k: usize,
    l: usize,
    preconditions: Vec<String>,
    guard: Option<Estimate>,
}

#[pymethods]
impl MixedVolume {
    fn __repr__(&self) -> String {
        format!("MixedVolume({}: {} +- {})", self.mode, self.value, self.std_error)
    }
}

/// Grassmann moment constants `c^d_{k,i}` with their standard errors.
#[pyfunction]
#[pyo3(signature = (d, k, samples = None, seed = 1))]
fn grassmann_constants(py: Python<'_>, d: usize, k: usize, samples: Option<u64>, seed: u64) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let source = match samples {
        None => CSource::Exact,
        Some(n) => CSource::MonteCarlo(McConfig::new(n, seed)),
    };
    let c = py.detach(|| c_constants(d, k, &source)).map_err(to_py)?;
    Ok((c.values, c.std_errors))
}

/// `V_{k,l}(K, L)` from the uncut flag representation.
#[pyfunction]
#[pyo3(signature = (body_k, body_l, k, table, samples = 100_000, seed = 1, acknowledge_rotation = false, threads = None))]
#[allow(clippy::too_many_arguments)]
fn v_kl_flag(
    py: Python<'_>,
    body_k: AnyBody,
    body_l: AnyBody,
    k: usize,
    table: &PhiTable,
    samples: u64,
    seed: u64,
    acknowledge_rotation: bool,
    threads: Option<usize>,
) -> PyResult<MixedVolume> {
    let (kb, lb) = (body_k.core(), body_l.core());
    let cfg = config(samples, seed, threads);
    let rep = py
        .detach(|| mixed_volume::v_kl_flag(&kb, &lb, k, &table.inner, &cfg, acknowledge_rotation))
        .map_err(to_py)?;
    Ok(MixedVolume {
        value: rep.value,
        std_error: rep.std_error,
        n: rep.n,
        seed: rep.seed,
        mode: rep.mode.to_string(),
        k: rep.k,
        l: rep.l,
        preconditions: rep.preconditions_checked,
        guard: rep.guard.map(Estimate::from),
    })
}

/// `V^{(ε)}_{k,l}(K, L)` from the cut-off representation.
#[pyfunction]
#[pyo3(signature = (body_k, body_l, k, eps, table, samples = 100_000, seed = 1, threads = None))]
#[allow(clippy::too_many_arguments)]
fn v_kl_eps(
    py: Python<'_>,
    body_k: AnyBody,
    body_l: AnyBody,
    k: usize,
    eps: f64,
    table: &PhiTable,
    samples: u64,
    seed: u64,
    threads: Option<usize>,
) -> PyResult<Estimate> {
    let (kb, lb) = (body_k.core(), body_l.core());
    let cfg = config(samples, seed, threads);
    py.detach(|| mixed_volume::v_kl_eps(&kb, &lb, k, eps, &table.inner, &cfg))
        .map(Estimate::from)
        .map_err(to_py)
}

/// `V_{k,l}(K, L)` for polytopes from the face-pair sum.
#[pyfunction]
#[pyo3(signature = (body_k, body_l, k, samples = 100_000, seed = 1, threads = None))]
fn v_kl_direct(
    py: Python<'_>,
    body_k: &Polytope,
    body_l: &Polytope,
    k: usize,
    samples: u64,
    seed: u64,
    threads: Option<usize>,
) -> PyResult<Estimate> {
    let cfg = config(samples, seed, threads);
    py.detach(|| mixed_volume::v_kl_direct(&body_k.inner, &body_l.inner, k, &cfg))
        .map(Estimate::from)
        .map_err(to_py)
}

/// Total mass of the flag measure of order `k`.
#[pyfunction]
#[pyo3(signature = (body, k, samples = 100_000, seed = 1))]
fn flag_mass(py: Python<'_>, body: AnyBody, k: usize, samples: u64, seed: u64) -> PyResult<Estimate> {
    let b = body.core();
    py.detach(|| omega_integrate(&b, k, |_| 1.0, &McConfig::new(samples, seed)))
        .map(|o| o.estimate.into())
        .map_err(to_py)
}

/// `V_{k,d−k}` of two zonotopes `Σ [0, g_i]` from generator determinants.
#[pyfunction]
fn zonotope_mixed(gens_k: Vec<Vec<f64>>, gens_l: Vec<Vec<f64>>, k: usize) -> PyResult<f64> {
    let gk: Vec<_> = gens_k.into_iter().map(vector).collect();
    let gl: Vec<_> = gens_l.into_iter().map(vector).collect();
    oracle::zonotope_mixed(&gk, &gl, k).map_err(to_py)
}

/// A Haar-random rotation of `R^d`.
#[pyfunction]
#[pyo3(signature = (d, seed = 1))]
fn random_rotation(d: usize, seed: u64) -> Vec<Vec<f64>> {
    rows(&sample_rotation(d, &mut McConfig::new(1, seed).stream(0)))
}

#[pymodule]
#[pyo3(name = "flagvol")]
fn flagvol_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Estimate>()?;
    m.add_class::<Polytope>()?;
    m.add_class::<Ball>()?;
    m.add_class::<PhiTable>()?;
    m.add_class::<MixedVolume>()?;
    m.add_function(wrap_pyfunction!(grassmann_constants, m)?)?;
    m.add_function(wrap_pyfunction!(v_kl_flag, m)?)?;
    m.add_function(wrap_pyfunction!(v_kl_eps, m)?)?;
    m.add_function(wrap_pyfunction!(v_kl_direct, m)?)?;
    m.add_function(wrap_pyfunction!(flag_mass, m)?)?;
    m.add_function(wrap_pyfunction!(zonotope_mixed, m)?)?;
    m.add_function(wrap_pyfunction!(random_rotation, m)?)?;
    Ok(())
}
