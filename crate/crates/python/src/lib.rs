//! Python bindings. Structured results cross the boundary as JSON and come
//! back as plain dicts and lists.

use num_complex::Complex64 as C64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use flatsec::certify;
use flatsec::constants::ConstantsTable;
use flatsec::frame;
use flatsec::geometry;
use flatsec::kernel;
use flatsec::mesh::{sup_norm_poly, MeshConfig};
use flatsec::multiindex::MonomialBasis;
use flatsec::pipeline;

fn err(e: flatsec::Error) -> PyErr {
    match e {
        flatsec::Error::Io(_) | flatsec::Error::Json(_) | flatsec::Error::Csv(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_py(py: Python<'_>, json: String) -> PyResult<PyObject> {
    Ok(py.import("json")?.call_method1("loads", (json,))?.unbind())
}

fn to_json(py: Python<'_>, obj: &Bound<'_, PyAny>) -> PyResult<String> {
    py.import("json")?.call_method1("dumps", (obj,))?.extract()
}

fn config_from(py: Python<'_>, config: Option<&Bound<'_, PyAny>>) -> PyResult<pipeline::RunConfig> {
    match config {
        None => Ok(pipeline::RunConfig::default()),
        Some(c) => serde_json::from_str(&to_json(py, c)?).map_err(|e| PyValueError::new_err(e.to_string())),
    }
}

/// A point of `ℂℙ^m` in canonical homogeneous coordinates.
#[pyclass(name = "ProjectivePoint", frozen)]
#[derive(Clone)]
struct PyProjectivePoint(geometry::ProjectivePoint);

#[pymethods]
impl PyProjectivePoint {
    #[new]
    fn new(coords: Vec<C64>) -> PyResult<Self> {
        geometry::ProjectivePoint::new(&coords).map(Self).map_err(err)
    }

    #[staticmethod]
    fn origin(m: usize) -> Self {
        Self(geometry::ProjectivePoint::origin(m))
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn coords(&self) -> Vec<C64> {
        self.0.coords().to_vec()
    }

    fn distance(&self, other: &Self) -> f64 {
        geometry::fs_distance(&self.0, &other.0)
    }

    fn __repr__(&self) -> String {
        format!("ProjectivePoint({:?})", self.0.coords())
    }
}

/// The Szegő kernel of `O(k)` over `ℂℙ^m`.
#[pyclass(name = "KernelModel", frozen)]
struct PyKernelModel(kernel::KernelModel);

#[pymethods]
impl PyKernelModel {
    #[new]
    fn new(m: usize, k: usize) -> PyResult<Self> {
        kernel::KernelModel::new(m, k).map(Self).map_err(err)
    }

    #[getter]
    fn m(&self) -> usize {
        self.0.m
    }

    #[getter]
    fn k(&self) -> usize {
        self.0.k
    }

    #[getter]
    fn d_k(&self) -> f64 {
        self.0.d_k
    }

    #[getter]
    fn diag(&self) -> f64 {
        self.0.diag
    }

    /// `P_k(z, w) = cos^k dist(z, w)`.
    fn normalized(&self, z: &PyProjectivePoint, w: &PyProjectivePoint) -> f64 {
        kernel::normalized_kernel(&self.0, &z.0, &w.0)
    }

    /// Monomial coefficients of the coherent state peaked at `y`.
    fn coherent_state(&self, y: Vec<C64>) -> PyResult<Vec<C64>> {
        let lift = geometry::UnitLift::new(&y).map_err(err)?;
        let basis = MonomialBasis::new(self.0.m, self.0.k);
        kernel::coherent_state(&self.0, &basis, &lift)
            .map(|s| s.coeffs)
            .map_err(err)
    }
}

/// Exponents of the degree-`k` monomials in `m + 1` variables, in the order
/// used for coefficient vectors.
#[pyfunction]
fn monomials(m: usize, k: usize) -> Vec<Vec<u32>> {
    MonomialBasis::new(m, k).exponents().to_vec()
}

#[pyfunction]
#[pyo3(signature = (max_m = 6))]
fn constants(py: Python<'_>, max_m: usize) -> PyResult<PyObject> {
    let t = ConstantsTable::compute(max_m).map_err(err)?;
    to_py(py, serde_json::to_string(&t.rows).map_err(|e| PyRuntimeError::new_err(e.to_string()))?)
}

#[pyfunction]
fn choose_spacing(m: usize, eta: f64, gamma: f64) -> f64 {
    frame::choose_spacing(m, eta, gamma)
}

#[pyfunction]
fn flat_bound(beta: f64, eta: f64, vol: f64) -> PyResult<f64> {
    certify::flat_bound(beta, eta, vol).map_err(err)
}

#[pyfunction]
fn fs_volume(m: usize) -> f64 {
    geometry::fs_volume(m)
}

/// Sup norm on the unit sphere of the polynomial with monomial coefficients
/// `coeffs`; returns `(value, argmax)`.
#[pyfunction]
#[pyo3(signature = (m, k, coeffs, radial = None))]
fn sup_norm(m: usize, k: usize, coeffs: Vec<C64>, radial: Option<usize>) -> PyResult<(f64, Vec<C64>)> {
    let basis = MonomialBasis::new(m, k);
    if coeffs.len() != basis.len() {
        return Err(PyValueError::new_err(format!(
            "expected {} coefficients, got {}",
            basis.len(),
            coeffs.len()
        )));
    }
    let mesh = MeshConfig {
        radial,
        ..MeshConfig::default()
    };
    let est = sup_norm_poly(&basis, &coeffs, &mesh);
    Ok((est.value, est.argmax))
}

/// Run the pipeline for a config dict (missing keys take their defaults) and
/// return the manifest as a dict.
#[pyfunction]
#[pyo3(signature = (config = None))]
fn run(py: Python<'_>, config: Option<&Bound<'_, PyAny>>) -> PyResult<PyObject> {
    let cfg = config_from(py, config)?;
    let manifest = py.allow_threads(|| pipeline::run(&cfg)).map_err(err)?;
    to_py(py, manifest.to_json().map_err(err)?)
}

/// Frame points of one degree as lists of complex homogeneous coordinates.
#[pyfunction]
#[pyo3(signature = (k, config = None))]
fn frame_points(py: Python<'_>, k: usize, config: Option<&Bound<'_, PyAny>>) -> PyResult<Vec<Vec<C64>>> {
    let cfg = config_from(py, config)?;
    let spec = cfg.lattice_spec().map_err(err)?;
    let f = frame::build(&spec, k).map_err(err)?;
    Ok(f.points.iter().map(|p| p.coords().to_vec()).collect())
}

/// Flat family of one degree: a list of monomial coefficient vectors.
#[pyfunction]
#[pyo3(signature = (k, config = None))]
fn flat_family(py: Python<'_>, k: usize, config: Option<&Bound<'_, PyAny>>) -> PyResult<Vec<Vec<C64>>> {
    let cfg = config_from(py, config)?;
    let stage = py.allow_threads(|| pipeline::run_k(&cfg, k)).map_err(err)?;
    Ok(stage.family.sections.into_iter().map(|s| s.coeffs).collect())
}

#[pyfunction]
#[pyo3(signature = (config = None, eigen_samples = 50))]
fn emit_polys(py: Python<'_>, config: Option<&Bound<'_, PyAny>>, eigen_samples: usize) -> PyResult<PyObject> {
    let cfg = config_from(py, config)?;
    let recs = py
        .allow_threads(|| pipeline::emit_corollary(&cfg, eigen_samples))
        .map_err(err)?;
    to_py(py, serde_json::to_string(&recs).map_err(|e| PyRuntimeError::new_err(e.to_string()))?)
}

/// Compare two manifest dicts.
#[pyfunction]
fn compare(py: Python<'_>, a: &Bound<'_, PyAny>, b: &Bound<'_, PyAny>) -> PyResult<PyObject> {
    let parse = |o: &Bound<'_, PyAny>| -> PyResult<pipeline::RunManifest> {
        serde_json::from_str(&to_json(py, o)?).map_err(|e| PyValueError::new_err(e.to_string()))
    };
    let report = pipeline::compare(&parse(a)?, &parse(b)?).map_err(err)?;
    to_py(py, serde_json::to_string(&report).map_err(|e| PyRuntimeError::new_err(e.to_string()))?)
}

#[pymodule]
fn flatsec_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProjectivePoint>()?;
    m.add_class::<PyKernelModel>()?;
    m.add_function(wrap_pyfunction!(monomials, m)?)?;
    m.add_function(wrap_pyfunction!(constants, m)?)?;
    m.add_function(wrap_pyfunction!(choose_spacing, m)?)?;
    m.add_function(wrap_pyfunction!(flat_bound, m)?)?;
    m.add_function(wrap_pyfunction!(fs_volume, m)?)?;
    m.add_function(wrap_pyfunction!(sup_norm, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(frame_points, m)?)?;
    m.add_function(wrap_pyfunction!(flat_family, m)?)?;
    m.add_function(wrap_pyfunction!(emit_polys, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add("__version__", pipeline::VERSION)?;
    Ok(())
}
