//! Python bindings for orientation repair.
//!
//! Usage from Python:
//!
//! ```python
//! import gwn_orient_py as g
//! mesh = g.Mesh.load("shape.poly2d")
//! parts = g.Decomposition(mesh)
//! q = g.InteractionMatrix.assemble(mesh, parts)
//! best = g.brute_force(q)
//! fixed = parts.apply_signs(mesh, best.signs)
//! ```

use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyIOError, PyIndexError};
use pyo3::prelude::*;
use pyo3::types::PyBytes;

use gwn_orient::energy::{self, QEntry};
use gwn_orient::field::{self, ScalarGrid};
use gwn_orient::io::{self, MeshFormat};
use gwn_orient::{fixtures, solver, winding};
use gwn_orient::{Error, PatchDecomposition, QMatrix, QuadratureConfig, SignAssignment, SurfaceMesh};

create_exception!(gwn_orient_py, OrientError, PyException, "Raised for any orientation-repair failure.");

fn to_py(err: Error) -> PyErr {
    match err {
        Error::Io { .. } => PyIOError::new_err(err.to_string()),
        Error::IndexOutOfRange { .. } => PyIndexError::new_err(err.to_string()),
        _ => OrientError::new_err(err.to_string()),
    }
}

trait OrPy<T> {
    fn py_err(self) -> PyResult<T>;
}

impl<T> OrPy<T> for gwn_orient::Result<T> {
    fn py_err(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

fn signs(values: Vec<i64>) -> PyResult<SignAssignment> {
    SignAssignment::new(values).py_err()
}

fn format(name: Option<&str>, path: &std::path::Path) -> PyResult<MeshFormat> {
    match name {
        Some(n) => n.parse().py_err(),
        None => Ok(MeshFormat::from_path(path)),
    }
}

/// A 2D polyline or 3D triangle mesh. Facet orientation is the vertex order.
#[pyclass(name = "Mesh", module = "gwn_orient_py", from_py_object)]
#[derive(Clone)]
pub struct PyMesh {
    inner: SurfaceMesh,
}

#[pymethods]
impl PyMesh {
    #[staticmethod]
    fn polyline(vertices: Vec<[f64; 2]>, segments: Vec<[usize; 2]>) -> PyResult<Self> {
        Ok(Self { inner: SurfaceMesh::polyline(&vertices, &segments).py_err()? })
    }

    #[staticmethod]
    fn triangles(vertices: Vec<[f64; 3]>, triangles: Vec<[usize; 3]>) -> PyResult<Self> {
        Ok(Self { inner: SurfaceMesh::triangles(&vertices, &triangles).py_err()? })
    }

    /// Reads a `.obj` or `.poly2d` file; `format` overrides the extension.
    #[staticmethod]
    #[pyo3(signature = (path, format=None))]
    fn load(path: PathBuf, format: Option<&str>) -> PyResult<Self> {
        let fmt = self::format(format, &path)?;
        Ok(Self { inner: io::load_mesh(&path, fmt).py_err()? })
    }

    #[staticmethod]
    fn parse(text: &str, format: &str) -> PyResult<Self> {
        Ok(Self { inner: io::parse_mesh(text, format.parse().py_err()?).py_err()? })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        io::save_mesh(&self.inner, path).py_err()
    }

    fn to_text(&self) -> String {
        io::format_mesh(&self.inner)
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.inner.dimension().as_usize()
    }

    #[getter]
    fn num_vertices(&self) -> usize {
        self.inner.num_vertices()
    }

    #[getter]
    fn num_facets(&self) -> usize {
        self.inner.num_facets()
    }

    fn vertices(&self) -> Vec<Vec<f64>> {
        let d = self.dimension();
        self.inner.vertices().iter().map(|v| v.as_slice()[..d].to_vec()).collect()
    }

    fn facets(&self) -> Vec<Vec<usize>> {
        self.inner.facets().map(<[usize]>::to_vec).collect()
    }

    fn flip_facet(&self, i: usize) -> PyResult<Self> {
        Ok(Self { inner: self.inner.flip_facet(i).py_err()? })
    }

    fn __len__(&self) -> usize {
        self.inner.num_facets()
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!(
            "Mesh(dimension={}, vertices={}, facets={})",
            self.dimension(),
            self.inner.num_vertices(),
            self.inner.num_facets()
        )
    }

    #[staticmethod]
    fn unit_square() -> Self {
        Self { inner: fixtures::unit_square() }
    }

    #[staticmethod]
    fn unit_cube() -> Self {
        Self { inner: fixtures::unit_cube() }
    }

    #[staticmethod]
    #[pyo3(signature = (arcs, segments_per_arc, radius=1.0, gap_fraction=0.2))]
    fn gapped_circle(arcs: usize, segments_per_arc: usize, radius: f64, gap_fraction: f64) -> Self {
        Self { inner: fixtures::gapped_circle(arcs, segments_per_arc, radius, gap_fraction) }
    }

    #[staticmethod]
    #[pyo3(signature = (arcs, segments_per_arc, radius=1.0))]
    fn split_circle(arcs: usize, segments_per_arc: usize, radius: f64) -> Self {
        Self { inner: fixtures::split_circle(arcs, segments_per_arc, radius) }
    }

    #[staticmethod]
    fn torso_with_attachments() -> Self {
        Self { inner: fixtures::torso_with_attachments() }
    }

    /// Copy with each facet flipped independently with `probability`.
    fn scrambled(&self, seed: u64, probability: f64) -> Self {
        Self { inner: fixtures::randomly_flipped(&self.inner, seed, probability) }
    }
}

/// Maximal consistently-orientable patches of a mesh.
#[pyclass(name = "Decomposition", module = "gwn_orient_py")]
pub struct PyDecomposition {
    inner: PatchDecomposition,
}

#[pymethods]
impl PyDecomposition {
    #[new]
    fn new(mesh: &PyMesh) -> PyResult<Self> {
        Ok(Self { inner: gwn_orient::extract_patches(&mesh.inner).py_err()? })
    }

    #[getter]
    fn num_patches(&self) -> usize {
        self.inner.num_patches()
    }

    fn patch_of(&self, facet: usize) -> PyResult<usize> {
        let n = self.inner.num_facets();
        if facet >= n {
            return Err(to_py(Error::IndexOutOfRange { index: facet, len: n }));
        }
        Ok(self.inner.patch_of(facet))
    }

    fn patches(&self) -> Vec<Vec<usize>> {
        self.inner.patches.iter().map(|p| p.facets.clone()).collect()
    }

    /// Patch summary as a JSON string.
    fn report(&self) -> String {
        serde_json::to_string(&self.inner.report()).expect("report serializes")
    }

    fn reference_mesh(&self, mesh: &PyMesh) -> PyMesh {
        PyMesh { inner: self.inner.reference_mesh(&mesh.inner) }
    }

    fn apply_signs(&self, mesh: &PyMesh, signs: Vec<i64>) -> PyResult<PyMesh> {
        let s = self::signs(signs)?;
        Ok(PyMesh { inner: gwn_orient::apply_signs(&mesh.inner, &self.inner, &s).py_err()? })
    }

    fn winding_number(&self, mesh: &PyMesh, signs: Vec<i64>, point: Vec<f64>) -> PyResult<f64> {
        let p = point_from(&point)?;
        winding::winding_number(&mesh.inner, &self.inner, &self::signs(signs)?, &p).py_err()
    }

    fn winding_gradient(&self, mesh: &PyMesh, signs: Vec<i64>, point: Vec<f64>) -> PyResult<Vec<f64>> {
        let p = point_from(&point)?;
        let g = winding::winding_gradient(&mesh.inner, &self.inner, &self::signs(signs)?, &p).py_err()?;
        Ok(g.as_slice()[..mesh.inner.dimension().as_usize()].to_vec())
    }

    fn __repr__(&self) -> String {
        format!("Decomposition(num_patches={})", self.inner.num_patches())
    }
}

fn point_from(coords: &[f64]) -> PyResult<gwn_orient::Vec3> {
    match coords.len() {
        2 | 3 => Ok(winding::point(coords)),
        n => Err(to_py(Error::Config(format!("points need 2 or 3 coordinates, got {n}")))),
    }
}

/// Pairwise patch interactions. Divergent entries read as `±inf`.
#[pyclass(name = "InteractionMatrix", module = "gwn_orient_py")]
pub struct PyQMatrix {
    inner: QMatrix,
}

#[pymethods]
impl PyQMatrix {
    #[staticmethod]
    #[pyo3(signature = (mesh, decomposition, base_points=6, refinement_levels=8, convergence_tol=1e-4, divergence_threshold=1e6))]
    fn assemble(
        py: Python<'_>,
        mesh: &PyMesh,
        decomposition: &PyDecomposition,
        base_points: usize,
        refinement_levels: usize,
        convergence_tol: f64,
        divergence_threshold: f64,
    ) -> PyResult<Self> {
        let cfg = QuadratureConfig {
            base_points,
            refinement_levels,
            convergence_tol,
            divergence_threshold,
        };
        let q = py.detach(|| energy::assemble_q(&mesh.inner, &decomposition.inner, &cfg)).py_err()?;
        Ok(Self { inner: q })
    }

    /// Builds a matrix from finite values; only the upper triangle is read.
    #[staticmethod]
    fn from_dense(values: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(Self { inner: QMatrix::from_dense(&values).py_err()? })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn get(&self, i: usize, j: usize) -> PyResult<f64> {
        let n = self.inner.n();
        for index in [i, j] {
            if index >= n {
                return Err(to_py(Error::IndexOutOfRange { index, len: n }));
            }
        }
        Ok(match self.inner.get(i, j) {
            QEntry::Finite(v) => v,
            QEntry::Divergent(s) => f64::from(s) * f64::INFINITY,
        })
    }

    fn is_divergent(&self, i: usize, j: usize) -> PyResult<bool> {
        Ok(self.get(i, j)?.is_infinite())
    }

    #[getter]
    fn big_m(&self) -> f64 {
        self.inner.big_m()
    }

    #[getter]
    fn divergent_count(&self) -> usize {
        self.inner.divergent_count()
    }

    /// Dense couplings with divergent entries replaced by `±big_m`.
    fn couplings(&self) -> Vec<Vec<f64>> {
        let n = self.inner.n();
        self.inner.couplings().chunks(n.max(1)).map(<[f64]>::to_vec).collect()
    }

    fn energy(&self, signs: Vec<i64>) -> PyResult<f64> {
        energy::energy(&self.inner, &self::signs(signs)?).py_err()
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner.rows()).expect("matrix serializes")
    }

    fn __repr__(&self) -> String {
        format!("InteractionMatrix(n={}, divergent={})", self.inner.n(), self.inner.divergent_count())
    }
}

#[pyclass(name = "Solution", module = "gwn_orient_py", get_all)]
pub struct PySolution {
    signs: Vec<i64>,
    energy: f64,
    method: String,
    evaluations: u64,
}

impl From<gwn_orient::SolveResult> for PySolution {
    fn from(r: gwn_orient::SolveResult) -> Self {
        Self {
            signs: r.signs.to_vec(),
            energy: r.energy,
            method: r.method.to_string(),
            evaluations: r.evaluations,
        }
    }
}

#[pymethods]
impl PySolution {
    fn __repr__(&self) -> String {
        format!("Solution(signs={:?}, energy={}, method='{}')", self.signs, self.energy, self.method)
    }
}

/// Exact minimizer by exhaustive enumeration.
#[pyfunction]
fn brute_force(py: Python<'_>, q: &PyQMatrix) -> PyResult<PySolution> {
    Ok(py.detach(|| solver::brute_force(&q.inner)).py_err()?.into())
}

/// Seeded multi-start single-flip descent.
#[pyfunction]
#[pyo3(signature = (q, restarts, seed=0))]
fn local_search(py: Python<'_>, q: &PyQMatrix, restarts: usize, seed: u64) -> PyResult<PySolution> {
    Ok(py.detach(|| solver::local_search(&q.inner, restarts, seed)).py_err()?.into())
}

/// Cell-centred samples of the winding number. Masked cells read as `None`.
#[pyclass(name = "Grid", module = "gwn_orient_py")]
pub struct PyGrid {
    inner: ScalarGrid,
}

#[pymethods]
impl PyGrid {
    #[getter]
    fn counts(&self) -> Vec<usize> {
        self.inner.counts.clone()
    }

    #[getter]
    fn origin(&self) -> Vec<f64> {
        self.inner.origin.clone()
    }

    #[getter]
    fn spacing(&self) -> f64 {
        self.inner.spacing
    }

    #[getter]
    fn masked_count(&self) -> usize {
        self.inner.masked_count()
    }

    /// Flat x-fastest values.
    fn values(&self) -> Vec<Option<f64>> {
        self.inner
            .values
            .iter()
            .zip(&self.inner.mask)
            .map(|(&v, &m)| (!m).then_some(v))
            .collect()
    }

    /// Binary PPM image (2D grids only).
    #[pyo3(signature = (clamp_min=-0.25, clamp_max=1.25))]
    fn render<'py>(&self, py: Python<'py>, clamp_min: f64, clamp_max: f64) -> PyResult<Bound<'py, PyBytes>> {
        let bytes = field::render(&self.inner, clamp_min, clamp_max).py_err()?;
        Ok(PyBytes::new(py, &bytes))
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }
}

#[pyfunction]
#[pyo3(signature = (mesh, decomposition, signs, resolution=256, margin=1.5))]
fn sample_field(
    py: Python<'_>,
    mesh: &PyMesh,
    decomposition: &PyDecomposition,
    signs: Vec<i64>,
    resolution: usize,
    margin: f64,
) -> PyResult<PyGrid> {
    let s = self::signs(signs)?;
    let grid = py
        .detach(|| field::sample_field(&mesh.inner, &decomposition.inner, &s, resolution, margin))
        .py_err()?;
    Ok(PyGrid { inner: grid })
}

#[pymodule]
fn gwn_orient_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("OrientError", m.py().get_type::<OrientError>())?;
    m.add("BRUTE_FORCE_LIMIT", solver::BRUTE_FORCE_LIMIT)?;
    m.add_class::<PyMesh>()?;
    m.add_class::<PyDecomposition>()?;
    m.add_class::<PyQMatrix>()?;
    m.add_class::<PySolution>()?;
    m.add_class::<PyGrid>()?;
    m.add_function(wrap_pyfunction!(brute_force, m)?)?;
    m.add_function(wrap_pyfunction!(local_search, m)?)?;
    m.add_function(wrap_pyfunction!(sample_field, m)?)?;
    Ok(())
}
