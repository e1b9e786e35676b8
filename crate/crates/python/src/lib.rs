//! Python bindings: Green tables, Wick sums, series coefficients and the
//! Monte Carlo driver.

use std::sync::Arc;

use lowt_core::algebra::{compile_spin_observable, Observable};
use lowt_core::engine::{closed_form_second_order, Expansion as CoreExpansion, ExpansionConfig, SeriesResult};
use lowt_core::green::{self as core_green, GreenTable as CoreTable};
use lowt_core::lattice::{Direction, Site, MAX_DIM};
use lowt_core::mc::{self, MCParams};
use lowt_core::wick::{self, Block, Leg};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyAny;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn site(coords: &[i32]) -> PyResult<Site> {
    if coords.is_empty() || coords.len() > MAX_DIM {
        return Err(value_err(format!("a site needs 1 to {MAX_DIM} coordinates")));
    }
    Ok(Site::new(coords))
}

/// A leg is either a coordinate list (`φ_x`) or a `(coords, axis)` pair
/// (`∇^e_x φ` with 0-based axis).
#[derive(FromPyObject)]
enum PyLeg {
    Bond((Vec<i32>, usize)),
    Site(Vec<i32>),
}

fn leg(l: PyLeg) -> PyResult<Leg> {
    Ok(match l {
        PyLeg::Site(c) => Leg::Site(site(&c)?),
        PyLeg::Bond((c, axis)) => {
            if axis >= c.len() {
                return Err(value_err(format!("axis {axis} out of range")));
            }
            Leg::Bond(site(&c)?, Direction::new(axis))
        }
    })
}

fn series_pairs(s: &SeriesResult) -> Vec<(f64, f64)> {
    s.coefficients.iter().map(|c| (c.value, c.uncertainty)).collect()
}

/// Lattice Green's function of `-Δ + m²` on the box `|x|_inf <= radius`.
#[pyclass(module = "lowt", frozen)]
struct GreenTable {
    inner: Arc<CoreTable>,
}

#[pymethods]
impl GreenTable {
    #[new]
    #[pyo3(signature = (dim, mass, radius, tol = 1e-10))]
    fn new(py: Python<'_>, dim: usize, mass: f64, radius: u32, tol: f64) -> PyResult<Self> {
        let t = py
            .detach(|| core_green::build_table(dim, mass, radius, tol))
            .map_err(value_err)?;
        Ok(GreenTable { inner: Arc::new(t) })
    }

    /// Read a table written by `save` or `lowt green`.
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let f = std::fs::File::open(path).map_err(runtime_err)?;
        let t = core_green::read_table(std::io::BufReader::new(f)).map_err(value_err)?;
        Ok(GreenTable { inner: Arc::new(t) })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        let f = std::fs::File::create(path).map_err(runtime_err)?;
        core_green::write_table(&self.inner, std::io::BufWriter::new(f)).map_err(runtime_err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn mass(&self) -> f64 {
        self.inner.mass()
    }

    #[getter]
    fn radius(&self) -> u32 {
        self.inner.radius()
    }

    /// `G(0, 0)`.
    fn origin_value(&self) -> f64 {
        self.inner.origin_value()
    }

    /// `G(0, x)`.
    fn get(&self, x: Vec<i32>) -> PyResult<f64> {
        if x.len() != self.inner.dim() {
            return Err(value_err("site dimension does not match the table"));
        }
        self.inner.get(&site(&x)?).map_err(value_err)
    }

    fn resolvent_residual(&self) -> f64 {
        self.inner.resolvent_residual()
    }

    /// `Σ_x G(0, x)` over the whole box.
    fn box_sum(&self) -> f64 {
        self.inner.full_box_sum()
    }

    fn __len__(&self) -> usize {
        self.inner.orbit_len()
    }

    fn __repr__(&self) -> String {
        format!(
            "GreenTable(dim={}, mass={}, radius={}, G00={})",
            self.inner.dim(),
            self.inner.mass(),
            self.inner.radius(),
            self.inner.origin_value()
        )
    }
}

/// `G(0,0)` of the massless Laplacian by momentum-space quadrature.
#[pyfunction]
#[pyo3(signature = (dim, tol = 1e-12))]
fn watson_constant(py: Python<'_>, dim: usize, tol: f64) -> PyResult<f64> {
    py.detach(|| core_green::watson_constant(dim, tol)).map_err(value_err)
}

/// Gaussian moment `E[Π legs]` with covariance from `table`.
#[pyfunction]
fn gaussian_moment(table: &GreenTable, legs: Vec<PyLeg>) -> PyResult<f64> {
    let legs: Vec<Leg> = legs.into_iter().map(leg).collect::<PyResult<_>>()?;
    wick::gaussian_moment(&table.inner, &legs).map_err(value_err)
}

/// Connected correlation of the products over each block of legs.
#[pyfunction]
fn connected_correlation(table: &GreenTable, blocks: Vec<Vec<PyLeg>>) -> PyResult<f64> {
    let blocks: Vec<Block> = blocks
        .into_iter()
        .map(|b| b.into_iter().map(leg).collect::<PyResult<Vec<_>>>().map(Block::new))
        .collect::<PyResult<_>>()?;
    wick::connected_correlation(&table.inner, &blocks).map_err(value_err)
}

/// Low-temperature expansion of O(N) spin correlations on a massless table.
#[pyclass(module = "lowt", frozen)]
struct Expansion {
    inner: CoreExpansion,
}

#[pymethods]
impl Expansion {
    #[new]
    #[pyo3(signature = (table, n_components, order, radius = 12, parallel = false))]
    fn new(table: &GreenTable, n_components: usize, order: usize, radius: i32, parallel: bool) -> PyResult<Self> {
        let mut cfg = ExpansionConfig::new(n_components, order, radius);
        cfg.parallel = parallel;
        let inner = CoreExpansion::new(table.inner.clone(), cfg).map_err(value_err)?;
        Ok(Expansion { inner })
    }

    /// Coefficients `[(a_i, uncertainty_i)]` of a spin observable given as
    /// JSON (a list of `{site, component, power}` factors). Defaults to the
    /// magnetization `S_0^N`.
    #[pyo3(signature = (observable = None, order = None))]
    fn coefficients(&self, py: Python<'_>, observable: Option<&str>, order: Option<usize>) -> PyResult<Vec<(f64, f64)>> {
        let cfg = self.inner.config();
        let dim = self.inner.table().dim();
        let order = order.unwrap_or(cfg.order);
        let obs = match observable {
            Some(text) => Observable::from_json(text).map_err(value_err)?,
            None => Observable::magnetization(dim, cfg.n_components),
        };
        let series = compile_spin_observable(&obs, order, cfg.n_components, dim).map_err(value_err)?;
        let result = py
            .detach(|| self.inner.evaluate_series(&series, order))
            .map_err(value_err)?;
        Ok(series_pairs(&result))
    }
}

/// Closed-form `a_0, a_1, a_2` of the magnetization, with the box sum
/// truncated at `radius`.
#[pyfunction]
#[pyo3(name = "closed_form_second_order")]
fn closed_form_second_order_py(table: &GreenTable, n_components: usize, radius: i32) -> PyResult<Vec<(f64, f64)>> {
    closed_form_second_order(&table.inner, n_components, radius)
        .map(|s| series_pairs(&s))
        .map_err(value_err)
}

/// Magnetization coefficients `a_0, a_1, a_2` on the periodic `L^d` torus.
#[pyfunction]
fn torus_series(dim: usize, l: usize, n_components: usize) -> Vec<f64> {
    mc::torus_series(dim, l, n_components).values()
}

/// Run a Monte Carlo simulation and return the result as a dict.
#[pyfunction]
#[pyo3(signature = (dim, n_components, l, temperature, sweeps, seed = 0, h = 0.0, thermalization = None,
                    measure_every = 1, algorithm = "heatbath", overrelax = 1))]
#[allow(clippy::too_many_arguments)]
fn simulate<'py>(
    py: Python<'py>,
    dim: usize,
    n_components: usize,
    l: usize,
    temperature: f64,
    sweeps: usize,
    seed: u64,
    h: f64,
    thermalization: Option<usize>,
    measure_every: usize,
    algorithm: &str,
    overrelax: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let mut p = MCParams::new(dim, n_components, l, temperature, sweeps);
    p.seed = seed;
    p.h = h;
    if let Some(t) = thermalization {
        p.thermalization = t;
    }
    p.measure_every = measure_every;
    p.overrelax = overrelax;
    p.algorithm = serde_json::from_value(serde_json::Value::String(algorithm.into())).map_err(value_err)?;
    let result = py.detach(|| mc::run_simulation(&p)).map_err(value_err)?;
    let text = serde_json::to_string(&result).map_err(runtime_err)?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pymodule]
fn lowt(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<GreenTable>()?;
    m.add_class::<Expansion>()?;
    m.add_function(wrap_pyfunction!(watson_constant, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_moment, m)?)?;
    m.add_function(wrap_pyfunction!(connected_correlation, m)?)?;
    m.add_function(wrap_pyfunction!(closed_form_second_order_py, m)?)?;
    m.add_function(wrap_pyfunction!(torus_series, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
