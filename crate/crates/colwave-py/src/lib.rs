//! Python bindings: the main types and operations of the ε-net wave
//! laboratory, thin wrappers over the `colwave` crate.

use std::collections::BTreeMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use colwave::grid::{EpsGrid, Mesh, SpaceAxis, TimeAxis};
use colwave::nets;
use colwave::riesz::{self, hadamard, ConeSign, PairOptions, RieszParams};
use colwave::scenario::{self, Overrides};
use colwave::solver::{self, CauchyData, SolveOptions};
use colwave::spacetime;
use colwave::testfn;

fn err(e: colwave::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Strictly decreasing regularization grid ε ∈ (0, 1].
#[pyclass(name = "EpsGrid")]
struct PyEpsGrid {
    inner: EpsGrid,
}

#[pymethods]
impl PyEpsGrid {
    /// Geometric grid e0 · ratio^k, k = 0..count.
    #[new]
    #[pyo3(signature = (e0, count, ratio = 0.5))]
    fn new(e0: f64, count: usize, ratio: f64) -> PyResult<Self> {
        Ok(PyEpsGrid {
            inner: EpsGrid::with_ratio(e0, ratio, count).map_err(err)?,
        })
    }

    fn values(&self) -> Vec<f64> {
        self.inner.values().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("EpsGrid({:?})", self.inner.values())
    }
}

/// Smooth compactly supported test function (Gaussian-bump family).
#[pyclass(name = "TestFunction")]
struct PyTestFunction {
    inner: testfn::TestFunction,
}

#[pymethods]
impl PyTestFunction {
    /// Gaussian bump A·exp(−|x−c|²/2w²) truncated below double precision.
    #[staticmethod]
    #[pyo3(signature = (center, width, amplitude = 1.0))]
    fn gaussian(center: Vec<f64>, width: f64, amplitude: f64) -> PyResult<Self> {
        Ok(PyTestFunction {
            inner: testfn::TestFunction::gaussian(center, width, amplitude).map_err(err)?,
        })
    }

    /// Classical bump A·exp(−1/(1−s²)).
    #[staticmethod]
    #[pyo3(signature = (center, radius, amplitude = 1.0))]
    fn bump(center: Vec<f64>, radius: f64, amplitude: f64) -> PyResult<Self> {
        Ok(PyTestFunction {
            inner: testfn::TestFunction::bump(center, radius, amplitude).map_err(err)?,
        })
    }

    fn eval(&self, x: Vec<f64>) -> f64 {
        self.inner.eval(&x)
    }

    fn support_box(&self) -> Vec<(f64, f64)> {
        self.inner
            .support_box()
            .into_iter()
            .map(|[a, b]| (a, b))
            .collect()
    }
}

/// Least-squares fit of log(sup) against log(1/ε); returns
/// (exponent, residual).
#[pyfunction]
fn estimate_order(sup_values: Vec<f64>, grid: &PyEpsGrid) -> PyResult<(f64, f64)> {
    let est = nets::estimate_order(&sup_values, &grid.inner).map_err(err)?;
    Ok((est.exponent, est.residual))
}

/// The Riesz normalization constant C(α, n).
#[pyfunction]
fn riesz_constant(alpha: f64, n: usize) -> f64 {
    riesz::riesz_constant(alpha, n)
}

/// Pairing ⟨R_±(α), φ⟩ on the n-dimensional Lorentz vector space.
#[pyfunction]
#[pyo3(signature = (alpha, n, phi, advanced = true))]
fn riesz_pair(alpha: f64, n: usize, phi: &PyTestFunction, advanced: bool) -> PyResult<f64> {
    let sign = if advanced {
        ConeSign::Advanced
    } else {
        ConeSign::Retarded
    };
    let params = RieszParams::new(alpha, n, sign).map_err(err)?;
    riesz::riesz_pair(&params, &phi.inner, &PairOptions::default()).map_err(err)
}

/// Max deviation of □R(α+2) = R(α) over the built-in battery.
#[pyfunction]
fn riesz_recursion_deviation(alpha: f64, n: usize) -> PyResult<f64> {
    let battery = scenario::riesz_battery(n).map_err(err)?;
    let rep = riesz::verify_recursion(alpha, n, ConeSign::Advanced, &battery, &PairOptions::default())
        .map_err(err)?;
    Ok(rep.max_deviation)
}

/// Worst |V⁰ − 1| along flat radial geodesics of the given radius.
#[pyfunction]
#[pyo3(signature = (spacetime_dim, radius = 0.5))]
fn hadamard_flat_deviation(spacetime_dim: usize, radius: f64) -> PyResult<f64> {
    let m = hadamard::Minkowski { dim: spacetime_dim };
    let mut dirs = vec![vec![0.0; spacetime_dim], vec![0.0; spacetime_dim]];
    dirs[0][0] = 1.0;
    dirs[1][spacetime_dim - 1] = 1.0;
    let rays = hadamard::hadamard_v0(
        &m,
        &vec![0.0; spacetime_dim],
        &dirs,
        radius,
        &hadamard::HadamardOptions::default(),
    )
    .map_err(err)?;
    Ok(rays
        .iter()
        .flat_map(|r| r.samples.iter())
        .fold(0.0f64, |acc, (_, v)| acc.max((v - 1.0).abs())))
}

/// d'Alembert solution for sampled 1-d data on a torus of the given extent.
#[pyfunction]
fn dalembert_oracle(
    u0: Vec<f64>,
    u1: Vec<f64>,
    extent: f64,
    t: f64,
    x: f64,
    c: f64,
) -> PyResult<f64> {
    let mesh = Mesh::torus_1d(extent, u0.len());
    solver::dalembert_oracle(&u0, &u1, &mesh, t, x, c).map_err(err)
}

/// Embed a point mass by mollification and pair each ε member with φ.
#[pyfunction]
fn embed_delta_and_pair(
    x0: f64,
    extent: f64,
    resolution: usize,
    grid: &PyEpsGrid,
    phi: &PyTestFunction,
) -> PyResult<Vec<f64>> {
    let mesh = Mesh::torus_1d(extent, resolution);
    let net = nets::mollifier_embed(&nets::DistTarget::Delta { x0: vec![x0] }, &grid.inner, &mesh)
        .map_err(err)?;
    nets::pair(&net, &phi.inner).map_err(err)
}

/// Solve the flat standing wave and return the worst L∞ error against the
/// closed form over all ε members.
#[pyfunction]
#[pyo3(signature = (resolution = 512, t_final = 1.0))]
fn standing_wave_error(resolution: usize, t_final: f64) -> PyResult<f64> {
    let grid = EpsGrid::geometric(0.2, 4).map_err(err)?;
    let mesh = Mesh::space_time(
        TimeAxis {
            t0: 0.0,
            t1: t_final,
            n: 9,
        },
        vec![SpaceAxis {
            extent: 2.0 * std::f64::consts::PI,
            n: resolution,
        }],
    )
    .map_err(err)?;
    let g = spacetime::make_minkowski(&mesh, &grid).map_err(err)?;
    let s = mesh.spatial_part();
    let u0 = nets::ScalarNet::from_fn(grid.clone(), s.clone(), |_, x| x[0].sin()).map_err(err)?;
    let u1 = nets::ScalarNet::from_fn(grid.clone(), s, |_, _| 0.0).map_err(err)?;
    let data = CauchyData::new(u0, u1).map_err(err)?;
    let sol = solver::solve(&g, &data, t_final, &SolveOptions::default()).map_err(err)?;
    let slice = sol.slice_net(t_final).map_err(err)?;
    let mut worst = 0.0f64;
    for k in 0..grid.len() {
        for i in 0..sol.spatial_mesh.space_len() {
            let x = sol.spatial_mesh.space_coords(i)[0];
            worst = worst.max((slice.sample(k)[i] - x.sin() * t_final.cos()).abs());
        }
    }
    Ok(worst)
}

/// Run a shipped (or file-based) scenario; returns its verdict map.
#[pyfunction]
#[pyo3(signature = (name, eps_count = None, resolution = None))]
fn run_scenario(
    name: &str,
    eps_count: Option<usize>,
    resolution: Option<usize>,
) -> PyResult<BTreeMap<String, bool>> {
    let mut sc = scenario::load_scenario(name).map_err(err)?;
    sc.apply_overrides(&Overrides {
        eps_count,
        resolution,
    });
    sc.validate().map_err(err)?;
    let report = scenario::run_scenario(&sc, None).map_err(err)?;
    Ok(report.verdicts)
}

/// Names and descriptions of the shipped scenarios.
#[pyfunction]
fn list_scenarios() -> Vec<(String, String)> {
    scenario::list_scenarios()
}

#[pymodule]
fn colwave_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyEpsGrid>()?;
    m.add_class::<PyTestFunction>()?;
    m.add_function(wrap_pyfunction!(estimate_order, m)?)?;
    m.add_function(wrap_pyfunction!(riesz_constant, m)?)?;
    m.add_function(wrap_pyfunction!(riesz_pair, m)?)?;
    m.add_function(wrap_pyfunction!(riesz_recursion_deviation, m)?)?;
    m.add_function(wrap_pyfunction!(hadamard_flat_deviation, m)?)?;
    m.add_function(wrap_pyfunction!(dalembert_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(embed_delta_and_pair, m)?)?;
    m.add_function(wrap_pyfunction!(standing_wave_error, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(list_scenarios, m)?)?;
    Ok(())
}
