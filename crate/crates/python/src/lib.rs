//! Python bindings: lattice configuration, certified point values, tables and the two
//! applications. Errors surface as `ValueError`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use lgf_core::apps::periodic3d::{convergence_study, lgf3d_periodic, Periodic3DConfig};
use lgf_core::apps::randomwalk::{kappa_rw, mc_simulate, return_probability, WalkParams};
use lgf_core::{LatticePoint, LgfError, MethodChoice, Tolerance};

fn py_err(e: LgfError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn tol(eps: f64) -> PyResult<Tolerance> {
    Tolerance::new(eps).map_err(py_err)
}

/// Anisotropy `alpha1` in (0, 1] and screening `c2 > 0`.
#[pyclass(name = "LatticeConfig", module = "lgf", frozen)]
struct PyLatticeConfig {
    inner: lgf_core::LatticeConfig,
}

#[pymethods]
impl PyLatticeConfig {
    #[new]
    #[pyo3(signature = (alpha1, c2))]
    fn new(alpha1: f64, c2: f64) -> PyResult<Self> {
        let inner = lgf_core::LatticeConfig::new(alpha1, c2).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_c(alpha1: f64, c: f64) -> PyResult<Self> {
        let inner = lgf_core::LatticeConfig::from_c(alpha1, c).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn alpha1(&self) -> f64 {
        self.inner.alpha1()
    }

    #[getter]
    fn c2(&self) -> f64 {
        self.inner.c2()
    }

    #[getter]
    fn c(&self) -> f64 {
        self.inner.c()
    }

    #[getter]
    fn lambda_(&self) -> f64 {
        self.inner.lambda()
    }

    /// `B_c(n, m)` to absolute tolerance `eps`.
    #[pyo3(signature = (n, m, eps = 1e-10))]
    fn evaluate(&self, n: i64, m: i64, eps: f64) -> PyResult<Evaluation> {
        let e = lgf_core::evaluate(&self.inner, LatticePoint::new(n, m), tol(eps)?);
        Ok(Evaluation::new(e.value, e.choice))
    }

    /// Values on `[0, n_max] x [0, m_max]`.
    #[pyo3(signature = (n_max, m_max, eps = 1e-10))]
    fn tabulate(&self, n_max: usize, m_max: usize, eps: f64) -> PyResult<LgfTable> {
        let t = lgf_core::tabulate(&self.inner, tol(eps)?, n_max, m_max).map_err(py_err)?;
        Ok(LgfTable { inner: t })
    }

    /// `N_ap`: closed-form trapezoid node count for indices up to `n_max`.
    #[pyo3(signature = (eps, n_max = 0, delta = 0.01))]
    fn n_quad_points(&self, eps: f64, n_max: usize, delta: f64) -> PyResult<usize> {
        lgf_core::n_quad_points(&self.inner, tol(eps)?, n_max, delta).map_err(py_err)
    }

    /// `N_opt`: node count minimized over the strip parameter.
    fn n_opt_scan(&self, eps: f64) -> PyResult<usize> {
        Ok(lgf_core::n_opt_scan(&self.inner, tol(eps)?))
    }

    /// Plain trapezoid rule with `n_pts` nodes over the full period.
    fn trapezoid(&self, n: i64, m: i64, n_pts: usize) -> f64 {
        lgf_core::trapezoid_eval(&self.inner, LatticePoint::new(n, m), n_pts)
    }

    /// Partial sum of the random-walk series with `n_terms` terms.
    fn series(&self, n: i64, m: i64, n_terms: usize) -> f64 {
        let plan = lgf_core::SeriesPlan::new(&self.inner, n_terms);
        lgf_core::series_eval(&self.inner, LatticePoint::new(n, m), &plan)
    }

    fn __repr__(&self) -> String {
        format!("LatticeConfig(alpha1={:?}, c2={:?})", self.inner.alpha1(), self.inner.c2())
    }
}

/// A value with the method and certificate that produced it.
#[pyclass(module = "lgf", frozen, get_all)]
struct Evaluation {
    value: f64,
    method: String,
    certificate: f64,
    resolution: usize,
}

impl Evaluation {
    fn new(value: f64, choice: MethodChoice) -> Self {
        Self {
            value,
            method: choice.method.to_string(),
            certificate: choice.certificate,
            resolution: choice.resolution,
        }
    }
}

#[pymethods]
impl Evaluation {
    fn __repr__(&self) -> String {
        format!(
            "Evaluation(value={:?}, method={:?}, certificate={:?}, resolution={})",
            self.value, self.method, self.certificate, self.resolution
        )
    }
}

#[pyclass(module = "lgf", frozen)]
struct LgfTable {
    inner: lgf_core::LgfTable,
}

#[pymethods]
impl LgfTable {
    /// `rows[m][n]`.
    #[getter]
    fn rows(&self) -> Vec<Vec<f64>> {
        self.inner.rows().to_vec()
    }

    #[getter]
    fn method(&self) -> String {
        self.inner.method.method.to_string()
    }

    #[getter]
    fn certificate(&self) -> f64 {
        self.inner.method.certificate
    }

    #[getter]
    fn resolution(&self) -> usize {
        self.inner.method.resolution
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.inner.m_max() + 1, self.inner.n_max() + 1)
    }

    /// Value at any `(n, m)` whose canonical image lies in the table.
    fn get(&self, n: i64, m: i64) -> PyResult<f64> {
        self.inner
            .get(LatticePoint::new(n, m))
            .ok_or_else(|| PyValueError::new_err(format!("({n}, {m}) lies outside the table")))
    }
}

/// Walk stepping left/right with `p1` each and down/up with `p2` each.
#[pyclass(name = "WalkParams", module = "lgf", frozen)]
struct PyWalkParams {
    inner: WalkParams,
}

#[pymethods]
impl PyWalkParams {
    #[new]
    fn new(p1: f64, p2: f64) -> PyResult<Self> {
        Ok(Self { inner: WalkParams::new(p1, p2).map_err(py_err)? })
    }

    #[staticmethod]
    fn family(pk: f64) -> PyResult<Self> {
        Ok(Self { inner: WalkParams::family(pk).map_err(py_err)? })
    }

    #[getter]
    fn pk(&self) -> f64 {
        self.inner.pk()
    }

    #[getter]
    fn kappa(&self) -> f64 {
        kappa_rw(&self.inner)
    }

    /// Probability of ever reaching the origin from each `(n, m)`.
    #[pyo3(signature = (points, eps = 1e-12))]
    fn return_probability(&self, points: Vec<(i64, i64)>, eps: f64) -> PyResult<Vec<f64>> {
        let pts: Vec<LatticePoint> = points.iter().map(|&(n, m)| LatticePoint::new(n, m)).collect();
        let rho = return_probability(&self.inner, &pts, tol(eps)?).map_err(py_err)?;
        Ok(rho.into_iter().map(|(_, r)| r).collect())
    }

    /// Monte Carlo estimate and standard error.
    #[pyo3(signature = (n, m, trials, seed = 0))]
    fn simulate(&self, n: i64, m: i64, trials: u64, seed: u64) -> PyResult<(f64, f64)> {
        if trials == 0 {
            return Err(PyValueError::new_err("trials must be positive"));
        }
        Ok(mc_simulate(&self.inner, LatticePoint::new(n, m), trials, seed))
    }
}

/// Periodic-in-z 3D lattice Green's function at `(n1, n2, n3)`.
#[pyfunction]
#[pyo3(signature = (n1, n2, n3, dx, n_p, eps = 1e-10))]
fn lgf3d(n1: i64, n2: i64, n3: i64, dx: (f64, f64, f64), n_p: usize, eps: f64) -> PyResult<f64> {
    let cfg = Periodic3DConfig::new(dx.0, dx.1, dx.2, n_p).map_err(py_err)?;
    lgf3d_periodic((n1, n2, n3), &cfg, tol(eps)?).map_err(py_err)
}

/// `(slope, [(n_p, max_error), ...])` of the 3D solver on its test problem.
#[pyfunction]
#[pyo3(signature = (aspect, periods, eps = 1e-10))]
fn convergence(aspect: f64, periods: Vec<usize>, eps: f64) -> PyResult<(f64, Vec<(usize, f64)>)> {
    let study = convergence_study(aspect, &periods, tol(eps)?).map_err(py_err)?;
    Ok((study.slope, study.levels.iter().map(|l| (l.n_p, l.max_error)).collect()))
}

#[pymodule]
fn lgf(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLatticeConfig>()?;
    m.add_class::<Evaluation>()?;
    m.add_class::<LgfTable>()?;
    m.add_class::<PyWalkParams>()?;
    m.add_function(wrap_pyfunction!(lgf3d, m)?)?;
    m.add_function(wrap_pyfunction!(convergence, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
