//! Python bindings: rotor layouts and their wrench-set metrics, the tilt
//! optimizer, SE(3) helpers and the closed-loop simulator.

use hexarotor::analysis::{ForceMeasure, WrenchSetMetrics};
use hexarotor::config::Config;
use hexarotor::optimize::{optimize_tilt, OptimizerSettings};
use hexarotor::se3::{adjoint_group, exp_se3, Pose, Twist};
use hexarotor::sim::{run, RunStatus, SimLog};
use hexarotor::vehicle::{allocation_matrix, RotorLayout, ALTERNATING_SPIN};
use nalgebra::{Matrix4, Vector6};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(pyhexarotor, HexarotorError, PyException);

fn to_py(e: hexarotor::Error) -> PyErr {
    HexarotorError::new_err(e.to_string())
}

fn measure(name: &str) -> PyResult<ForceMeasure> {
    name.parse().map_err(PyValueError::new_err)
}

fn rows<const R: usize, const C: usize>(m: &nalgebra::SMatrix<f64, R, C>) -> Vec<Vec<f64>> {
    (0..R).map(|i| (0..C).map(|j| m[(i, j)]).collect()).collect()
}

/// Six rotors on a planar hexagon with tilt angles `alpha`, `beta` in degrees.
#[pyclass(name = "RotorLayout", frozen)]
struct PyRotorLayout {
    inner: RotorLayout,
}

#[pymethods]
impl PyRotorLayout {
    #[new]
    #[pyo3(signature = (alpha_deg, beta_deg = 0.0, arm_length = 1.0, max_thrust = 1.0, drag_ratio = 0.0))]
    fn new(alpha_deg: f64, beta_deg: f64, arm_length: f64, max_thrust: f64, drag_ratio: f64) -> PyResult<Self> {
        let inner = RotorLayout::with_all(
            arm_length,
            drag_ratio,
            max_thrust,
            ALTERNATING_SPIN,
            alpha_deg.to_radians(),
            beta_deg.to_radians(),
        )
        .map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn alpha_deg(&self) -> f64 {
        self.inner.alpha().to_degrees()
    }

    #[getter]
    fn beta_deg(&self) -> f64 {
        self.inner.beta().to_degrees()
    }

    #[getter]
    fn arm_length(&self) -> f64 {
        self.inner.arm_length()
    }

    #[getter]
    fn max_thrust(&self) -> f64 {
        self.inner.max_thrust()
    }

    #[getter]
    fn drag_ratio(&self) -> f64 {
        self.inner.drag_ratio()
    }

    /// 6×6 map from rotor thrusts to the body wrench `[τ; f]`, as nested lists.
    fn allocation_matrix(&self) -> Vec<Vec<f64>> {
        rows(allocation_matrix(&self.inner).matrix())
    }

    fn allocation_rank(&self) -> usize {
        allocation_matrix(&self.inner).rank()
    }

    /// `(f_min, t_min)` under the given force measure.
    #[pyo3(signature = (force_measure = "inscribed"))]
    fn metrics(&self, force_measure: &str) -> PyResult<(f64, f64)> {
        let m = WrenchSetMetrics::measured(&self.inner, measure(force_measure)?).map_err(to_py)?;
        Ok((m.f_min, m.t_min))
    }

    fn __repr__(&self) -> String {
        format!(
            "RotorLayout(alpha_deg={}, beta_deg={}, arm_length={}, max_thrust={}, drag_ratio={})",
            self.alpha_deg(),
            self.beta_deg(),
            self.arm_length(),
            self.max_thrust(),
            self.drag_ratio()
        )
    }
}

/// Maximizes `c_f F_min + (1 − c_f) T_min / L` over the tilt angles.
#[pyfunction]
#[pyo3(signature = (c_f, arm_length = 1.0, max_thrust = 1.0, drag_ratio = 0.0, grid_deg = 0.25, force_measure = "inscribed"))]
fn optimize<'py>(
    py: Python<'py>,
    c_f: f64,
    arm_length: f64,
    max_thrust: f64,
    drag_ratio: f64,
    grid_deg: f64,
    force_measure: &str,
) -> PyResult<Bound<'py, PyDict>> {
    if !(0.0..=1.0).contains(&c_f) {
        return Err(PyValueError::new_err(format!("c_f must lie in [0, 1], got {c_f}")));
    }
    if !(grid_deg > 0.0 && grid_deg <= 90.0) {
        return Err(PyValueError::new_err(format!("grid_deg must lie in (0, 90], got {grid_deg}")));
    }
    let template =
        RotorLayout::with_all(arm_length, drag_ratio, max_thrust, ALTERNATING_SPIN, 0.0, 0.0).map_err(to_py)?;
    let settings = OptimizerSettings {
        grid_step: grid_deg.to_radians(),
        refine: true,
        force_measure: measure(force_measure)?,
    };
    let opt = py
        .detach(|| optimize_tilt(c_f, &template, &settings))
        .map_err(to_py)?;
    let d = opt.design;
    let out = PyDict::new(py);
    out.set_item("alpha_deg", d.alpha_deg())?;
    out.set_item("beta_deg", d.beta_deg())?;
    out.set_item("f_min", d.metrics.f_min)?;
    out.set_item("t_min", d.metrics.t_min)?;
    out.set_item("zeta", d.objective)?;
    out.set_item("plateau", opt.plateau)?;
    Ok(out)
}

/// `exp(t·T̂)` for a twist `[ω; v]`, as a 4×4 homogeneous matrix.
#[pyfunction]
#[pyo3(signature = (twist, t = 1.0))]
fn exp_twist(twist: [f64; 6], t: f64) -> Vec<Vec<f64>> {
    let pose = exp_se3(&Twist::from_vector(&Vector6::from(twist)), t);
    rows(&pose.matrix())
}

/// Adjoint of a 4×4 homogeneous transform.
#[pyfunction]
fn adjoint(pose: [[f64; 4]; 4]) -> PyResult<Vec<Vec<f64>>> {
    let m = Matrix4::from_fn(|i, j| pose[i][j]);
    let pose = Pose::from_matrix(&m).map_err(to_py)?;
    Ok(rows(&adjoint_group(&pose)))
}

fn log_dict<'py>(py: Python<'py>, log: &SimLog) -> PyResult<Bound<'py, PyDict>> {
    let out = PyDict::new(py);
    out.set_item("converged", log.status == RunStatus::Converged)?;
    out.set_item("final_phi", log.final_phi())?;
    out.set_item("peak_thrust", log.peak_thrust)?;
    out.set_item("saturation_count", log.saturation_count)?;
    out.set_item("columns", SimLog::COLUMNS.to_vec())?;
    out.set_item("rows", log.rows.iter().map(|r| r.values()).collect::<Vec<_>>())?;
    Ok(out)
}

/// Runs the closed-loop scenario described by a TOML document (defaults when empty).
#[pyfunction]
#[pyo3(signature = (config_toml = "", disturbances = true))]
fn simulate<'py>(py: Python<'py>, config_toml: &str, disturbances: bool) -> PyResult<Bound<'py, PyDict>> {
    let mut config = Config::from_toml_str(config_toml).map_err(to_py)?;
    if !disturbances {
        config.scenario.disturbances.clear();
    }
    let scenario = config.scenario().map_err(to_py)?;
    let log = py.detach(|| run(&scenario)).map_err(to_py)?;
    let out = log_dict(py, &log)?;
    out.set_item("config_digest", config.digest())?;
    Ok(out)
}

/// The default configuration as a TOML document.
#[pyfunction]
fn default_config() -> String {
    Config::default().to_toml_string()
}

#[pymodule]
fn pyhexarotor(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("HexarotorError", m.py().get_type::<HexarotorError>())?;
    m.add("__version__", hexarotor::report::VERSION)?;
    m.add_class::<PyRotorLayout>()?;
    m.add_function(wrap_pyfunction!(optimize, m)?)?;
    m.add_function(wrap_pyfunction!(exp_twist, m)?)?;
    m.add_function(wrap_pyfunction!(adjoint, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(default_config, m)?)?;
    Ok(())
}
