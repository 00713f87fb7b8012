//! Python module `exfree`.
//!
//! States are `(h, v)` pairs of complex numbers and operators are 2x2 nested lists
//! of complex numbers. Invalid arguments raise `ValueError`; failed internal checks
//! raise `RuntimeError`.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use exfree::gates::Op2;
use exfree::phase_unit::{InputPol, PhaseUnitConfig, UnitMode};
use exfree::ry_direct::{self as rd, RyDirectConfig};
use exfree::{kraus, phase_unit, protocol, remote_circuit, CycleConfig, PolState};

type State = (Complex64, Complex64);
type Matrix = [[Complex64; 2]; 2];

fn err(e: exfree::Error) -> PyErr {
    match e {
        exfree::Error::Invariant(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn state(s: State) -> PolState {
    PolState::new(s.0, s.1)
}

fn pair(s: &PolState) -> State {
    (s.amp_h(), s.amp_v())
}

fn cycle(m: usize, n: usize) -> PyResult<CycleConfig> {
    CycleConfig::new(m, n).map_err(err)
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("serializable")
}

fn mode(name: &str) -> PyResult<UnitMode> {
    match name {
        "phase" => Ok(UnitMode::Phase),
        "dit" => Ok(UnitMode::Dit),
        "delay_only" => Ok(UnitMode::DelayOnly),
        other => Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
    }
}

#[pyclass(frozen, get_all, module = "exfree")]
pub struct PhaseUnitResult {
    pub out_state: State,
    pub raw_out: State,
    pub survival_prob: f64,
    pub exit_bin: usize,
    pub phase: f64,
    pub bin_probs: Vec<f64>,
    /// Total probability recorded by the loss ledger.
    pub lost_prob: f64,
}

/// Runs one phase unit on `|H>` (or `|V>` with `input="V"`).
#[pyfunction]
#[pyo3(signature = (m, n, l, k, mode = "phase", input = "H"))]
fn run_phase_unit(m: usize, n: usize, l: usize, k: usize, mode: &str, input: &str) -> PyResult<PhaseUnitResult> {
    let pol = match input {
        "H" | "h" => InputPol::H,
        "V" | "v" => InputPol::V,
        other => return Err(PyValueError::new_err(format!("input must be 'H' or 'V', got {other:?}"))),
    };
    let mode = self::mode(mode)?;
    let cfg = PhaseUnitConfig::new(cycle(m, n)?, l, k)
        .and_then(|c| c.with_mode(mode))
        .map_err(err)?
        .with_input(pol);
    let r = phase_unit::run_phase_unit(&cfg).map_err(err)?;
    Ok(PhaseUnitResult {
        out_state: pair(&r.out_state),
        raw_out: pair(&r.raw_out),
        survival_prob: r.survival_prob,
        exit_bin: r.exit_bin,
        phase: r.phase,
        bin_probs: r.bin_probs,
        lost_prob: r.ledger.total_lost_prob(),
    })
}

/// `(M, N, k, survival)` for each grid point, in grid order.
#[pyfunction]
#[pyo3(signature = (grid, k, l = 20))]
fn survival_surface(grid: Vec<(usize, usize)>, k: usize, l: usize) -> PyResult<Vec<(usize, usize, usize, f64)>> {
    let pts = phase_unit::survival_surface(&grid, k, l).map_err(err)?;
    Ok(pts.into_iter().map(|p| (p.outer, p.inner, p.k, p.survival)).collect())
}

/// Sends dit `k` and returns the exit bin Alice reads.
#[pyfunction]
#[pyo3(signature = (l, k, m = 10, n = 10))]
fn send_dit(l: usize, k: usize, m: usize, n: usize) -> PyResult<usize> {
    let cfg = PhaseUnitConfig::new(cycle(m, n)?, l, k)
        .and_then(|c| c.with_mode(UnitMode::Dit))
        .map_err(err)?;
    Ok(phase_unit::send_dit(&cfg).map_err(err)?.bin)
}

#[pyclass(module = "exfree", eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
pub struct BobProgram {
    inner: protocol::BobProgram,
}

#[pymethods]
impl BobProgram {
    #[new]
    #[pyo3(signature = (beta, gamma, delta, l, equalize = false))]
    fn new(beta: usize, gamma: usize, delta: usize, l: usize, equalize: bool) -> PyResult<Self> {
        let inner = protocol::BobProgram::new(beta, gamma, delta, l).map_err(err)?.with_equalize(equalize);
        Ok(BobProgram { inner })
    }

    #[getter]
    fn beta(&self) -> usize {
        self.inner.beta
    }

    #[getter]
    fn gamma(&self) -> usize {
        self.inner.gamma
    }

    #[getter]
    fn delta(&self) -> usize {
        self.inner.delta
    }

    #[getter(L)]
    fn resolution(&self) -> usize {
        self.inner.resolution
    }

    #[getter]
    fn equalize(&self) -> bool {
        self.inner.equalize
    }

    /// The unitary the program enacts.
    fn unitary(&self) -> PyResult<Matrix> {
        Ok(self.inner.unitary().map_err(err)?.entries())
    }

    fn to_json(&self) -> String {
        to_json(&self.inner)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner: protocol::BobProgram =
            serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        inner.validate().map_err(err)?;
        Ok(BobProgram { inner })
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!(
            "BobProgram(beta={}, gamma={}, delta={}, L={}, equalize={})",
            p.beta, p.gamma, p.delta, p.resolution, if p.equalize { "True" } else { "False" }
        )
    }
}

/// Compiles `u` into a program at resolution `l`.
#[pyfunction]
fn compile(u: Matrix, l: usize) -> PyResult<BobProgram> {
    let c = protocol::compile(&Op2::new(u), l).map_err(err)?;
    Ok(BobProgram { inner: c.program })
}

/// `(alpha, beta, gamma, delta)` with `u = e^{i alpha} Rz(beta) Ry(gamma) Rz(delta)`.
#[pyfunction]
fn zyz_angles(u: Matrix) -> PyResult<(f64, f64, f64, f64)> {
    let a = protocol::zyz_angles(&Op2::new(u)).map_err(err)?;
    Ok((a.alpha, a.beta, a.gamma, a.delta))
}

#[pyfunction]
fn quantization_bound(l: usize) -> f64 {
    protocol::quantization_bound(l)
}

#[pyclass(frozen, get_all, module = "exfree")]
pub struct ProtocolResult {
    pub out_state: State,
    pub raw_out: State,
    pub total_survival: f64,
    pub exit_bin_total: usize,
    /// `(stage, k, survival, exit_bin)` in execution order.
    pub stages: Vec<(String, usize, f64, usize)>,
    /// Weight of amplitude that has been in Bob's arm.
    pub tag_weight: f64,
}

/// Runs Bob's program on `state` through `(M, N)` interferometers.
#[pyfunction]
#[pyo3(signature = (program, state, m = 10, n = 10))]
fn run_protocol(program: &BobProgram, state: State, m: usize, n: usize) -> PyResult<ProtocolResult> {
    let r = protocol::run_protocol(&self::state(state), &program.inner, &cycle(m, n)?).map_err(err)?;
    let stages = r
        .stages
        .iter()
        .map(|s| {
            let name = to_json(&s.stage).trim_matches('"').to_string();
            (name, s.k, s.rotator.survival_prob, s.rotator.exit_bin)
        })
        .collect();
    Ok(ProtocolResult {
        out_state: pair(&r.out_state),
        raw_out: pair(&r.raw_out),
        total_survival: r.total_survival,
        exit_bin_total: r.exit_bin_total,
        stages,
        tag_weight: exfree::bob_tag_weight(&r.out_state),
    })
}

/// `(c1, c2, c3, c4)` of the whole-run channel with Bob blocking throughout.
#[pyfunction]
fn kraus_coefficients(m: usize, n: usize) -> PyResult<(f64, f64, f64, f64)> {
    let c = kraus::coefficients(m, n).map_err(err)?;
    Ok((c.c1, c.c2, c.c3, c.c4))
}

/// The Kraus verification report as a JSON string, plus whether it passes at `tol`.
#[pyfunction]
#[pyo3(signature = (m, n, tol = 1e-10))]
fn kraus_verify(m: usize, n: usize, tol: f64) -> PyResult<(bool, String)> {
    let r = kraus::verify(m, n).map_err(err)?;
    Ok((r.ok(tol), to_json(&r)))
}

/// Direct `Ry(k pi / M)`: returns the post-selected state and its survival.
#[pyfunction]
#[pyo3(signature = (m, n, k, state = None))]
fn ry_direct(m: usize, n: usize, k: usize, state: Option<State>) -> PyResult<(State, f64)> {
    let cfg = RyDirectConfig::new(cycle(m, n)?, k).map_err(err)?;
    match state {
        None => {
            let r = rd::run_ry_direct(&cfg).map_err(err)?;
            Ok((pair(&r.out_state), r.survival_prob))
        }
        Some(s) => {
            let r = rd::run_ry_direct_arbitrary(&self::state(s), &cfg).map_err(err)?;
            Ok((pair(&r.out_state), r.success_prob))
        }
    }
}

/// The doubly controlled network with classical controls `b1, b2` applied to `state`.
#[pyfunction]
fn apply_network(state: State, b1: bool, b2: bool, u: Matrix) -> PyResult<State> {
    let c = remote_circuit::ClassicalControls::new(b1, b2);
    Ok(pair(&remote_circuit::apply_network(&self::state(state), c, &Op2::new(u)).map_err(err)?))
}

/// `(b1, b2, target, distance)` rows of the verification table.
#[pyfunction]
fn ccu_table(u: Matrix) -> PyResult<Vec<(bool, bool, u8, f64)>> {
    let rows = remote_circuit::ccu_table(&Op2::new(u)).map_err(err)?;
    Ok(rows.into_iter().map(|r| (r.b1, r.b2, r.target, r.distance)).collect())
}

#[pymodule]
#[pyo3(name = "exfree")]
fn exfree_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PhaseUnitResult>()?;
    m.add_class::<BobProgram>()?;
    m.add_class::<ProtocolResult>()?;
    m.add_function(wrap_pyfunction!(run_phase_unit, m)?)?;
    m.add_function(wrap_pyfunction!(survival_surface, m)?)?;
    m.add_function(wrap_pyfunction!(send_dit, m)?)?;
    m.add_function(wrap_pyfunction!(compile, m)?)?;
    m.add_function(wrap_pyfunction!(zyz_angles, m)?)?;
    m.add_function(wrap_pyfunction!(quantization_bound, m)?)?;
    m.add_function(wrap_pyfunction!(run_protocol, m)?)?;
    m.add_function(wrap_pyfunction!(kraus_coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(kraus_verify, m)?)?;
    m.add_function(wrap_pyfunction!(ry_direct, m)?)?;
    m.add_function(wrap_pyfunction!(apply_network, m)?)?;
    m.add_function(wrap_pyfunction!(ccu_table, m)?)?;
    Ok(())
}
