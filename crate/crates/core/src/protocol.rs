//! Arbitrary single-qubit unitaries from paired Phase Units.
//!
//! A rotator splits Alice's photon at a polarising beamsplitter and sends each
//! component through its own Phase Unit, with plates tilted in opposite senses, then
//! recombines. The result is `Rz(2kπ/L)`. Sandwiching a rotator between quarter-wave
//! plates gives `Ry(2kπ/L)`. Three stages in `Rz·Ry·Rz` order implement any `U(2)`
//! element up to global phase.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{finite, Error, Result};
use crate::gates::{dist_up_to_global_phase, qwp, qwp_dagger, require_unitary, ry, rz, Op2, C64};
use crate::interferometer::CycleConfig;
use crate::phase_unit::{transmit, InputPol, PhaseUnitConfig, PhaseUnitResult, PlateSign, UnitMode};
use crate::state::PolState;

/// One pair of Phase Units acting on the two polarisation components.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotatorResult {
    /// Recombined output, not renormalised.
    pub out: PolState,
    pub survival_prob: f64,
    pub exit_bin: usize,
    pub h_arm: PhaseUnitResult,
    pub v_arm: PhaseUnitResult,
}

fn rotator_pair(
    state: &PolState,
    k: usize,
    cycle: &CycleConfig,
    runs_max: usize,
    mode: UnitMode,
) -> Result<RotatorResult> {
    // H arm retards and V arm advances, so the pair is diag(e^{-ikπ/L}, e^{ikπ/L}).
    let base = PhaseUnitConfig::new(*cycle, runs_max, k)?.with_mode(mode)?;
    let h_arm = transmit(&base.with_plate(PlateSign::Retard), &state.h_part())?;
    let v_arm = transmit(
        &base.with_plate(PlateSign::Advance).with_input(InputPol::V),
        &state.v_part(),
    )?;
    let out = h_arm.raw_out.add(&v_arm.raw_out);
    let in_norm = state.norm_sqr();
    let survival_prob = if in_norm > 0.0 {
        out.norm_sqr() / in_norm
    } else {
        0.0
    };
    Ok(RotatorResult {
        out,
        survival_prob,
        exit_bin: k,
        h_arm,
        v_arm,
    })
}

/// `Rz(2kπ/L)` applied exchange-free by a pair of phase-mode units.
pub fn rz_rotator(
    state: &PolState,
    k: usize,
    cycle: &CycleConfig,
    runs_max: usize,
) -> Result<RotatorResult> {
    rotator_pair(state, k, cycle, runs_max, UnitMode::Phase)
}

/// `Ry(2kπ/L)`: a rotator between a `QWP†` on the way in and a `QWP` on the way out.
pub fn ry_rotator(
    state: &PolState,
    k: usize,
    cycle: &CycleConfig,
    runs_max: usize,
) -> Result<RotatorResult> {
    let mut r = rz_rotator(&state.apply(&qwp_dagger()), k, cycle, runs_max)?;
    r.out = r.out.apply(&qwp());
    Ok(r)
}

/// Angles of `u = e^{iα} Rz(β) Ry(γ) Rz(δ)`, with `β, δ ∈ [0, 2π)` and `γ ∈ [0, π]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZyzAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl ZyzAngles {
    /// `Rz(β) Ry(γ) Rz(δ)` without the global phase.
    pub fn rotation(&self) -> Result<Op2> {
        Ok(rz(self.beta)? * ry(self.gamma)? * rz(self.delta)?)
    }

    pub fn reconstruct(&self) -> Result<Op2> {
        Ok(self.rotation()?.scale(C64::from_polar(1.0, self.alpha)))
    }
}

fn wrap_2pi(x: f64) -> f64 {
    let w = x.rem_euclid(2.0 * PI);
    if w >= 2.0 * PI {
        0.0
    } else {
        w
    }
}

/// ZYZ Euler angles of a unitary. At `γ ∈ {0, π}` the split between `β` and `δ` is
/// degenerate; `δ` is then fixed to zero.
pub fn zyz_angles(u: &Op2) -> Result<ZyzAngles> {
    require_unitary(u, 1e-10)?;
    // Strip the determinant phase to land in SU(2): [[a, -b*], [b, a*]].
    let root = u.det().sqrt();
    let v = u.scale(root.inv());
    let (a, b) = (v.get(0, 0), v.get(1, 0));
    let gamma = 2.0 * b.norm().atan2(a.norm());
    let (beta, delta) = if b.norm() < 1e-12 {
        (-2.0 * a.arg(), 0.0)
    } else if a.norm() < 1e-12 {
        (2.0 * b.arg(), 0.0)
    } else {
        (b.arg() - a.arg(), -a.arg() - b.arg())
    };
    let mut angles = ZyzAngles {
        alpha: 0.0,
        beta: wrap_2pi(beta),
        gamma,
        delta: wrap_2pi(delta),
    };
    let rot = angles.rotation()?;
    angles.alpha = wrap_2pi(rot.inner(u).arg());
    Ok(angles)
}

/// The blocking counts Bob runs: stage angles `2πβ/L`, `2πγ/L`, `2πδ/L`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BobProgram {
    pub beta: usize,
    pub gamma: usize,
    pub delta: usize,
    #[serde(rename = "L")]
    pub resolution: usize,
    #[serde(default)]
    pub equalize: bool,
}

impl BobProgram {
    pub fn new(beta: usize, gamma: usize, delta: usize, resolution: usize) -> Result<Self> {
        let p = BobProgram {
            beta,
            gamma,
            delta,
            resolution,
            equalize: false,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_equalize(mut self, on: bool) -> Self {
        self.equalize = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.resolution == 0 {
            return Err(Error::InvalidArgument("program resolution L must be positive".into()));
        }
        for (name, v) in [("beta", self.beta), ("gamma", self.gamma), ("delta", self.delta)] {
            if v > self.resolution {
                return Err(Error::InvalidArgument(format!(
                    "{name} = {v} exceeds resolution {}",
                    self.resolution
                )));
            }
        }
        Ok(())
    }

    fn angle(&self, count: usize) -> f64 {
        2.0 * PI * count as f64 / self.resolution as f64
    }

    /// `Rz(β′) Ry(γ′) Rz(δ′)` for the quantised angles.
    pub fn unitary(&self) -> Result<Op2> {
        Ok(rz(self.angle(self.beta))? * ry(self.angle(self.gamma))? * rz(self.angle(self.delta))?)
    }

    /// Delay a photon needs after the three stages to exit in bin `3L`.
    pub fn equalizer_k(&self) -> usize {
        3 * self.resolution - self.beta - self.gamma - self.delta
    }
}

/// Nearest multiple of `2π/L` to an angle in `[0, 2π)`, ties toward the smaller
/// count, clipped to `[0, L]`.
pub fn quantize(angle: f64, resolution: usize) -> Result<usize> {
    finite("angle", angle)?;
    if resolution == 0 {
        return Err(Error::InvalidArgument("resolution must be positive".into()));
    }
    let x = wrap_2pi(angle) * resolution as f64 / (2.0 * PI);
    let q = (x - 0.5).ceil().max(0.0) as usize;
    Ok(q.min(resolution))
}

/// Operator error allowed after quantising three angles at resolution `L`.
pub fn quantization_bound(resolution: usize) -> f64 {
    3.0 * PI / resolution as f64
}

/// A compiled program together with the exact angles it approximates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Compiled {
    pub program: BobProgram,
    pub angles: ZyzAngles,
}

pub fn compile(u: &Op2, resolution: usize) -> Result<Compiled> {
    let angles = zyz_angles(u)?;
    let program = BobProgram::new(
        quantize(angles.beta, resolution)?,
        quantize(angles.gamma, resolution)?,
        quantize(angles.delta, resolution)?,
        resolution,
    )?;
    Ok(Compiled { program, angles })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Delta,
    Gamma,
    Beta,
    Equalizer,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageResult {
    pub stage: Stage,
    pub k: usize,
    pub rotator: RotatorResult,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolResult {
    /// Post-selected output, renormalised.
    pub out_state: PolState,
    pub raw_out: PolState,
    pub total_survival: f64,
    pub exit_bin_total: usize,
    pub stages: Vec<StageResult>,
}

impl ProtocolResult {
    pub fn stage_survival_product(&self) -> f64 {
        self.stages.iter().map(|s| s.rotator.survival_prob).product()
    }
}

/// Runs Bob's program on `state`: the `δ` stage first, then `γ`, then `β`, then the
/// optional delay-only equaliser.
pub fn run_protocol(state: &PolState, prog: &BobProgram, cycle: &CycleConfig) -> Result<ProtocolResult> {
    prog.validate()?;
    let l = prog.resolution;
    let mut stages = Vec::with_capacity(4);
    let mut current = *state;

    let delta = rz_rotator(&current, prog.delta, cycle, l)?;
    current = delta.out;
    stages.push(StageResult {
        stage: Stage::Delta,
        k: prog.delta,
        rotator: delta,
    });
    let gamma = ry_rotator(&current, prog.gamma, cycle, l)?;
    current = gamma.out;
    stages.push(StageResult {
        stage: Stage::Gamma,
        k: prog.gamma,
        rotator: gamma,
    });
    let beta = rz_rotator(&current, prog.beta, cycle, l)?;
    current = beta.out;
    stages.push(StageResult {
        stage: Stage::Beta,
        k: prog.beta,
        rotator: beta,
    });
    if prog.equalize {
        let k = prog.equalizer_k();
        let eq = rotator_pair(&current, k, cycle, 3 * l, UnitMode::DelayOnly)?;
        current = eq.out;
        stages.push(StageResult {
            stage: Stage::Equalizer,
            k,
            rotator: eq,
        });
    }

    let in_norm = state.norm_sqr();
    let total_survival = if in_norm > 0.0 {
        current.norm_sqr() / in_norm
    } else {
        0.0
    };
    let product: f64 = stages.iter().map(|s| s.rotator.survival_prob).product();
    if (total_survival - product).abs() > 1e-12 {
        return Err(Error::Invariant(format!(
            "total survival {total_survival} differs from stage product {product}"
        )));
    }
    Ok(ProtocolResult {
        out_state: current.normalized(),
        raw_out: current,
        total_survival,
        exit_bin_total: stages.iter().map(|s| s.rotator.exit_bin).sum(),
        stages,
    })
}

/// The operator a program enacts on post-selection, read off from runs on `|H⟩`
/// and `|V⟩`, with the common survival factor divided out.
pub fn executed_operator(prog: &BobProgram, cycle: &CycleConfig) -> Result<(Op2, f64)> {
    let h = run_protocol(&PolState::horizontal(), prog, cycle)?;
    let v = run_protocol(&PolState::vertical(), prog, cycle)?;
    if (h.total_survival - v.total_survival).abs() > 1e-12 || h.total_survival <= 0.0 {
        return Err(Error::Invariant(format!(
            "survival differs between inputs: {} vs {}",
            h.total_survival, v.total_survival
        )));
    }
    let inv = C64::new(1.0 / h.total_survival.sqrt(), 0.0);
    let op = Op2::from_rows(h.raw_out.amp_h(), v.raw_out.amp_h(), h.raw_out.amp_v(), v.raw_out.amp_v());
    Ok((op.scale(inv), h.total_survival))
}

/// Distance from `u` to the operator the compiled program enacts.
pub fn program_error(u: &Op2, prog: &BobProgram) -> Result<f64> {
    Ok(dist_up_to_global_phase(&prog.unitary()?, u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{hadamard, pauli_x, pauli_y, pauli_z};
    use crate::state::bob_tag_weight;

    fn cycle(m: usize, n: usize) -> CycleConfig {
        CycleConfig::new(m, n).unwrap()
    }

    fn plus() -> PolState {
        let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        PolState::new(s, s)
    }

    #[test]
    fn rz_rotator_matches_matrix() {
        let input = PolState::new(C64::new(0.6, 0.0), C64::new(0.0, 0.8));
        for k in [0, 1, 5, 10] {
            let r = rz_rotator(&input, k, &cycle(6, 8), 10).unwrap();
            let expected = input.apply(&rz(2.0 * PI * k as f64 / 10.0).unwrap());
            assert!(r.out.normalized().distance_up_to_phase(&expected) < 1e-12, "k={k}");
        }
    }

    #[test]
    fn rz_rotator_half_turn_flips_relative_phase() {
        let r = rz_rotator(&plus(), 5, &cycle(5, 5), 10).unwrap();
        let out = r.out.normalized();
        let rel = out.amp_v() / out.amp_h();
        assert!((rel + C64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn ry_rotator_maps_h_to_v() {
        let r = ry_rotator(&PolState::horizontal(), 4, &cycle(8, 8), 8).unwrap();
        assert!(r.out.normalized().distance_up_to_phase(&PolState::vertical()) < 1e-12);
        assert!(bob_tag_weight(&r.out) < 1e-12);
    }

    #[test]
    fn zyz_hadamard() {
        let a = zyz_angles(&hadamard()).unwrap();
        assert!(a.beta.abs() < 1e-12);
        assert!((a.gamma - PI / 2.0).abs() < 1e-12);
        assert!((a.delta - PI).abs() < 1e-12);
        assert!((a.alpha - PI / 2.0).abs() < 1e-12);
        assert!(a.reconstruct().unwrap().sub(&hadamard()).frobenius_norm() < 1e-12);
    }

    #[test]
    fn zyz_gimbal_points() {
        for u in [Op2::IDENTITY, pauli_x(), pauli_y(), pauli_z(), rz(1.1).unwrap()] {
            let a = zyz_angles(&u).unwrap();
            assert_eq!(a.delta, 0.0);
            assert!(a.reconstruct().unwrap().sub(&u).frobenius_norm() < 1e-12);
        }
    }

    #[test]
    fn compile_identity_and_pure_z() {
        assert_eq!(
            compile(&Op2::IDENTITY, 16).unwrap().program,
            BobProgram::new(0, 0, 0, 16).unwrap()
        );
        let u = rz(2.0 * PI * 7.0 / 32.0).unwrap();
        let p = compile(&u, 32).unwrap().program;
        assert_eq!((p.beta, p.gamma, p.delta), (7, 0, 0));
        assert!(program_error(&u, &p).unwrap() < 1e-12);
    }

    #[test]
    fn compile_rejects_non_unitary() {
        let bad = Op2::IDENTITY.scale(C64::new(1.1, 0.0));
        assert!(matches!(compile(&bad, 8), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn quantize_ties_round_down() {
        // 2π·2.5/10 sits exactly between counts 2 and 3.
        assert_eq!(quantize(2.0 * PI * 2.5 / 10.0, 10).unwrap(), 2);
        assert_eq!(quantize(2.0 * PI * 2.6 / 10.0, 10).unwrap(), 3);
        assert_eq!(quantize(2.0 * PI - 1e-9, 10).unwrap(), 10);
        assert_eq!(quantize(-0.1, 10).unwrap(), quantize(2.0 * PI - 0.1, 10).unwrap());
    }

    #[test]
    fn hadamard_program_on_h() {
        let prog = compile(&hadamard(), 8).unwrap().program;
        let res = run_protocol(&PolState::horizontal(), &prog, &cycle(5, 5)).unwrap();
        assert!(res.out_state.distance_up_to_phase(&plus()) < 1e-12);
        assert!(bob_tag_weight(&res.out_state) < 1e-12);
    }

    #[test]
    fn survival_is_product_of_stages() {
        let prog = BobProgram::new(5, 10, 3, 20).unwrap();
        let c = cycle(20, 20);
        let res = run_protocol(&plus(), &prog, &c).unwrap();
        assert_eq!(res.stages.len(), 3);
        // Oracle: each stage's survival is that of a single H-input unit.
        let unit = |k| {
            crate::phase_unit::run_phase_unit(&PhaseUnitConfig::new(c, 20, k).unwrap())
                .unwrap()
                .survival_prob
        };
        let expected = unit(5) * unit(10) * unit(3);
        assert!((res.total_survival - expected).abs() < 1e-12);
    }

    #[test]
    fn equalizer_fixes_exit_bin() {
        let prog = BobProgram::new(2, 7, 4, 8).unwrap().with_equalize(true);
        let res = run_protocol(&plus(), &prog, &cycle(4, 6)).unwrap();
        assert_eq!(res.exit_bin_total, 24);
        assert_eq!(res.stages.last().unwrap().stage, Stage::Equalizer);
        let plain = run_protocol(&plus(), &prog.with_equalize(false), &cycle(4, 6)).unwrap();
        assert!(res.out_state.distance(&plain.out_state) < 1e-12);
        assert_eq!(plain.exit_bin_total, 13);
    }

    #[test]
    fn executed_operator_is_program_unitary() {
        let prog = BobProgram::new(3, 5, 6, 8).unwrap();
        let (op, surv) = executed_operator(&prog, &cycle(4, 4)).unwrap();
        assert!(op.is_unitary(1e-12));
        assert!(dist_up_to_global_phase(&op, &prog.unitary().unwrap()) < 1e-12);
        assert!(surv > 0.0 && surv < 1.0);
    }

    #[test]
    fn program_json_shape() {
        let p = BobProgram::new(1, 2, 3, 8).unwrap();
        let v = serde_json::to_value(p).unwrap();
        assert_eq!(v, serde_json::json!({"beta": 1, "gamma": 2, "delta": 3, "L": 8, "equalize": false}));
        let back: BobProgram = serde_json::from_str(r#"{"beta":1,"gamma":2,"delta":3,"L":8}"#).unwrap();
        assert_eq!(back, p);
        let bad: BobProgram = serde_json::from_str(r#"{"beta":9,"gamma":2,"delta":3,"L":8}"#).unwrap();
        assert!(bad.validate().is_err());
    }
}
