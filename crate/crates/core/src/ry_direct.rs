//! A direct `Ry` protocol on one run of the interferometer.
//!
//! Bob leaves the channel open for the first `M − k` outer cycles and blocks for the
//! rest. Alice attenuates her outer arm by `cos(π/2N)^N` every outer cycle, which
//! matches the inner chain's blocked retention so a blocked outer cycle is a uniformly
//! scaled `Ry(π/M)`. Post-selection yields `cos(kπ/2M)|H⟩ + sin(kπ/2M)|V⟩`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{flip, pauli_z, C64};
use crate::interferometer::{run_scheduled, BlockSchedule, CycleConfig, LossLedger};
use crate::state::PolState;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RyDirectConfig {
    cycle: CycleConfig,
    k: usize,
}

impl RyDirectConfig {
    pub fn new(cycle: CycleConfig, k: usize) -> Result<Self> {
        if k > cycle.outer() {
            return Err(Error::InvalidArgument(format!(
                "k = {k} out of range [0, {}]",
                cycle.outer()
            )));
        }
        Ok(RyDirectConfig { cycle, k })
    }

    pub fn cycle(&self) -> &CycleConfig {
        &self.cycle
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// The rotation angle `kπ/M` applied to `|H⟩`.
    pub fn angle(&self) -> f64 {
        self.k as f64 * PI / self.cycle.outer() as f64
    }

    fn schedule(&self) -> BlockSchedule {
        let open = self.cycle.outer() - self.k;
        BlockSchedule::uniform_outer(&self.cycle, |m| m >= open)
    }

    /// `cos(π/2N)^{MN} cos(π/2M)^{M−k}`: the amplitude factor before post-selection.
    pub fn closed_form_amplitude(&self) -> f64 {
        let (m, n) = (self.cycle.outer() as f64, self.cycle.inner() as f64);
        (PI / (2.0 * n)).cos().powf(m * n) * (PI / (2.0 * m)).cos().powi((self.cycle.outer() - self.k) as i32)
    }

    /// `cos(kπ/2M)|H⟩ + sin(kπ/2M)|V⟩`.
    pub fn target_state(&self) -> PolState {
        let (s, c) = (self.angle() / 2.0).sin_cos();
        PolState::new(C64::new(c, 0.0), C64::new(s, 0.0))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RyDirectResult {
    pub out_state: PolState,
    pub raw_out: PolState,
    pub survival_prob: f64,
    pub ledger: LossLedger,
}

fn run_on(cfg: &RyDirectConfig, input: &PolState, ledger: &mut LossLedger) -> Result<PolState> {
    let a = cfg.cycle.blocked_retention();
    run_scheduled(input, &cfg.cycle, &cfg.schedule(), Some(a), ledger, 0)
}

/// One run on `|H⟩`.
pub fn run_ry_direct(cfg: &RyDirectConfig) -> Result<RyDirectResult> {
    let mut ledger = LossLedger::new();
    let raw_out = run_on(cfg, &PolState::horizontal(), &mut ledger)?;
    Ok(RyDirectResult {
        out_state: raw_out.normalized(),
        raw_out,
        survival_prob: raw_out.norm_sqr(),
        ledger,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RyArbitraryResult {
    /// Post-selected output of the 50:50 success port.
    pub out_state: PolState,
    pub success_prob: f64,
    /// Probability of the photon leaving by the other beamsplitter port.
    pub failure_prob: f64,
    /// `|amplitude|²` surviving one branch run.
    pub branch_survival: f64,
    pub ledger: LossLedger,
}

impl RyArbitraryResult {
    /// Mean number of attempts until success.
    pub fn expected_runs(&self) -> f64 {
        1.0 / self.success_prob
    }
}

/// `Ry(kπ/M)` on an arbitrary input: each polarisation component gets its own run and
/// the branches meet at a 50:50 beamsplitter.
///
/// The `V` branch is flipped to `H` on entry and leaves through a phase flip then a
/// polarisation flip, turning `c|H⟩ + s|V⟩` into `−s|H⟩ + c|V⟩`.
pub fn run_ry_direct_arbitrary(state: &PolState, cfg: &RyDirectConfig) -> Result<RyArbitraryResult> {
    let norm = state.norm_sqr();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!("input norm² {norm} is not 1")));
    }
    let mut ledger = LossLedger::new();
    let h_branch = run_on(cfg, &state.h_part(), &mut ledger)?;
    let v_branch = run_on(cfg, &state.v_part().apply(&flip()), &mut ledger)?
        .apply(&pauli_z())
        .apply(&flip());
    let half = C64::new(FRAC_1_SQRT_2, 0.0);
    let success = h_branch.add(&v_branch).scale(half);
    let failure = h_branch.add(&v_branch.scale(C64::new(-1.0, 0.0))).scale(half);
    let branch_survival = cfg.closed_form_amplitude().powi(2);
    Ok(RyArbitraryResult {
        out_state: success.normalized(),
        success_prob: success.norm_sqr(),
        failure_prob: failure.norm_sqr(),
        branch_survival,
        ledger,
    })
}
