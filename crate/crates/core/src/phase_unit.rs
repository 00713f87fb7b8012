//! The Phase Unit: repeated runs of the interferometer with a recirculating phase plate.
//!
//! An `H` photon enters and goes through a run. If it comes out `V` (Bob blocked),
//! the beamsplitter after the device sends it through a flipping half-wave plate
//! and out of the unit. If it comes out `H` (Bob did not block), it passes the
//! phase plate twice, gaining `π/L`, and re-enters for another run. Bob leaves the
//! channel open for `k` runs and then blocks one run, so the photon leaves in time
//! bin `k` carrying phase `kπ/L`.
//!
//! After the blocked run, any `H` residue left by finite `N` keeps circulating while
//! Bob stops blocking and is discarded when the unit shuts down. In dit mode Bob
//! keeps blocking instead, so residue exits in later bins.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{flip, C64};
use crate::interferometer::{
    run_scheduled, BlockPolicy, BlockSchedule, CycleConfig, CycleIndex, LossLedger, LossSite,
};
use crate::state::PolState;

/// What the unit's recirculation loop contains.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitMode {
    /// Phase plate present; `k ∈ [0, L]`, `L + 1` runs.
    Phase,
    /// No phase plate; Bob blocks every run from `k` on; `k ∈ [0, L)`, `L` runs.
    Dit,
    /// No phase plate, otherwise as [`UnitMode::Phase`]. Used to add a pure delay.
    DelayOnly,
}

/// Which polarisation the unit accepts.
///
/// The `V` variant has the flipping half-wave plate moved from the exit to the
/// entrance, so a `V` photon is turned to `H`, processed, and leaves as `V`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InputPol {
    H,
    V,
}

/// Tilt direction of the phase plate: each double pass adds `+π/L` or `−π/L`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlateSign {
    Advance,
    Retard,
}

impl PlateSign {
    fn sign(self) -> f64 {
        match self {
            PlateSign::Advance => 1.0,
            PlateSign::Retard => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseUnitConfig {
    cycle: CycleConfig,
    runs_max: usize,
    k: usize,
    mode: UnitMode,
    input_pol: InputPol,
    plate: PlateSign,
}

impl PhaseUnitConfig {
    /// A phase-mode, `H`-input unit with resolution `runs_max` (`L`) applying `kπ/L`.
    pub fn new(cycle: CycleConfig, runs_max: usize, k: usize) -> Result<Self> {
        PhaseUnitConfig {
            cycle,
            runs_max,
            k,
            mode: UnitMode::Phase,
            input_pol: InputPol::H,
            plate: PlateSign::Advance,
        }
        .validated()
    }

    pub fn with_mode(mut self, mode: UnitMode) -> Result<Self> {
        self.mode = mode;
        self.validated()
    }

    pub fn with_input(mut self, input_pol: InputPol) -> Self {
        self.input_pol = input_pol;
        self
    }

    pub fn with_plate(mut self, plate: PlateSign) -> Self {
        self.plate = plate;
        self
    }

    fn validated(self) -> Result<Self> {
        if self.runs_max == 0 {
            return Err(Error::InvalidArgument("L must be positive".into()));
        }
        let k_max = match self.mode {
            UnitMode::Dit => self.runs_max - 1,
            UnitMode::Phase | UnitMode::DelayOnly => self.runs_max,
        };
        if self.k > k_max {
            return Err(Error::InvalidArgument(format!(
                "k = {} out of range [0, {k_max}] for L = {} in {:?} mode",
                self.k, self.runs_max, self.mode
            )));
        }
        Ok(self)
    }

    pub fn cycle(&self) -> &CycleConfig {
        &self.cycle
    }

    pub fn runs_max(&self) -> usize {
        self.runs_max
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn mode(&self) -> UnitMode {
        self.mode
    }

    pub fn input_pol(&self) -> InputPol {
        self.input_pol
    }

    pub fn plate(&self) -> PlateSign {
        self.plate
    }

    /// Number of runs the unit is kept on for.
    pub fn total_runs(&self) -> usize {
        match self.mode {
            UnitMode::Dit => self.runs_max,
            UnitMode::Phase | UnitMode::DelayOnly => self.runs_max + 1,
        }
    }

    /// Phase gained by a photon that has recirculated `passes` times.
    pub fn phase_after(&self, passes: usize) -> f64 {
        match self.mode {
            UnitMode::Phase => self.plate.sign() * passes as f64 * PI / self.runs_max as f64,
            UnitMode::Dit | UnitMode::DelayOnly => 0.0,
        }
    }

    /// Phase carried by the photon leaving in bin `k`.
    pub fn target_phase(&self) -> f64 {
        self.phase_after(self.k)
    }

    fn policy_for_run(&self, run: usize) -> BlockPolicy {
        use std::cmp::Ordering::*;
        match (run.cmp(&self.k), self.mode) {
            (Less, _) => BlockPolicy::BlockNone,
            (Equal, _) => BlockPolicy::BlockAll,
            (Greater, UnitMode::Dit) => BlockPolicy::BlockAll,
            (Greater, _) => BlockPolicy::BlockNone,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseUnitResult {
    /// Post-selected output, renormalised.
    pub out_state: PolState,
    /// Output amplitude in bin `k` before renormalisation.
    pub raw_out: PolState,
    /// `|raw_out|² / |input|²`.
    pub survival_prob: f64,
    pub exit_bin: usize,
    /// Phase applied to the photon leaving in bin `k`.
    pub phase: f64,
    /// Exit probability per time bin.
    pub bin_probs: Vec<f64>,
    pub ledger: LossLedger,
}

/// Runs a unit on its native input, `|H⟩` or `|V⟩`.
pub fn run_phase_unit(cfg: &PhaseUnitConfig) -> Result<PhaseUnitResult> {
    let input = match cfg.input_pol {
        InputPol::H => PolState::horizontal(),
        InputPol::V => PolState::vertical(),
    };
    transmit(cfg, &input)
}

/// Sends `input` through the unit. `input` must be polarised as the unit expects;
/// a component of the other polarisation above `1e-12` is an error.
pub fn transmit(cfg: &PhaseUnitConfig, input: &PolState) -> Result<PhaseUnitResult> {
    let (accepted, rejected) = match cfg.input_pol {
        InputPol::H => (input.h_part(), input.v_part()),
        InputPol::V => (input.v_part().apply(&flip()), input.h_part()),
    };
    if rejected.norm() > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "{:?}-input phase unit received an orthogonal component of norm {:.3e}",
            cfg.input_pol,
            rejected.norm()
        )));
    }
    let input_norm_sqr = accepted.norm_sqr();

    let mut ledger = LossLedger::new();
    let mut circulating = accepted;
    let mut selected = PolState::zero();
    let mut bin_probs = Vec::with_capacity(cfg.total_runs());
    let cycle = &cfg.cycle;

    for run in 0..cfg.total_runs() {
        let schedule = BlockSchedule::from_policy(cycle, cfg.policy_for_run(run));
        let out = run_scheduled(&circulating, cycle, &schedule, None, &mut ledger, run)?;
        let exit = match cfg.input_pol {
            InputPol::H => out.v_part().apply(&flip()),
            InputPol::V => out.v_part(),
        };
        bin_probs.push(exit.norm_sqr());
        if run == cfg.k {
            selected = exit;
        } else {
            let amp = exit.amp_h() + exit.amp_v();
            ledger.record(LossSite::WrongBin, CycleIndex { run, outer: 0, inner: 0 }, amp);
        }
        circulating = out.h_part();
    }
    ledger.record(
        LossSite::Residual,
        CycleIndex {
            run: cfg.total_runs(),
            outer: 0,
            inner: 0,
        },
        circulating.amp_h(),
    );

    // The plate phase is a global factor on the circulating photon, so it is applied
    // once at the exit; magnitudes are then identical for every L.
    let survival_prob = if input_norm_sqr > 0.0 {
        selected.norm_sqr() / input_norm_sqr
    } else {
        0.0
    };
    let phase = cfg.target_phase();
    let raw_out = selected.scale(C64::from_polar(1.0, phase));
    Ok(PhaseUnitResult {
        out_state: raw_out.normalized(),
        raw_out,
        survival_prob,
        exit_bin: cfg.k,
        phase,
        bin_probs,
        ledger,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    #[serde(rename = "M")]
    pub outer: usize,
    #[serde(rename = "N")]
    pub inner: usize,
    pub k: usize,
    pub survival: f64,
}

/// Survival probability of an `H`-input phase unit over a grid of `(M, N)`.
///
/// Each point is also evaluated at a second resolution `L' ≠ L`; the two survivals
/// must agree to `1e-12`. Points are computed in parallel and returned in grid order.
pub fn survival_surface(
    grid: &[(usize, usize)],
    k: usize,
    runs_max: usize,
) -> Result<Vec<SurfacePoint>> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("survival grid is empty".into()));
    }
    let alt_runs = 2 * runs_max.max(k) + 1;
    grid.par_iter()
        .map(|&(m, n)| {
            let cycle = CycleConfig::new(m, n)?;
            let s = run_phase_unit(&PhaseUnitConfig::new(cycle, runs_max, k)?)?.survival_prob;
            let alt = run_phase_unit(&PhaseUnitConfig::new(cycle, alt_runs, k)?)?.survival_prob;
            if (s - alt).abs() > 1e-12 {
                return Err(Error::Invariant(format!(
                    "survival depends on L at (M, N, k) = ({m}, {n}, {k}): {s} vs {alt}"
                )));
            }
            Ok(SurfacePoint {
                outer: m,
                inner: n,
                k,
                survival: s,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DitReport {
    /// Most probable exit bin, as read by Alice's time-resolving detector.
    pub bin: usize,
    pub bin_probs: Vec<f64>,
    pub survival_prob: f64,
}

/// Sends the dit `cfg.k()` through a dit-mode unit and decodes it from the exit bin.
pub fn send_dit(cfg: &PhaseUnitConfig) -> Result<DitReport> {
    if cfg.mode != UnitMode::Dit {
        return Err(Error::InvalidArgument(format!(
            "send_dit needs a dit-mode unit, got {:?}",
            cfg.mode
        )));
    }
    let res = run_phase_unit(cfg)?;
    let bin = res
        .bin_probs
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &p)| if p > best.1 { (i, p) } else { best })
        .0;
    Ok(DitReport {
        bin,
        bin_probs: res.bin_probs,
        survival_prob: res.survival_prob,
    })
}
