//! Step-exact simulation of one run of the nested interferometer.
//!
//! A run is `M` outer cycles. Each outer cycle rotates the photon by `Ry(π/M)` and
//! splits it on a polarising beamsplitter: `H` stays in Alice's outer arm, `V`
//! enters a chain of `N` inner cycles. Each inner cycle rotates by `Ry(π/N)` and
//! sends the `H` part across the channel to Bob, who either blocks it (the
//! amplitude goes to detector `D_B`) or reflects it back. After the chain, any `H`
//! amplitude is routed to detector `D_A`, and the surviving `V` amplitude is
//! recombined with the outer arm.
//!
//! Absorbed amplitude is moved into a [`LossLedger`] rather than kept in an enlarged
//! state space. In the single-photon sector an absorbed amplitude never interferes
//! again, so the ledger is an exact record.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{finite, Error, Result};
use crate::gates::{Op2, C64, ZERO};
use crate::state::PolState;

/// Numbers of outer and inner cycles for one run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleConfig {
    outer: usize,
    inner: usize,
    av_variant: bool,
    hwp_offset: f64,
}

impl CycleConfig {
    /// `outer` is `M`, `inner` is `N`; both must be at least 1.
    pub fn new(outer: usize, inner: usize) -> Result<Self> {
        if outer == 0 || inner == 0 {
            return Err(Error::InvalidArgument(format!(
                "cycle counts must be positive (M = {outer}, N = {inner})"
            )));
        }
        Ok(CycleConfig {
            outer,
            inner,
            av_variant: false,
            hwp_offset: 0.0,
        })
    }

    /// Runs `2N` inner cycles per outer cycle. A "not blocking" run then blocks the
    /// `N`-th inner cycle only.
    pub fn with_av_variant(mut self, on: bool) -> Self {
        self.av_variant = on;
        self
    }

    /// Adds `offset` radians to every inner half-wave plate rotation.
    ///
    /// This is a stand-in imperfection model used to exercise the AV variant; it is
    /// not a calibrated description of any optical component.
    pub fn with_hwp_offset(mut self, offset: f64) -> Result<Self> {
        self.hwp_offset = finite("hwp_offset", offset)?;
        Ok(self)
    }

    pub fn outer(&self) -> usize {
        self.outer
    }

    pub fn inner(&self) -> usize {
        self.inner
    }

    pub fn av_variant(&self) -> bool {
        self.av_variant
    }

    pub fn hwp_offset(&self) -> f64 {
        self.hwp_offset
    }

    /// Inner cycles per outer cycle: `N`, or `2N` in the AV variant.
    pub fn inner_steps(&self) -> usize {
        if self.av_variant {
            2 * self.inner
        } else {
            self.inner
        }
    }

    /// Inner cycles per run.
    pub fn schedule_len(&self) -> usize {
        self.outer * self.inner_steps()
    }

    pub(crate) fn outer_hwp(&self) -> Op2 {
        Op2::rot_y(PI / self.outer as f64)
    }

    pub(crate) fn inner_hwp(&self) -> Op2 {
        Op2::rot_y(PI / self.inner as f64 + self.hwp_offset)
    }

    /// `V` amplitude kept by an inner chain in which Bob blocks every cycle:
    /// `cos(π/2N)^N` (or `^2N` in the AV variant).
    pub fn blocked_retention(&self) -> f64 {
        let half = (PI / self.inner as f64 + self.hwp_offset) / 2.0;
        half.cos().powi(self.inner_steps() as i32)
    }
}

/// Bob's choice for a whole run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockPolicy {
    BlockAll,
    BlockNone,
}

/// Per-inner-cycle blocking decisions for one run, outer-cycle major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockSchedule {
    steps_per_outer: usize,
    blocks: Vec<bool>,
}

impl BlockSchedule {
    pub fn from_policy(cfg: &CycleConfig, policy: BlockPolicy) -> Self {
        match policy {
            BlockPolicy::BlockAll => Self::block_all(cfg),
            BlockPolicy::BlockNone => Self::block_none(cfg),
        }
    }

    pub fn block_all(cfg: &CycleConfig) -> Self {
        Self::uniform_outer(cfg, |_| true)
    }

    /// Bob never blocks; in the AV variant he blocks only inner cycle `N` (1-based)
    /// of every outer cycle.
    pub fn block_none(cfg: &CycleConfig) -> Self {
        if cfg.av_variant {
            Self::av_pass(cfg)
        } else {
            Self::uniform_outer(cfg, |_| false)
        }
    }

    /// The AV "not blocking" pattern: block inner cycle `N` of `2N` only.
    pub fn av_pass(cfg: &CycleConfig) -> Self {
        let steps = 2 * cfg.inner;
        let blocks = (0..cfg.outer)
            .flat_map(|_| (0..steps).map(|j| j + 1 == cfg.inner))
            .collect();
        BlockSchedule {
            steps_per_outer: steps,
            blocks,
        }
    }

    /// Bob blocks every inner cycle of outer cycle `m` iff `blocked(m)`.
    pub fn uniform_outer(cfg: &CycleConfig, blocked: impl Fn(usize) -> bool) -> Self {
        let steps = cfg.inner_steps();
        let blocks = (0..cfg.outer)
            .flat_map(|m| std::iter::repeat_n(blocked(m), steps))
            .collect();
        BlockSchedule {
            steps_per_outer: steps,
            blocks,
        }
    }

    /// An explicit schedule; its length is checked against `cfg`.
    pub fn from_decisions(cfg: &CycleConfig, blocks: Vec<bool>) -> Result<Self> {
        if blocks.len() != cfg.schedule_len() {
            return Err(Error::ScheduleLength {
                expected: cfg.schedule_len(),
                got: blocks.len(),
            });
        }
        Ok(BlockSchedule {
            steps_per_outer: cfg.inner_steps(),
            blocks,
        })
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn decisions(&self) -> &[bool] {
        &self.blocks
    }

    /// Decisions for outer cycle `m`.
    pub fn outer(&self, m: usize) -> &[bool] {
        let start = m * self.steps_per_outer;
        &self.blocks[start..start + self.steps_per_outer]
    }

    fn check(&self, cfg: &CycleConfig) -> Result<()> {
        if self.blocks.len() != cfg.schedule_len() || self.steps_per_outer != cfg.inner_steps() {
            return Err(Error::ScheduleLength {
                expected: cfg.schedule_len(),
                got: self.blocks.len(),
            });
        }
        Ok(())
    }
}

/// Where an absorbed amplitude ended up.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossSite {
    /// Exit of an inner chain: `H` amplitude that came back from Bob.
    DetectorA,
    /// Bob's block.
    DetectorB,
    /// Alice's deliberate outer-arm attenuation.
    Attenuator,
    /// Amplitude that left a phase unit in a time bin other than the selected one.
    WrongBin,
    /// Amplitude still circulating when a phase unit shuts down.
    Residual,
}

/// Position of a loss event: run, outer cycle and inner cycle (all 0-based).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CycleIndex {
    pub run: usize,
    pub outer: usize,
    pub inner: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossEvent {
    pub site: LossSite,
    pub at: CycleIndex,
    #[serde(with = "crate::json::complex")]
    pub amplitude: C64,
}

/// Record of every amplitude removed from the photon.
///
/// Each event is a distinct detector mode or time slot, so the lost probability is
/// the sum of `|amplitude|²` over events.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LossLedger {
    events: Vec<LossEvent>,
    total_lost_prob: f64,
}

impl LossLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, site: LossSite, at: CycleIndex, amplitude: C64) {
        if amplitude == ZERO {
            return;
        }
        self.total_lost_prob += amplitude.norm_sqr();
        self.events.push(LossEvent {
            site,
            at,
            amplitude,
        });
    }

    pub fn events(&self) -> &[LossEvent] {
        &self.events
    }

    pub fn at_site(&self, site: LossSite) -> impl Iterator<Item = &LossEvent> {
        self.events.iter().filter(move |e| e.site == site)
    }

    pub fn lost_da(&self) -> Vec<LossEvent> {
        self.at_site(LossSite::DetectorA).copied().collect()
    }

    pub fn lost_db(&self) -> Vec<LossEvent> {
        self.at_site(LossSite::DetectorB).copied().collect()
    }

    pub fn total_lost_prob(&self) -> f64 {
        self.total_lost_prob
    }

    pub fn lost_prob_at(&self, site: LossSite) -> f64 {
        self.at_site(site).map(|e| e.amplitude.norm_sqr()).sum()
    }

    pub fn merge(&mut self, other: LossLedger) {
        self.total_lost_prob += other.total_lost_prob;
        self.events.extend(other.events);
    }
}

/// Runs an inner chain up to, but not through, its exit beamsplitter.
///
/// `blocks` holds one decision per inner cycle. Each cycle applies the inner
/// half-wave plate, then sends the `H` part to Bob: blocked amplitude is recorded at
/// `D_B`; reflected amplitude returns and the inner mode is tagged from then on.
pub fn inner_chain_pre_exit(
    state: &PolState,
    cfg: &CycleConfig,
    blocks: &[bool],
    ledger: &mut LossLedger,
    at: CycleIndex,
) -> Result<PolState> {
    if blocks.len() != cfg.inner_steps() {
        return Err(Error::ScheduleLength {
            expected: cfg.inner_steps(),
            got: blocks.len(),
        });
    }
    let hwp = cfg.inner_hwp();
    let mut s = *state;
    for (j, &blocked) in blocks.iter().enumerate() {
        s = s.apply(&hwp);
        if blocked {
            ledger.record(LossSite::DetectorB, CycleIndex { inner: j, ..at }, s.amp_h());
            s = s.v_part();
        } else {
            s = s.taint();
        }
    }
    Ok(s)
}

/// Runs a full inner chain: [`inner_chain_pre_exit`], then the exit beamsplitter
/// sends the remaining `H` amplitude to `D_A`. The result is pure `V`.
pub fn inner_chain(
    state: &PolState,
    cfg: &CycleConfig,
    blocks: &[bool],
    ledger: &mut LossLedger,
    at: CycleIndex,
) -> Result<PolState> {
    let s = inner_chain_pre_exit(state, cfg, blocks, ledger, at)?;
    let last = CycleIndex {
        inner: blocks.len().saturating_sub(1),
        ..at
    };
    ledger.record(LossSite::DetectorA, last, s.amp_h());
    Ok(s.v_part())
}

/// One run with a uniform policy. Returns the state before the final beamsplitter.
pub fn outer_run(
    state: &PolState,
    cfg: &CycleConfig,
    policy: BlockPolicy,
    ledger: &mut LossLedger,
) -> Result<PolState> {
    run_scheduled(state, cfg, &BlockSchedule::from_policy(cfg, policy), None, ledger, 0)
}

/// One run following `schedule`; `arm_attenuation` scales Alice's outer arm once per
/// outer cycle, just before recombination. `run` labels the ledger entries.
pub fn run_scheduled(
    state: &PolState,
    cfg: &CycleConfig,
    schedule: &BlockSchedule,
    arm_attenuation: Option<f64>,
    ledger: &mut LossLedger,
    run: usize,
) -> Result<PolState> {
    schedule.check(cfg)?;
    let hwp = cfg.outer_hwp();
    let mut s = *state;
    for m in 0..cfg.outer {
        s = s.apply(&hwp);
        let mut outer_arm = s.h_part();
        let at = CycleIndex {
            run,
            outer: m,
            inner: 0,
        };
        let inner_out = inner_chain(&s.v_part(), cfg, schedule.outer(m), ledger, at)?;
        if let Some(a) = arm_attenuation {
            // The attenuator reflects sqrt(1 - a²) of the amplitude into a dump mode.
            let dropped = outer_arm.amp_h() * (1.0 - a * a).max(0.0).sqrt();
            ledger.record(LossSite::Attenuator, at, dropped);
            outer_arm = outer_arm.scale(C64::new(a, 0.0));
        }
        s = outer_arm.add(&inner_out);
    }
    Ok(s)
}

/// Closed-form per-outer-cycle operator with uniform blocking:
/// `diag(1, r)·Ry(π/M)` where `r` is the inner chain's `V` retention.
pub fn outer_cycle_operator(cfg: &CycleConfig, policy: BlockPolicy) -> Op2 {
    let r = match policy {
        BlockPolicy::BlockAll => cfg.blocked_retention(),
        BlockPolicy::BlockNone => 0.0,
    };
    Op2::diag(C64::new(1.0, 0.0), C64::new(r, 0.0)) * cfg.outer_hwp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::ONE;
    use crate::state::bob_tag_weight;

    fn cfg(m: usize, n: usize) -> CycleConfig {
        CycleConfig::new(m, n).unwrap()
    }

    #[test]
    fn rejects_zero_cycles() {
        assert!(CycleConfig::new(0, 3).is_err());
        assert!(CycleConfig::new(3, 0).is_err());
    }

    #[test]
    fn blocked_chain_matches_closed_form_n4() {
        let c = cfg(1, 4);
        let mut ledger = LossLedger::new();
        let out = inner_chain(
            &PolState::vertical(),
            &c,
            &[true; 4],
            &mut ledger,
            CycleIndex::default(),
        )
        .unwrap();
        let (s, co) = (PI / 8.0).sin_cos();
        assert!((out.amp_v().re - co.powi(4)).abs() < 1e-15);
        assert_eq!(out.amp_h(), ZERO);
        // The last crossing carries the cos³·sin residue.
        let db = ledger.lost_db();
        assert_eq!(db.len(), 4);
        assert!((db[3].amplitude.norm() - co.powi(3) * s).abs() < 1e-15);
        assert!(ledger.lost_da().is_empty());
    }

    #[test]
    fn blocked_chain_n2_survival_quarter() {
        let c = cfg(1, 2);
        let mut ledger = LossLedger::new();
        let out = inner_chain(
            &PolState::vertical(),
            &c,
            &[true, true],
            &mut ledger,
            CycleIndex::default(),
        )
        .unwrap();
        // Oracle: iterate the projector-after-rotation product on (0, 1).
        let mut v = ONE;
        for _ in 0..2 {
            v = Op2::rot_y(PI / 2.0).apply(ZERO, v).1;
        }
        assert!((out.amp_v() - v).norm() < 1e-15);
        assert!((out.norm_sqr() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn unblocked_chain_sends_everything_to_da() {
        for n in 1..=40 {
            let c = cfg(1, n);
            let mut ledger = LossLedger::new();
            let out = inner_chain(
                &PolState::vertical(),
                &c,
                &vec![false; n],
                &mut ledger,
                CycleIndex::default(),
            )
            .unwrap();
            assert!(out.norm_sqr() < 1e-28, "N = {n}");
            assert!((ledger.lost_prob_at(LossSite::DetectorA) - 1.0).abs() < 1e-12);
            assert!(ledger.lost_db().is_empty());
            assert!(bob_tag_weight(&out) < 1e-28);
        }
    }

    #[test]
    fn tag_present_before_exit_when_not_blocking() {
        let c = cfg(1, 6);
        let mut ledger = LossLedger::new();
        let pre = inner_chain_pre_exit(
            &PolState::vertical(),
            &c,
            &[false; 6],
            &mut ledger,
            CycleIndex::default(),
        )
        .unwrap();
        assert!(bob_tag_weight(&pre) > 0.5);
        let partial = inner_chain_pre_exit(
            &PolState::vertical(),
            &cfg(1, 3),
            &[false; 3],
            &mut LossLedger::new(),
            CycleIndex::default(),
        )
        .unwrap();
        assert!(bob_tag_weight(&partial) > 0.0);
    }

    #[test]
    fn schedule_length_mismatch() {
        let c = cfg(2, 3);
        let err = inner_chain(
            &PolState::vertical(),
            &c,
            &[true; 2],
            &mut LossLedger::new(),
            CycleIndex::default(),
        );
        assert!(matches!(err, Err(Error::ScheduleLength { expected: 3, got: 2 })));
        assert!(BlockSchedule::from_decisions(&c, vec![true; 5]).is_err());
        let other = BlockSchedule::block_all(&cfg(3, 3));
        let err = run_scheduled(&PolState::horizontal(), &c, &other, None, &mut LossLedger::new(), 0);
        assert!(matches!(err, Err(Error::ScheduleLength { .. })));
    }

    #[test]
    fn block_none_retains_cos_power() {
        let c = cfg(2, 7);
        let mut ledger = LossLedger::new();
        let out = outer_run(&PolState::horizontal(), &c, BlockPolicy::BlockNone, &mut ledger).unwrap();
        assert!((out.amp_h().re - 0.5).abs() < 1e-15);
        assert!(out.amp_v().norm() < 1e-15);
        assert!((out.norm_sqr() + ledger.total_lost_prob() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn block_all_matches_matrix_power_oracle() {
        let c = cfg(5, 10);
        let mut ledger = LossLedger::new();
        let out = outer_run(&PolState::horizontal(), &c, BlockPolicy::BlockAll, &mut ledger).unwrap();
        let cn = (PI / 20.0).cos().powi(10);
        let step = Op2::diag(ONE, C64::new(cn, 0.0)) * Op2::rot_y(PI / 5.0);
        let (h, v) = step.pow(5).apply(ONE, ZERO);
        assert!((out.amp_h() - h).norm() < 1e-12);
        assert!((out.amp_v() - v).norm() < 1e-12);
        assert_eq!(bob_tag_weight(&out), 0.0);
    }

    #[test]
    fn block_all_approaches_vertical() {
        let c = cfg(50, 5000);
        let out = outer_run(
            &PolState::horizontal(),
            &c,
            BlockPolicy::BlockAll,
            &mut LossLedger::new(),
        )
        .unwrap();
        assert!(out.amp_v().re > 0.98);
        assert!(out.amp_h().norm() < 0.05);
    }

    #[test]
    fn av_pattern_blocks_nth_cycle() {
        let c = cfg(2, 3).with_av_variant(true);
        let s = BlockSchedule::block_none(&c);
        assert_eq!(s.len(), 12);
        assert_eq!(s.outer(0), &[false, false, true, false, false, false]);
        assert_eq!(s.outer(1), s.outer(0));
        assert!(BlockSchedule::block_all(&c).decisions().iter().all(|&b| b));
    }

    #[test]
    fn av_pass_has_no_surviving_v() {
        for n in 1..=20 {
            let c = cfg(1, n).with_av_variant(true);
            let mut ledger = LossLedger::new();
            let out = inner_chain(
                &PolState::vertical(),
                &c,
                BlockSchedule::block_none(&c).outer(0),
                &mut ledger,
                CycleIndex::default(),
            )
            .unwrap();
            assert!(out.norm_sqr() < 1e-28, "N = {n}");
        }
    }

    #[test]
    fn av_suppresses_imperfection_residue() {
        let eps = 0.01;
        let plain = cfg(1, 20).with_hwp_offset(eps).unwrap();
        let av = plain.with_av_variant(true);
        let run = |c: &CycleConfig| {
            inner_chain(
                &PolState::vertical(),
                c,
                BlockSchedule::block_none(c).outer(0),
                &mut LossLedger::new(),
                CycleIndex::default(),
            )
            .unwrap()
            .norm()
        };
        let (r_plain, r_av) = (run(&plain), run(&av));
        // A total over-rotation of Nε leaves sin(Nε/2) of V; the AV block at cycle N
        // squares it.
        let first_order = (20.0 * eps / 2.0).sin();
        assert!((r_plain - first_order).abs() < 1e-12);
        assert!((r_av - first_order * first_order).abs() < 1e-12);
    }

    #[test]
    fn ledger_skips_zero_amplitudes() {
        let mut ledger = LossLedger::new();
        ledger.record(LossSite::DetectorA, CycleIndex::default(), ZERO);
        assert!(ledger.events().is_empty());
        ledger.record(LossSite::DetectorB, CycleIndex::default(), C64::new(0.0, 0.5));
        assert!((ledger.total_lost_prob() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn attenuation_is_recorded() {
        let c = cfg(3, 4);
        let mut ledger = LossLedger::new();
        let sched = BlockSchedule::block_all(&c);
        let out = run_scheduled(&PolState::horizontal(), &c, &sched, Some(0.5), &mut ledger, 0).unwrap();
        assert!(ledger.lost_prob_at(LossSite::Attenuator) > 0.0);
        assert!((out.norm_sqr() + ledger.total_lost_prob() - 1.0).abs() < 1e-12);
    }
}
