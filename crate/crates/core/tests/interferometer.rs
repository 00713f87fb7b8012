use std::f64::consts::PI;

use exfree::gates::C64;
use exfree::interferometer::{
    inner_chain, outer_cycle_operator, outer_run, run_scheduled, BlockPolicy, BlockSchedule, CycleConfig,
    CycleIndex, LossLedger,
};
use exfree::{bob_tag_weight, PolState};
use proptest::prelude::*;

fn policy() -> impl Strategy<Value = u8> {
    0u8..3
}

fn schedule(cfg: &CycleConfig, which: u8) -> BlockSchedule {
    match which {
        0 => BlockSchedule::block_all(cfg),
        1 => BlockSchedule::block_none(cfg),
        _ => BlockSchedule::av_pass(cfg),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norm_is_conserved(m in 1usize..=50, n in 1usize..=50, which in policy(), av in any::<bool>(),
                         re_h in -1.0f64..1.0, im_v in -1.0f64..1.0) {
        let cfg = CycleConfig::new(m, n).unwrap().with_av_variant(av || which == 2);
        let input = PolState::new(C64::new(re_h, 0.0), C64::new(0.0, im_v)).normalized();
        let mut ledger = LossLedger::new();
        let out = run_scheduled(&input, &cfg, &schedule(&cfg, which), None, &mut ledger, 0).unwrap();
        prop_assert!((out.norm_sqr() + ledger.total_lost_prob() - input.norm_sqr()).abs() < 1e-12);
        prop_assert!(out.tag_weight() <= out.norm_sqr() + 1e-12);
    }

    #[test]
    fn survivors_never_visited_bob(m in 1usize..=30, n in 1usize..=30, block in any::<bool>()) {
        let cfg = CycleConfig::new(m, n).unwrap();
        let policy = if block { BlockPolicy::BlockAll } else { BlockPolicy::BlockNone };
        let out = outer_run(&PolState::horizontal(), &cfg, policy, &mut LossLedger::new()).unwrap();
        prop_assert!(bob_tag_weight(&out) < 1e-12);
    }

    #[test]
    fn uniform_runs_match_transfer_matrix(m in 1usize..=20, n in 1usize..=40, block in any::<bool>()) {
        let cfg = CycleConfig::new(m, n).unwrap();
        let policy = if block { BlockPolicy::BlockAll } else { BlockPolicy::BlockNone };
        let out = outer_run(&PolState::horizontal(), &cfg, policy, &mut LossLedger::new()).unwrap();
        let op = outer_cycle_operator(&cfg, policy).pow(m as u32);
        prop_assert!((out.amp_h() - op.get(0, 0)).norm() < 1e-12);
        prop_assert!((out.amp_v() - op.get(1, 0)).norm() < 1e-12);
    }
}

#[test]
fn unblocked_retention_closed_form() {
    for m in 1..=50 {
        let cfg = CycleConfig::new(m, 7).unwrap();
        let out = outer_run(&PolState::horizontal(), &cfg, BlockPolicy::BlockNone, &mut LossLedger::new()).unwrap();
        let expected = (PI / (2.0 * m as f64)).cos().powi(m as i32);
        assert!((out.amp_h().re - expected).abs() < 1e-12, "M={m}");
    }
}

#[test]
fn av_pass_empties_inner_arm() {
    for n in 1..=30 {
        let cfg = CycleConfig::new(1, n).unwrap().with_av_variant(true);
        let sched = BlockSchedule::av_pass(&cfg);
        let out = inner_chain(&PolState::vertical(), &cfg, sched.outer(0), &mut LossLedger::new(), CycleIndex::default())
            .unwrap();
        assert!(out.norm() < 1e-12, "N={n}");
    }
}

#[test]
fn ledger_locates_losses() {
    let cfg = CycleConfig::new(3, 4).unwrap();
    let mut ledger = LossLedger::new();
    outer_run(&PolState::horizontal(), &cfg, BlockPolicy::BlockAll, &mut ledger).unwrap();
    assert!(ledger.lost_da().is_empty());
    assert!(ledger.lost_db().iter().all(|e| e.at.outer < 3 && e.at.inner < 4));
    let mut open = LossLedger::new();
    outer_run(&PolState::horizontal(), &cfg, BlockPolicy::BlockNone, &mut open).unwrap();
    assert!(open.lost_db().is_empty());
    assert_eq!(open.lost_da().len(), 3);
}
