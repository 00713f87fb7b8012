use std::f64::consts::PI;

use exfree::gates::C64;
use exfree::phase_unit::{run_phase_unit, send_dit, survival_surface, transmit, InputPol, PhaseUnitConfig, UnitMode};
use exfree::{bob_tag_weight, CycleConfig, PolState};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn post_selection_is_exact(m in 2usize..=30, n in 2usize..=30, l in 4usize..=32, frac in 0.0f64..=1.0) {
        let k = (frac * l as f64).round() as usize;
        let cfg = PhaseUnitConfig::new(CycleConfig::new(m, n).unwrap(), l, k).unwrap();
        let r = run_phase_unit(&cfg).unwrap();
        let target = PolState::new(C64::from_polar(1.0, k as f64 * PI / l as f64), C64::new(0.0, 0.0));
        prop_assert!(r.out_state.distance(&target) < 1e-12);
        prop_assert!(bob_tag_weight(&r.out_state) < 1e-12);
        prop_assert_eq!(r.exit_bin, k);
    }

    #[test]
    fn v_input_mirrors_h_input(m in 2usize..=15, n in 2usize..=15, l in 2usize..=16, frac in 0.0f64..=1.0) {
        let k = (frac * l as f64).round() as usize;
        let cfg = PhaseUnitConfig::new(CycleConfig::new(m, n).unwrap(), l, k).unwrap();
        let h = run_phase_unit(&cfg).unwrap();
        let v = run_phase_unit(&cfg.with_input(InputPol::V)).unwrap();
        prop_assert!((h.raw_out.amp_h() - v.raw_out.amp_v()).norm() < 1e-12);
        prop_assert!(v.raw_out.amp_h().norm() < 1e-15);
    }
}

#[test]
fn survival_is_mode_and_l_independent() {
    let c = CycleConfig::new(20, 20).unwrap();
    let base = run_phase_unit(&PhaseUnitConfig::new(c, 10, 5).unwrap()).unwrap().survival_prob;
    let wide = run_phase_unit(&PhaseUnitConfig::new(c, 40, 5).unwrap()).unwrap().survival_prob;
    assert!((base - wide).abs() < 1e-12);
    for mode in [UnitMode::Dit, UnitMode::DelayOnly] {
        let cfg = PhaseUnitConfig::new(c, 10, 5).unwrap().with_mode(mode).unwrap();
        assert!((run_phase_unit(&cfg).unwrap().survival_prob - base).abs() < 1e-12);
    }
}

#[test]
fn k_zero_surface_is_one_blocked_run() {
    let grid = [(5, 5), (10, 20), (20, 10)];
    for p in survival_surface(&grid, 0, 8).unwrap() {
        let c = CycleConfig::new(p.outer, p.inner).unwrap();
        let s = exfree::interferometer::outer_run(
            &PolState::horizontal(),
            &c,
            exfree::BlockPolicy::BlockAll,
            &mut exfree::LossLedger::new(),
        )
        .unwrap()
        .amp_v()
        .norm_sqr();
        assert!((p.survival - s).abs() < 1e-12);
    }
}

#[test]
fn surface_increases_with_inner_cycles() {
    let ns = [5, 10, 20, 40];
    for k in [1, 5] {
        let grid: Vec<_> = ns.iter().map(|&n| (10, n)).collect();
        let pts = survival_surface(&grid, k, 20).unwrap();
        assert!(pts.windows(2).all(|w| w[1].survival >= w[0].survival), "k={k}");
    }
}

#[test]
fn random_dits_decode() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let c = CycleConfig::new(8, 8).unwrap();
    for _ in 0..30 {
        let l = rng.random_range(2..=24);
        let k = rng.random_range(0..l);
        let cfg = PhaseUnitConfig::new(c, l, k).unwrap().with_mode(UnitMode::Dit).unwrap();
        assert_eq!(send_dit(&cfg).unwrap().bin, k);
    }
}

#[test]
fn scaled_input_scales_output() {
    let cfg = PhaseUnitConfig::new(CycleConfig::new(6, 6).unwrap(), 6, 2).unwrap();
    let half = transmit(&cfg, &PolState::new(C64::new(0.5, 0.0), C64::new(0.0, 0.0))).unwrap();
    let full = run_phase_unit(&cfg).unwrap();
    assert!((half.raw_out.amp_h() * 2.0 - full.raw_out.amp_h()).norm() < 1e-15);
    assert!((half.survival_prob - full.survival_prob).abs() < 1e-15);
}
