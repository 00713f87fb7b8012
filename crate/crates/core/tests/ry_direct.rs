use exfree::gates::{haar_unitary, ry};
use exfree::ry_direct::{run_ry_direct, run_ry_direct_arbitrary, RyDirectConfig};
use exfree::{bob_tag_weight, CycleConfig, PolState};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_form_holds(m in 2usize..=30, n in 2usize..=30, frac in 0.0f64..=1.0) {
        let k = (frac * m as f64).round() as usize;
        let cfg = RyDirectConfig::new(CycleConfig::new(m, n).unwrap(), k).unwrap();
        let r = run_ry_direct(&cfg).unwrap();
        let amp = cfg.closed_form_amplitude();
        prop_assert!((r.survival_prob - amp * amp).abs() < 1e-12);
        prop_assert!(r.out_state.distance(&cfg.target_state()) < 1e-12);
        prop_assert!(bob_tag_weight(&r.out_state) < 1e-12);
    }

    #[test]
    fn output_ignores_inner_cycles(m in 2usize..=12, n1 in 2usize..=30, n2 in 2usize..=30, frac in 0.0f64..=1.0) {
        let k = (frac * m as f64).round() as usize;
        let a = run_ry_direct(&RyDirectConfig::new(CycleConfig::new(m, n1).unwrap(), k).unwrap()).unwrap();
        let b = run_ry_direct(&RyDirectConfig::new(CycleConfig::new(m, n2).unwrap(), k).unwrap()).unwrap();
        prop_assert!(a.out_state.distance(&b.out_state) < 1e-12);
    }
}

#[test]
fn arbitrary_inputs_rotate() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let cfg = RyDirectConfig::new(CycleConfig::new(9, 20).unwrap(), 4).unwrap();
    for _ in 0..20 {
        let input = PolState::horizontal().apply(&haar_unitary(&mut rng));
        let r = run_ry_direct_arbitrary(&input, &cfg).unwrap();
        let expected = input.apply(&ry(cfg.angle()).unwrap());
        assert!(r.out_state.distance_up_to_phase(&expected) < 1e-12);
        assert!((r.success_prob - 0.5 * r.branch_survival).abs() < 1e-12);
    }
}
