use exfree::gates::haar_unitary;
use exfree::remote_circuit::{
    apply_network, apply_network_via_protocol, ccu_table, network_error, sqrt_unitary, ClassicalControls,
};
use exfree::{CycleConfig, PolState};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn network_is_doubly_controlled_u() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..20 {
        let u = haar_unitary(&mut rng);
        assert!(network_error(&u).unwrap() < 1e-12);
        assert!(ccu_table(&u).unwrap().iter().all(|row| row.distance < 1e-12));
        let v = sqrt_unitary(&u).unwrap();
        assert!((v * v).sub(&u).frobenius_norm() < 1e-10);
    }
}

#[test]
fn protocol_pipeline_agrees() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let cycle = CycleConfig::new(3, 4).unwrap();
    for _ in 0..3 {
        let u = haar_unitary(&mut rng);
        let target = PolState::horizontal().apply(&haar_unitary(&mut rng));
        for c in ClassicalControls::all() {
            let exact = apply_network(&target, c, &u).unwrap();
            let via = apply_network_via_protocol(&target, c, &u, &cycle, 128).unwrap();
            assert!(via.out_state.distance_up_to_phase(&exact) <= via.error_bound + 1e-12);
            assert!(via.total_survival > 0.0);
        }
    }
}
