//! A doubly controlled unitary on Alice's qubit with Bob's classical choices as
//! controls.
//!
//! The standard two-control network applies controlled-`V`, a CNOT between the
//! controls, controlled-`V†`, the CNOT again and controlled-`V`, with `V² = U`. When
//! the controls are classical bits `b1, b2` that Bob sets exchange-free, the target
//! sees `V^{b1} · V†^{b1⊕b2} · V^{b2}`, which is `U^{b1·b2}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{dist_up_to_global_phase, require_unitary, Op2, ONE};
use crate::interferometer::CycleConfig;
use crate::protocol::{compile, quantization_bound, run_protocol};
use crate::state::PolState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClassicalControls {
    pub b1: bool,
    pub b2: bool,
}

impl ClassicalControls {
    pub fn new(b1: bool, b2: bool) -> Self {
        ClassicalControls { b1, b2 }
    }

    pub fn all() -> [ClassicalControls; 4] {
        [(false, false), (false, true), (true, false), (true, true)].map(|(a, b)| Self::new(a, b))
    }
}

/// Principal square root of a unitary: eigenvalue roots taken with argument in
/// `(−π/2, π/2]`.
pub fn sqrt_unitary(u: &Op2) -> Result<Op2> {
    require_unitary(u, 1e-10)?;
    let half_tr = u.trace() / 2.0;
    let disc = (half_tr * half_tr - u.det()).sqrt();
    let (l1, l2) = (half_tr + disc, half_tr - disc);
    let (m1, m2) = (l1.sqrt(), l2.sqrt());
    // (U + μ1μ2)/(μ1 + μ2) has eigenvalues μ1 and μ2 on the eigenvectors of U.
    let sum = m1 + m2;
    if sum.norm() < 1e-12 {
        return Err(Error::InvalidArgument(
            "eigenvalues straddle the branch cut; principal root is undefined".into(),
        ));
    }
    let shifted = Op2::from_rows(u.get(0, 0) + m1 * m2, u.get(0, 1), u.get(1, 0), u.get(1, 1) + m1 * m2);
    Ok(shifted.scale(ONE / sum))
}

/// The gates the target sees in order, each either `V`, `V†` or the identity.
pub fn network_gates(controls: ClassicalControls, v: &Op2) -> [Op2; 3] {
    let pick = |on: bool, g: Op2| if on { g } else { Op2::IDENTITY };
    [
        pick(controls.b2, *v),
        pick(controls.b1 ^ controls.b2, v.dagger()),
        pick(controls.b1, *v),
    ]
}

/// Runs the network on `target` with Bob's bits in place of the control qubits.
pub fn apply_network(target: &PolState, controls: ClassicalControls, u: &Op2) -> Result<PolState> {
    let v = sqrt_unitary(u)?;
    Ok(network_gates(controls, &v)
        .iter()
        .fold(*target, |s, g| s.apply(g)))
}

/// `U^{b1·b2}`.
pub fn expected_gate(controls: ClassicalControls, u: &Op2) -> Op2 {
    if controls.b1 && controls.b2 {
        *u
    } else {
        Op2::IDENTITY
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkViaProtocol {
    pub out_state: PolState,
    pub total_survival: f64,
    /// Sum of the quantisation bounds of the gates run.
    pub error_bound: f64,
}

/// The same network with every non-identity gate compiled to a Bob program at
/// resolution `l` and run through the exchange-free protocol.
pub fn apply_network_via_protocol(
    target: &PolState,
    controls: ClassicalControls,
    u: &Op2,
    cycle: &CycleConfig,
    l: usize,
) -> Result<NetworkViaProtocol> {
    let v = sqrt_unitary(u)?;
    let mut state = *target;
    let mut survival = 1.0;
    let mut error_bound = 0.0;
    for g in network_gates(controls, &v) {
        if g == Op2::IDENTITY {
            continue;
        }
        let prog = compile(&g, l)?.program;
        let res = run_protocol(&state, &prog, cycle)?;
        state = res.out_state;
        survival *= res.total_survival;
        error_bound += quantization_bound(l);
    }
    Ok(NetworkViaProtocol {
        out_state: state,
        total_survival: survival,
        error_bound,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CcuRow {
    pub b1: bool,
    pub b2: bool,
    /// 0 for `|H⟩`, 1 for `|V⟩`.
    pub target: u8,
    pub out: PolState,
    pub expected: PolState,
    pub distance: f64,
}

/// Every control pattern on both basis targets.
pub fn ccu_table(u: &Op2) -> Result<Vec<CcuRow>> {
    let mut rows = Vec::with_capacity(8);
    for controls in ClassicalControls::all() {
        for (target, input) in [(0u8, PolState::horizontal()), (1, PolState::vertical())] {
            let out = apply_network(&input, controls, u)?;
            let expected = input.apply(&expected_gate(controls, u));
            rows.push(CcuRow {
                b1: controls.b1,
                b2: controls.b2,
                target,
                out,
                expected,
                distance: out.distance_up_to_phase(&expected),
            });
        }
    }
    Ok(rows)
}

/// Largest operator distance between the network and `U^{b1·b2}` over all patterns.
pub fn network_error(u: &Op2) -> Result<f64> {
    let v = sqrt_unitary(u)?;
    let mut worst: f64 = 0.0;
    for c in ClassicalControls::all() {
        let g = network_gates(c, &v);
        let net = g[2] * g[1] * g[0];
        worst = worst.max(dist_up_to_global_phase(&net, &expected_gate(c, u)));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{haar_unitary, hadamard, pauli_x, C64};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sqrt_of_identity() {
        let v = sqrt_unitary(&Op2::IDENTITY).unwrap();
        assert!(v.sub(&Op2::IDENTITY).frobenius_norm() < 1e-15);
    }

    #[test]
    fn sqrt_of_x() {
        let v = sqrt_unitary(&pauli_x()).unwrap();
        let p = C64::new(0.5, 0.5);
        let m = C64::new(0.5, -0.5);
        let expected = Op2::from_rows(p, m, m, p);
        assert!(v.sub(&expected).frobenius_norm() < 1e-15);
        assert!((v * v).sub(&pauli_x()).frobenius_norm() < 1e-15);
    }

    #[test]
    fn sqrt_of_random_unitaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let u = haar_unitary(&mut rng);
            let v = sqrt_unitary(&u).unwrap();
            assert!((v * v).sub(&u).frobenius_norm() < 1e-10);
        }
    }

    #[test]
    fn sqrt_rejects_non_unitary() {
        assert!(sqrt_unitary(&Op2::IDENTITY.scale(C64::new(2.0, 0.0))).is_err());
    }

    #[test]
    fn toffoli_rows() {
        let table = ccu_table(&pauli_x()).unwrap();
        assert_eq!(table.len(), 8);
        for row in &table {
            assert!(row.distance < 1e-12, "{row:?}");
        }
        let flipped = apply_network(&PolState::horizontal(), ClassicalControls::new(true, true), &pauli_x()).unwrap();
        assert!(flipped.distance_up_to_phase(&PolState::vertical()) < 1e-12);
        let idle = apply_network(&PolState::horizontal(), ClassicalControls::new(true, false), &pauli_x()).unwrap();
        assert!(idle.distance(&PolState::horizontal()) < 1e-12);
    }

    #[test]
    fn via_protocol_within_bound() {
        let cycle = CycleConfig::new(3, 3).unwrap();
        let u = hadamard();
        for c in ClassicalControls::all() {
            let r = apply_network_via_protocol(&PolState::horizontal(), c, &u, &cycle, 64).unwrap();
            let exact = apply_network(&PolState::horizontal(), c, &u).unwrap();
            assert!(r.out_state.distance_up_to_phase(&exact) <= r.error_bound + 1e-12);
        }
    }
}
