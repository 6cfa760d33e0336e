use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use rand::{rngs::StdRng, SeedableRng};

use qwalk_core::circuit::{
    compile_program, compile_state_prep, compile_step, compile_walk, export_qasm, gate_report, parse_qasm,
    program_matrix, qasm_round_trip_deviation, register_to_walker, simulate, verify, walk_matrix_register_order,
    walker_to_register, Gate, PositionPrep,
};
use qwalk_core::coin::{CoinSpec, WEYL_MAJORANA};
use qwalk_core::lattice::{build_state, inner_product, InitialStateSpec, Lattice, WalkerState};
use qwalk_core::linalg::vdot;
use qwalk_core::walk::{evolve, Observe, Variant, WalkOperator};

fn operators(theta: f64, phi: f64) -> Vec<WalkOperator> {
    let c = CoinSpec::new(theta, phi).unwrap();
    let mut ops: Vec<WalkOperator> = Variant::SINGLE_COIN.iter().map(|&v| WalkOperator::new(v, c)).collect();
    ops.push(WalkOperator::sqw(CoinSpec::new(0.3 * theta + 0.2, phi).unwrap(), c));
    ops
}

#[test]
fn every_variant_matches_dense_operator() {
    for k in 1..=3u32 {
        let lat = Lattice::new(k).unwrap();
        for &theta in &[0.0, 0.4, FRAC_PI_2, 2.5, PI] {
            for &phi in &[0.0, 0.9, FRAC_PI_2, 4.0] {
                for op in operators(theta, phi) {
                    let p = compile_step(&op, k as usize).unwrap();
                    let dev = verify(&p, &walk_matrix_register_order(&op, lat).unwrap()).unwrap();
                    assert!(dev < 1e-10, "{:?} k={k}: {dev}", op);
                    assert!(program_matrix(&p).unwrap().is_unitary(1e-12));
                }
            }
        }
    }
}

#[test]
fn random_state_matches_dense_application() {
    let lat = Lattice::new(2).unwrap();
    let op = WalkOperator::new(Variant::Sb, CoinSpec::new(1.1, WEYL_MAJORANA).unwrap());
    let dense = walk_matrix_register_order(&op, lat).unwrap();
    let mut rng = StdRng::seed_from_u64(17);
    for _ in 0..5 {
        let v = walker_to_register(&WalkerState::random(lat, WEYL_MAJORANA, &mut rng));
        let a = simulate(&compile_step(&op, 2).unwrap(), Some(&v)).unwrap();
        let b = dense.mul_vec(&v);
        let d = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(d < 1e-10);
    }
}

#[test]
fn corrupted_angle_is_detected() {
    let lat = Lattice::new(3).unwrap();
    let c = CoinSpec::new(FRAC_PI_2, WEYL_MAJORANA).unwrap();
    let op = WalkOperator::new(Variant::Sb, c);
    let bad = compile_step(&WalkOperator::new(Variant::Sb, c.with_theta(c.theta() + 0.01)), 3).unwrap();
    let dev = verify(&bad, &walk_matrix_register_order(&op, lat).unwrap()).unwrap();
    assert!(dev > 1e-3, "{dev}");
}

#[test]
fn state_prep_matches_constructors() {
    for &(t0, p0) in &[(FRAC_PI_2, 0.0), (0.7, 2.1), (PI, 0.3), (0.0, 0.0)] {
        let k = 3u32;
        let lat = Lattice::new(k).unwrap();
        let p = compile_state_prep(t0, p0, PositionPrep::Origin, k as usize).unwrap();
        let v = simulate(&p, None).unwrap();
        let s = build_state(&InitialStateSpec::point(t0, p0, 0), lat, 0.0).unwrap();
        let overlap = vdot(&walker_to_register(&s), &v).norm();
        assert!((overlap - 1.0).abs() < 1e-10, "({t0}, {p0}): {overlap}");
    }
}

#[test]
fn fig_initial_state_and_uniform_register() {
    let v = simulate(&compile_state_prep(FRAC_PI_2, 0.0, PositionPrep::Origin, 2).unwrap(), None).unwrap();
    assert!((v[0].re - FRAC_1_SQRT_2).abs() < 1e-15 && (v[1].re - FRAC_1_SQRT_2).abs() < 1e-15);
    assert!(v[2..].iter().all(|z| z.norm() < 1e-15));

    let v = simulate(&compile_state_prep(0.0, 0.0, PositionPrep::Uniform, 3).unwrap(), None).unwrap();
    for (i, z) in v.iter().enumerate() {
        let expected = if i % 2 == 0 { 1.0 / 8f64.sqrt() } else { 0.0 };
        assert!((z.re - expected).abs() < 1e-14 && z.im.abs() < 1e-14);
    }
}

#[test]
fn seven_sb_steps_reproduce_spacetime_diagram() {
    let k = 4u32;
    let lat = Lattice::new(k).unwrap();
    let op = WalkOperator::new(Variant::Sb, CoinSpec::new(FRAC_PI_2, WEYL_MAJORANA).unwrap());
    let s0 = build_state(&InitialStateSpec::point(FRAC_PI_2, 0.0, 0), lat, WEYL_MAJORANA).unwrap();
    let ideal = evolve(&s0, &op, 7, Observe::distribution_only()).unwrap();
    let dist = ideal.record.distribution.unwrap();

    let prep = compile_state_prep(FRAC_PI_2, 0.0, PositionPrep::Origin, k as usize).unwrap();
    let mut v = simulate(&prep, None).unwrap();
    let step = compile_step(&op, k as usize).unwrap();
    for row in dist.iter().skip(1) {
        v = simulate(&step, Some(&v)).unwrap();
        let s = register_to_walker(&v, lat, WEYL_MAJORANA).unwrap();
        let p = qwalk_core::observables::position_distribution(&s);
        let d = p.iter().zip(row).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(d < 1e-10);
    }

    let whole = compile_program(FRAC_PI_2, 0.0, PositionPrep::Origin, &op, k as usize, 7).unwrap();
    let s = register_to_walker(&simulate(&whole, None).unwrap(), lat, WEYL_MAJORANA).unwrap();
    assert!((inner_product(&s, &ideal.final_state).unwrap().norm() - 1.0).abs() < 1e-10);
    assert_eq!(whole.meta.steps, 7);
}

#[test]
fn qasm_round_trip_all_variants() {
    for k in 1..=3 {
        for op in operators(1.3, 0.6) {
            let p = compile_walk(&op, k, 2).unwrap();
            assert!(qasm_round_trip_deviation(&p).unwrap() < 1e-10);
            let parsed = parse_qasm(&export_qasm(&p)).unwrap();
            assert_eq!(parsed.position_qubits(), k);
        }
    }
}

#[test]
fn gate_count_law() {
    let c = CoinSpec::new(0.8, WEYL_MAJORANA).unwrap();
    for k in 1..=5 {
        for v in Variant::ALL {
            let p = compile_step(&WalkOperator::new(v, c), k).unwrap();
            assert_eq!(p.mcx_count(), 2 * k, "{v} k={k}");
            assert_eq!(p.meta.shift_blocks, 2);
        }
        let sb = gate_report(&compile_step(&WalkOperator::new(Variant::Sb, c), k).unwrap());
        let bsb = gate_report(&compile_step(&WalkOperator::new(Variant::Bsb, c), k).unwrap());
        assert_eq!(bsb.coin_blocks, sb.coin_blocks + 1);
        assert_eq!(bsb.shift_blocks, sb.shift_blocks);
    }
}

#[test]
fn report_json_has_required_keys() {
    let op = WalkOperator::new(Variant::Bsb, CoinSpec::new(0.8, 0.0).unwrap());
    let r = gate_report(&compile_walk(&op, 3, 4).unwrap());
    let j = serde_json::to_value(&r).unwrap();
    for key in ["logical_gates", "decomposed_gates", "depth_estimate", "steps"] {
        assert!(j.get(key).is_some(), "{key}");
    }
    assert_eq!(r.steps, 4);
}

#[test]
fn oversized_register_rejected() {
    let mut p = qwalk_core::circuit::GateProgram::new(20);
    p.push(Gate::X(0)).unwrap();
    assert!(simulate(&p, None).is_err());
}
