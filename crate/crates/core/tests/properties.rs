use proptest::prelude::*;
use rand::{rngs::StdRng, SeedableRng};
use std::f64::consts::PI;

use qwalk_core::coin::{conjugate_coin, CoinSpec, WEYL_MAJORANA};
use qwalk_core::lattice::{build_state, change_basis, majorana_residual, InitialStateSpec, Lattice, WalkerState};
use qwalk_core::momentum::{eigenphases, walk_block};
use qwalk_core::observables::{entanglement_entropy, position_distribution};
use qwalk_core::walk::{evolve_state, step, Variant, WalkOperator};

fn variant() -> impl Strategy<Value = Variant> {
    prop::sample::select(Variant::ALL.to_vec())
}

fn operator(v: Variant, theta: f64, phi: f64, theta1: f64) -> WalkOperator {
    let c = CoinSpec::new(theta, phi).unwrap();
    match v {
        Variant::Sqw => WalkOperator::sqw(CoinSpec::new(theta1, phi).unwrap(), c),
        _ => WalkOperator::new(v, c),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn steps_preserve_norm(v in variant(), theta in -7.0..7.0f64, phi in 0.0..(2.0 * PI), t1 in -3.0..3.0f64,
                           k in 1u32..7, seed in any::<u64>(), steps in 0usize..40) {
        let lat = Lattice::new(k).unwrap();
        let s = WalkerState::random(lat, phi, &mut StdRng::seed_from_u64(seed));
        let out = evolve_state(&s, &operator(v, theta, phi, t1), steps).unwrap();
        prop_assert!((out.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn residual_is_basis_covariant(lambda in -7.0..7.0f64, k in 1u32..6, seed in any::<u64>(), real in any::<bool>()) {
        let lat = Lattice::new(k).unwrap();
        let mut rng = StdRng::seed_from_u64(seed);
        let s = if real {
            WalkerState::random_real(lat, WEYL_MAJORANA, &mut rng)
        } else {
            WalkerState::random(lat, WEYL_MAJORANA, &mut rng)
        };
        let r = majorana_residual(&s);
        prop_assert!((majorana_residual(&change_basis(&s, lambda)) - r).abs() < 1e-10);
        if real {
            prop_assert!(r < 1e-10);
        }
    }

    #[test]
    fn coins_compose_additively(a in -10.0..10.0f64, b in -10.0..10.0f64, phi in -7.0..7.0f64, lambda in -7.0..7.0f64) {
        let ca = CoinSpec::new(a, phi).unwrap().matrix();
        let cb = CoinSpec::new(b, phi).unwrap().matrix();
        let sum = CoinSpec::new(a + b, phi).unwrap().matrix();
        prop_assert!((ca * cb).max_abs_diff(&sum) < 1e-12);
        let rotated = CoinSpec::new(a, phi).unwrap().rotated(lambda).matrix();
        prop_assert!(conjugate_coin(&ca, lambda).max_abs_diff(&rotated) < 1e-12);
    }

    #[test]
    fn majorana_basis_keeps_real_states_real(v in variant(), theta in -7.0..7.0f64, t1 in -3.0..3.0f64,
                                             k in 1u32..7, seed in any::<u64>(), steps in 0usize..60) {
        let lat = Lattice::new(k).unwrap();
        let s = WalkerState::random_real(lat, WEYL_MAJORANA, &mut StdRng::seed_from_u64(seed));
        let out = evolve_state(&s, &operator(v, theta, WEYL_MAJORANA, t1), steps).unwrap();
        prop_assert!(out.max_imaginary() < 1e-12);
    }

    #[test]
    fn point_source_stays_in_light_cone(v in variant(), theta in -7.0..7.0f64, phi in 0.0..(2.0 * PI),
                                        t1 in -3.0..3.0f64, th0 in 0.0..PI, ph0 in 0.0..(2.0 * PI), steps in 0usize..31) {
        let lat = Lattice::new(6).unwrap();
        let s0 = build_state(&InitialStateSpec::point(th0, ph0, 0), lat, phi).unwrap();
        let op = operator(v, theta, phi, t1);
        let mut s = s0;
        for t in 0..=steps {
            let p = position_distribution(&s);
            for (u, prob) in p.iter().enumerate() {
                if lat.signed(u).unsigned_abs() as usize > t {
                    prop_assert!(*prob < 1e-28, "t={} x={} P={}", t, lat.signed(u), prob);
                }
            }
            let e = entanglement_entropy(&s);
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&e));
            s = step(&s, &op).unwrap();
        }
    }

    #[test]
    fn blocks_are_unitary(v in variant(), theta in -7.0..7.0f64, phi in 0.0..(2.0 * PI), t1 in -3.0..3.0f64, k in -PI..PI) {
        let b = walk_block(&operator(v, theta, phi, t1), k);
        prop_assert!(b.matrix.is_unitary(1e-12));
        prop_assert!(eigenphases(&b.matrix).is_ok());
    }
}
