// Copyright 2026 The duoqubit Authors
// SPDX-License-Identifier: Apache-2.0

use duoqubit::classical::{
    classical_derivatives, classical_normalize, classical_reconstruct, ClassicalSystem, DerivativeSample,
};
use duoqubit::dynamics::{map_trajectory, mean_trajectory, taylor_maps, time_grid};
use duoqubit::environment::{flip_environment, flip_state, recover_environment, MeanSeries, DEFAULT_ORDER};
use duoqubit::hamiltonian::{canonicalize, sign_partner, spectrum, CanonicalHamiltonian};
use duoqubit::parity::verify_parity_series;
use duoqubit::sampling::{random_pure_state, random_rotation, rng, rotate_out};
use proptest::prelude::*;

fn triple() -> impl Strategy<Value = [f64; 3]> {
    [-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64]
}

fn canonical() -> impl Strategy<Value = CanonicalHamiltonian> {
    (triple(), triple(), triple()).prop_map(|(a, b, g)| CanonicalHamiltonian::new(a, b, g))
}

fn nonzero() -> impl Strategy<Value = f64> {
    (0.3..2.0f64, any::<bool>()).prop_map(|(x, neg)| if neg { -x } else { x })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn partner_is_an_involution(h in canonical()) {
        prop_assert_eq!(sign_partner(&sign_partner(&h)), h);
    }

    #[test]
    fn partner_leaves_u_unchanged(h in canonical()) {
        let times = time_grid(2.0, 9);
        let a = map_trajectory(&h, &times);
        let b = map_trajectory(&sign_partner(&h), &times);
        for (x, y) in a.iter().zip(b.iter()) {
            prop_assert!(x.maps.max_abs_diff_u(&y.maps) <= 1e-12);
        }
    }

    #[test]
    fn parity_pattern_through_order_six(h in canonical()) {
        let p = verify_parity_series(&h, 6).unwrap();
        prop_assert!(p.passed, "{:?}", p);
    }

    #[test]
    fn flipped_state_under_partner_gives_the_same_means(h in canonical(), seed in any::<u64>()) {
        let s = random_pure_state(&mut rng(seed));
        let times = time_grid(2.0, 9);
        let a = mean_trajectory(&h, &s, &times, false).unwrap();
        // The flipped means need not form a positive state.
        let b = mean_trajectory(&sign_partner(&h), &flip_state(&s), &times, true).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            for n in 0..3 {
                prop_assert!((x[n] - y[n]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn canonical_form_ignores_frame_rotations(
        a in triple(),
        b in triple(),
        g in [nonzero(), nonzero(), nonzero()],
        seed in any::<u64>(),
    ) {
        let c = CanonicalHamiltonian::new(a, b, g);
        let mut r = rng(seed);
        let h = rotate_out(&c, &random_rotation(&mut r), &random_rotation(&mut r));
        let (k, rot, _) = canonicalize(&h);
        prop_assert!(rot.defect() < 1e-12);
        let (sa, sb) = (spectrum(&h), spectrum(&k));
        for i in 0..4 {
            prop_assert!((sa[i] - sb[i]).abs() < 1e-10);
        }
        let mut want = g.map(|x| x * x);
        let mut got = k.gamma.map(|x| x * x);
        want.sort_by(f64::total_cmp);
        got.sort_by(f64::total_cmp);
        for i in 0..3 {
            prop_assert!((want[i] - got[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn environment_relation_between_partners(
        a in triple(),
        b in triple(),
        g in [nonzero(), nonzero(), nonzero()],
        seed in any::<u64>(),
    ) {
        let h = CanonicalHamiltonian::new(a, b, g);
        let s = random_pure_state(&mut rng(seed));
        let p = sign_partner(&h);
        let series = MeanSeries::from_state(&taylor_maps(&h, DEFAULT_ORDER), &s);
        let plus = recover_environment(&h, &series).unwrap();
        let minus = recover_environment(&p, &series).unwrap();
        prop_assert!(minus.max_abs_diff(&flip_environment(&plus)) <= 1e-8);
        prop_assert!(plus.max_error(&s) <= 1e-8);
    }

    #[test]
    fn classical_round_trip(
        alpha in -2.0..2.0f64,
        beta in -2.0..2.0f64,
        gamma_prime in nonzero(),
        delta in nonzero(),
        y0_prime in -1.0..1.0f64,
    ) {
        let sys = ClassicalSystem { alpha, beta, gamma_prime, delta };
        let c = classical_normalize(&sys).unwrap();
        let y0 = sys.hidden_scale() * y0_prime;
        let samples: Vec<DerivativeSample> = [-1.0, 0.25, 1.0]
            .iter()
            .map(|&x0| DerivativeSample { x0, derivatives: classical_derivatives(&c, x0, y0) })
            .collect();
        let rec = classical_reconstruct(&samples).unwrap();
        prop_assert!(rec.canonical().unwrap().max_abs_diff(&c) <= 1e-10);
        prop_assert!((rec.y0.unwrap() - y0).abs() <= 1e-10);
        // Evolving the recovered system reproduces the observed variable.
        let got = rec.canonical().unwrap();
        for t in [0.3, 0.9] {
            prop_assert!((got.evolve(0.25, rec.y0.unwrap(), t).0 - c.evolve(0.25, y0, t).0).abs() <= 1e-9);
        }
    }
}
