// Copyright 2026 The duoqubit Authors
// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite. Prints one line per criterion and exits nonzero if any
//! criterion fails.

use duoqubit::batch;
use duoqubit::classical::{
    classical_derivatives, classical_normalize, classical_reconstruct, fd_derivatives, ClassicalSystem,
    DerivativeSample, FD_STEP,
};
use duoqubit::dynamics::{map_trajectory, mean_trajectory, taylor_maps, time_grid, TaylorTable};
use duoqubit::environment::{flip_environment, recover_environment, MeanSeries, DEFAULT_ORDER};
use duoqubit::example::{closed_form_sigma, example_eigenvalues};
use duoqubit::hamiltonian::{
    canonicalize, gamma_triple, sign_partner, spectrum, CanonicalHamiltonian, GeneralHamiltonian, Hamiltonian,
    ZERO_TOL,
};
use duoqubit::parity::{check_color_algebra, verify_parity_series, verify_spectrum_gap};
use duoqubit::reconstruction::{reconstruct, CaseClass, ReconstructionError};
use duoqubit::sampling::{random_canonical, random_general, random_pure_state, rng, PARAMETER_RANGE};
use rand::Rng;

const EXAMPLE_GAMMA: [f64; 3] = [0.7, 1.1, 1.3];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn max_u_diff_over_times<H: Hamiltonian>(a: &H, b: &H, times: &[f64]) -> f64 {
    let ta = map_trajectory(a, times);
    let tb = map_trajectory(b, times);
    ta.iter()
        .zip(tb.iter())
        .map(|(x, y)| x.maps.max_abs_diff_u(&y.maps))
        .fold(0.0, f64::max)
}

/// Round-trip reconstruction of random general Hamiltonians with full-rank γ.
fn criterion_1() -> Outcome {
    let mut r = rng(1);
    let mut hs: Vec<GeneralHamiltonian> = Vec::new();
    while hs.len() < 100 {
        let h = random_general(&mut r, PARAMETER_RANGE);
        if gamma_triple(&h) != 0.0 {
            hs.push(h);
        }
    }
    let results = batch::map_slice(&hs, |h| {
        let rep = reconstruct(&taylor_maps(h, 4), ZERO_TOL).map_err(|e| e.to_string())?;
        let (want, _, _) = canonicalize(h);
        let d_plus = rep.candidate_plus.max_abs_diff(&want);
        let d_minus = rep.candidate_minus.max_abs_diff(&want);
        let matches = [d_plus, d_minus].iter().filter(|d| **d <= 1e-8).count();
        let aligned = taylor_maps(h, 6).rotate_sigma(&rep.frame_r);
        let regen = [rep.candidate_plus, rep.candidate_minus]
            .iter()
            .map(|c| aligned.max_abs_diff_u(&taylor_maps(c, 6)))
            .fold(0.0, f64::max);
        Ok::<_, String>((rep.case, matches, d_plus.min(d_minus), regen))
    });
    let mut failures = Vec::new();
    let (mut worst_param, mut worst_regen) = (0.0_f64, 0.0_f64);
    for (i, res) in results.iter().enumerate() {
        match res {
            Err(e) => failures.push(format!("#{i}: {e}")),
            Ok((case, matches, param, regen)) => {
                worst_param = worst_param.max(*param);
                worst_regen = worst_regen.max(*regen);
                if *case != CaseClass::CaseI || *matches != 1 || *regen > 1e-10 {
                    failures.push(format!("#{i}: case {case:?}, {matches} matching, regen {regen:.1e}"));
                }
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "CaseI round trip over {} Hamiltonians: param err {worst_param:.1e} (tol 1e-8), u regeneration through order 6 {worst_regen:.1e} (tol 1e-10){}",
            hs.len(),
            if failures.is_empty() { String::new() } else { format!("; failures {failures:?}") }
        ),
    )
}

/// u trajectories of a Hamiltonian and its sign partner coincide.
fn criterion_2() -> Outcome {
    let mut r = rng(2);
    let hs: Vec<CanonicalHamiltonian> = (0..50).map(|_| random_canonical(&mut r, PARAMETER_RANGE)).collect();
    let times = time_grid(2.0, 20);
    let worst = batch::map_slice(&hs, |h| max_u_diff_over_times(h, &sign_partner(h), &times))
        .into_iter()
        .fold(0.0, f64::max);
    outcome(
        worst <= 1e-12,
        format!("sign-flip u invariance over 50 Hamiltonians x 20 times: {worst:.1e} (tol 1e-12)"),
    )
}

/// Closed forms and spectrum of the pure-interaction example.
fn criterion_3() -> Outcome {
    let h = CanonicalHamiltonian::pure_interaction(EXAMPLE_GAMMA);
    let s = random_pure_state(&mut rng(3));
    let times = time_grid(5.0, 50);
    let engine = mean_trajectory(&h, &s, &times, false).expect("pure state is valid");
    let traj_err = times
        .iter()
        .zip(engine.iter())
        .flat_map(|(t, m)| {
            let c = closed_form_sigma(EXAMPLE_GAMMA, &s, *t);
            (0..3).map(move |n| (c[n] - m[n]).abs())
        })
        .fold(0.0, f64::max);
    let want = [-1.55, 0.25, 0.45, 0.85];
    let num = spectrum(&h);
    let formula = example_eigenvalues(EXAMPLE_GAMMA);
    let spec_err = (0..4)
        .map(|i| (num[i] - want[i]).abs().max((formula[i] - want[i]).abs()))
        .fold(0.0, f64::max);
    outcome(
        traj_err <= 1e-12 && spec_err <= 1e-12,
        format!("closed forms at 50 times {traj_err:.1e} (tol 1e-12), spectrum {num:?} err {spec_err:.1e} (tol 1e-12)"),
    )
}

/// Different spectra, same observed dynamics.
fn criterion_4() -> Outcome {
    let h = CanonicalHamiltonian::pure_interaction(EXAMPLE_GAMMA);
    let gap = verify_spectrum_gap(&h).expect("α = β = 0");
    let same = max_u_diff_over_times(&h, &sign_partner(&h), &time_grid(2.0, 20));
    outcome(
        (gap - 0.7).abs() <= 1e-12 && same <= 1e-12,
        format!("spectrum gap {gap:.15} (want 0.7, tol 1e-12), u difference {same:.1e} (tol 1e-12)"),
    )
}

/// β3 is invisible when only γ3 and β3 couple to the second qubit.
fn criterion_5() -> Outcome {
    let make = |b3: f64| CanonicalHamiltonian::new([0.3, -0.4, 0.5], [0.0, 0.0, b3], [0.0, 0.0, 1.2]);
    let times = time_grid(2.0, 20);
    let base = make(0.0);
    let traj = [-5.0, 5.0]
        .iter()
        .map(|&b| max_u_diff_over_times(&base, &make(b), &times))
        .fold(0.0, f64::max);
    let reports: Vec<_> = [-5.0, 0.0, 5.0]
        .iter()
        .map(|&b| reconstruct(&taylor_maps(&make(b), 6), ZERO_TOL))
        .collect();
    let flagged = reports.iter().all(|r| {
        r.as_ref().is_ok_and(|rep| {
            rep.case == CaseClass::ExceptionCase && rep.undetermined.iter().any(|u| u.parameter == "beta3")
        })
    });
    let identical = match (&reports[0], &reports[1], &reports[2]) {
        (Ok(a), Ok(b), Ok(c)) => {
            a.candidate_plus.max_abs_diff(&b.candidate_plus) <= 1e-12
                && a.candidate_plus.max_abs_diff(&c.candidate_plus) <= 1e-12
        }
        _ => false,
    };
    outcome(
        traj <= 1e-12 && flagged && identical,
        format!("β3 in {{-5, 0, 5}}: u difference {traj:.1e} (tol 1e-12), β3 flagged {flagged}, reports identical {identical}"),
    )
}

/// Case I needs three orders, case III six.
fn criterion_6() -> Outcome {
    let h1 = CanonicalHamiltonian::new([0.2, -0.3, 0.1], [0.4, 0.1, -0.6], EXAMPLE_GAMMA);
    let case_one = reconstruct(&taylor_maps(&h1, 3), ZERO_TOL)
        .map(|rep| rep.case == CaseClass::CaseI && rep.candidate_plus.max_abs_diff(&h1) <= 1e-8)
        .unwrap_or(false);
    let h3 = CanonicalHamiltonian::new([0.2, -0.3, 0.1], [0.5, 0.0, 0.8], [0.0, 0.0, 1.3]);
    let short = reconstruct(&taylor_maps(&h3, 4), ZERO_TOL);
    let refused = matches!(
        short,
        Err(ReconstructionError::InsufficientOrder {
            case: Some(CaseClass::CaseIII),
            needed: 6,
            got: 4
        })
    );
    let full = reconstruct(&taylor_maps(&h3, 6), ZERO_TOL)
        .map(|rep| rep.case == CaseClass::CaseIII && rep.candidate_plus.max_abs_diff(&h3) <= 1e-8)
        .unwrap_or(false);
    outcome(
        case_one && refused && full,
        format!("CaseI from order 3 {case_one}, CaseIII refused at order 4 {refused}, CaseIII from order 6 {full}"),
    )
}

fn determined_set(h: &CanonicalHamiltonian) -> Vec<String> {
    let s = random_pure_state(&mut rng(70));
    let series = MeanSeries::from_state(&taylor_maps(h, DEFAULT_ORDER), &s);
    let mut d = recover_environment(h, &series).map(|e| e.determined()).unwrap_or_default();
    d.sort();
    d
}

fn sorted(names: &[&str]) -> Vec<String> {
    let mut v: Vec<String> = names.iter().map(|s| s.to_string()).collect();
    v.sort();
    v
}

/// Environment recovery on random states and the enumerated special sets.
fn criterion_7() -> Outcome {
    let mut r = rng(7);
    let cases: Vec<_> = (0..50)
        .map(|_| {
            let mut h = random_canonical(&mut r, PARAMETER_RANGE);
            // Keep case I well away from the zero threshold.
            for g in h.gamma.iter_mut() {
                if g.abs() < 0.1 {
                    *g = 0.1_f64.copysign(*g);
                }
            }
            (h, random_pure_state(&mut r))
        })
        .collect();
    let errors = batch::map_slice(&cases, |(h, s)| {
        let series = MeanSeries::from_state(&taylor_maps(h, DEFAULT_ORDER), s);
        recover_environment(h, &series).map(|e| e.max_error(s)).unwrap_or(f64::INFINITY)
    });
    let worst = errors.iter().copied().fold(0.0, f64::max);
    let sets = [
        (
            EXAMPLE_GAMMA,
            sorted(&["X1", "X2", "X3", "S1X2", "S1X3", "S2X1", "S2X3", "S3X1", "S3X2"]),
        ),
        ([0.0, 0.0, 1.3], sorted(&["S1X3", "S2X3"])),
        ([0.0, 1.1, 1.3], sorted(&["X1", "S1X2", "S1X3", "S2X3", "S3X2"])),
    ];
    let set_ok: Vec<bool> = sets
        .iter()
        .map(|(g, want)| determined_set(&CanonicalHamiltonian::pure_interaction(*g)) == *want)
        .collect();
    outcome(
        worst <= 1e-8 && set_ok.iter().all(|x| *x),
        format!("50 random states: determined entries err {worst:.1e} (tol 1e-8); determined sets match {set_ok:?}"),
    )
}

/// Recovery under the two candidates differs by the sign flip.
fn criterion_8() -> Outcome {
    let mut r = rng(8);
    let mut worst = 0.0_f64;
    let mut failures = Vec::new();
    for i in 0..50 {
        let mut h = random_canonical(&mut r, PARAMETER_RANGE);
        for g in h.gamma.iter_mut() {
            if g.abs() < 0.1 {
                *g = 0.1_f64.copysign(*g);
            }
        }
        let s = random_pure_state(&mut r);
        let table: TaylorTable = taylor_maps(&h, DEFAULT_ORDER);
        let res = reconstruct(&table, ZERO_TOL).map_err(|e| e.to_string()).and_then(|rep| {
            let series = MeanSeries::from_state(&table, &s).rotate_sigma(&rep.frame_r);
            let plus = recover_environment(&rep.candidate_plus, &series).map_err(|e| e.to_string())?;
            let minus = recover_environment(&rep.candidate_minus, &series).map_err(|e| e.to_string())?;
            Ok(minus.max_abs_diff(&flip_environment(&plus)))
        });
        match res {
            Ok(d) => {
                worst = worst.max(d);
                if d > 1e-8 {
                    failures.push(i);
                }
            }
            Err(e) => {
                eprintln!("sample {i}: {e}");
                failures.push(i);
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!("minus vs flip(plus) over 50 states: {worst:.1e} (tol 1e-8){}",
            if failures.is_empty() { String::new() } else { format!("; failing samples {failures:?}") }),
    )
}

/// Color algebra and the order-6 parity pattern.
fn criterion_9() -> Outcome {
    let colors = check_color_algebra();
    let mut r = rng(9);
    let hs: Vec<CanonicalHamiltonian> = (0..20).map(|_| random_canonical(&mut r, PARAMETER_RANGE)).collect();
    let reports = batch::map_slice(&hs, |h| verify_parity_series(h, 6).expect("order 6 is supported"));
    let worst = reports
        .iter()
        .map(|p| p.blue_deviation.max(p.red_deviation))
        .fold(0.0, f64::max);
    let all = reports.iter().all(|p| p.passed);
    outcome(
        colors.passed && all,
        format!(
            "color sweep {} pairs, {} violations; parity pattern over 20 Hamiltonians at order 6: {worst:.1e} (tol 1e-12)",
            colors.pairs_checked,
            colors.violations.len()
        ),
    )
}

/// Classical analog round trip from exact and finite-difference derivatives.
fn criterion_10() -> Outcome {
    let mut r = rng(10);
    let (mut exact_err, mut fd_err) = (0.0_f64, 0.0_f64);
    let mut ok = true;
    for _ in 0..20 {
        let mag = |r: &mut rand_chacha::ChaCha8Rng| {
            let x: f64 = r.gen_range(0.5..2.0);
            if r.gen_bool(0.5) { -x } else { x }
        };
        let sys = ClassicalSystem {
            alpha: r.gen_range(-2.0..2.0),
            beta: r.gen_range(-2.0..2.0),
            gamma_prime: mag(&mut r),
            delta: mag(&mut r),
        };
        let y0_prime: f64 = r.gen_range(-1.0..1.0);
        let c = classical_normalize(&sys).expect("nonzero couplings");
        let y0 = sys.hidden_scale() * y0_prime;
        let xs = [-1.0, 0.5, 1.0];
        for (exact, err) in [(true, &mut exact_err), (false, &mut fd_err)] {
            let samples: Vec<DerivativeSample> = xs
                .iter()
                .map(|&x0| DerivativeSample {
                    x0,
                    derivatives: if exact {
                        classical_derivatives(&c, x0, y0)
                    } else {
                        fd_derivatives(&c, x0, y0, FD_STEP)
                    },
                })
                .collect();
            match classical_reconstruct(&samples).ok().and_then(|rec| Some((rec.canonical()?, rec.y0?))) {
                Some((got, got_y0)) => *err = err.max(got.max_abs_diff(&c).max((got_y0 - y0).abs())),
                None => ok = false,
            }
        }
    }
    outcome(
        ok && exact_err <= 1e-12 && fd_err <= 1e-6,
        format!("20 systems: exact derivatives {exact_err:.1e} (tol 1e-12), finite differences at step 1e-4 {fd_err:.1e} (tol 1e-6)"),
    )
}

fn main() {
    let criteria: [(usize, fn() -> Outcome); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    let mut failed = Vec::new();
    for (n, f) in criteria {
        let o = f();
        println!("criterion {n:>2}: {} {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        if !o.passed {
            failed.push(n);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 10 criteria pass");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
