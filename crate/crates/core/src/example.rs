// Copyright 2026 The duoqubit Authors
// SPDX-License-Identifier: Apache-2.0

//! Closed forms for the pure-interaction Hamiltonian `α = β = 0`.
//!
//! The three `ΣkΞk` commute, so each `⟨Σn(t)⟩` is a four-term trigonometric
//! expression and the spectrum is `½(±γ1 ± γ2 ± γ3)` with an odd number of
//! minus signs on the `γ2, γ3` pair.

use crate::dynamics::TwoQubitState;

/// `⟨Σ1(t)⟩, ⟨Σ2(t)⟩, ⟨Σ3(t)⟩` for `H = ½ γk ΣkΞk`.
pub fn closed_form_sigma(gammas: [f64; 3], s: &TwoQubitState, t: f64) -> [f64; 3] {
    let c = gammas.map(|g| (g * t).cos());
    let sn = gammas.map(|g| (g * t).sin());
    [0, 1, 2].map(|n| {
        let (p, q) = ((n + 1) % 3, (n + 2) % 3);
        s.sigma[n] * c[p] * c[q] + s.xi[n] * sn[p] * sn[q] - s.corr[p][q] * c[p] * sn[q]
            + s.corr[q][p] * sn[p] * c[q]
    })
}

/// The four eigenvalues of `H = ½ γk ΣkΞk`, ascending.
pub fn example_eigenvalues(gammas: [f64; 3]) -> [f64; 4] {
    let [g1, g2, g3] = gammas;
    let mut ev = [
        0.5 * (-g1 + g2 + g3),
        0.5 * (g1 + g2 - g3),
        0.5 * (g1 - g2 + g3),
        0.5 * (-g1 - g2 - g3),
    ];
    ev.sort_by(f64::total_cmp);
    ev
}
