// Copyright 2026 The duoqubit Authors
// SPDX-License-Identifier: Apache-2.0

//! The two colors of basis operators and the sign ambiguity they imply.
//!
//! Red operators are `ΣjΞ1, Ξ2, Ξ3`; everything else is blue. Commutators
//! preserve the grading (blue·blue and red·red give blue, blue·red gives red)
//! and the Hamiltonian terms carrying `γ1, β2, β3` are exactly the red ones.
//! Starting from a blue `Σn`, coefficients of blue operators are therefore
//! even and those of red operators odd in `(γ1, β2, β3)`, so negating those
//! three parameters leaves the u block unchanged.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{taylor_maps, TaylorTable};
use crate::hamiltonian::{sign_partner, spectrum, CanonicalHamiltonian};
use crate::pauli::{basis_matrix, commutator, pauli_expand_complex, PauliBasisElement};

/// Tolerance of the parity and color checks.
pub const PARITY_TOL: f64 = 1e-12;
/// Highest order accepted by [`verify_parity_series`].
pub const MAX_PARITY_ORDER: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OperatorColor {
    Blue,
    Red,
}

pub fn color_of(e: PauliBasisElement) -> OperatorColor {
    let (j, k) = (e.sigma_index(), e.xi_index());
    let red = (j > 0 && k == 1) || (j == 0 && k >= 2);
    if red {
        OperatorColor::Red
    } else {
        OperatorColor::Blue
    }
}

fn product_color(a: OperatorColor, b: OperatorColor) -> OperatorColor {
    if a == b {
        OperatorColor::Blue
    } else {
        OperatorColor::Red
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ParityError {
    #[error("order {0} exceeds the supported maximum {MAX_PARITY_ORDER}")]
    OrderTooHigh(usize),
    #[error("spectrum comparison is only meaningful for α = β = 0")]
    OutsideRegime,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColorAlgebraReport {
    pub pairs_checked: usize,
    pub nonzero_commutators: usize,
    pub violations: Vec<String>,
    pub passed: bool,
}

/// Exhaustive check of the color grading over all ordered pairs of the 15
/// traceless basis elements.
pub fn check_color_algebra() -> ColorAlgebraReport {
    let elements: Vec<PauliBasisElement> = PauliBasisElement::traceless().collect();
    let mut violations = Vec::new();
    let mut nonzero = 0;
    for &a in &elements {
        for &b in &elements {
            let c = pauli_expand_complex(&commutator(&basis_matrix(a), &basis_matrix(b)));
            let terms: Vec<PauliBasisElement> = PauliBasisElement::all()
                .filter(|e| c[e.index()].norm() > PARITY_TOL)
                .collect();
            match terms.as_slice() {
                [] => {}
                [e] => {
                    nonzero += 1;
                    let want = product_color(color_of(a), color_of(b));
                    if color_of(*e) != want {
                        violations.push(format!("[{a}, {b}] ∝ {e} is {:?}, expected {want:?}", color_of(*e)));
                    }
                }
                many => violations.push(format!("[{a}, {b}] has {} terms", many.len())),
            }
        }
    }
    ColorAlgebraReport {
        pairs_checked: elements.len() * elements.len(),
        nonzero_commutators: nonzero,
        passed: violations.is_empty(),
        violations,
    }
}

/// Largest deviations from the expected negation pattern between two tables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParityReport {
    pub order: usize,
    /// `max |u − u'|`.
    pub u_deviation: f64,
    /// `max |c − c'|` over coefficients of blue operators (u included).
    pub blue_deviation: f64,
    /// `max |c + c'|` over coefficients of red operators.
    pub red_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Compares `a` and `b` under the color pattern.
pub fn parity_pattern(a: &TaylorTable, b: &TaylorTable) -> ParityReport {
    let (mut u_dev, mut blue, mut red) = (0.0_f64, 0.0_f64, 0.0_f64);
    for (ca, cb) in a.coeffs.iter().zip(b.coeffs.iter()) {
        u_dev = u_dev.max(ca.max_abs_diff_u(cb));
        let (ra, rb) = (ca.to_rows(), cb.to_rows());
        for (x, y) in ra.iter().zip(rb.iter()) {
            for e in PauliBasisElement::all() {
                match color_of(e) {
                    OperatorColor::Blue => blue = blue.max((x[e] - y[e]).abs()),
                    OperatorColor::Red => red = red.max((x[e] + y[e]).abs()),
                }
            }
        }
    }
    ParityReport {
        order: a.order.min(b.order),
        u_deviation: u_dev,
        blue_deviation: blue,
        red_deviation: red,
        tolerance: PARITY_TOL,
        passed: blue <= PARITY_TOL && red <= PARITY_TOL,
    }
}

/// Parity pattern between `h` and `partner` through `order`.
pub fn verify_parity_against(
    h: &CanonicalHamiltonian,
    partner: &CanonicalHamiltonian,
    order: usize,
) -> Result<ParityReport, ParityError> {
    if order > MAX_PARITY_ORDER {
        return Err(ParityError::OrderTooHigh(order));
    }
    Ok(parity_pattern(&taylor_maps(h, order), &taylor_maps(partner, order)))
}

pub fn verify_parity_series(h: &CanonicalHamiltonian, order: usize) -> Result<ParityReport, ParityError> {
    verify_parity_against(h, &sign_partner(h), order)
}

/// Largest difference between the sorted spectra of `h` and its partner.
/// Refused unless `α = β = 0`.
pub fn verify_spectrum_gap(h: &CanonicalHamiltonian) -> Result<f64, ParityError> {
    if h.alpha.iter().chain(h.beta.iter()).any(|&x| x != 0.0) {
        return Err(ParityError::OutsideRegime);
    }
    let a = spectrum(h);
    let b = spectrum(&sign_partner(h));
    Ok(a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}
