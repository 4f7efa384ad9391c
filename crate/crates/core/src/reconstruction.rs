// Copyright 2026 The duoqubit Authors
// SPDX-License-Identifier: Apache-2.0

//! Inverse problem: the two-qubit Hamiltonian from the u block of a Taylor
//! table.
//!
//! Order by order:
//! 1. first order gives α from the antisymmetric part of u⁽¹⁾;
//! 2. second order gives the Gram matrix `γ_m · γ_n`, whose eigen-frame is
//!    the Σ rotation to the canonical form and whose eigenvalues are γk²;
//! 3. third order gives the products `γ2γ3β1, γ3γ1β2, γ1γ2β3`;
//! 4. fourth order gives the quadratic combinations of β;
//! 5. sixth order gives `γ3²β1²β3²` when only γ3 survives.
//!
//! Everything here is derived from u alone. The result is a pair of
//! candidates related by [`sign_partner`]; both reproduce the input.
//!
//! Tables store Taylor coefficients, so the formulas below work on
//! `m! · coeff`, the raw derivatives.

use nalgebra::{DMatrix, DVector, Matrix3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{taylor_maps, TaylorTable};
use crate::hamiltonian::{gram_frame, sign_partner, CanonicalHamiltonian, RotationMatrix3, ZERO_TOL};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Largest tolerated symmetric part of u⁽¹⁾ and negative Gram eigenvalue.
pub const MALFORMED_TOL: f64 = 1e-8;
/// Largest tolerated disagreement between two orders estimating one quantity.
pub const CROSS_ORDER_TOL: f64 = 1e-6;
/// Largest tolerated relative verification residual.
pub const VERIFY_FAIL_TOL: f64 = 1e-6;

/// Tolerances of [`reconstruct_with`]. Exact tables use the defaults; fitted
/// tables carry fit error and need looser checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructOptions {
    /// Relative cutoff for squared quantities.
    pub zero_tol: f64,
    pub malformed_tol: f64,
    pub cross_order_tol: f64,
    pub verify_tol: f64,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        Self {
            zero_tol: ZERO_TOL,
            malformed_tol: MALFORMED_TOL,
            cross_order_tol: CROSS_ORDER_TOL,
            verify_tol: VERIFY_FAIL_TOL,
        }
    }
}

impl ReconstructOptions {
    /// Every check at `tol`, with the default zero cutoff.
    pub fn uniform(tol: f64) -> Self {
        Self {
            zero_tol: ZERO_TOL,
            malformed_tol: tol,
            cross_order_tol: tol,
            verify_tol: tol,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseClass {
    /// No canonical γ vanishes.
    CaseI,
    /// γ1 = 0 only.
    CaseII,
    /// γ1 = γ2 = 0.
    CaseIII,
    /// γ1 = γ2 = 0 and β1 = β2 = 0: β3 is invisible to the Σ qubit.
    ExceptionCase,
}

impl CaseClass {
    /// Highest Taylor order the extraction reads.
    pub fn required_order(self) -> usize {
        match self {
            Self::CaseI => 3,
            Self::CaseII | Self::ExceptionCase => 4,
            Self::CaseIII => 6,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ReconstructionError {
    #[error("Taylor order {got} is insufficient, {needed} needed{}", case.map(|c| format!(" for {c:?}")).unwrap_or_default())]
    InsufficientOrder {
        case: Option<CaseClass>,
        needed: usize,
        got: usize,
    },
    #[error("data not generated by a two-qubit Hamiltonian: {0}")]
    Malformed(String),
    #[error("no interaction: all γ vanish and the Σ qubit evolves alone with α = {alpha:?}")]
    NoInteraction { alpha: [f64; 3] },
    #[error("{quantity} disagrees between orders: {first} vs {second}")]
    Inconsistent {
        quantity: String,
        first: f64,
        second: f64,
    },
    #[error("reconstruction failed verification: {residuals:?}")]
    VerificationFailed { residuals: Vec<OrderResidual> },
}

/// A parameter the data cannot fix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Undetermined {
    pub parameter: String,
    pub reason: String,
}

/// u-block mismatch of both candidates against the aligned input, one order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderResidual {
    pub order: usize,
    /// Largest absolute difference of Taylor coefficients.
    pub plus: f64,
    pub minus: f64,
    /// The same, divided by `max(1, largest |coefficient| at this order)`.
    pub plus_relative: f64,
    pub minus_relative: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Relative zero threshold applied to squared quantities.
    pub zero_threshold: f64,
    /// Largest entry of the symmetric part of u⁽¹⁾.
    pub first_order_asymmetry: f64,
    pub gram_min_eigenvalue: f64,
    pub gamma_squares: [f64; 3],
    /// Least-squares residual of the fourth-order solve, when performed.
    pub fourth_order_residual: Option<f64>,
    /// Largest disagreement between third- and fourth-order estimates.
    pub cross_order_mismatch: Option<f64>,
    pub residuals: Vec<OrderResidual>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub schema_version: u32,
    pub case: CaseClass,
    pub candidate_plus: CanonicalHamiltonian,
    pub candidate_minus: CanonicalHamiltonian,
    /// Σ rotation applied to the input data.
    #[serde(rename = "frame_R")]
    pub frame_r: RotationMatrix3,
    pub undetermined: Vec<Undetermined>,
    pub diagnostics: Diagnostics,
}

fn require_order(t: &TaylorTable, needed: usize, case: Option<CaseClass>) -> Result<(), ReconstructionError> {
    if t.order < needed {
        Err(ReconstructionError::InsufficientOrder {
            case,
            needed,
            got: t.order,
        })
    } else {
        Ok(())
    }
}

/// α from the antisymmetric first-order u block, plus the largest entry of
/// its symmetric part.
pub fn extract_alpha(t: &TaylorTable) -> Result<([f64; 3], f64), ReconstructionError> {
    extract_alpha_tol(t, MALFORMED_TOL)
}

fn extract_alpha_tol(t: &TaylorTable, tol: f64) -> Result<([f64; 3], f64), ReconstructionError> {
    require_order(t, 1, None)?;
    let d = t.u_derivative(1);
    let sym = (d + d.transpose()) * 0.5;
    let asymmetry = sym.abs().max();
    if asymmetry > tol * d.abs().max().max(1.0) {
        return Err(ReconstructionError::Malformed(format!(
            "first-order u block has symmetric part {asymmetry:e}"
        )));
    }
    let alpha = [
        0.5 * (d[(2, 1)] - d[(1, 2)]),
        0.5 * (d[(0, 2)] - d[(2, 0)]),
        0.5 * (d[(1, 0)] - d[(0, 1)]),
    ];
    Ok((alpha, asymmetry))
}

/// Gram matrix `γ_m · γ_n` from the second-order u block with the α
/// contributions removed.
pub fn extract_gram(t: &TaylorTable, alpha: [f64; 3]) -> Result<Matrix3<f64>, ReconstructionError> {
    extract_gram_tol(t, alpha, MALFORMED_TOL)
}

fn extract_gram_tol(t: &TaylorTable, alpha: [f64; 3], tol: f64) -> Result<Matrix3<f64>, ReconstructionError> {
    require_order(t, 2, None)?;
    let d = t.u_derivative(2);
    let a2: f64 = alpha.iter().map(|a| a * a).sum();
    // D_n = Σ_{m≠n} G_mm
    let dsum = [0, 1, 2].map(|n| -d[(n, n)] - (a2 - alpha[n] * alpha[n]));
    let mut g = Matrix3::zeros();
    for n in 0..3 {
        let (p, q) = ((n + 1) % 3, (n + 2) % 3);
        g[(n, n)] = 0.5 * (dsum[p] + dsum[q] - dsum[n]);
        for j in 0..3 {
            if j != n {
                g[(n, j)] = 0.5 * (d[(n, j)] + d[(j, n)]) - alpha[n] * alpha[j];
            }
        }
    }
    let min_eig = g.symmetric_eigenvalues().min();
    if min_eig < -tol * g.abs().max().max(1.0) {
        return Err(ReconstructionError::Malformed(format!(
            "Gram matrix has negative eigenvalue {min_eig:e}"
        )));
    }
    Ok(g)
}

/// Rotates the table into the Gram eigen-frame. Returns the rotated table,
/// the ascending eigenvalues (γk², clipped at zero) and `R`.
pub fn frame_align(t: &TaylorTable, gram: &Matrix3<f64>) -> (TaylorTable, [f64; 3], RotationMatrix3) {
    let (r, lambda) = gram_frame(gram);
    (t.rotate_sigma(&r), lambda.map(|l| l.max(0.0)), r)
}

/// Case from the sorted γ², with `beta_perp_sq = β1² + β2²` once known.
pub fn classify(
    gamma_sq: [f64; 3],
    beta_perp_sq: Option<f64>,
    zero_threshold: f64,
) -> Result<CaseClass, ReconstructionError> {
    let zero = gamma_sq.map(|g| g <= zero_threshold);
    match zero {
        [true, true, true] => Err(ReconstructionError::NoInteraction { alpha: [0.0; 3] }),
        [true, true, false] => match beta_perp_sq {
            Some(b) if b <= zero_threshold => Ok(CaseClass::ExceptionCase),
            _ => Ok(CaseClass::CaseIII),
        },
        [true, false, false] => Ok(CaseClass::CaseII),
        [false, false, false] => Ok(CaseClass::CaseI),
        // Sorted input makes the remaining patterns unreachable.
        _ => Err(ReconstructionError::Malformed(format!(
            "γ² not sorted ascending: {gamma_sq:?}"
        ))),
    }
}

/// β extracted in the canonical frame for the `γ1 ≥ 0` (or `β3 ≥ 0`) branch.
#[derive(Clone, Debug, PartialEq)]
pub struct BetaExtraction {
    pub beta: [f64; 3],
    pub undetermined: Vec<Undetermined>,
    pub fourth_order_residual: Option<f64>,
    pub cross_order_mismatch: Option<f64>,
    /// Final case; CaseIII may be upgraded to ExceptionCase here.
    pub case: CaseClass,
}

/// Monomials of the quadratic β part of u⁽⁴⁾, in the order
/// `β1², β2², β3², β1β2, β2β3, β3β1`.
fn quartic_design(g: [f64; 3]) -> [Matrix3<f64>; 6] {
    let [g1, g2, g3] = g;
    let (s1, s2, s3) = (g1 * g1, g2 * g2, g3 * g3);
    let diag = |a: f64, b: f64, c: f64| Matrix3::from_diagonal(&nalgebra::Vector3::new(a, b, c));
    let off = |i: usize, j: usize, x: f64| {
        let mut m = Matrix3::zeros();
        m[(i, j)] = x;
        m[(j, i)] = x;
        m
    };
    [
        diag(s2 + s3, s3, s2),
        diag(s3, s1 + s3, s1),
        diag(s2, s1, s1 + s2),
        off(0, 1, g1 * g2),
        off(1, 2, g2 * g3),
        off(2, 0, g3 * g1),
    ]
}

/// Least squares `Σ_c x_c · columns[c] ≈ target` over the nine entries.
fn solve_entries(columns: &[Matrix3<f64>], target: &Matrix3<f64>) -> (Vec<f64>, f64) {
    let a = DMatrix::from_fn(9, columns.len(), |r, c| columns[c][(r / 3, r % 3)]);
    let y = DVector::from_fn(9, |r, _| target[(r / 3, r % 3)]);
    let svd = a.clone().svd(true, true);
    let tol = 1e-12 * svd.singular_values.max();
    let x = svd.solve(&y, tol).expect("singular vectors were requested");
    let residual = (&a * &x - &y).amax();
    (x.iter().copied().collect(), residual)
}

/// Third-order products `(γ2γ3β1, γ3γ1β2, γ1γ2β3)` after removing the
/// β-free part, plus the largest entry not explained by them.
fn third_order_products(t: &TaylorTable, alpha: [f64; 3], gamma: [f64; 3]) -> ([f64; 3], f64) {
    let base = taylor_maps(&CanonicalHamiltonian::new(alpha, [0.0; 3], gamma), 3).u_derivative(3);
    let r = t.u_derivative(3) - base;
    let p = [
        0.5 * (r[(1, 2)] - r[(2, 1)]),
        0.5 * (r[(2, 0)] - r[(0, 2)]),
        0.5 * (r[(0, 1)] - r[(1, 0)]),
    ];
    let unexplained = ((r + r.transpose()) * 0.5).abs().max();
    (p, unexplained)
}

/// β from the aligned table.
///
/// `alpha` must have been re-extracted in the aligned frame and `gammas_abs`
/// are `|γk|` in ascending order.
pub fn extract_beta(
    t: &TaylorTable,
    alpha: [f64; 3],
    gammas_abs: [f64; 3],
    case: CaseClass,
    zero_threshold: f64,
    cross_order_tol: f64,
) -> Result<BetaExtraction, ReconstructionError> {
    let gamma = gammas_abs;
    let scale = |x: f64| x.abs().max(1.0);
    match case {
        CaseClass::CaseI => {
            require_order(t, 3, Some(case))?;
            let (p, _) = third_order_products(t, alpha, gamma);
            let [g1, g2, g3] = gamma;
            let beta = [p[0] / (g2 * g3), p[1] / (g3 * g1), p[2] / (g1 * g2)];
            let (mut fourth_res, mut mismatch) = (None, None);
            if t.order >= 4 {
                // Fourth order must agree with the products found at third
                // order.
                let full = taylor_maps(&CanonicalHamiltonian::new(alpha, beta, gamma), 4).u_derivative(4);
                let neg = taylor_maps(&CanonicalHamiltonian::new(alpha, beta.map(|b| -b), gamma), 4)
                    .u_derivative(4);
                let base = taylor_maps(&CanonicalHamiltonian::new(alpha, [0.0; 3], gamma), 4).u_derivative(4);
                let linear = (full - neg) * 0.5;
                let target = t.u_derivative(4) - base - linear;
                let (q, res) = solve_entries(&quartic_design(gamma), &target);
                let [b1, b2, b3] = beta;
                let expected = [b1 * b1, b2 * b2, b3 * b3, b1 * b2, b2 * b3, b3 * b1];
                // Only combinations with a nonzero design column are seen.
                let design = quartic_design(gamma);
                // Dividing by γjγk amplifies rounding in the third-order
                // products; a small γ1 would otherwise trip the check.
                let g_max = g1.max(g2).max(g3);
                let smallest = (g2 * g3).min(g3 * g1).min(g1 * g2);
                let amplification = (g_max * g_max / smallest).max(1.0);
                let mut worst: f64 = 0.0;
                for ((col, est), want) in design.iter().zip(q.iter()).zip(expected.iter()) {
                    let weight = col.abs().max();
                    if weight > 0.0 {
                        let d = (est - want).abs() * weight;
                        if d > cross_order_tol * amplification * scale(want * weight) {
                            return Err(ReconstructionError::Inconsistent {
                                quantity: "fourth-order β combination".into(),
                                first: *want,
                                second: *est,
                            });
                        }
                        worst = worst.max(d);
                    }
                }
                fourth_res = Some(res);
                mismatch = Some(worst);
            }
            Ok(BetaExtraction {
                beta,
                undetermined: Vec::new(),
                fourth_order_residual: fourth_res,
                cross_order_mismatch: mismatch,
                case,
            })
        }
        CaseClass::CaseII => {
            require_order(t, 4, Some(case))?;
            let gamma = [0.0, gamma[1], gamma[2]];
            let (p, _) = third_order_products(t, alpha, gamma);
            let [_, g2, g3] = gamma;
            let b1 = p[0] / (g2 * g3);
            for (name, v) in [("γ3γ1β2", p[1]), ("γ1γ2β3", p[2])] {
                if v.abs() > cross_order_tol * scale(p[0]) {
                    return Err(ReconstructionError::Inconsistent {
                        quantity: format!("{name} (must vanish with γ1 = 0)"),
                        first: 0.0,
                        second: v,
                    });
                }
            }
            let known = CanonicalHamiltonian::new(alpha, [b1, 0.0, 0.0], gamma);
            let base = taylor_maps(&known, 4).u_derivative(4);
            let target = t.u_derivative(4) - base;
            let design = quartic_design(gamma);
            let (q, res) = solve_entries(&[design[1], design[2], design[4]], &target);
            let (b2_sq, b3_sq, b23) = (q[0].max(0.0), q[1].max(0.0), q[2]);
            let (mut b2, mut b3) = if b3_sq >= b2_sq {
                let b3 = b3_sq.sqrt();
                (if b3 > 0.0 { b23 / b3 } else { 0.0 }, b3)
            } else {
                let b2 = b2_sq.sqrt();
                (b2, b23 / b2)
            };
            // Branch convention: β3 ≥ 0, or β2 ≥ 0 when β3 vanishes.
            let flip = if b3 * b3 > zero_threshold { b3 < 0.0 } else { b2 < 0.0 };
            if flip {
                b2 = -b2;
                b3 = -b3;
            }
            Ok(BetaExtraction {
                beta: [b1, b2, b3],
                undetermined: Vec::new(),
                fourth_order_residual: Some(res),
                cross_order_mismatch: None,
                case,
            })
        }
        CaseClass::CaseIII | CaseClass::ExceptionCase => {
            require_order(t, 4, Some(CaseClass::CaseIII))?;
            let gamma = [0.0, 0.0, gamma[2]];
            let base = taylor_maps(&CanonicalHamiltonian::new(alpha, [0.0; 3], gamma), 4).u_derivative(4);
            let target = t.u_derivative(4) - base;
            let design = quartic_design(gamma);
            // With β2 = 0 by the Ξ-frame convention only β1² is visible.
            let (q, res) = solve_entries(&[design[0]], &target);
            let b1_sq = q[0].max(0.0);
            if b1_sq <= zero_threshold {
                return Ok(BetaExtraction {
                    beta: [0.0; 3],
                    undetermined: vec![Undetermined {
                        parameter: "beta3".into(),
                        reason: "β3 Ξ3 commutes with the rest of H and with every Σj".into(),
                    }],
                    fourth_order_residual: Some(res),
                    cross_order_mismatch: None,
                    case: CaseClass::ExceptionCase,
                });
            }
            require_order(t, 6, Some(CaseClass::CaseIII))?;
            let b1 = b1_sq.sqrt();
            let known = CanonicalHamiltonian::new(alpha, [b1, 0.0, 0.0], gamma);
            let base6 = taylor_maps(&known, 6).u_derivative(6);
            let target6 = t.u_derivative(6) - base6;
            let g3 = gamma[2];
            let mut column = Matrix3::zeros();
            column[(0, 0)] = -g3 * g3 * b1_sq;
            column[(1, 1)] = -g3 * g3 * b1_sq;
            let (y, _) = solve_entries(&[column], &target6);
            Ok(BetaExtraction {
                beta: [b1, 0.0, y[0].max(0.0).sqrt()],
                undetermined: Vec::new(),
                fourth_order_residual: Some(res),
                cross_order_mismatch: None,
                case: CaseClass::CaseIII,
            })
        }
    }
}

fn u_residual(c: &CanonicalHamiltonian, aligned: &TaylorTable) -> DVector<f64> {
    let regenerated = taylor_maps(c, aligned.order);
    DVector::from_iterator(
        9 * aligned.order,
        (1..=aligned.order).flat_map(|m| {
            let (a, b) = (&aligned.coeffs[m].u, &regenerated.coeffs[m].u);
            (0..9).map(move |i| b[i / 3][i % 3] - a[i / 3][i % 3])
        }),
    )
}

/// Gauss-Newton polish of a case I candidate against every available u
/// order. When one |γk| is small, β from the third order alone inherits the
/// rounding of the Gram eigenvalues divided by that |γk|; the fourth and
/// higher orders pin it down again. Steps that do not reduce the residual
/// are rejected, so well-conditioned candidates come back unchanged.
fn refine_case_one(c: CanonicalHamiltonian, aligned: &TaylorTable) -> CanonicalHamiltonian {
    let pack = |h: &CanonicalHamiltonian| {
        let mut x = [0.0; 9];
        x[..3].copy_from_slice(&h.alpha);
        x[3..6].copy_from_slice(&h.beta);
        x[6..].copy_from_slice(&h.gamma);
        x
    };
    let unpack = |x: &[f64; 9]| {
        CanonicalHamiltonian::new([x[0], x[1], x[2]], [x[3], x[4], x[5]], [x[6], x[7], x[8]])
    };
    let mut best = c;
    let mut r = u_residual(&best, aligned);
    for _ in 0..4 {
        let x = pack(&best);
        let mut jac = DMatrix::zeros(r.len(), 9);
        for j in 0..9 {
            let step = 1e-6 * x[j].abs().max(1.0);
            let (mut up, mut down) = (x, x);
            up[j] += step;
            down[j] -= step;
            let col = (u_residual(&unpack(&up), aligned) - u_residual(&unpack(&down), aligned)) / (2.0 * step);
            jac.set_column(j, &col);
        }
        let svd = jac.svd(true, true);
        let tol = 1e-12 * svd.singular_values.max();
        let Ok(delta) = svd.solve(&(-&r), tol) else { break };
        let mut next = x;
        for j in 0..9 {
            next[j] += delta[j];
        }
        let trial = unpack(&next);
        let trial_r = u_residual(&trial, aligned);
        if trial.gamma[0] <= 0.0 || trial_r.amax() >= r.amax() {
            break;
        }
        best = trial;
        r = trial_r;
    }
    best
}

/// Compares the u blocks of `candidate` against `aligned`, order by order.
fn verify(candidate: &CanonicalHamiltonian, aligned: &TaylorTable) -> Vec<(f64, f64)> {
    let regenerated = taylor_maps(candidate, aligned.order);
    (0..=aligned.order)
        .map(|m| {
            let d = aligned.coeffs[m].max_abs_diff_u(&regenerated.coeffs[m]);
            let size = aligned.coeffs[m].u.iter().flatten().fold(1.0_f64, |a, x| a.max(x.abs()));
            (d, d / size)
        })
        .collect()
}

/// Full pipeline. `zero_tol` is the relative cutoff for squared quantities
/// ([`ZERO_TOL`] is the default).
pub fn reconstruct(t: &TaylorTable, zero_tol: f64) -> Result<ReconstructionReport, ReconstructionError> {
    reconstruct_with(
        t,
        &ReconstructOptions {
            zero_tol,
            ..Default::default()
        },
    )
}

pub fn reconstruct_with(
    t: &TaylorTable,
    opts: &ReconstructOptions,
) -> Result<ReconstructionReport, ReconstructionError> {
    require_order(t, 2, None)?;
    let (alpha0, asymmetry) = extract_alpha_tol(t, opts.malformed_tol)?;
    let gram = extract_gram_tol(t, alpha0, opts.malformed_tol)?;
    let gram_min_eigenvalue = gram.symmetric_eigenvalues().min();
    let (aligned, gamma_sq, r) = frame_align(t, &gram);
    let (alpha, _) = extract_alpha_tol(&aligned, opts.malformed_tol)?;

    let size = alpha.iter().map(|a| a * a).sum::<f64>() + gamma_sq.iter().sum::<f64>();
    let zero_threshold = opts.zero_tol * size.max(1.0);
    let provisional = match classify(gamma_sq, None, zero_threshold) {
        Err(ReconstructionError::NoInteraction { .. }) => {
            return Err(ReconstructionError::NoInteraction { alpha })
        }
        other => other?,
    };
    require_order(
        t,
        match provisional {
            CaseClass::CaseIII => 4,
            c => c.required_order(),
        },
        Some(provisional),
    )?;

    let gammas_abs = gamma_sq.map(f64::sqrt);
    let extraction = extract_beta(&aligned, alpha, gammas_abs, provisional, zero_threshold, opts.cross_order_tol)?;
    let case = extraction.case;
    let gamma = match case {
        CaseClass::CaseI => gammas_abs,
        CaseClass::CaseII => [0.0, gammas_abs[1], gammas_abs[2]],
        CaseClass::CaseIII | CaseClass::ExceptionCase => [0.0, 0.0, gammas_abs[2]],
    };
    let mut candidate_plus = CanonicalHamiltonian::new(alpha, extraction.beta, gamma);
    if case == CaseClass::CaseI && t.order >= 4 {
        candidate_plus = refine_case_one(candidate_plus, &aligned);
    }
    let candidate_minus = sign_partner(&candidate_plus);

    let plus = verify(&candidate_plus, &aligned);
    let minus = verify(&candidate_minus, &aligned);
    let residuals: Vec<OrderResidual> = plus
        .iter()
        .zip(minus.iter())
        .enumerate()
        .map(|(order, (p, m))| OrderResidual {
            order,
            plus: p.0,
            minus: m.0,
            plus_relative: p.1,
            minus_relative: m.1,
        })
        .collect();
    if residuals
        .iter()
        .any(|r| r.plus_relative > opts.verify_tol || r.minus_relative > opts.verify_tol)
    {
        return Err(ReconstructionError::VerificationFailed { residuals });
    }

    Ok(ReconstructionReport {
        schema_version: REPORT_SCHEMA_VERSION,
        case,
        candidate_plus,
        candidate_minus,
        frame_r: r,
        undetermined: extraction.undetermined,
        diagnostics: Diagnostics {
            zero_threshold,
            first_order_asymmetry: asymmetry,
            gram_min_eigenvalue,
            gamma_squares: gamma_sq,
            fourth_order_residual: extraction.fourth_order_residual,
            cross_order_mismatch: extraction.cross_order_mismatch,
            residuals,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{gamma_gram, GeneralHamiltonian, Hamiltonian};

    #[test]
    fn small_gamma_one_recovers_beta_to_full_precision() {
        let h = CanonicalHamiltonian::new(
            [0.766, 2.088, 0.191],
            [2.6, 0.436, 0.622],
            [5.854e-4, 1.2518, 2.922],
        );
        let t = taylor_maps(&h, 6);
        let rep = reconstruct(&taylor_maps(&h, 4), ZERO_TOL).unwrap();
        assert_eq!(rep.case, CaseClass::CaseI);
        assert!(rep.candidate_plus.max_abs_diff(&h) < 1e-10);
        assert!(t.max_abs_diff_u(&taylor_maps(&rep.candidate_plus, 6)) < 1e-10);
    }

    #[test]
    fn alpha_only_on_axis_three() {
        let h = CanonicalHamiltonian::new([0.0, 0.0, 1.0], [0.0; 3], [0.0; 3]);
        let (a, _) = extract_alpha(&taylor_maps(&h, 1)).unwrap();
        assert!((a[2] - 1.0).abs() < 1e-15 && a[0].abs() < 1e-15 && a[1].abs() < 1e-15);
    }

    #[test]
    fn alpha_ignores_interaction() {
        let h = CanonicalHamiltonian::new([0.0; 3], [0.3, -0.2, 0.5], [0.7, 1.1, 1.3]);
        let (a, _) = extract_alpha(&taylor_maps(&h, 1)).unwrap();
        assert!(a.iter().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn symmetric_first_order_is_malformed() {
        let mut t = taylor_maps(&CanonicalHamiltonian::default(), 2);
        t.coeffs[1].u[0][1] = 0.5;
        t.coeffs[1].u[1][0] = 0.5;
        assert!(matches!(extract_alpha(&t), Err(ReconstructionError::Malformed(_))));
    }

    #[test]
    fn negative_gram_is_malformed() {
        let mut t = taylor_maps(&CanonicalHamiltonian::default(), 2);
        // u⁽²⁾ diagonal positive would need negative γ².
        for n in 0..3 {
            t.coeffs[2].u[n][n] = 0.5;
        }
        assert!(matches!(extract_gram(&t, [0.0; 3]), Err(ReconstructionError::Malformed(_))));
    }

    #[test]
    fn zero_gamma_gives_zero_gram() {
        let h = CanonicalHamiltonian::new([0.4, -0.3, 0.2], [0.5, 0.1, 0.3], [0.0; 3]);
        let t = taylor_maps(&h, 2);
        let (a, _) = extract_alpha(&t).unwrap();
        assert!(extract_gram(&t, a).unwrap().abs().max() < 1e-14);
    }

    #[test]
    fn gram_of_diagonal() {
        let h = CanonicalHamiltonian::new([0.4, -0.3, 0.2], [0.5, 0.1, 0.3], [0.5, -1.5, 2.0]);
        let t = taylor_maps(&h, 2);
        let (a, _) = extract_alpha(&t).unwrap();
        let g = extract_gram(&t, a).unwrap();
        assert!((g - gamma_gram(&h.to_general())).abs().max() < 1e-13);
    }

    #[test]
    fn classification_table() {
        let thr = 1e-9;
        assert_eq!(classify([0.49, 1.21, 1.69], None, thr).unwrap(), CaseClass::CaseI);
        assert_eq!(classify([0.0, 1.21, 1.69], None, thr).unwrap(), CaseClass::CaseII);
        assert_eq!(classify([0.0, 0.0, 1.69], None, thr).unwrap(), CaseClass::CaseIII);
        assert_eq!(classify([0.0, 0.0, 1.69], Some(0.0), thr).unwrap(), CaseClass::ExceptionCase);
        assert!(matches!(
            classify([0.0; 3], None, thr),
            Err(ReconstructionError::NoInteraction { .. })
        ));
    }

    #[test]
    fn no_interaction_report() {
        let t = taylor_maps(&GeneralHamiltonian::default(), 4);
        assert_eq!(
            reconstruct(&t, ZERO_TOL).unwrap_err(),
            ReconstructionError::NoInteraction { alpha: [0.0; 3] }
        );
    }

    #[test]
    fn example_round_trip() {
        let h = CanonicalHamiltonian::pure_interaction([0.7, 1.1, 1.3]);
        let rep = reconstruct(&taylor_maps(&h, 4), ZERO_TOL).unwrap();
        assert_eq!(rep.case, CaseClass::CaseI);
        assert!(rep.candidate_plus.max_abs_diff(&h) < 1e-10);
        assert!((rep.candidate_minus.gamma[0] + 0.7).abs() < 1e-10);
    }

    #[test]
    fn order_two_is_not_enough_for_case_one() {
        let h = CanonicalHamiltonian::pure_interaction([0.7, 1.1, 1.3]);
        assert!(matches!(
            reconstruct(&taylor_maps(&h, 2), ZERO_TOL),
            Err(ReconstructionError::InsufficientOrder { needed: 3, .. })
        ));
    }

}
