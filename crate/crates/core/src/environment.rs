// Copyright 2026 The duoqubit Authors
// SPDX-License-Identifier: Apache-2.0

//! Initial mean values of the unobserved qubit and of the correlations.
//!
//! With the Hamiltonian fixed, the Taylor coefficients of `⟨Σn(t)⟩` are
//! linear in the fifteen initial mean values. Order zero gives `⟨Σj⟩`; orders
//! `1..=K` give a linear system for the twelve unknowns `⟨Ξk⟩, ⟨ΣjΞk⟩`.
//! Directions of the unknowns in the null space of that system are reported
//! as undetermined rather than estimated.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{fit_polynomials, taylor_maps, DynamicsError, FitDiagnostics, TaylorTable, TwoQubitState};
use crate::hamiltonian::{CanonicalHamiltonian, RotationMatrix3};
use crate::pauli::PauliBasisElement;

/// Singular values below this fraction of the largest span the null space.
pub const RANK_TOL: f64 = 1e-8;
/// Largest null-space component an unknown may have and still be determined.
pub const DETERMINED_TOL: f64 = 1e-6;
/// Largest tolerated residual of the normalized linear system.
pub const RESIDUAL_TOL: f64 = 1e-6;
/// Slack on `|mean| ≤ 1` for determined entries.
pub const RANGE_SLACK: f64 = 1e-8;
/// Highest order read by default.
pub const DEFAULT_ORDER: usize = 4;

const UNKNOWNS: usize = 12;

#[derive(Debug, Error, PartialEq)]
pub enum EnvironmentError {
    #[error("mean series needs order 1 or higher")]
    InsufficientOrder,
    #[error("mean data are inconsistent with this Hamiltonian (residual {residual:e})")]
    Inconsistent { residual: f64 },
    #[error("recovered {parameter} = {value} is not a valid mean value")]
    OutOfRange { parameter: String, value: f64 },
}

/// Taylor coefficients of the three observed mean values, `coeffs[m][n]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanSeries {
    pub coeffs: Vec<[f64; 3]>,
}

impl MeanSeries {
    /// Series produced by the map coefficients of `t` acting on `s`.
    pub fn from_state(t: &TaylorTable, s: &TwoQubitState) -> Self {
        Self {
            coeffs: t.coeffs.iter().map(|c| c.apply(s)).collect(),
        }
    }

    /// Least-squares series from sampled `(t, ⟨Σ⟩)` values.
    pub fn fit(
        samples: &[(f64, [f64; 3])],
        order: usize,
        window: f64,
    ) -> Result<(Self, FitDiagnostics), DynamicsError> {
        let rows: Vec<(f64, Vec<f64>)> = samples.iter().map(|(t, m)| (*t, m.to_vec())).collect();
        let (coeffs, diagnostics) = fit_polynomials(&rows, order, window)?;
        let coeffs = coeffs.iter().map(|c| [c[0], c[1], c[2]]).collect();
        Ok((Self { coeffs }, diagnostics))
    }

    pub fn order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn truncated(&self, order: usize) -> Self {
        Self {
            coeffs: self.coeffs[..=order.min(self.order())].to_vec(),
        }
    }

    /// Expresses the series in the Σ frame `Σ' = R Σ`.
    pub fn rotate_sigma(&self, r: &RotationMatrix3) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| r.apply(*c)).collect(),
        }
    }
}

/// Recovered `⟨Ξk⟩` and `⟨ΣjΞk⟩`; `None` marks an undetermined entry.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentEstimate {
    pub xi: [Option<f64>; 3],
    /// Row `j`, column `k`: `⟨ΣjΞk⟩`.
    pub corr: [[Option<f64>; 3]; 3],
    pub rank: usize,
    pub residual: f64,
}

fn unknown_element(i: usize) -> PauliBasisElement {
    if i < 3 {
        PauliBasisElement::xi(i + 1)
    } else {
        PauliBasisElement::new((i - 3) / 3 + 1, (i - 3) % 3 + 1)
    }
}

impl EnvironmentEstimate {
    fn entries(&self) -> [Option<f64>; UNKNOWNS] {
        let mut out = [None; UNKNOWNS];
        out[..3].copy_from_slice(&self.xi);
        for j in 0..3 {
            out[3 + 3 * j..6 + 3 * j].copy_from_slice(&self.corr[j]);
        }
        out
    }

    fn from_entries(entries: [Option<f64>; UNKNOWNS], rank: usize, residual: f64) -> Self {
        let mut e = Self {
            rank,
            residual,
            ..Default::default()
        };
        e.xi.copy_from_slice(&entries[..3]);
        for j in 0..3 {
            e.corr[j].copy_from_slice(&entries[3 + 3 * j..6 + 3 * j]);
        }
        e
    }

    /// Labels (`X1`, `S1X2`, …) of the determined entries.
    pub fn determined(&self) -> Vec<String> {
        self.entries()
            .iter()
            .enumerate()
            .filter(|(_, x)| x.is_some())
            .map(|(i, _)| unknown_element(i).to_string())
            .collect()
    }

    /// Largest error of the determined entries against the true state.
    pub fn max_error(&self, s: &TwoQubitState) -> f64 {
        let truth = TwoQubitState::coefficients(s);
        self.entries()
            .iter()
            .enumerate()
            .filter_map(|(i, x)| x.map(|x| (x - truth[unknown_element(i)]).abs()))
            .fold(0.0, f64::max)
    }

    /// Largest difference over entries determined in both; infinite when the
    /// determined sets differ.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries()
            .iter()
            .zip(other.entries().iter())
            .map(|(a, b)| match (a, b) {
                (Some(a), Some(b)) => (a - b).abs(),
                (None, None) => 0.0,
                _ => f64::INFINITY,
            })
            .fold(0.0, f64::max)
    }
}

pub fn recover_environment(
    h: &CanonicalHamiltonian,
    observed: &MeanSeries,
) -> Result<EnvironmentEstimate, EnvironmentError> {
    recover_environment_with(h, observed, RESIDUAL_TOL)
}

/// As [`recover_environment`] with an explicit residual tolerance (fitted
/// data carry fit error).
pub fn recover_environment_with(
    h: &CanonicalHamiltonian,
    observed: &MeanSeries,
    residual_tol: f64,
) -> Result<EnvironmentEstimate, EnvironmentError> {
    let order = observed.order();
    if order == 0 {
        return Err(EnvironmentError::InsufficientOrder);
    }
    let table = taylor_maps(h, order);
    let sigma0 = observed.coeffs[0];
    let scale = h.norm_squared().sqrt().max(1.0);

    let mut rows: Vec<([f64; UNKNOWNS], f64)> = Vec::with_capacity(3 * order);
    for m in 1..=order {
        let c = &table.coeffs[m];
        for n in 0..3 {
            let mut a = [0.0; UNKNOWNS];
            a[..3].copy_from_slice(&c.v[n]);
            for j in 0..3 {
                a[3 + 3 * j..6 + 3 * j].copy_from_slice(&c.w[n][j]);
            }
            let known: f64 = (0..3).map(|j| c.u[n][j] * sigma0[j]).sum();
            let y = observed.coeffs[m][n] - known;
            let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-12 * scale.powi(m as i32) {
                rows.push((a.map(|x| x / norm), y / norm));
            }
        }
    }
    if rows.is_empty() {
        return Ok(EnvironmentEstimate::default());
    }

    let a = DMatrix::from_fn(rows.len(), UNKNOWNS, |r, c| rows[r].0[c]);
    let y = DVector::from_fn(rows.len(), |r, _| rows[r].1);
    let svd = a.clone().svd(true, true);
    let tol = RANK_TOL * svd.singular_values.max();
    let x = svd.solve(&y, tol).expect("singular vectors were requested");
    let residual = (&a * &x - &y).amax();
    if residual > residual_tol {
        return Err(EnvironmentError::Inconsistent { residual });
    }

    let v_t = svd.v_t.as_ref().expect("singular vectors were requested");
    let kept: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > tol)
        .collect();
    let mut entries = [None; UNKNOWNS];
    for (i, slot) in entries.iter_mut().enumerate() {
        let in_range: f64 = kept.iter().map(|&r| v_t[(r, i)] * v_t[(r, i)]).sum();
        let null = (1.0 - in_range).max(0.0).sqrt();
        if null < DETERMINED_TOL {
            let value = x[i];
            if value.abs() > 1.0 + RANGE_SLACK {
                return Err(EnvironmentError::OutOfRange {
                    parameter: unknown_element(i).to_string(),
                    value,
                });
            }
            *slot = Some(value);
        }
    }
    Ok(EnvironmentEstimate::from_entries(entries, kept.len(), residual))
}

/// The environment estimate that pairs with the sign-partner Hamiltonian:
/// `⟨ΣjΞ1⟩, ⟨Ξ2⟩, ⟨Ξ3⟩` change sign.
pub fn flip_environment(est: &EnvironmentEstimate) -> EnvironmentEstimate {
    let mut out = est.clone();
    for k in 1..3 {
        out.xi[k] = out.xi[k].map(|x| -x);
    }
    for row in out.corr.iter_mut() {
        row[0] = row[0].map(|x| -x);
    }
    out
}

/// The same sign change applied to a full state. This acts on mean values
/// only; for entangled inputs the result is generally not a positive state.
pub fn flip_state(s: &TwoQubitState) -> TwoQubitState {
    let mut out = *s;
    out.xi[1] = -out.xi[1];
    out.xi[2] = -out.xi[2];
    for row in out.corr.iter_mut() {
        row[0] = -row[0];
    }
    out
}
