// Copyright 2026 The duoqubit Authors
// SPDX-License-Identifier: Apache-2.0

//! Least-squares Taylor coefficients from sampled time series.
//!
//! Each column (a map entry or a mean value) is fitted with a polynomial of degree
//! `order + 1` (one guard term absorbs the leading truncation error) on the
//! samples with `0 ≤ t ≤ window`. Time is rescaled to `t / window` before the
//! solve.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{DynamicsError, MapCoefficients, MapSnapshot, TaylorTable, MAP_ENTRIES};

/// Largest acceptable condition number of the scaled design matrix.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub window: f64,
    pub samples_used: usize,
    pub degree: usize,
    pub condition: f64,
    /// RMS residual of each fitted column (map entries use the flat
    /// `u, v, w` layout).
    pub rms_residual: Vec<f64>,
}

impl FitDiagnostics {
    pub fn max_rms_residual(&self) -> f64 {
        self.rms_residual.iter().copied().fold(0.0, f64::max)
    }
}

/// `0.2 / ‖h‖`, the window used when none is given.
pub fn default_window(h_norm: f64) -> f64 {
    0.2 / h_norm.max(1e-12)
}

/// Fit order used when the window is chosen from the data. Callers truncate
/// the result to the order they need.
pub const AUTO_FIT_ORDER: usize = 12;

/// Fastest rate visible in orders `1..=up_to`, `max (m! |cₘ|)^(1/m)`.
fn rate(coeffs: &[Vec<f64>], up_to: usize) -> f64 {
    let mut fact = 1.0;
    let mut best: f64 = 0.0;
    for (m, c) in coeffs.iter().enumerate().take(up_to + 1).skip(1) {
        fact *= m as f64;
        for x in c {
            best = best.max((fact * x.abs()).powf(1.0 / m as f64));
        }
    }
    best
}

/// Window `1/ω` for a fit at [`AUTO_FIT_ORDER`], with `ω` estimated from
/// the samples: first from orders 1 and 2 on the shortest usable window,
/// then from orders 1 to 4 on the window that gives.
pub fn auto_window(samples: &[(f64, Vec<f64>)]) -> Result<f64, DynamicsError> {
    let mut times: Vec<f64> = samples.iter().map(|s| s.0).filter(|t| *t >= 0.0).collect();
    times.sort_by(f64::total_cmp);
    let needed = 2 * (AUTO_FIT_ORDER + 1);
    if times.len() < needed {
        return Err(DynamicsError::TooFewSamples {
            needed,
            got: times.len(),
        });
    }
    let (shortest, span) = (times[needed - 1], times[times.len() - 1]);
    let clamp = |w: f64| w.clamp(shortest, span);
    let (coarse, _) = fit_polynomials(samples, AUTO_FIT_ORDER, shortest)?;
    let omega = rate(&coarse, 2);
    if omega == 0.0 {
        return Ok(span);
    }
    let first = clamp(1.0 / omega);
    let (refined, _) = fit_polynomials(samples, AUTO_FIT_ORDER, first)?;
    let omega = rate(&refined, 4);
    Ok(if omega > 0.0 { clamp(1.0 / omega) } else { first })
}

pub fn fit_taylor(
    samples: &[MapSnapshot],
    order: usize,
    window: f64,
) -> Result<(TaylorTable, FitDiagnostics), DynamicsError> {
    let rows: Vec<(f64, Vec<f64>)> = samples.iter().map(|s| (s.t, s.maps.to_flat().to_vec())).collect();
    let (coeffs, diagnostics) = fit_polynomials(&rows, order, window)?;
    let table = TaylorTable::new(
        coeffs
            .iter()
            .map(|c| {
                let mut flat = [0.0; MAP_ENTRIES];
                flat.copy_from_slice(c);
                MapCoefficients::from_flat(&flat)
            })
            .collect(),
    );
    Ok((table, diagnostics))
}

/// Taylor coefficients `0..=order` of every column of `(t, values)` rows.
/// `result[m][c]` is the coefficient of `tᵐ` in column `c`.
pub fn fit_polynomials(
    samples: &[(f64, Vec<f64>)],
    order: usize,
    window: f64,
) -> Result<(Vec<Vec<f64>>, FitDiagnostics), DynamicsError> {
    if order == 0 {
        return Err(DynamicsError::InvalidOrder);
    }
    let mut used: Vec<&(f64, Vec<f64>)> = samples
        .iter()
        .filter(|s| s.0 >= 0.0 && s.0 <= window)
        .collect();
    let needed = 2 * (order + 1);
    if used.len() < needed {
        return Err(DynamicsError::TooFewSamples {
            needed,
            got: used.len(),
        });
    }
    used.sort_by(|a, b| a.0.total_cmp(&b.0));
    if let Some(w) = used.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(DynamicsError::DuplicateTime(w[0].0));
    }

    let degree = order + 1;
    let rows = used.len();
    let design = DMatrix::from_fn(rows, degree + 1, |i, p| (used[i].0 / window).powi(p as i32));
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition > MAX_CONDITION {
        return Err(DynamicsError::IllConditioned(condition));
    }

    let columns = used[0].1.len();
    let mut coeffs = vec![vec![0.0; columns]; order + 1];
    let mut rms_residual = vec![0.0; columns];
    for col in 0..columns {
        let y = DVector::from_fn(rows, |i, _| used[i].1[col]);
        let x = svd
            .solve(&y, 0.0)
            .expect("SVD was computed with both singular-vector sets");
        let r = &design * &x - &y;
        rms_residual[col] = (r.norm_squared() / rows as f64).sqrt();
        for (m, c) in coeffs.iter_mut().enumerate() {
            c[col] = x[m] / window.powi(m as i32);
        }
    }
    let diagnostics = FitDiagnostics {
        window,
        samples_used: rows,
        degree,
        condition,
        rms_residual,
    };
    Ok((coeffs, diagnostics))
}
