// Copyright 2026 The duoqubit Authors
// SPDX-License-Identifier: Apache-2.0

//! Classical analog: a linear pair `dx/dt = αx + γ′y′, dy′/dt = δx + βy′`
//! where only `x` is observed.
//!
//! Rescaling `y = √(γ′/|δ|) y′` gives `dx/dt = αx + γy, dy/dt = ±γx + βy`
//! with `γ = √(γ′|δ|)` and `±` the sign of `δ`. The first three derivatives
//! of `x` at `t = 0`, read as linear functions of the initial `x`, then
//! determine `α`, `±γ²`, `β` and the initial `y`.

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::taylor::factorial;

/// Sample spacing of the finite-difference front end.
pub const FD_STEP: f64 = 1e-4;
/// Samples on each side of the evaluation point.
pub const FD_HALF_WIDTH: usize = 100;
/// Degree of the local least-squares polynomial.
pub const FD_DEGREE: usize = 6;
/// Relative cutoff below which `γ²` counts as zero.
pub const CLASSICAL_ZERO_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum ClassicalError {
    #[error("γ′ = {gamma_prime} and δ = {delta} must both be nonzero to normalize")]
    NotNormalizable { gamma_prime: f64, delta: f64 },
    #[error("need derivative data at two or more distinct initial x, got {0}")]
    TooFewInitialValues(usize),
    #[error("derivative stencil needs an odd number of at least {needed} samples, got {got}")]
    BadStencil { needed: usize, got: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalSystem {
    pub alpha: f64,
    pub beta: f64,
    pub gamma_prime: f64,
    pub delta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalCanonical {
    pub alpha: f64,
    pub beta: f64,
    /// Positive coupling `√(γ′|δ|)`.
    pub gamma: f64,
    /// Sign of the back-coupling, `±1`.
    pub sign: i8,
}

fn evolve_linear(m: Matrix2<f64>, x0: f64, y0: f64, t: f64) -> (f64, f64) {
    let v = (m * t).exp() * Vector2::new(x0, y0);
    (v[0], v[1])
}

impl ClassicalSystem {
    fn generator(&self) -> Matrix2<f64> {
        Matrix2::new(self.alpha, self.gamma_prime, self.delta, self.beta)
    }

    /// `(x(t), y′(t))` by matrix exponential.
    pub fn evolve(&self, x0: f64, y0_prime: f64, t: f64) -> (f64, f64) {
        evolve_linear(self.generator(), x0, y0_prime, t)
    }

    /// Factor taking `y′` to the normalized `y`, including the sign change
    /// applied when `γ′ < 0`.
    pub fn hidden_scale(&self) -> f64 {
        (self.gamma_prime / self.delta).abs().sqrt() * self.gamma_prime.signum()
    }
}

impl ClassicalCanonical {
    fn generator(&self) -> Matrix2<f64> {
        Matrix2::new(self.alpha, self.gamma, f64::from(self.sign) * self.gamma, self.beta)
    }

    pub fn evolve(&self, x0: f64, y0: f64, t: f64) -> (f64, f64) {
        evolve_linear(self.generator(), x0, y0, t)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let s = if self.sign == other.sign { 0.0 } else { f64::INFINITY };
        (self.alpha - other.alpha)
            .abs()
            .max((self.beta - other.beta).abs())
            .max((self.gamma - other.gamma).abs())
            .max(s)
    }
}

pub fn classical_normalize(sys: &ClassicalSystem) -> Result<ClassicalCanonical, ClassicalError> {
    if sys.gamma_prime == 0.0 || sys.delta == 0.0 {
        return Err(ClassicalError::NotNormalizable {
            gamma_prime: sys.gamma_prime,
            delta: sys.delta,
        });
    }
    let (gp, d) = if sys.gamma_prime < 0.0 {
        (-sys.gamma_prime, -sys.delta)
    } else {
        (sys.gamma_prime, sys.delta)
    };
    Ok(ClassicalCanonical {
        alpha: sys.alpha,
        beta: sys.beta,
        gamma: (gp * d.abs()).sqrt(),
        sign: if d > 0.0 { 1 } else { -1 },
    })
}

/// First three time derivatives of `x` at `(x0, y0)`.
pub fn classical_derivatives(c: &ClassicalCanonical, x0: f64, y0: f64) -> [f64; 3] {
    let (a, b, g) = (c.alpha, c.beta, c.gamma);
    let s = f64::from(c.sign);
    let g2 = g * g;
    let d1 = a * x0 + g * y0;
    let d2 = a * a * x0 + s * g2 * x0 + g * (a + b) * y0;
    let d3 = (a * a * a + s * 2.0 * a * g2) * x0
        + s * g2 * b * x0
        + (a * a * g + a * b * g + b * b * g + s * g2 * g) * y0;
    [d1, d2, d3]
}

/// Derivatives 1..=3 at the center of `2N + 1` equally spaced samples, from
/// a least-squares polynomial of degree [`FD_DEGREE`].
pub fn derivatives_from_samples(samples: &[f64], step: f64) -> Result<[f64; 3], ClassicalError> {
    let needed = FD_DEGREE + 1 + (FD_DEGREE + 1) % 2;
    if samples.len() < needed || samples.len().is_multiple_of(2) {
        return Err(ClassicalError::BadStencil {
            needed,
            got: samples.len(),
        });
    }
    let half = (samples.len() / 2) as f64;
    let design = DMatrix::from_fn(samples.len(), FD_DEGREE + 1, |i, p| {
        ((i as f64 - half) / half).powi(p as i32)
    });
    let y = DVector::from_column_slice(samples);
    let coeffs = design
        .svd(true, true)
        .solve(&y, 0.0)
        .expect("singular vectors were requested");
    let span = half * step;
    Ok([1, 2, 3].map(|m| coeffs[m] * factorial(m) / span.powi(m as i32)))
}

/// `x(k·step)` for `k = −N..=N` along the exact normalized trajectory.
pub fn sample_trajectory(c: &ClassicalCanonical, x0: f64, y0: f64, step: f64, half_width: usize) -> Vec<f64> {
    let n = half_width as i64;
    (-n..=n).map(|k| c.evolve(x0, y0, k as f64 * step).0).collect()
}

/// Derivatives estimated from a sampled trajectory with the default stencil.
pub fn fd_derivatives(c: &ClassicalCanonical, x0: f64, y0: f64, step: f64) -> [f64; 3] {
    derivatives_from_samples(&sample_trajectory(c, x0, y0, step, FD_HALF_WIDTH), step)
        .expect("default stencil is valid")
}

/// Derivatives of `x` observed from one initial `x` (the hidden `y0` fixed).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivativeSample {
    pub x0: f64,
    pub derivatives: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalReconstruction {
    pub alpha: f64,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub sign: Option<i8>,
    pub y0: Option<f64>,
    /// Set when `γ = 0`: `y` never feeds back into `x`.
    pub hidden_unobservable: bool,
    /// Largest residual of the straight-line fits in `x0`.
    pub fit_residual: f64,
    /// Mismatch of the second and third intercepts with their prediction.
    pub consistency_residual: f64,
}

impl ClassicalReconstruction {
    pub fn canonical(&self) -> Option<ClassicalCanonical> {
        Some(ClassicalCanonical {
            alpha: self.alpha,
            beta: self.beta?,
            gamma: self.gamma?,
            sign: self.sign?,
        })
    }
}

/// Least-squares line `d = slope · x0 + intercept` and its largest residual.
fn line_fit(x: &[f64], d: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let xm = x.iter().sum::<f64>() / n;
    let dm = d.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|xi| (xi - xm) * (xi - xm)).sum();
    let sxd: f64 = x.iter().zip(d).map(|(xi, di)| (xi - xm) * (di - dm)).sum();
    let slope = sxd / sxx;
    let intercept = dm - slope * xm;
    let res = x
        .iter()
        .zip(d)
        .map(|(xi, di)| (di - slope * xi - intercept).abs())
        .fold(0.0, f64::max);
    (slope, intercept, res)
}

pub fn classical_reconstruct(samples: &[DerivativeSample]) -> Result<ClassicalReconstruction, ClassicalError> {
    let mut xs: Vec<f64> = samples.iter().map(|s| s.x0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    if xs.len() < 2 {
        return Err(ClassicalError::TooFewInitialValues(xs.len()));
    }
    let x: Vec<f64> = samples.iter().map(|s| s.x0).collect();
    let fits = [0, 1, 2].map(|m| {
        let d: Vec<f64> = samples.iter().map(|s| s.derivatives[m]).collect();
        line_fit(&x, &d)
    });
    let fit_residual = fits.iter().map(|f| f.2).fold(0.0, f64::max);
    let [(s1, i1, _), (s2, i2, _), (s3, i3, _)] = fits;

    let alpha = s1;
    let signed_g2 = s2 - alpha * alpha;
    if signed_g2.abs() <= CLASSICAL_ZERO_TOL * s2.abs().max(alpha * alpha).max(1.0) {
        return Ok(ClassicalReconstruction {
            alpha,
            beta: None,
            gamma: None,
            sign: None,
            y0: None,
            hidden_unobservable: true,
            fit_residual,
            consistency_residual: i1.abs().max(i2.abs()).max(i3.abs()),
        });
    }
    let gamma = signed_g2.abs().sqrt();
    let sign: i8 = if signed_g2 > 0.0 { 1 } else { -1 };
    // s3 − α³ = ±γ²(2α + β)
    let beta = (s3 - alpha * alpha * alpha) / signed_g2 - 2.0 * alpha;
    let y0 = i1 / gamma;
    let c = ClassicalCanonical {
        alpha,
        beta,
        gamma,
        sign,
    };
    let predicted = classical_derivatives(&c, 0.0, y0);
    let consistency_residual = (i2 - predicted[1]).abs().max((i3 - predicted[2]).abs());
    Ok(ClassicalReconstruction {
        alpha,
        beta: Some(beta),
        gamma: Some(gamma),
        sign: Some(sign),
        y0: Some(y0),
        hidden_unobservable: false,
        fit_residual,
        consistency_residual,
    })
}
