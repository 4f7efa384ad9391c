// Copyright 2026 The duoqubit Authors
// SPDX-License-Identifier: Apache-2.0

//! Taylor coefficients of the reduced map at `t = 0`.
//!
//! Entry `m` of a table is `(1/m!) dᵐ/dtᵐ` of the map at zero, i.e. the
//! coefficient of `tᵐ`, not the raw derivative.

use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{MapCoefficients, SpectralPropagator};
use crate::hamiltonian::{Hamiltonian, RotationMatrix3};
use crate::pauli::{adjoint_generator, basis_matrix, pauli_expand, PauliBasisElement, PauliCoefficients};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaylorTable {
    pub order: usize,
    /// `coeffs[m]` for `m = 0..=order`.
    pub coeffs: Vec<MapCoefficients>,
}

impl TaylorTable {
    pub fn new(coeffs: Vec<MapCoefficients>) -> Self {
        assert!(!coeffs.is_empty(), "a Taylor table needs order 0");
        Self {
            order: coeffs.len() - 1,
            coeffs,
        }
    }

    pub fn coeff(&self, m: usize) -> &MapCoefficients {
        &self.coeffs[m]
    }

    /// `m`-th derivative of the u block at zero (`m! · coeff`).
    pub fn u_derivative(&self, m: usize) -> Matrix3<f64> {
        let f = factorial(m);
        Matrix3::from_fn(|n, j| self.coeffs[m].u[n][j] * f)
    }

    /// Keeps orders `0..=order`.
    pub fn truncated(&self, order: usize) -> Self {
        Self::new(self.coeffs[..=order.min(self.order)].to_vec())
    }

    /// Partial sum `Σ_m coeffs[m] tᵐ`.
    pub fn evaluate(&self, t: f64) -> MapCoefficients {
        let mut acc = [0.0; super::MAP_ENTRIES];
        let mut p = 1.0;
        for c in &self.coeffs {
            for (a, x) in acc.iter_mut().zip(c.to_flat().iter()) {
                *a += x * p;
            }
            p *= t;
        }
        MapCoefficients::from_flat(&acc)
    }

    /// Expresses the table in the Σ frame `Σ' = R Σ`: every Σ index is
    /// rotated, Ξ indices are left alone.
    pub fn rotate_sigma(&self, r: &RotationMatrix3) -> Self {
        let r = r.matrix();
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                let u = Matrix3::from_fn(|n, j| c.u[n][j]);
                let v = Matrix3::from_fn(|n, k| c.v[n][k]);
                let u2 = r * u * r.transpose();
                let v2 = r * v;
                let mut out = MapCoefficients::default();
                for n in 0..3 {
                    for j in 0..3 {
                        out.u[n][j] = u2[(n, j)];
                        out.v[n][j] = v2[(n, j)];
                    }
                }
                for k in 0..3 {
                    let wk = Matrix3::from_fn(|n, j| c.w[n][j][k]);
                    let wk2 = r * wk * r.transpose();
                    for n in 0..3 {
                        for j in 0..3 {
                            out.w[n][j][k] = wk2[(n, j)];
                        }
                    }
                }
                out
            })
            .collect();
        Self::new(coeffs)
    }

    /// Largest u-block discrepancy over the orders both tables share.
    pub fn max_abs_diff_u(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(other.coeffs.iter())
            .map(|(a, b)| a.max_abs_diff_u(b))
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(other.coeffs.iter())
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }
}

pub(crate) fn factorial(m: usize) -> f64 {
    (1..=m).map(|k| k as f64).product()
}

/// Taylor table from repeated application of the Heisenberg generator.
pub fn taylor_maps<H: Hamiltonian + ?Sized>(h: &H, order: usize) -> TaylorTable {
    let a = adjoint_generator(h);
    let mut rows = [1, 2, 3].map(|n| PauliCoefficients::unit(PauliBasisElement::sigma(n)));
    let mut coeffs = Vec::with_capacity(order + 1);
    coeffs.push(MapCoefficients::from_rows(&rows));
    for m in 1..=order {
        for row in rows.iter_mut() {
            let mut next = a.apply(row);
            for x in next.0.iter_mut() {
                *x /= m as f64;
            }
            *row = next;
        }
        coeffs.push(MapCoefficients::from_rows(&rows));
    }
    TaylorTable::new(coeffs)
}

/// Taylor table from the eigendecomposition: in the energy basis the
/// `m`-th coefficient of `O(t)` is `(i(E_a − E_b))ᵐ / m! · O_ab`.
pub fn taylor_maps_spectral<H: Hamiltonian + ?Sized>(h: &H, order: usize) -> TaylorTable {
    let prop = SpectralPropagator::new(h);
    let e = prop.energies;
    let vecs = &prop.vectors;
    let in_eigen = [1, 2, 3].map(|n| vecs.adjoint() * basis_matrix(PauliBasisElement::sigma(n)) * vecs);
    let coeffs = (0..=order)
        .map(|m| {
            let scale = 1.0 / factorial(m);
            let rows = in_eigen.map(|mut o| {
                for a in 0..4 {
                    for b in 0..4 {
                        let w = Complex64::new(0.0, e[a] - e[b]).powu(m as u32) * scale;
                        o[(a, b)] *= w;
                    }
                }
                pauli_expand(&(vecs * o * vecs.adjoint()))
            });
            MapCoefficients::from_rows(&rows)
        })
        .collect();
    TaylorTable::new(coeffs)
}
