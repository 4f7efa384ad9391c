// Copyright 2026 The duoqubit Authors
// SPDX-License-Identifier: Apache-2.0

//! Forward problem: reduced dynamics of the Σ qubit.
//!
//! The mean values of the observed qubit evolve as
//! `⟨Σn(t)⟩ = u_nj(t)⟨Σj⟩ + v_nk(t)⟨Ξk⟩ + w_njk(t)⟨ΣjΞk⟩`, where the map
//! coefficients are the Pauli components of `e^{itH} Σn e^{−itH}`.
//!
//! Two independent routes compute them: [`SpectralPropagator`] works from the
//! Hermitian eigendecomposition of the 4×4 Hamiltonian, while
//! [`evolve_heisenberg_adjoint`] exponentiates the 16×16 Heisenberg
//! generator. Taylor tables at `t = 0` live in [`taylor`], fitted ones in
//! [`fit`].

pub mod fit;
pub mod taylor;

use nalgebra::Vector4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::batch;
use crate::hamiltonian::Hamiltonian;
use crate::pauli::{
    adjoint_generator, basis_matrix, pauli_expand, Matrix4, PauliBasisElement, PauliCoefficients,
};

pub use fit::{auto_window, default_window, fit_polynomials, fit_taylor, FitDiagnostics, AUTO_FIT_ORDER};
pub use taylor::{taylor_maps, taylor_maps_spectral, TaylorTable};

/// Positivity slack for reconstructed density matrices.
pub const POSITIVITY_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum DynamicsError {
    #[error("state is not positive: smallest density-matrix eigenvalue {min_eigenvalue:e}")]
    InvalidState { min_eigenvalue: f64 },
    #[error("fit needs at least {needed} samples inside the window, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("sample times must be distinct (duplicate t = {0})")]
    DuplicateTime(f64),
    #[error("fit design matrix is ill-conditioned (condition number {0:e}); use a smaller window or fewer orders")]
    IllConditioned(f64),
    #[error("order must be at least 1")]
    InvalidOrder,
}

/// Mean values of all 15 traceless two-qubit observables.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TwoQubitState {
    /// ⟨Σj⟩
    pub sigma: [f64; 3],
    /// ⟨Ξk⟩
    pub xi: [f64; 3],
    /// ⟨ΣjΞk⟩, row j, column k.
    pub corr: [[f64; 3]; 3],
}

impl TwoQubitState {
    pub fn maximally_mixed() -> Self {
        Self::default()
    }

    /// Mean values of a normalized pure state `ψ` (basis |Σ⟩⊗|Ξ⟩).
    pub fn from_pure(psi: &[Complex64; 4]) -> Self {
        let v = nalgebra::Vector4::from_column_slice(psi);
        let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let mean = |e: PauliBasisElement| (v.adjoint() * basis_matrix(e) * v)[(0, 0)].re / norm2;
        let mut s = Self::default();
        for j in 0..3 {
            s.sigma[j] = mean(PauliBasisElement::sigma(j + 1));
            s.xi[j] = mean(PauliBasisElement::xi(j + 1));
            for k in 0..3 {
                s.corr[j][k] = mean(PauliBasisElement::new(j + 1, k + 1));
            }
        }
        s
    }

    /// Coefficients of `4ρ` in the Pauli basis (identity component 1).
    pub fn coefficients(&self) -> PauliCoefficients {
        let mut c = PauliCoefficients::unit(PauliBasisElement::IDENTITY);
        for j in 0..3 {
            c[PauliBasisElement::sigma(j + 1)] = self.sigma[j];
            c[PauliBasisElement::xi(j + 1)] = self.xi[j];
            for k in 0..3 {
                c[PauliBasisElement::new(j + 1, k + 1)] = self.corr[j][k];
            }
        }
        c
    }

    /// `ρ = ¼ (I + ⟨Σj⟩Σj + ⟨Ξk⟩Ξk + ⟨ΣjΞk⟩ΣjΞk)`.
    pub fn density_matrix(&self) -> Matrix4 {
        self.coefficients().to_matrix() * Complex64::new(0.25, 0.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.density_matrix()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let min_eigenvalue = self.min_eigenvalue();
        if min_eigenvalue < -POSITIVITY_TOL {
            Err(DynamicsError::InvalidState { min_eigenvalue })
        } else {
            Ok(())
        }
    }
}

/// The u/v/w blocks of the reduced map (or of one of its Taylor coefficients).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MapCoefficients {
    /// `u[n][j]`: coefficient of Σj in the evolution of Σn.
    pub u: [[f64; 3]; 3],
    /// `v[n][k]`: coefficient of Ξk.
    pub v: [[f64; 3]; 3],
    /// `w[n][j][k]`: coefficient of ΣjΞk.
    pub w: [[[f64; 3]; 3]; 3],
}

/// Number of real entries in u, v and w together.
pub const MAP_ENTRIES: usize = 9 + 9 + 27;

impl MapCoefficients {
    pub fn identity() -> Self {
        let mut m = Self::default();
        for n in 0..3 {
            m.u[n][n] = 1.0;
        }
        m
    }

    /// Sorts the expansions of the evolved Σ1, Σ2, Σ3 into blocks.
    pub fn from_rows(rows: &[PauliCoefficients; 3]) -> Self {
        let mut m = Self::default();
        for (n, row) in rows.iter().enumerate() {
            for j in 0..3 {
                m.u[n][j] = row.get(j + 1, 0);
                m.v[n][j] = row.get(0, j + 1);
                for k in 0..3 {
                    m.w[n][j][k] = row.get(j + 1, k + 1);
                }
            }
        }
        m
    }

    /// Inverse of [`Self::from_rows`] (identity components zero).
    pub fn to_rows(&self) -> [PauliCoefficients; 3] {
        let mut rows = [PauliCoefficients::zero(); 3];
        for (n, row) in rows.iter_mut().enumerate() {
            for j in 0..3 {
                row[PauliBasisElement::sigma(j + 1)] = self.u[n][j];
                row[PauliBasisElement::xi(j + 1)] = self.v[n][j];
                for k in 0..3 {
                    row[PauliBasisElement::new(j + 1, k + 1)] = self.w[n][j][k];
                }
            }
        }
        rows
    }

    /// Row-major flattening `u11..u33, v11..v33, w111..w333`.
    pub fn to_flat(&self) -> [f64; MAP_ENTRIES] {
        let mut out = [0.0; MAP_ENTRIES];
        let mut i = 0;
        for row in &self.u {
            for x in row {
                out[i] = *x;
                i += 1;
            }
        }
        for row in &self.v {
            for x in row {
                out[i] = *x;
                i += 1;
            }
        }
        for plane in &self.w {
            for row in plane {
                for x in row {
                    out[i] = *x;
                    i += 1;
                }
            }
        }
        out
    }

    pub fn from_flat(flat: &[f64; MAP_ENTRIES]) -> Self {
        let mut m = Self::default();
        let mut it = flat.iter().copied();
        for row in m.u.iter_mut() {
            for x in row.iter_mut() {
                *x = it.next().unwrap_or_default();
            }
        }
        for row in m.v.iter_mut() {
            for x in row.iter_mut() {
                *x = it.next().unwrap_or_default();
            }
        }
        for plane in m.w.iter_mut() {
            for row in plane.iter_mut() {
                for x in row.iter_mut() {
                    *x = it.next().unwrap_or_default();
                }
            }
        }
        m
    }

    /// `⟨Σn⟩` produced by these coefficients from the initial state `s`.
    pub fn apply(&self, s: &TwoQubitState) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (n, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for j in 0..3 {
                acc += self.u[n][j] * s.sigma[j] + self.v[n][j] * s.xi[j];
                for k in 0..3 {
                    acc += self.w[n][j][k] * s.corr[j][k];
                }
            }
            *o = acc;
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.to_flat()
            .iter()
            .zip(other.to_flat().iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff_u(&self, other: &Self) -> f64 {
        self.u
            .iter()
            .flatten()
            .zip(other.u.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Map coefficients at time `t`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MapSnapshot {
    pub t: f64,
    #[serde(flatten)]
    pub maps: MapCoefficients,
}

/// Heisenberg evolution through the eigendecomposition of the Hamiltonian.
#[derive(Clone, Debug)]
pub struct SpectralPropagator {
    vectors: Matrix4,
    energies: Vector4<f64>,
}

impl SpectralPropagator {
    pub fn new<H: Hamiltonian + ?Sized>(h: &H) -> Self {
        Self::from_matrix(&h.to_matrix())
    }

    pub fn from_matrix(h: &Matrix4) -> Self {
        let eig = h.symmetric_eigen();
        Self {
            vectors: eig.eigenvectors,
            energies: eig.eigenvalues,
        }
    }

    pub fn energies(&self) -> [f64; 4] {
        [self.energies[0], self.energies[1], self.energies[2], self.energies[3]]
    }

    /// `e^{itH} O e^{−itH}`.
    pub fn evolve_matrix(&self, o: &Matrix4, t: f64) -> Matrix4 {
        let mut in_eigenbasis = self.vectors.adjoint() * o * self.vectors;
        for a in 0..4 {
            for b in 0..4 {
                let phase = (self.energies[a] - self.energies[b]) * t;
                in_eigenbasis[(a, b)] *= Complex64::new(phase.cos(), phase.sin());
            }
        }
        self.vectors * in_eigenbasis * self.vectors.adjoint()
    }

    pub fn evolve(&self, e: PauliBasisElement, t: f64) -> PauliCoefficients {
        pauli_expand(&self.evolve_matrix(&basis_matrix(e), t))
    }

    pub fn snapshot(&self, t: f64) -> MapSnapshot {
        let rows = [1, 2, 3].map(|n| self.evolve(PauliBasisElement::sigma(n), t));
        MapSnapshot {
            t,
            maps: MapCoefficients::from_rows(&rows),
        }
    }

    /// Schrödinger-picture mean of `e` in the evolved state (used to cross
    /// check the map assembly).
    pub fn mean_in_evolved_state(&self, s: &TwoQubitState, e: PauliBasisElement, t: f64) -> f64 {
        // ρ(t) = e^{−itH} ρ e^{itH} is the Heisenberg formula at −t.
        let rho_t = self.evolve_matrix(&s.density_matrix(), -t);
        (rho_t * basis_matrix(e)).trace().re
    }
}

/// Evolves a single basis element by the eigendecomposition route.
pub fn evolve_heisenberg_exact<H: Hamiltonian + ?Sized>(
    h: &H,
    e: PauliBasisElement,
    t: f64,
) -> PauliCoefficients {
    SpectralPropagator::new(h).evolve(e, t)
}

/// Evolves a single basis element with `exp(t·A)` of the Heisenberg generator.
pub fn evolve_heisenberg_adjoint<H: Hamiltonian + ?Sized>(
    h: &H,
    e: PauliBasisElement,
    t: f64,
) -> PauliCoefficients {
    let prop = adjoint_generator(h).propagator(t);
    PauliCoefficients::from_vector(&prop.column(e.index()).into_owned())
}

pub fn map_snapshot<H: Hamiltonian + ?Sized>(h: &H, t: f64) -> MapSnapshot {
    SpectralPropagator::new(h).snapshot(t)
}

/// Snapshots at each time, evaluated as a batch.
pub fn map_trajectory<H: Hamiltonian + ?Sized>(h: &H, times: &[f64]) -> Vec<MapSnapshot> {
    let prop = SpectralPropagator::new(h);
    batch::map_slice(times, |&t| prop.snapshot(t))
}

/// `⟨Σn(t)⟩` for each time. Rejects non-positive states unless
/// `allow_invalid` is set.
pub fn mean_trajectory<H: Hamiltonian + ?Sized>(
    h: &H,
    s: &TwoQubitState,
    times: &[f64],
    allow_invalid: bool,
) -> Result<Vec<[f64; 3]>, DynamicsError> {
    if !allow_invalid {
        s.validate()?;
    }
    let prop = SpectralPropagator::new(h);
    Ok(batch::map_slice(times, |&t| prop.snapshot(t).maps.apply(s)))
}

/// Uniform grid `0, t_max/(n−1), …, t_max`.
pub fn time_grid(t_max: f64, n_points: usize) -> Vec<f64> {
    match n_points {
        0 => Vec::new(),
        1 => vec![0.0],
        n => (0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect(),
    }
}
