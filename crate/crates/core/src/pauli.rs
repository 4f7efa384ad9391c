// Copyright 2026 The duoqubit Authors
// SPDX-License-Identifier: Apache-2.0

//! Arithmetic over the two-qubit Pauli product basis.
//!
//! The observed qubit is the first tensor factor (Σ), the unobserved one the
//! second (Ξ). Single-qubit matrices follow the usual convention
//! σ1 = [[0,1],[1,0]], σ2 = [[0,-i],[i,0]], σ3 = diag(1,-1), so that
//! σ1σ2 = iσ3. Basis elements are ordered lexicographically by
//! `(sigma_index, xi_index)`, which fixes the layout of every serialized
//! coefficient vector.

use std::fmt;
use std::ops::{Index, IndexMut};

use nalgebra::{Matrix2, SMatrix, SVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::hamiltonian::Hamiltonian;

/// Dense 4×4 complex operator on the two-qubit space.
pub type Matrix4 = nalgebra::Matrix4<Complex64>;

/// Number of elements in the Pauli product basis.
pub const BASIS_SIZE: usize = 16;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// One element Σ_a ⊗ Ξ_b of the product basis, index 0 meaning identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PauliBasisElement {
    sigma: u8,
    xi: u8,
}

impl PauliBasisElement {
    pub const IDENTITY: Self = Self { sigma: 0, xi: 0 };

    /// Panics if either index exceeds 3.
    pub const fn new(sigma: usize, xi: usize) -> Self {
        assert!(sigma < 4 && xi < 4, "Pauli index out of range");
        Self {
            sigma: sigma as u8,
            xi: xi as u8,
        }
    }

    /// Σ_j ⊗ I for j in 1..=3.
    pub const fn sigma(j: usize) -> Self {
        Self::new(j, 0)
    }

    /// I ⊗ Ξ_k for k in 1..=3.
    pub const fn xi(k: usize) -> Self {
        Self::new(0, k)
    }

    pub const fn sigma_index(self) -> usize {
        self.sigma as usize
    }

    pub const fn xi_index(self) -> usize {
        self.xi as usize
    }

    /// Position in the lexicographic ordering.
    pub const fn index(self) -> usize {
        4 * self.sigma as usize + self.xi as usize
    }

    pub const fn from_index(i: usize) -> Self {
        Self::new(i / 4, i % 4)
    }

    pub fn is_identity(self) -> bool {
        self == Self::IDENTITY
    }

    /// All 16 elements in basis order.
    pub fn all() -> impl Iterator<Item = Self> {
        (0..BASIS_SIZE).map(Self::from_index)
    }

    /// The 15 traceless elements.
    pub fn traceless() -> impl Iterator<Item = Self> {
        (1..BASIS_SIZE).map(Self::from_index)
    }
}

impl fmt::Display for PauliBasisElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.sigma, self.xi) {
            (0, 0) => write!(f, "I"),
            (s, 0) => write!(f, "S{s}"),
            (0, x) => write!(f, "X{x}"),
            (s, x) => write!(f, "S{s}X{x}"),
        }
    }
}

/// Real expansion coefficients of a Hermitian operator, `O = Σ_e c[e] P_e`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliCoefficients(pub [f64; BASIS_SIZE]);

impl Default for PauliCoefficients {
    fn default() -> Self {
        Self([0.0; BASIS_SIZE])
    }
}

impl PauliCoefficients {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Coefficient vector of a single basis element.
    pub fn unit(e: PauliBasisElement) -> Self {
        let mut c = Self::zero();
        c[e] = 1.0;
        c
    }

    pub fn get(&self, sigma: usize, xi: usize) -> f64 {
        self.0[4 * sigma + xi]
    }

    pub fn as_vector(&self) -> SVector<f64, BASIS_SIZE> {
        SVector::from_column_slice(&self.0)
    }

    pub fn from_vector(v: &SVector<f64, BASIS_SIZE>) -> Self {
        let mut c = [0.0; BASIS_SIZE];
        c.copy_from_slice(v.as_slice());
        Self(c)
    }

    /// Rebuilds the operator `Σ_e c[e] P_e`.
    pub fn to_matrix(&self) -> Matrix4 {
        let mut m = Matrix4::zeros();
        for e in PauliBasisElement::all() {
            let c = self[e];
            if c != 0.0 {
                m += basis_matrix(e) * Complex64::new(c, 0.0);
            }
        }
        m
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Index<PauliBasisElement> for PauliCoefficients {
    type Output = f64;

    fn index(&self, e: PauliBasisElement) -> &f64 {
        &self.0[e.index()]
    }
}

impl IndexMut<PauliBasisElement> for PauliCoefficients {
    fn index_mut(&mut self, e: PauliBasisElement) -> &mut f64 {
        &mut self.0[e.index()]
    }
}

/// Matrix of the Heisenberg generator `O ↦ −i[O, H]` acting on coefficient
/// vectors: column `e` holds the expansion of `−i[P_e, H]`.
#[derive(Clone, Debug, PartialEq)]
pub struct AdjointMatrix(pub SMatrix<f64, BASIS_SIZE, BASIS_SIZE>);

impl AdjointMatrix {
    pub fn apply(&self, c: &PauliCoefficients) -> PauliCoefficients {
        PauliCoefficients::from_vector(&(self.0 * c.as_vector()))
    }

    /// `exp(t·A)` by Padé scaling and squaring.
    pub fn propagator(&self, t: f64) -> SMatrix<f64, BASIS_SIZE, BASIS_SIZE> {
        (self.0 * t).exp()
    }
}

/// Single-qubit Pauli matrix, index 0 is the identity.
pub fn single_pauli(i: usize) -> Matrix2<Complex64> {
    match i {
        0 => Matrix2::new(ONE, ZERO, ZERO, ONE),
        1 => Matrix2::new(ZERO, ONE, ONE, ZERO),
        2 => Matrix2::new(ZERO, -I, I, ZERO),
        3 => Matrix2::new(ONE, ZERO, ZERO, -ONE),
        _ => panic!("Pauli index {i} out of range"),
    }
}

/// `Σ_a ⊗ Ξ_b` as a 4×4 matrix.
pub fn basis_matrix(e: PauliBasisElement) -> Matrix4 {
    let a = single_pauli(e.sigma_index());
    let b = single_pauli(e.xi_index());
    let k = a.kronecker(&b);
    Matrix4::from_fn(|r, c| k[(r, c)])
}

pub fn commutator(a: &Matrix4, b: &Matrix4) -> Matrix4 {
    a * b - b * a
}

/// Complex coefficients `tr(P_e m) / 4` for an arbitrary operator.
pub fn pauli_expand_complex(m: &Matrix4) -> [Complex64; BASIS_SIZE] {
    let mut out = [ZERO; BASIS_SIZE];
    for e in PauliBasisElement::all() {
        out[e.index()] = (basis_matrix(e) * m).trace() * 0.25;
    }
    out
}

/// Real expansion of a Hermitian operator. Imaginary parts (nonzero only for
/// non-Hermitian input) are dropped; use [`pauli_expand_complex`] when they
/// matter.
pub fn pauli_expand(m: &Matrix4) -> PauliCoefficients {
    let c = pauli_expand_complex(m);
    let mut out = PauliCoefficients::zero();
    for (dst, src) in out.0.iter_mut().zip(c.iter()) {
        *dst = src.re;
    }
    out
}

/// Largest entrywise deviation from Hermiticity.
pub fn hermiticity_defect(m: &Matrix4) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Heisenberg generator of `h`.
pub fn adjoint_generator<H: Hamiltonian + ?Sized>(h: &H) -> AdjointMatrix {
    adjoint_generator_of(&h.to_matrix())
}

/// Heisenberg generator of an explicit Hermitian matrix.
pub fn adjoint_generator_of(h: &Matrix4) -> AdjointMatrix {
    let mut a = SMatrix::<f64, BASIS_SIZE, BASIS_SIZE>::zeros();
    for e in PauliBasisElement::all() {
        let d = commutator(&basis_matrix(e), h) * (-I);
        let col = pauli_expand(&d);
        a.set_column(e.index(), &col.as_vector());
    }
    AdjointMatrix(a)
}
