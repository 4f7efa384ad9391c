// Copyright 2026 The duoqubit Authors
// SPDX-License-Identifier: Apache-2.0

//! Two-qubit Hamiltonian parameter records.
//!
//! A general Hamiltonian is
//! `H = ½ αj Σj + ½ βk Ξk + ½ γjk Σj Ξk` (sums over 1..3, ħ = 1), and the
//! canonical form keeps only the diagonal interaction `½ γk Σk Ξk`.
//! [`canonicalize`] reaches the canonical form by rotating the Σ frame with
//! `R` (which depends only on the Gram matrix of the γ rows) and the Ξ frame
//! with `S`.
//!
//! Conventions fixed here and relied upon by the reconstruction:
//! * canonical gammas are ordered `|γ1| ≤ γ2 ≤ γ3` with `γ2, γ3 ≥ 0`, so the
//!   sign of `γ1` carries the sign of `det γ`;
//! * eigenvectors of the Gram matrix have their largest component positive,
//!   degenerate eigenspaces are spanned by projected standard axes, and
//!   `det R = +1` is enforced by negating the first row;
//! * when `γ1 = γ2 = 0` the Ξ frame is turned so that `β2 = 0, β1 ≥ 0`.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::pauli::{basis_matrix, Matrix4, PauliBasisElement};

/// Relative cutoff below which squared quantities (γ², β1² + β2²) are zero.
pub const ZERO_TOL: f64 = 1e-9;

/// Anything that can be written as a two-qubit Hamiltonian.
pub trait Hamiltonian {
    fn to_general(&self) -> GeneralHamiltonian;

    fn to_matrix(&self) -> Matrix4 {
        self.to_general().to_matrix()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GeneralHamiltonian {
    pub alpha: [f64; 3],
    pub beta: [f64; 3],
    /// Row `j` is the vector γ_j = (γ_j1, γ_j2, γ_j3).
    pub gamma: [[f64; 3]; 3],
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CanonicalHamiltonian {
    pub alpha: [f64; 3],
    pub beta: [f64; 3],
    /// Diagonal interaction strengths (γ1, γ2, γ3).
    pub gamma: [f64; 3],
}

impl GeneralHamiltonian {
    pub fn gamma_matrix(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|j, k| self.gamma[j][k])
    }

    /// Sum of squares of all parameters; equals `tr(H²)` for this normalization.
    pub fn norm_squared(&self) -> f64 {
        let a: f64 = self.alpha.iter().map(|x| x * x).sum();
        let b: f64 = self.beta.iter().map(|x| x * x).sum();
        let g: f64 = self.gamma.iter().flatten().map(|x| x * x).sum();
        a + b + g
    }
}

impl Hamiltonian for GeneralHamiltonian {
    fn to_general(&self) -> GeneralHamiltonian {
        *self
    }

    fn to_matrix(&self) -> Matrix4 {
        let mut m = Matrix4::zeros();
        let half = |x: f64| Complex64::new(0.5 * x, 0.0);
        for j in 0..3 {
            m += basis_matrix(PauliBasisElement::sigma(j + 1)) * half(self.alpha[j]);
            m += basis_matrix(PauliBasisElement::xi(j + 1)) * half(self.beta[j]);
            for k in 0..3 {
                if self.gamma[j][k] != 0.0 {
                    m += basis_matrix(PauliBasisElement::new(j + 1, k + 1)) * half(self.gamma[j][k]);
                }
            }
        }
        m
    }
}

impl CanonicalHamiltonian {
    pub fn new(alpha: [f64; 3], beta: [f64; 3], gamma: [f64; 3]) -> Self {
        Self { alpha, beta, gamma }
    }

    /// α = β = 0 with the given diagonal interaction.
    pub fn pure_interaction(gamma: [f64; 3]) -> Self {
        Self::new([0.0; 3], [0.0; 3], gamma)
    }

    pub fn norm_squared(&self) -> f64 {
        self.alpha
            .iter()
            .chain(self.beta.iter())
            .chain(self.gamma.iter())
            .map(|x| x * x)
            .sum()
    }

    /// Largest absolute parameter difference against `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.alpha
            .iter()
            .chain(self.beta.iter())
            .chain(self.gamma.iter())
            .zip(other.alpha.iter().chain(other.beta.iter()).chain(other.gamma.iter()))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Hamiltonian for CanonicalHamiltonian {
    fn to_general(&self) -> GeneralHamiltonian {
        let mut gamma = [[0.0; 3]; 3];
        for (j, row) in gamma.iter_mut().enumerate() {
            row[j] = self.gamma[j];
        }
        GeneralHamiltonian {
            alpha: self.alpha,
            beta: self.beta,
            gamma,
        }
    }
}

/// Either JSON layout accepted on input: `"gamma"` as a 3×3 array (general) or
/// as three numbers (canonical).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HamiltonianSpec {
    General(GeneralHamiltonian),
    Canonical(CanonicalHamiltonian),
}

impl Hamiltonian for HamiltonianSpec {
    fn to_general(&self) -> GeneralHamiltonian {
        match self {
            Self::General(h) => *h,
            Self::Canonical(h) => h.to_general(),
        }
    }
}

/// Proper rotation of a qubit frame, `R Rᵀ = 1`, `det R = +1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotationMatrix3(pub Matrix3<f64>);

impl RotationMatrix3 {
    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn apply(&self, v: [f64; 3]) -> [f64; 3] {
        let r = self.0 * Vector3::from(v);
        [r[0], r[1], r[2]]
    }

    /// Largest deviation of `R Rᵀ` from identity and of `det R` from one.
    pub fn defect(&self) -> f64 {
        let o = (self.0 * self.0.transpose() - Matrix3::identity()).abs().max();
        o.max((self.0.determinant() - 1.0).abs())
    }

    pub fn to_rows(&self) -> [[f64; 3]; 3] {
        let mut out = [[0.0; 3]; 3];
        for (j, row) in out.iter_mut().enumerate() {
            for (k, x) in row.iter_mut().enumerate() {
                *x = self.0[(j, k)];
            }
        }
        out
    }

    pub fn from_rows(rows: [[f64; 3]; 3]) -> Self {
        Self(Matrix3::from_fn(|j, k| rows[j][k]))
    }
}

impl Serialize for RotationMatrix3 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for RotationMatrix3 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        <[[f64; 3]; 3]>::deserialize(d).map(Self::from_rows)
    }
}

pub fn to_matrix<H: Hamiltonian + ?Sized>(h: &H) -> Matrix4 {
    h.to_matrix()
}

/// Gram matrix `G_mn = γ_m · γ_n` of the interaction rows.
pub fn gamma_gram(h: &GeneralHamiltonian) -> Matrix3<f64> {
    let g = h.gamma_matrix();
    g * g.transpose()
}

/// `γ1 · (γ2 × γ3)`, i.e. `det γ`.
pub fn gamma_triple(h: &GeneralHamiltonian) -> f64 {
    let [g1, g2, g3] = h.gamma.map(Vector3::from);
    g1.dot(&g2.cross(&g3))
}

/// Eigen-frame of a Gram matrix under the module conventions.
///
/// Returns `R` whose rows are orthonormal eigenvectors, sorted by ascending
/// eigenvalue, so that `R G Rᵀ` is diagonal, together with those eigenvalues.
pub fn gram_frame(gram: &Matrix3<f64>) -> (RotationMatrix3, [f64; 3]) {
    let sym = (gram + gram.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut pairs: Vec<(f64, Vector3<f64>)> = (0..3)
        .map(|i| (eig.eigenvalues[i], eig.eigenvectors.column(i).into_owned()))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let scale = pairs.iter().map(|p| p.0.abs()).fold(1.0, f64::max);
    let cluster_tol = ZERO_TOL * scale;

    // Replace each degenerate cluster by projected standard axes.
    let mut i = 0;
    while i < 3 {
        let mut j = i + 1;
        while j < 3 && (pairs[j].0 - pairs[i].0).abs() <= cluster_tol {
            j += 1;
        }
        if j - i > 1 {
            let span: Vec<Vector3<f64>> = pairs[i..j].iter().map(|p| p.1).collect();
            let projector = span
                .iter()
                .fold(Matrix3::zeros(), |acc, v| acc + v * v.transpose());
            let mut basis: Vec<Vector3<f64>> = Vec::with_capacity(j - i);
            for axis in 0..3 {
                if basis.len() == j - i {
                    break;
                }
                let mut v = projector * Vector3::ith(axis, 1.0);
                for b in &basis {
                    v -= b * b.dot(&v);
                }
                let n = v.norm();
                if n > 1e-6 {
                    basis.push(v / n);
                }
            }
            for (slot, v) in pairs[i..j].iter_mut().zip(basis) {
                slot.1 = v;
            }
        }
        i = j;
    }

    let mut r = Matrix3::zeros();
    for (row, (_, v)) in pairs.iter().enumerate() {
        let mut v = *v;
        let lead = (0..3)
            .max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs()).then(b.cmp(&a)))
            .unwrap_or(0);
        if v[lead] < 0.0 {
            v = -v;
        }
        r.set_row(row, &v.transpose());
    }
    if r.determinant() < 0.0 {
        let first = -r.row(0);
        r.set_row(0, &first);
    }
    let eigenvalues = [pairs[0].0, pairs[1].0, pairs[2].0];
    (RotationMatrix3(r), eigenvalues)
}

/// Orthonormal completion of `fixed` by projected standard axes.
fn complete_basis(fixed: &[Vector3<f64>]) -> Vec<Vector3<f64>> {
    let mut basis: Vec<Vector3<f64>> = fixed.to_vec();
    for axis in 0..3 {
        if basis.len() == 3 {
            break;
        }
        let mut v = Vector3::ith(axis, 1.0);
        for b in &basis {
            v -= b * b.dot(&v);
        }
        let n = v.norm();
        if n > 1e-6 {
            basis.push(v / n);
        }
    }
    basis[fixed.len()..].to_vec()
}

/// Canonical form of `h` with the Σ rotation `R` and Ξ rotation `S` used.
///
/// `α' = Rα`, `β' = Sβ` and `γ' = R γ Sᵀ` is diagonal.
pub fn canonicalize(
    h: &GeneralHamiltonian,
) -> (CanonicalHamiltonian, RotationMatrix3, RotationMatrix3) {
    let gram = gamma_gram(h);
    let (r, lambda) = gram_frame(&gram);
    let eps_sq = ZERO_TOL * h.norm_squared().max(1.0);

    let w = r.0 * h.gamma_matrix();
    let rows: [Vector3<f64>; 3] = [0, 1, 2].map(|j| w.row(j).transpose());
    let nonzero = lambda.map(|l| l > eps_sq);
    let unit = |v: &Vector3<f64>| v / v.norm();
    let beta = Vector3::from(h.beta);

    let s_rows: [Vector3<f64>; 3] = match nonzero {
        [true, true, true] => {
            let mut s = [unit(&rows[0]), unit(&rows[1]), unit(&rows[2])];
            if s[0].dot(&s[1].cross(&s[2])) < 0.0 {
                s[0] = -s[0];
            }
            s
        }
        [false, true, true] => {
            let s2 = unit(&rows[1]);
            // Re-orthogonalize against rounding before completing.
            let mut s3 = rows[2] - s2 * s2.dot(&rows[2]);
            s3 /= s3.norm();
            [s2.cross(&s3), s2, s3]
        }
        [false, false, true] => {
            let s3 = unit(&rows[2]);
            let perp = beta - s3 * s3.dot(&beta);
            let s1 = if perp.norm_squared() > eps_sq {
                perp / perp.norm()
            } else {
                complete_basis(&[s3])[0]
            };
            [s1, s3.cross(&s1), s3]
        }
        _ if nonzero.iter().all(|&x| !x) => [Vector3::x(), Vector3::y(), Vector3::z()],
        // Ascending order makes any other pattern impossible; treat as
        // rank deficient on the leading axes.
        _ => {
            let s3 = unit(&rows[2]);
            let rest = complete_basis(&[s3]);
            [rest[0], rest[1], s3]
        }
    };
    let s = Matrix3::from_rows(&s_rows.map(|v| v.transpose()));
    let g = w * s.transpose();
    let canonical = CanonicalHamiltonian {
        alpha: RotationMatrix3(r.0).apply(h.alpha),
        beta: RotationMatrix3(s).apply(h.beta),
        gamma: [g[(0, 0)], g[(1, 1)], g[(2, 2)]],
    };
    (canonical, r, RotationMatrix3(s))
}

/// The partner Hamiltonian with `γ1, β2, β3` negated.
pub fn sign_partner(h: &CanonicalHamiltonian) -> CanonicalHamiltonian {
    CanonicalHamiltonian {
        alpha: h.alpha,
        beta: [h.beta[0], -h.beta[1], -h.beta[2]],
        gamma: [-h.gamma[0], h.gamma[1], h.gamma[2]],
    }
}

/// Eigenvalues of the Hamiltonian matrix, ascending.
pub fn spectrum<H: Hamiltonian + ?Sized>(h: &H) -> [f64; 4] {
    let eig = h.to_matrix().symmetric_eigen();
    let mut ev = [0.0; 4];
    for (dst, src) in ev.iter_mut().zip(eig.eigenvalues.iter()) {
        *dst = *src;
    }
    ev.sort_by(f64::total_cmp);
    ev
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{hermiticity_defect, pauli_expand};

    #[test]
    fn zero_hamiltonian_is_zero_matrix() {
        let m = GeneralHamiltonian::default().to_matrix();
        assert_eq!(m, Matrix4::zeros());
    }

    #[test]
    fn gamma3_only_is_zz() {
        let h = CanonicalHamiltonian::new([0.0; 3], [0.0; 3], [0.0, 0.0, 2.0]);
        let m = h.to_matrix();
        let d = [1.0, -1.0, -1.0, 1.0];
        for r in 0..4 {
            for c in 0..4 {
                let want = if r == c { d[r] } else { 0.0 };
                assert_eq!(m[(r, c)], Complex64::new(want, 0.0));
            }
        }
    }

    #[test]
    fn alpha1_expands_to_half() {
        let h = GeneralHamiltonian {
            alpha: [1.0, 0.0, 0.0],
            ..Default::default()
        };
        let c = pauli_expand(&h.to_matrix());
        for e in PauliBasisElement::all() {
            let want = if e == PauliBasisElement::sigma(1) { 0.5 } else { 0.0 };
            assert_eq!(c[e], want);
        }
    }

    #[test]
    fn hermitian_and_traceless() {
        let h = GeneralHamiltonian {
            alpha: [0.3, -1.2, 0.8],
            beta: [1.1, 0.4, -0.7],
            gamma: [[0.2, -0.5, 1.3], [0.9, 0.1, -0.4], [-1.7, 0.6, 0.05]],
        };
        let m = h.to_matrix();
        assert!(hermiticity_defect(&m) < 1e-14);
        assert!(m.trace().norm() < 1e-14);
    }

    #[test]
    fn diagonal_gram() {
        let h = CanonicalHamiltonian::pure_interaction([2.0, -3.0, 0.5]).to_general();
        let g = gamma_gram(&h);
        assert_eq!(g, Matrix3::from_diagonal(&Vector3::new(4.0, 9.0, 0.25)));
        assert_eq!(gamma_triple(&h), -3.0);
    }

    #[test]
    fn identity_gamma_triple() {
        let h = GeneralHamiltonian {
            gamma: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            ..Default::default()
        };
        assert_eq!(gamma_triple(&h), 1.0);
    }

    #[test]
    fn already_canonical_is_kept() {
        let h = CanonicalHamiltonian::pure_interaction([0.5, 1.0, 2.0]);
        let (c, r, s) = canonicalize(&h.to_general());
        assert!(c.max_abs_diff(&h) < 1e-14);
        assert!((r.0 - Matrix3::identity()).abs().max() < 1e-14);
        assert!((s.0 - Matrix3::identity()).abs().max() < 1e-14);
    }

    #[test]
    fn unsorted_diagonal_is_permuted() {
        let h = CanonicalHamiltonian::new([0.1, 0.2, 0.3], [0.0; 3], [2.0, 0.5, -1.0]);
        let (c, r, s) = canonicalize(&h.to_general());
        assert!((c.gamma[0].abs() - 0.5).abs() < 1e-14);
        assert!((c.gamma[1] - 1.0).abs() < 1e-14);
        assert!((c.gamma[2] - 2.0).abs() < 1e-14);
        assert!(r.defect() < 1e-12 && s.defect() < 1e-12);
        assert!((c.gamma.iter().product::<f64>() - (-1.0)).abs() < 1e-12);
    }

    #[test]
    fn case_three_gauge_puts_beta_on_axis_one() {
        let h = CanonicalHamiltonian::new([0.2, 0.0, 0.1], [0.3, -0.4, 0.8], [0.0, 0.0, 1.5]);
        let (c, _, s) = canonicalize(&h.to_general());
        assert!(s.defect() < 1e-12);
        assert!((c.beta[0] - 0.5).abs() < 1e-14);
        assert!(c.beta[1].abs() < 1e-14);
        assert!((c.beta[2] - 0.8).abs() < 1e-14);
        assert!((c.gamma[2] - 1.5).abs() < 1e-14);
    }

    #[test]
    fn partner_rules() {
        let h = CanonicalHamiltonian::new([1.0, 2.0, 3.0], [0.4, 0.1, -0.6], [0.7, 1.1, 1.3]);
        let p = sign_partner(&h);
        assert_eq!(p.alpha, h.alpha);
        assert_eq!(p.beta, [0.4, -0.1, 0.6]);
        assert_eq!(p.gamma, [-0.7, 1.1, 1.3]);
        assert_eq!(sign_partner(&p), h);
        let fixed = CanonicalHamiltonian::new([1.0, 2.0, 3.0], [0.4, 0.0, 0.0], [0.0, 1.1, 1.3]);
        assert_eq!(sign_partner(&fixed).max_abs_diff(&fixed), 0.0);
    }

    #[test]
    fn zero_spectrum() {
        assert_eq!(spectrum(&GeneralHamiltonian::default()), [0.0; 4]);
    }

    #[test]
    fn example_spectrum() {
        let ev = spectrum(&CanonicalHamiltonian::pure_interaction([0.7, 1.1, 1.3]));
        let want = [-1.55, 0.25, 0.45, 0.85];
        for (a, b) in ev.iter().zip(want.iter()) {
            assert!((a - b).abs() < 1e-12, "{ev:?}");
        }
    }

    #[test]
    fn json_layouts() {
        let g: HamiltonianSpec = serde_json::from_str(
            r#"{"alpha":[1,0,0],"beta":[0,0,0],"gamma":[[1,0,0],[0,1,0],[0,0,1]]}"#,
        )
        .unwrap();
        assert!(matches!(g, HamiltonianSpec::General(_)));
        let c: HamiltonianSpec =
            serde_json::from_str(r#"{"alpha":[0,0,0],"beta":[0,0,0],"gamma":[0.7,1.1,1.3]}"#).unwrap();
        assert!(matches!(c, HamiltonianSpec::Canonical(_)));
    }
}
