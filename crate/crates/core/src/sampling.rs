// Copyright 2026 The duoqubit Authors
// SPDX-License-Identifier: Apache-2.0

//! Seeded random Hamiltonians and states.

use nalgebra::{Matrix3, Quaternion, UnitQuaternion, Vector3, Vector4};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dynamics::TwoQubitState;
use crate::hamiltonian::{CanonicalHamiltonian, GeneralHamiltonian, RotationMatrix3};

/// Parameters are drawn uniformly from `[−PARAMETER_RANGE, PARAMETER_RANGE]`.
pub const PARAMETER_RANGE: f64 = 2.0;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn triple<R: Rng + ?Sized>(rng: &mut R, range: f64) -> [f64; 3] {
    [0; 3].map(|_| rng.gen_range(-range..=range))
}

pub fn random_general<R: Rng + ?Sized>(rng: &mut R, range: f64) -> GeneralHamiltonian {
    GeneralHamiltonian {
        alpha: triple(rng, range),
        beta: triple(rng, range),
        gamma: [0; 3].map(|_| triple(rng, range)),
    }
}

pub fn random_canonical<R: Rng + ?Sized>(rng: &mut R, range: f64) -> CanonicalHamiltonian {
    CanonicalHamiltonian {
        alpha: triple(rng, range),
        beta: triple(rng, range),
        gamma: triple(rng, range),
    }
}

/// Uniformly random proper rotation (normalized Gaussian quaternion).
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> RotationMatrix3 {
    let q = Vector4::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
    let q = UnitQuaternion::from_quaternion(Quaternion::from(q));
    RotationMatrix3(*q.to_rotation_matrix().matrix())
}

/// The general Hamiltonian whose canonical form is `c` in the frames
/// `Σ' = RΣ`, `Ξ' = SΞ`.
pub fn rotate_out(c: &CanonicalHamiltonian, r: &RotationMatrix3, s: &RotationMatrix3) -> GeneralHamiltonian {
    let (r, s) = (r.matrix(), s.matrix());
    let alpha = r.transpose() * Vector3::from(c.alpha);
    let beta = s.transpose() * Vector3::from(c.beta);
    let gamma = r.transpose() * Matrix3::from_diagonal(&Vector3::from(c.gamma)) * s;
    GeneralHamiltonian {
        alpha: alpha.into(),
        beta: beta.into(),
        gamma: [0, 1, 2].map(|j| [0, 1, 2].map(|k| gamma[(j, k)])),
    }
}

/// Mean values of a Haar-random pure state (normalized complex Gaussian
/// amplitudes), so positivity holds by construction.
pub fn random_pure_state<R: Rng + ?Sized>(rng: &mut R) -> TwoQubitState {
    let mut psi = [Complex64::new(0.0, 0.0); 4];
    for z in psi.iter_mut() {
        *z = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
    }
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    TwoQubitState::from_pure(&psi.map(|z| z / norm))
}
