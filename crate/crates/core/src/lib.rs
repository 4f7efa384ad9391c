// Copyright 2026 The duoqubit Authors
// SPDX-License-Identifier: Apache-2.0

//! Reduced dynamics of one qubit coupled to another, and the inverse problem:
//! recovering the two-qubit Hamiltonian (up to a two-fold sign ambiguity) and
//! the unobserved initial mean values from the observed qubit alone.

pub mod batch;
pub mod classical;
pub mod dynamics;
pub mod environment;
pub mod example;
pub mod hamiltonian;
pub mod io;
pub mod parity;
pub mod pauli;
pub mod reconstruction;
pub mod sampling;
