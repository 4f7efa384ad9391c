// Copyright 2026 The duoqubit Authors
// SPDX-License-Identifier: Apache-2.0

//! Sequential vs rayon batch evaluation of reconstruction round trips and
//! trajectory sweeps.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use duoqubit::batch;
use duoqubit::dynamics::{taylor_maps, time_grid, SpectralPropagator};
use duoqubit::hamiltonian::{GeneralHamiltonian, ZERO_TOL};
use duoqubit::reconstruction::reconstruct;
use duoqubit::sampling::{random_general, rng, PARAMETER_RANGE};

fn hamiltonians(n: usize) -> Vec<GeneralHamiltonian> {
    let mut r = rng(2024);
    (0..n).map(|_| random_general(&mut r, PARAMETER_RANGE)).collect()
}

fn round_trip(h: &GeneralHamiltonian) -> f64 {
    match reconstruct(&taylor_maps(h, 4), ZERO_TOL) {
        Ok(rep) => rep.candidate_plus.gamma[0],
        Err(_) => f64::NAN,
    }
}

fn bench_reconstruct(c: &mut Criterion) {
    let mut group = c.benchmark_group("reconstruct_round_trip");
    for size in [16, 128, 512] {
        let hs = hamiltonians(size);
        group.bench_with_input(BenchmarkId::new("seq", size), &hs, |b, hs| {
            b.iter(|| black_box(batch::map_seq(hs.len(), |i| round_trip(&hs[i]))))
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("par", size), &hs, |b, hs| {
            b.iter(|| black_box(batch::map_par(hs.len(), |i| round_trip(&hs[i]))))
        });
    }
    group.finish();
}

fn bench_trajectory(c: &mut Criterion) {
    let h = hamiltonians(1)[0];
    let prop = SpectralPropagator::new(&h);
    let mut group = c.benchmark_group("trajectory_sweep");
    for points in [200, 2000, 20000] {
        let times = time_grid(2.0, points);
        group.bench_with_input(BenchmarkId::new("seq", points), &times, |b, ts| {
            b.iter(|| black_box(batch::map_seq(ts.len(), |i| prop.snapshot(ts[i]))))
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("par", points), &times, |b, ts| {
            b.iter(|| black_box(batch::map_par(ts.len(), |i| prop.snapshot(ts[i]))))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_reconstruct, bench_trajectory);
criterion_main!(benches);
