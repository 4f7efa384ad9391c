// Copyright 2026 The duoqubit Authors
// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use duoqubit::batch;
use duoqubit::classical::{
    classical_derivatives, classical_normalize, classical_reconstruct, fd_derivatives, ClassicalCanonical,
    ClassicalReconstruction, ClassicalSystem, DerivativeSample, FD_STEP,
};
use duoqubit::dynamics::{
    auto_window, fit_taylor, map_trajectory, taylor_maps, time_grid, FitDiagnostics, TaylorTable, TwoQubitState,
    AUTO_FIT_ORDER,
};
use duoqubit::environment::{recover_environment_with, EnvironmentEstimate, MeanSeries, RESIDUAL_TOL};
use duoqubit::hamiltonian::{sign_partner, CanonicalHamiltonian, HamiltonianSpec};
use duoqubit::io::{read_means_csv, read_trajectory_csv, write_means_csv, write_trajectory_csv};
use duoqubit::parity::{check_color_algebra, verify_parity_against, verify_spectrum_gap, MAX_PARITY_ORDER, PARITY_TOL};
use duoqubit::reconstruction::{
    reconstruct_with, OrderResidual, ReconstructOptions, ReconstructionError, ReconstructionReport,
};
use duoqubit::sampling::{random_canonical, random_pure_state, rng, PARAMETER_RANGE};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::output::{write_atomic, write_json};

/// A check or reconstruction that ran and failed (exit code 2). Any other
/// error is a usage or schema problem (exit code 1).
#[derive(Debug)]
pub struct Failure(pub String);

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Failure {}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Fit,
}

pub struct Globals {
    pub config: Option<PathBuf>,
    pub seed: u64,
    pub out: PathBuf,
    pub order: Option<usize>,
    pub tolerance: Option<f64>,
    pub mode: Mode,
}

/// Default tolerance of every fit-mode threshold.
pub const FIT_TOLERANCE: f64 = 1e-3;
pub const EXACT_ORDER: usize = 6;
pub const FIT_ORDER: usize = 4;
/// Tolerance of the analytic-derivative classical round trip.
pub const CLASSICAL_EXACT_TOL: f64 = 1e-12;
/// Tolerance of the finite-difference classical round trip.
pub const CLASSICAL_FD_TOL: f64 = 1e-6;
const EXAMPLE_GAMMA: [f64; 3] = [0.7, 1.1, 1.3];

fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
}

fn require_config(g: &Globals) -> Result<&Path> {
    g.config.as_deref().ok_or_else(|| anyhow!("this command needs --config <path>"))
}

/// Paths in a config are relative to the config file.
fn resolve(config: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        config.parent().unwrap_or(Path::new(".")).join(p)
    }
}

fn check_tolerance(t: Option<f64>) -> Result<Option<f64>> {
    match t {
        Some(x) if !(x.is_finite() && x > 0.0) => bail!("--tolerance must be a positive number, got {x}"),
        other => Ok(other),
    }
}

fn initial_state(g: &Globals, state: Option<TwoQubitState>, random: bool) -> Result<Option<TwoQubitState>> {
    match (state, random) {
        (Some(_), true) => bail!("give either `state` or `random_state`, not both"),
        (Some(s), false) => {
            s.validate().context("invalid `state`")?;
            Ok(Some(s))
        }
        (None, true) => Ok(Some(random_pure_state(&mut rng(g.seed)))),
        (None, false) => Ok(None),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulateConfig {
    hamiltonian: HamiltonianSpec,
    t_max: f64,
    n_points: usize,
    #[serde(default)]
    state: Option<TwoQubitState>,
    #[serde(default)]
    random_state: bool,
}

#[derive(Serialize)]
struct SimulateReport {
    command: &'static str,
    seed: u64,
    hamiltonian: HamiltonianSpec,
    t_max: f64,
    n_points: usize,
    state: Option<TwoQubitState>,
    files: Vec<String>,
}

pub fn simulate(g: &Globals) -> Result<()> {
    let path = require_config(g)?;
    let cfg: SimulateConfig = load(path)?;
    if !(cfg.t_max.is_finite() && cfg.t_max > 0.0) {
        bail!("t_max must be positive, got {}", cfg.t_max);
    }
    if cfg.n_points < 2 {
        bail!("n_points must be at least 2, got {}", cfg.n_points);
    }
    let state = initial_state(g, cfg.state, cfg.random_state)?;
    let times = time_grid(cfg.t_max, cfg.n_points);
    let snaps = map_trajectory(&cfg.hamiltonian, &times);

    let mut files = Vec::new();
    let mut buf = Vec::new();
    write_trajectory_csv(&mut buf, &snaps)?;
    write_atomic(&g.out, "trajectory.csv", &buf)?;
    files.push("trajectory.csv".to_string());
    if let Some(s) = &state {
        let means: Vec<[f64; 3]> = snaps.iter().map(|p| p.maps.apply(s)).collect();
        let mut buf = Vec::new();
        write_means_csv(&mut buf, &times, &means)?;
        write_atomic(&g.out, "means.csv", &buf)?;
        files.push("means.csv".to_string());
    }
    let report = SimulateReport {
        command: "simulate",
        seed: g.seed,
        hamiltonian: cfg.hamiltonian,
        t_max: cfg.t_max,
        n_points: cfg.n_points,
        state,
        files: files.clone(),
    };
    write_json(&g.out, "simulate.json", &report)?;
    println!(
        "simulate: {} points, wrote {} and simulate.json to {} (seed {})",
        cfg.n_points,
        files.join(", "),
        g.out.display(),
        g.seed
    );
    Ok(())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExactConfig {
    hamiltonian: HamiltonianSpec,
    #[serde(default)]
    state: Option<TwoQubitState>,
    #[serde(default)]
    random_state: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FitConfig {
    trajectory: PathBuf,
    #[serde(default)]
    means: Option<PathBuf>,
    #[serde(default)]
    window: Option<f64>,
}

#[derive(Serialize)]
struct FitInfo {
    window: f64,
    fit_order: usize,
    maps: FitDiagnostics,
    means: Option<FitDiagnostics>,
}

#[derive(Serialize)]
struct EnvironmentOutcome {
    estimate: Option<EnvironmentEstimate>,
    error: Option<String>,
}

#[derive(Serialize)]
struct CandidateEnvironments {
    plus: EnvironmentOutcome,
    minus: EnvironmentOutcome,
}

#[derive(Serialize)]
struct ReconstructOutput {
    command: &'static str,
    seed: u64,
    mode: Mode,
    order: usize,
    tolerance: Option<f64>,
    status: &'static str,
    error: Option<String>,
    failure_residuals: Option<Vec<OrderResidual>>,
    state: Option<TwoQubitState>,
    fit: Option<FitInfo>,
    reconstruction: Option<ReconstructionReport>,
    environment: Option<CandidateEnvironments>,
}

fn environment(h: &CanonicalHamiltonian, series: &MeanSeries, residual_tol: f64) -> EnvironmentOutcome {
    match recover_environment_with(h, series, residual_tol) {
        Ok(e) => EnvironmentOutcome {
            estimate: Some(e),
            error: None,
        },
        Err(e) => EnvironmentOutcome {
            estimate: None,
            error: Some(e.to_string()),
        },
    }
}

struct Inputs {
    table: TaylorTable,
    means: Option<MeanSeries>,
    state: Option<TwoQubitState>,
    fit: Option<FitInfo>,
}

fn exact_inputs(g: &Globals, path: &Path, order: usize) -> Result<Inputs> {
    let cfg: ExactConfig = load(path)?;
    let state = initial_state(g, cfg.state, cfg.random_state)?;
    let table = taylor_maps(&cfg.hamiltonian, order);
    let means = state.as_ref().map(|s| MeanSeries::from_state(&table, s));
    Ok(Inputs {
        table,
        means,
        state,
        fit: None,
    })
}

fn fit_inputs(path: &Path, order: usize) -> Result<Result<Inputs, String>> {
    let cfg: FitConfig = load(path)?;
    let traj_path = resolve(path, &cfg.trajectory);
    let file = fs::File::open(&traj_path).with_context(|| format!("opening {}", traj_path.display()))?;
    let snaps = read_trajectory_csv(file).with_context(|| format!("reading {}", traj_path.display()))?;
    let means_samples = match &cfg.means {
        Some(p) => {
            let p = resolve(path, p);
            let file = fs::File::open(&p).with_context(|| format!("opening {}", p.display()))?;
            Some(read_means_csv(file).with_context(|| format!("reading {}", p.display()))?)
        }
        None => None,
    };
    if let Some(w) = cfg.window {
        if !(w.is_finite() && w > 0.0) {
            bail!("window must be positive, got {w}");
        }
    }

    // Data problems from here on are reconstruction failures, not schema
    // errors.
    let fitted = (|| {
        let window = match cfg.window {
            Some(w) => w,
            None => {
                let rows: Vec<(f64, Vec<f64>)> = snaps.iter().map(|s| (s.t, s.maps.to_flat().to_vec())).collect();
                auto_window(&rows)?
            }
        };
        let fit_order = order.max(AUTO_FIT_ORDER);
        let (table, maps) = fit_taylor(&snaps, fit_order, window)?;
        let (means, means_diag) = match &means_samples {
            Some(samples) => {
                let (series, d) = MeanSeries::fit(samples, fit_order, window)?;
                (Some(series.truncated(order)), Some(d))
            }
            None => (None, None),
        };
        Ok::<_, duoqubit::dynamics::DynamicsError>(Inputs {
            table: table.truncated(order),
            means,
            state: None,
            fit: Some(FitInfo {
                window,
                fit_order,
                maps,
                means: means_diag,
            }),
        })
    })();
    Ok(fitted.map_err(|e| format!("fit failed: {e}")))
}

pub fn reconstruct(g: &Globals) -> Result<()> {
    let path = require_config(g)?;
    let tolerance = check_tolerance(g.tolerance)?;
    let order = g.order.unwrap_or(match g.mode {
        Mode::Exact => EXACT_ORDER,
        Mode::Fit => FIT_ORDER,
    });
    if order < 2 {
        bail!("--order must be at least 2, got {order}");
    }
    let (opts, residual_tol) = match (g.mode, tolerance) {
        (Mode::Exact, None) => (ReconstructOptions::default(), RESIDUAL_TOL),
        (Mode::Fit, None) => (ReconstructOptions::uniform(FIT_TOLERANCE), FIT_TOLERANCE),
        (_, Some(t)) => (ReconstructOptions::uniform(t), t),
    };
    let inputs = match g.mode {
        Mode::Exact => Ok(exact_inputs(g, path, order)?),
        Mode::Fit => fit_inputs(path, order)?,
    };

    let mut out = ReconstructOutput {
        command: "reconstruct",
        seed: g.seed,
        mode: g.mode,
        order,
        tolerance,
        status: "failed",
        error: None,
        failure_residuals: None,
        state: None,
        fit: None,
        reconstruction: None,
        environment: None,
    };
    let inputs = match inputs {
        Ok(i) => i,
        Err(msg) => {
            out.error = Some(msg.clone());
            write_json(&g.out, "reconstruct.json", &out)?;
            return Err(Failure(msg).into());
        }
    };
    out.state = inputs.state;
    out.fit = inputs.fit;
    match reconstruct_with(&inputs.table, &opts) {
        Ok(rep) => {
            out.environment = inputs.means.map(|m| {
                let aligned = m.rotate_sigma(&rep.frame_r);
                CandidateEnvironments {
                    plus: environment(&rep.candidate_plus, &aligned, residual_tol),
                    minus: environment(&rep.candidate_minus, &aligned, residual_tol),
                }
            });
            println!(
                "reconstruct: {:?}, two candidates differing by the signs of γ1, β2, β3{} (seed {})",
                rep.case,
                if rep.undetermined.is_empty() {
                    String::new()
                } else {
                    format!(
                        "; undetermined: {}",
                        rep.undetermined.iter().map(|u| u.parameter.as_str()).collect::<Vec<_>>().join(", ")
                    )
                },
                g.seed
            );
            out.status = "ok";
            out.reconstruction = Some(rep);
            write_json(&g.out, "reconstruct.json", &out)?;
            Ok(())
        }
        Err(e) => {
            if let ReconstructionError::VerificationFailed { residuals } = &e {
                out.failure_residuals = Some(residuals.clone());
            }
            out.error = Some(e.to_string());
            write_json(&g.out, "reconstruct.json", &out)?;
            Err(Failure(format!("reconstruction failed: {e}")).into())
        }
    }
}

fn default_samples() -> usize {
    20
}

fn default_times() -> usize {
    20
}

fn default_t_max() -> f64 {
    2.0
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct VerifyConfig {
    #[serde(default = "default_samples")]
    samples: usize,
    #[serde(default = "default_times")]
    times: usize,
    #[serde(default = "default_t_max")]
    t_max: f64,
    /// Negative control: flip only β2 instead of (γ1, β2, β3).
    #[serde(default)]
    corrupt_partner: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            samples: default_samples(),
            times: default_times(),
            t_max: default_t_max(),
            corrupt_partner: false,
        }
    }
}

#[derive(Serialize)]
struct Check {
    name: &'static str,
    passed: bool,
    value: f64,
    tolerance: f64,
    detail: String,
}

#[derive(Serialize)]
struct VerifyReport {
    command: &'static str,
    seed: u64,
    samples: usize,
    order: usize,
    corrupt_partner: bool,
    checks: Vec<Check>,
    passed: bool,
}

fn partner(h: &CanonicalHamiltonian, corrupt: bool) -> CanonicalHamiltonian {
    if corrupt {
        let mut p = *h;
        p.beta[1] = -p.beta[1];
        p
    } else {
        sign_partner(h)
    }
}

pub fn verify(g: &Globals) -> Result<()> {
    let cfg: VerifyConfig = match &g.config {
        Some(p) => load(p)?,
        None => VerifyConfig::default(),
    };
    let order = g.order.unwrap_or(MAX_PARITY_ORDER);
    if order == 0 || order > MAX_PARITY_ORDER {
        bail!("--order must be between 1 and {MAX_PARITY_ORDER} for verify, got {order}");
    }
    if cfg.samples == 0 || cfg.times < 2 || !(cfg.t_max.is_finite() && cfg.t_max > 0.0) {
        bail!("verify needs samples ≥ 1, times ≥ 2 and t_max > 0");
    }
    let tol = check_tolerance(g.tolerance)?.unwrap_or(PARITY_TOL);
    let mut r = rng(g.seed);
    let hs: Vec<CanonicalHamiltonian> = (0..cfg.samples).map(|_| random_canonical(&mut r, PARAMETER_RANGE)).collect();
    let mut checks = Vec::new();

    let colors = check_color_algebra();
    checks.push(Check {
        name: "color_algebra",
        passed: colors.passed,
        value: colors.violations.len() as f64,
        tolerance: 0.0,
        detail: format!(
            "{} ordered pairs, {} nonzero commutators, {} violations",
            colors.pairs_checked,
            colors.nonzero_commutators,
            colors.violations.len()
        ),
    });

    let parity = batch::map_slice(&hs, |h| {
        let p = verify_parity_against(h, &partner(h, cfg.corrupt_partner), order).expect("order was checked");
        p.blue_deviation.max(p.red_deviation)
    });
    let worst = parity.iter().copied().fold(0.0, f64::max);
    checks.push(Check {
        name: "parity_series",
        passed: worst <= tol,
        value: worst,
        tolerance: tol,
        detail: format!("{} Hamiltonians through order {order}", hs.len()),
    });

    let times = time_grid(cfg.t_max, cfg.times);
    let invariance = batch::map_slice(&hs, |h| {
        let a = map_trajectory(h, &times);
        let b = map_trajectory(&partner(h, cfg.corrupt_partner), &times);
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| x.maps.max_abs_diff_u(&y.maps))
            .fold(0.0, f64::max)
    });
    let worst = invariance.iter().copied().fold(0.0, f64::max);
    checks.push(Check {
        name: "sign_flip_invariance",
        passed: worst <= tol,
        value: worst,
        tolerance: tol,
        detail: format!("{} Hamiltonians at {} times in [0, {}]", hs.len(), cfg.times, cfg.t_max),
    });

    let example = CanonicalHamiltonian::pure_interaction(EXAMPLE_GAMMA);
    let gap = verify_spectrum_gap(&example).expect("α = β = 0");
    checks.push(Check {
        name: "spectrum_gap",
        passed: (gap - 0.7).abs() <= tol,
        value: gap,
        tolerance: tol,
        detail: format!("γ = {EXAMPLE_GAMMA:?}, α = β = 0: spectra of h and its partner differ by 0.7"),
    });

    let passed = checks.iter().all(|c| c.passed);
    let report = VerifyReport {
        command: "verify",
        seed: g.seed,
        samples: hs.len(),
        order,
        corrupt_partner: cfg.corrupt_partner,
        checks,
        passed,
    };
    write_json(&g.out, "verify.json", &report)?;
    for c in &report.checks {
        println!(
            "{} {}: {:.3e} (tol {:.0e}) {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.tolerance,
            c.detail
        );
    }
    println!("verify: seed {}", g.seed);
    if passed {
        Ok(())
    } else {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
        Err(Failure(format!("checks failed: {}", failed.join(", "))).into())
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassicalConfig {
    system: ClassicalSystem,
    x0: Vec<f64>,
    y0_prime: f64,
    #[serde(default)]
    step: Option<f64>,
}

#[derive(Serialize)]
struct ClassicalRoundTrip {
    reconstruction: ClassicalReconstruction,
    error: f64,
    tolerance: f64,
    passed: bool,
}

#[derive(Serialize)]
struct ClassicalReport {
    command: &'static str,
    seed: u64,
    system: ClassicalSystem,
    y0_prime: f64,
    normalized: ClassicalCanonical,
    y0: f64,
    exact: ClassicalRoundTrip,
    finite_difference_step: f64,
    finite_difference: ClassicalRoundTrip,
    passed: bool,
}

fn classical_round_trip(
    c: &ClassicalCanonical,
    y0: f64,
    x0: &[f64],
    derivatives: impl Fn(f64) -> [f64; 3],
    tolerance: f64,
) -> Result<ClassicalRoundTrip> {
    let samples: Vec<DerivativeSample> = x0
        .iter()
        .map(|&x| DerivativeSample {
            x0: x,
            derivatives: derivatives(x),
        })
        .collect();
    let rec = classical_reconstruct(&samples)?;
    let error = match (rec.canonical(), rec.y0) {
        (Some(got), Some(got_y0)) => got.max_abs_diff(c).max((got_y0 - y0).abs()),
        _ => f64::INFINITY,
    };
    Ok(ClassicalRoundTrip {
        reconstruction: rec,
        error,
        tolerance,
        passed: error <= tolerance,
    })
}

pub fn classical(g: &Globals) -> Result<()> {
    let path = require_config(g)?;
    let cfg: ClassicalConfig = load(path)?;
    let tolerance = check_tolerance(g.tolerance)?;
    let mut distinct = cfg.x0.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 2 {
        bail!("x0 needs at least two distinct values");
    }
    let step = cfg.step.unwrap_or(FD_STEP);
    if !(step.is_finite() && step > 0.0) {
        bail!("step must be positive, got {step}");
    }
    let c = classical_normalize(&cfg.system).map_err(|e| Failure(e.to_string()))?;
    let y0 = cfg.system.hidden_scale() * cfg.y0_prime;
    let exact = classical_round_trip(
        &c,
        y0,
        &cfg.x0,
        |x| classical_derivatives(&c, x, y0),
        tolerance.unwrap_or(CLASSICAL_EXACT_TOL),
    )?;
    let fd = classical_round_trip(
        &c,
        y0,
        &cfg.x0,
        |x| fd_derivatives(&c, x, y0, step),
        tolerance.unwrap_or(CLASSICAL_FD_TOL),
    )?;
    let passed = exact.passed && fd.passed;
    println!(
        "classical: exact round trip {:.1e} (tol {:.0e}), finite differences {:.1e} (tol {:.0e}) (seed {})",
        exact.error, exact.tolerance, fd.error, fd.tolerance, g.seed
    );
    let report = ClassicalReport {
        command: "classical",
        seed: g.seed,
        system: cfg.system,
        y0_prime: cfg.y0_prime,
        normalized: c,
        y0,
        exact,
        finite_difference_step: step,
        finite_difference: fd,
        passed,
    };
    write_json(&g.out, "classical.json", &report)?;
    if passed {
        Ok(())
    } else {
        Err(Failure("classical round trip exceeded its tolerance".into()).into())
    }
}
