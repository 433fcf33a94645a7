//! Acceptance suite behind `levy-memory --check`.

use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{ExperimentConfig, ProfileConfig};
use super::studies::{center_value, fracpoisson_cell, heat_mode, study_kernel_limit};
use super::{run, Subcommand};
use crate::elliptic::{solve_elliptic, stability_gap, EllipticOptions};
use crate::error::Result;
use crate::grid::{l2_norm, Grid, GridFunction, TimeGrid};
use crate::kernel::{levy_mass, rescale, LevyKernel};
use crate::memory::{solve_memory, uniqueness_indicator, MemoryProblem, PicardOptions, PicardStart};
use crate::nonlocal_op::{assemble, gauss_green_residual, OperatorMatrix, QuadratureSpec};
use crate::parabolic::{energy_check, solve_parabolic, sup_envelope};
use crate::potential::Potential;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {:>2} {}: {}", self.id, self.name, self.detail)
    }
}

fn outcome(id: u8, name: &'static str, result: Result<(bool, String)>) -> CheckOutcome {
    let (passed, detail) = result.unwrap_or_else(|e| (false, format!("error: {e}")));
    CheckOutcome {
        id,
        name,
        passed,
        detail,
    }
}

fn fractional_op(s: f64, n: usize) -> Result<OperatorMatrix> {
    let grid = Grid::new(-1.0, 1.0, n)?;
    assemble(
        Arc::new(LevyKernel::fractional(1, s)?),
        &grid,
        &QuadratureSpec::default(),
    )
}

/// Random low sine modes plus nodal noise, scaled to `‖f‖_{L²,h} = norm`.
fn random_with_norm(rng: &mut ChaCha8Rng, grid: &Grid, norm: f64) -> GridFunction {
    let coeffs: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
    let (a, b) = (grid.a(), grid.b());
    let raw = GridFunction::new(
        *grid,
        grid.nodes()
            .into_iter()
            .map(|x| {
                let smooth: f64 = coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, c)| c * ((k + 1) as f64 * std::f64::consts::PI * (x - a) / (b - a)).sin())
                    .sum();
                smooth + 0.1 * rng.random_range(-1.0..1.0)
            })
            .collect(),
    )
    .expect("sized");
    raw.scale(norm / l2_norm(&raw))
}

fn sci(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ")
}

pub fn fractional_poisson() -> Result<(bool, String)> {
    let start = Instant::now();
    let quad = QuadratureSpec::default();
    let mut errors = Vec::new();
    let mut center = f64::NAN;
    for n in [64, 128, 256, 512] {
        let grid = Grid::new(-1.0, 1.0, n)?;
        let (v, exact) = fracpoisson_cell(0.5, &grid, &quad, &EllipticOptions::default())?;
        errors.push(l2_norm(&(&v - &exact)));
        center = center_value(&v);
    }
    let secs = start.elapsed().as_secs_f64();
    let monotone = errors.windows(2).all(|w| w[1] < w[0]);
    // h = 2/(n+1) does not exactly halve with n
    let h = |n: f64| 2.0 / (n + 1.0);
    let order = (errors[0] / errors[3]).ln() / (h(64.0) / h(512.0)).ln();
    let passed = (center - 1.0).abs() <= 0.02 && monotone && order >= 0.4 && secs <= 10.0;
    Ok((
        passed,
        format!(
            "|v(0)-1| = {:.3e}, L2 errors [{}], order {order:.3}, {secs:.2} s",
            (center - 1.0).abs(),
            sci(&errors)
        ),
    ))
}

pub fn elliptic_chi_bound() -> Result<(bool, String)> {
    let op = fractional_op(0.5, 128)?;
    let p = Potential::quadratic(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let f = random_with_norm(&mut rng, op.grid(), 1.0);
        let sol = solve_elliptic(&op, &p, &f, &EllipticOptions::default())?;
        worst = worst.max(sol.estimates.e2);
    }
    Ok((
        worst <= 1.0 + 1e-8,
        format!("max ‖χ(v)‖ = {worst:.12} over 50 forcings with ‖f‖ = 1"),
    ))
}

pub fn stability_identity() -> Result<(bool, String)> {
    let op = fractional_op(0.5, 128)?;
    let p = Potential::quadratic(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut worst_id, mut worst_mono) = (0.0f64, f64::INFINITY);
    let opts = EllipticOptions::default();
    for _ in 0..20 {
        let n1 = rng.random_range(0.5..5.0);
        let n2 = rng.random_range(0.5..5.0);
        let f1 = random_with_norm(&mut rng, op.grid(), n1);
        let f2 = random_with_norm(&mut rng, op.grid(), n2);
        let s1 = solve_elliptic(&op, &p, &f1, &opts)?;
        let s2 = solve_elliptic(&op, &p, &f2, &opts)?;
        let r = stability_gap(&op, &p, &s1, &s2, &f1, &f2, 1.0)?;
        worst_id = worst_id.max(r.identity_residual);
        worst_mono = worst_mono.min(r.monotone_term);
    }
    Ok((
        worst_id <= 1e-9 && worst_mono >= -1e-12,
        format!("max identity residual {worst_id:.3e}, min monotone term {worst_mono:.3e}"),
    ))
}

pub fn energy_inequality() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let tgrid = TimeGrid::new(0.5, 25)?;
    let mut worst = f64::NEG_INFINITY;
    let mut runs = 0;
    for s in [0.25, 0.5, 0.75] {
        let op = fractional_op(s, 96)?;
        let grid = *op.grid();
        for _ in 0..10 {
            let scale = rng.random_range(0.1..3.0);
            let u0 = random_with_norm(&mut rng, &grid, scale);
            let zeta = GridFunction::new(grid, (0..grid.len()).map(|_| rng.random_range(0.0..5.0)).collect())?;
            let traj = solve_parabolic(&op, &zeta, &u0, &tgrid, 1.0)?;
            worst = worst.max(energy_check(&traj)?.max_relative_excess);
            runs += 1;
        }
    }
    Ok((worst <= 1e-12, format!("{runs} runs, max relative excess {worst:.3e}")))
}

pub fn max_principle() -> Result<(bool, String)> {
    let op = fractional_op(0.5, 64)?;
    let grid = *op.grid();
    let tgrid = TimeGrid::new(0.5, 20)?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let u0 = GridFunction::new(grid, (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect())?;
        let zeta = GridFunction::new(grid, (0..grid.len()).map(|_| rng.random_range(0.0..5.0)).collect())?;
        let traj = solve_parabolic(&op, &zeta, &u0, &tgrid, 1.0)?;
        worst = worst.max(sup_envelope(&traj));
    }
    Ok((worst <= 1.0 + 1e-12, format!("max_n ‖uⁿ‖∞ = {worst:.15} over 50 runs")))
}

pub fn fixed_point_regime() -> Result<(bool, String)> {
    // odd n puts a node at the crest, so Λ = 1 exactly
    let op = Arc::new(fractional_op(0.5, 127)?);
    let grid = *op.grid();
    let u0 = grid.sample(heat_mode(1.0, 1.0, -1.0, 1.0, 0.0));
    let prob = MemoryProblem::with_operator(op, Potential::quadratic(1.0), u0, TimeGrid::new(0.5, 64)?)?;
    let indicator = uniqueness_indicator(&prob).value;
    let a = solve_memory(&prob, &PicardOptions::default())?;
    let b = solve_memory(
        &prob,
        &PicardOptions {
            start: PicardStart::InitialState,
            ..PicardOptions::default()
        },
    )?;
    let max_ratio = a
        .report
        .contraction_ratios
        .iter()
        .chain(&b.report.contraction_ratios)
        .copied()
        .fold(0.0, f64::max);
    let gap = l2_norm(&(&a.u_t - &b.u_t));
    let duhamel = a.consistency.duhamel_residual.max(b.consistency.duhamel_residual);
    let iters = a.report.iterations.max(b.report.iterations);
    let passed = (indicator - 0.25).abs() < 1e-12 && max_ratio <= 0.9 && iters <= 50 && duhamel <= 1e-9 && gap <= 1e-8;
    Ok((
        passed,
        format!(
            "κΛT² = {indicator}, iterations {}/{}, max ratio {max_ratio:.3}, duhamel {duhamel:.2e}, start gap {gap:.2e}",
            a.report.iterations, b.report.iterations
        ),
    ))
}

pub fn kernel_limit() -> Result<(bool, String)> {
    let grid = Grid::new(-1.0, 1.0, 255)?;
    let rows = study_kernel_limit(
        &LevyKernel::fractional(1, 0.5)?,
        &[0.4, 0.2, 0.1],
        &grid,
        &TimeGrid::new(0.1, 200)?,
        &QuadratureSpec::default(),
        1.0,
        1.0,
    )?;
    let errs: Vec<f64> = rows.iter().map(|r| r.err_linf).collect();
    Ok((
        errs.windows(2).all(|w| w[1] < w[0]),
        format!("sup errors [{}] for ε = 0.4, 0.2, 0.1", sci(&errs)),
    ))
}

pub fn gauss_green() -> Result<(bool, String)> {
    let phi = |x: f64| if x.abs() < 1.0 { (1.0 - x * x).powi(4) } else { 0.0 };
    let psi = |x: f64| {
        if x.abs() < 0.5 {
            (1.0 - 4.0 * x * x).powi(4)
        } else {
            0.0
        }
    };
    let mut identity: f64 = 0.0;
    let mut refs = Vec::new();
    for n in [63, 127, 255] {
        let op = fractional_op(0.5, n)?;
        let r = gauss_green_residual(&op, &phi, &psi, &QuadratureSpec::default())?;
        identity = identity.max(r.discrete);
        refs.push(r.reference);
    }
    let factors: Vec<f64> = refs.windows(2).map(|w| w[0] / w[1]).collect();
    Ok((
        identity <= 1e-12 && factors.iter().all(|&f| f >= 1.5),
        format!(
            "identity residual {identity:.2e}, reference residuals [{}], factors {factors:.3?}",
            sci(&refs)
        ),
    ))
}

pub fn zero_potential_decoupling() -> Result<(bool, String)> {
    let mut cfg = ExperimentConfig::default();
    cfg.domain.n = 64;
    cfg.time.steps = 32;
    cfg.potential.profile = "zero".into();
    cfg.zeta = ProfileConfig::named("zero");
    let memory = run(Subcommand::SolveMemory, &cfg)?;
    let parabolic = run(Subcommand::SolveParabolic, &cfg)?;
    let same =
        memory.file("trajectory.csv").is_some() && memory.file("trajectory.csv") == parabolic.file("trajectory.csv");
    let one_iteration = memory
        .file("report.txt")
        .is_some_and(|r| r.lines().any(|l| l == "iterations = 1"));
    Ok((
        same && one_iteration && memory.failure.is_none(),
        format!("trajectory.csv identical: {same}, one effective iteration: {one_iteration}"),
    ))
}

pub fn rescaled_mass() -> Result<(bool, String)> {
    let quad = QuadratureSpec::default();
    let base = LevyKernel::fractional(1, 0.5)?;
    let mut worst: f64 = 0.0;
    for eps in [1.0, 0.5, 0.1] {
        let k = rescale(&base, eps, &quad)?;
        worst = worst.max((levy_mass(&k, &quad)? - 1.0).abs());
    }
    Ok((worst <= 1e-6, format!("max |mass(ν_ε) - 1| = {worst:.3e}")))
}

/// All ten checks, in order.
pub fn run_acceptance() -> Vec<CheckOutcome> {
    vec![
        outcome(1, "fractional Poisson benchmark", fractional_poisson()),
        outcome(2, "elliptic estimate (ii)", elliptic_chi_bound()),
        outcome(3, "stability identity", stability_identity()),
        outcome(4, "energy inequality", energy_inequality()),
        outcome(5, "maximum principle", max_principle()),
        outcome(6, "fixed-point regime", fixed_point_regime()),
        outcome(7, "kernel limit", kernel_limit()),
        outcome(8, "Gauss-Green", gauss_green()),
        outcome(9, "zero-potential decoupling", zero_potential_decoupling()),
        outcome(10, "rescaled-kernel mass", rescaled_mass()),
    ]
}
