//! The three shipped studies: fractional-Poisson convergence, the kernel
//! limit towards the heat equation, and the uniqueness-threshold sweep.

use std::f64::consts::PI;
use std::sync::Arc;
use std::thread;

use statrs::function::gamma::gamma;

use crate::elliptic::{solve_elliptic, EllipticOptions};
use crate::error::{Error, Result};
use crate::grid::{norms, Grid, GridFunction, TimeGrid};
use crate::kernel::{rescale, LevyKernel};
use crate::memory::{solve_memory, MemoryProblem, PicardOptions};
use crate::nonlocal_op::{assemble, OperatorMatrix, QuadratureSpec};
use crate::parabolic::solve_parabolic;
use crate::potential::Potential;

/// Runs `f` on every item on its own thread, keeping input order.
fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    thread::scope(|scope| {
        let handles: Vec<_> = items.iter().map(|it| scope.spawn(|| f(it))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("study worker panicked"))
            .collect()
    })
}

/// `κ_s = Γ(1/2) / (4^s Γ(1+s) Γ(1/2+s))`, so that `κ_s(R² - |x-c|²)^s_+`
/// solves `(-Δ)^s v = 1` on `(c-R, c+R)` with zero exterior data.
pub fn fractional_poisson_constant(s: f64) -> f64 {
    gamma(0.5) / (4f64.powf(s) * gamma(1.0 + s) * gamma(0.5 + s))
}

pub fn fractional_poisson_exact(s: f64, a: f64, b: f64) -> impl Fn(f64) -> f64 {
    let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
    let k = fractional_poisson_constant(s);
    move |x| k * (r * r - (x - c) * (x - c)).max(0.0).powf(s)
}

/// Linear interpolation of `v` at the midpoint of the domain.
pub fn center_value(v: &GridFunction) -> f64 {
    let g = v.grid();
    let n = g.len();
    let vals = v.as_slice();
    if n % 2 == 1 {
        vals[n / 2]
    } else {
        0.5 * (vals[n / 2 - 1] + vals[n / 2])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracPoissonRow {
    pub s: f64,
    pub n: usize,
    pub err_l2: f64,
    /// Sup error over nodes in the inner half of the domain.
    pub err_linf_interior: f64,
    pub center_error: f64,
    /// `log(e_prev/e) / log(h_prev/h)` against the previous `n` for this `s`.
    pub order: Option<f64>,
}

pub fn fracpoisson_cell(
    s: f64,
    grid: &Grid,
    quad: &QuadratureSpec,
    opts: &EllipticOptions,
) -> Result<(GridFunction, GridFunction)> {
    let op = assemble(Arc::new(LevyKernel::fractional(1, s)?), grid, quad)?;
    let sol = solve_elliptic(&op, &Potential::zero(), &grid.constant(1.0), opts)?;
    let exact = grid.sample(fractional_poisson_exact(s, grid.a(), grid.b()));
    Ok((sol.v, exact))
}

pub fn study_fracpoisson(
    a: f64,
    b: f64,
    s_list: &[f64],
    n_list: &[usize],
    quad: &QuadratureSpec,
    opts: &EllipticOptions,
) -> Result<Vec<FracPoissonRow>> {
    let per_s = par_map(s_list, |&s| -> Result<Vec<FracPoissonRow>> {
        let mut rows: Vec<FracPoissonRow> = Vec::new();
        let mut prev: Option<(f64, f64)> = None;
        for &n in n_list {
            let grid = Grid::new(a, b, n)?;
            let (v, exact) = fracpoisson_cell(s, &grid, quad, opts)?;
            let err = &v - &exact;
            let c = 0.5 * (a + b);
            let quarter = 0.25 * (b - a);
            let err_linf_interior = (0..n)
                .filter(|&i| (grid.node(i) - c).abs() <= quarter)
                .map(|i| err.as_slice()[i].abs())
                .fold(0.0, f64::max);
            let err_l2 = norms(&err).l2;
            let h = grid.spacing();
            let order = prev.map(|(e0, h0)| (e0 / err_l2).ln() / (h0 / h).ln());
            prev = Some((err_l2, h));
            rows.push(FracPoissonRow {
                s,
                n,
                err_l2,
                err_linf_interior,
                center_error: (center_value(&v) - center_value(&exact)).abs(),
                order,
            });
        }
        Ok(rows)
    });
    let mut out = Vec::new();
    for rows in per_s {
        out.extend(rows?);
    }
    Ok(out)
}

/// `A·e^{-σλ_k t}·sin(kπ(x-a)/(b-a))` with `λ_k = (kπ/(b-a))²`.
///
/// In one dimension a kernel family with `∫(1∧h²)ν_ε = 1` concentrating at
/// the origin has second moment `∫h²ν_ε → 1`, and the Taylor expansion gives
/// `ℒ_ε u → -½u''`; hence the diffusivity `σ = ½`.
pub fn heat_mode(mode: f64, amplitude: f64, a: f64, b: f64, t: f64) -> impl Fn(f64) -> f64 {
    const SIGMA: f64 = 0.5;
    let lambda = (mode * PI / (b - a)).powi(2);
    let decay = amplitude * (-SIGMA * lambda * t).exp();
    move |x| decay * (mode * PI * (x - a) / (b - a)).sin()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelLimitRow {
    pub eps: f64,
    pub err_linf: f64,
    pub err_l2: f64,
}

/// Heat-limit comparison for `ν_ε` built from `base`; `mode`/`amplitude`
/// describe the sine-mode initial state.
pub fn study_kernel_limit(
    base: &LevyKernel,
    eps_list: &[f64],
    grid: &Grid,
    tgrid: &TimeGrid,
    quad: &QuadratureSpec,
    mode: f64,
    amplitude: f64,
) -> Result<Vec<KernelLimitRow>> {
    let (a, b) = (grid.a(), grid.b());
    let u0 = grid.sample(heat_mode(mode, amplitude, a, b, 0.0));
    let exact = grid.sample(heat_mode(mode, amplitude, a, b, tgrid.horizon()));
    par_map(eps_list, |&eps| -> Result<KernelLimitRow> {
        let kernel = rescale(base, eps, quad)?;
        let op = assemble(Arc::new(kernel), grid, quad)?;
        let traj = solve_parabolic(&op, &grid.zeros(), &u0, tgrid, 1.0)?;
        let e = norms(&(traj.final_state() - &exact));
        Ok(KernelLimitRow {
            eps,
            err_linf: e.linf,
            err_l2: e.l2,
        })
    })
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdRow {
    pub horizon: f64,
    pub kappa: f64,
    pub klt2: f64,
    pub converged: bool,
    pub iters: usize,
    pub last_ratio: Option<f64>,
    pub duhamel_residual: Option<f64>,
}

/// One memory solve per horizon with `steps` time steps each; non-convergence
/// is recorded in the row, other failures abort the study.
#[allow(clippy::too_many_arguments)]
pub fn study_threshold(
    op: &Arc<OperatorMatrix>,
    potential: &Potential,
    u0: &GridFunction,
    t_list: &[f64],
    steps: usize,
    picard: &PicardOptions,
    elliptic: &EllipticOptions,
    theta: f64,
) -> Result<Vec<ThresholdRow>> {
    par_map(t_list, |&horizon| -> Result<ThresholdRow> {
        let prob = MemoryProblem::with_operator(
            op.clone(),
            potential.clone(),
            u0.clone(),
            TimeGrid::new(horizon, steps)?,
        )?
        .with_theta(theta)
        .with_elliptic_options(*elliptic);
        let ind = crate::memory::uniqueness_indicator(&prob);
        let row = |converged, report: &crate::memory::PiIterationReport, duhamel| ThresholdRow {
            horizon,
            kappa: ind.kappa,
            klt2: ind.value,
            converged,
            iters: report.iterations,
            last_ratio: report.contraction_ratios.last().copied(),
            duhamel_residual: duhamel,
        };
        match solve_memory(&prob, picard) {
            Ok(sol) => Ok(row(true, &sol.report, Some(sol.consistency.duhamel_residual))),
            Err(Error::NotConverged { report, .. }) => Ok(row(false, &report, None)),
            Err(e) => Err(e),
        }
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_constant_at_one_half_is_one() {
        assert!((fractional_poisson_constant(0.5) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn heat_mode_at_zero_is_the_initial_state() {
        let f = heat_mode(1.0, 1.0, -1.0, 1.0, 0.0);
        for x in [-0.7, 0.0, 0.3] {
            assert_eq!(f(x), (PI * (x + 1.0) / 2.0).sin());
        }
    }

    #[test]
    fn zero_amplitude_gives_zero_rows() {
        let g = Grid::new(-1.0, 1.0, 24).unwrap();
        let base = LevyKernel::fractional(1, 0.5).unwrap();
        let rows = study_kernel_limit(
            &base,
            &[0.4, 0.2],
            &g,
            &TimeGrid::new(0.1, 4).unwrap(),
            &QuadratureSpec::default(),
            1.0,
            0.0,
        )
        .unwrap();
        assert!(rows.iter().all(|r| r.err_linf == 0.0 && r.err_l2 == 0.0));
    }
}
