//! Global-in-time memory problem via the fixed-point map
//! `π(w) = 𝒰_T(φ(V(u₀ - w)))` and Picard iteration.

use std::sync::Arc;

use crate::elliptic::{solve_elliptic, EllipticOptions};
use crate::error::{Error, Result};
use crate::grid::{l2_norm, norms, Grid, GridFunction, TimeGrid};
use crate::kernel::JumpKernel;
use crate::nonlocal_op::{assemble, OperatorMatrix, QuadratureSpec};
use crate::parabolic::{solve_parabolic, time_integral, TimeRule, Trajectory};
use crate::potential::{kappa, Potential};

/// Slack on membership in `G = {‖w‖_{L²,h} ≤ ‖u₀‖_{L²,h}}`.
const BALL_SLACK: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct MemoryProblem {
    op: Arc<OperatorMatrix>,
    potential: Potential,
    u0: GridFunction,
    tgrid: TimeGrid,
    theta: f64,
    elliptic: EllipticOptions,
}

impl MemoryProblem {
    pub fn new(
        kernel: Arc<dyn JumpKernel>,
        grid: &Grid,
        quad: &QuadratureSpec,
        potential: Potential,
        u0: GridFunction,
        tgrid: TimeGrid,
    ) -> Result<Self> {
        let op = Arc::new(assemble(kernel, grid, quad)?);
        Self::with_operator(op, potential, u0, tgrid)
    }

    /// Reuses an assembled operator (sweeps over `T` or `φ`).
    pub fn with_operator(
        op: Arc<OperatorMatrix>,
        potential: Potential,
        u0: GridFunction,
        tgrid: TimeGrid,
    ) -> Result<Self> {
        op.grid().check_same(u0.grid())?;
        potential.require_valid()?;
        if u0.as_slice().iter().any(|x| !x.is_finite()) {
            return Err(Error::domain("u₀ has non-finite entries"));
        }
        Ok(Self {
            op,
            potential,
            u0,
            tgrid,
            theta: 1.0,
            elliptic: EllipticOptions::default(),
        })
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_elliptic_options(mut self, opts: EllipticOptions) -> Self {
        self.elliptic = opts;
        self
    }

    pub fn operator(&self) -> &Arc<OperatorMatrix> {
        &self.op
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn u0(&self) -> &GridFunction {
        &self.u0
    }

    pub fn tgrid(&self) -> &TimeGrid {
        &self.tgrid
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `Λ = ‖u₀‖_∞`
    pub fn lambda(&self) -> f64 {
        norms(&self.u0).linf
    }

    /// Radius of `G`, `‖u₀‖_{L²,h}`.
    pub fn ball_radius(&self) -> f64 {
        l2_norm(&self.u0)
    }

    fn in_ball(&self, w: &GridFunction) -> bool {
        let r = self.ball_radius();
        l2_norm(w) <= r * (1.0 + BALL_SLACK) + 1e-300
    }
}

#[derive(Debug, Clone)]
pub struct PiOutput {
    pub w_next: GridFunction,
    pub v: GridFunction,
    pub zeta: GridFunction,
    pub traj: Trajectory,
}

pub fn pi_map(prob: &MemoryProblem, w: &GridFunction) -> Result<PiOutput> {
    prob.op.grid().check_same(w.grid())?;
    if !prob.in_ball(w) {
        return Err(Error::domain(format!(
            "‖w‖ = {:.6e} exceeds the ball radius ‖u₀‖ = {:.6e}",
            l2_norm(w),
            prob.ball_radius()
        )));
    }
    let f = &prob.u0 - w;
    let sol = solve_elliptic(&prob.op, &prob.potential, &f, &prob.elliptic).map_err(|e| e.in_stage("elliptic"))?;
    let zeta = sol.v.map(|x| prob.potential.phi(x));
    let traj =
        solve_parabolic(&prob.op, &zeta, &prob.u0, &prob.tgrid, prob.theta).map_err(|e| e.in_stage("parabolic"))?;
    Ok(PiOutput {
        w_next: traj.final_state().clone(),
        v: sol.v,
        zeta,
        traj,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum PicardStart {
    Zero,
    InitialState,
    Given(GridFunction),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardOptions {
    pub tol: f64,
    pub max_iters: usize,
    /// `α` in `w_{k+1} = (1-α)w_k + α·π(w_k)`.
    pub damping: f64,
    /// Damping adopted after the first residual increase.
    pub fallback_damping: f64,
    pub start: PicardStart,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iters: 50,
            damping: 1.0,
            fallback_damping: 0.5,
            start: PicardStart::Zero,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PiIterationReport {
    /// Number of updates `w_k → w_{k+1}` performed.
    pub iterations: usize,
    /// `‖π(w_k) - w_k‖_{L²,h}` for every evaluation of `π`.
    pub residual_history: Vec<f64>,
    /// Consecutive residual ratios.
    pub contraction_ratios: Vec<f64>,
    pub kappa_lambda_t2: f64,
    pub converged: bool,
    pub ball_violations: usize,
    pub final_damping: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyReport {
    /// `‖K·I(u) + φ(v)∘I(u) - (u₀ - u_T)‖_{L²,h}`
    pub duhamel_residual: f64,
    /// `‖v - I(u)‖_{L²,h} / max(‖v‖_{L²,h}, Δt)`
    pub v_vs_integral: f64,
}

#[derive(Debug, Clone)]
pub struct MemorySolution {
    pub trajectory: Trajectory,
    pub v: GridFunction,
    pub zeta: GridFunction,
    pub u_t: GridFunction,
    pub report: PiIterationReport,
    pub consistency: ConsistencyReport,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniquenessIndicator {
    pub kappa: f64,
    pub lambda: f64,
    /// `κΛT²`
    pub value: f64,
    pub unique_regime: bool,
}

pub fn uniqueness_indicator(prob: &MemoryProblem) -> UniquenessIndicator {
    let lambda = prob.lambda();
    let t = prob.tgrid.horizon();
    let k = kappa(&prob.potential, lambda, t);
    let value = k * lambda * t * t;
    UniquenessIndicator {
        kappa: k,
        lambda,
        value,
        unique_regime: value < 1.0,
    }
}

pub fn solve_memory(prob: &MemoryProblem, opts: &PicardOptions) -> Result<MemorySolution> {
    if !(opts.damping > 0.0 && opts.damping <= 1.0) || !(opts.fallback_damping > 0.0 && opts.fallback_damping <= 1.0) {
        return Err(Error::domain("damping must lie in (0, 1]"));
    }
    let grid = *prob.op.grid();
    let mut w = match &opts.start {
        PicardStart::Zero => grid.zeros(),
        PicardStart::InitialState => prob.u0.clone(),
        PicardStart::Given(w) => {
            grid.check_same(w.grid())?;
            w.clone()
        }
    };
    let indicator = uniqueness_indicator(prob);
    let mut report = PiIterationReport {
        iterations: 0,
        residual_history: Vec::new(),
        contraction_ratios: Vec::new(),
        kappa_lambda_t2: indicator.value,
        converged: false,
        ball_violations: 0,
        final_damping: opts.damping,
    };
    let mut alpha = opts.damping;

    loop {
        if !prob.in_ball(&w) {
            report.ball_violations += 1;
        }
        let out = pi_map(prob, &w)?;
        if !prob.in_ball(&out.w_next) {
            report.ball_violations += 1;
        }
        let residual = l2_norm(&(&out.w_next - &w));
        if let Some(&prev) = report.residual_history.last() {
            report
                .contraction_ratios
                .push(if prev > 0.0 { residual / prev } else { 0.0 });
            if residual > prev && alpha > opts.fallback_damping {
                alpha = opts.fallback_damping;
            }
        }
        report.residual_history.push(residual);
        report.final_damping = alpha;

        if residual <= opts.tol {
            report.converged = true;
            let consistency = consistency_check(prob, &out)?;
            return Ok(MemorySolution {
                u_t: out.w_next,
                trajectory: out.traj,
                v: out.v,
                zeta: out.zeta,
                report,
                consistency,
            });
        }
        if report.iterations >= opts.max_iters {
            return Err(Error::NotConverged {
                iterations: report.iterations,
                residual,
                report: Box::new(report),
            });
        }
        w = if alpha == 1.0 {
            out.w_next
        } else {
            &w.scale(1.0 - alpha) + &out.w_next.scale(alpha)
        };
        report.iterations += 1;
    }
}

/// Duhamel identity and `v ≈ ∫u` for one evaluation of `π`.
pub fn consistency_check(prob: &MemoryProblem, out: &PiOutput) -> Result<ConsistencyReport> {
    let integral = time_integral(&out.traj, TimeRule::RightRectangle);
    let k_int = GridFunction::from_vector(*prob.op.grid(), prob.op.matrix() * integral.values());
    let lhs = &k_int + &integral.hadamard(&out.zeta)?;
    let rhs = &prob.u0 - out.traj.final_state();
    let duhamel = l2_norm(&(&lhs - &rhs));
    let scale = l2_norm(&out.v).max(prob.tgrid.dt());
    Ok(ConsistencyReport {
        duhamel_residual: duhamel,
        v_vs_integral: l2_norm(&(&out.v - &integral)) / scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::LevyKernel;

    fn problem(p: Potential, u0: impl Fn(f64) -> f64, horizon: f64) -> MemoryProblem {
        let grid = Grid::new(-1.0, 1.0, 32).unwrap();
        let k = Arc::new(LevyKernel::fractional(1, 0.5).unwrap());
        MemoryProblem::new(
            k,
            &grid,
            &QuadratureSpec::default(),
            p,
            grid.sample(u0),
            TimeGrid::new(horizon, 16).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn zero_potential_is_one_iteration() {
        let prob = problem(Potential::zero(), |x| 1.0 - x * x, 0.5);
        let sol = solve_memory(&prob, &PicardOptions::default()).unwrap();
        assert_eq!(sol.report.iterations, 1);
        assert_eq!(sol.report.residual_history[1], 0.0);
    }

    #[test]
    fn zero_initial_state_is_fixed() {
        let prob = problem(Potential::quadratic(1.0), |_| 0.0, 0.5);
        let sol = solve_memory(&prob, &PicardOptions::default()).unwrap();
        assert_eq!(sol.report.iterations, 0);
        assert_eq!(sol.consistency.duhamel_residual, 0.0);
        assert_eq!(sol.consistency.v_vs_integral, 0.0);
    }

    #[test]
    fn indicator_scaling() {
        let prob = problem(
            Potential::quadratic(1.0),
            |x| (std::f64::consts::FRAC_PI_2 * (x + 1.0)).sin(),
            0.5,
        );
        let a = uniqueness_indicator(&prob);
        let prob2 = problem(
            Potential::quadratic(1.0),
            |x| (std::f64::consts::FRAC_PI_2 * (x + 1.0)).sin(),
            1.0,
        );
        let b = uniqueness_indicator(&prob2);
        assert!((b.kappa / a.kappa - 2.0).abs() < 1e-12);
        assert!((b.value / a.value - 8.0).abs() < 1e-12);
    }

    #[test]
    fn ball_membership_is_enforced() {
        let prob = problem(Potential::quadratic(1.0), |x| 1.0 - x * x, 0.5);
        let w = prob.u0().scale(2.0);
        assert!(matches!(pi_map(&prob, &w), Err(Error::Domain(_))));
    }
}
