//! θ-scheme for `∂ₜu + ℒu + ζu = 0` with zero complement data.

use nalgebra::{linalg::Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::grid::{inner_l2, l2_norm, norms, GridFunction, TimeGrid};
use crate::nonlocal_op::{bilinear, OperatorMatrix};

/// `A = K + diag ζ`; refuses negative or non-finite weights.
fn system(op: &OperatorMatrix, zeta: &GridFunction) -> Result<DMatrix<f64>> {
    op.grid().check_same(zeta.grid())?;
    if let Some((i, z)) = zeta
        .as_slice()
        .iter()
        .enumerate()
        .find(|(_, z)| !(**z >= 0.0) || !z.is_finite())
    {
        return Err(Error::domain(format!(
            "ζ must be finite and nonnegative, got ζ[{i}] = {z}"
        )));
    }
    let mut a = op.matrix().clone();
    for i in 0..a.nrows() {
        a[(i, i)] += zeta.values()[i];
    }
    Ok(a)
}

/// One factorization of `I + θΔtA`, reused for every step.
pub struct Stepper {
    explicit: Option<DMatrix<f64>>,
    implicit: Cholesky<f64, Dyn>,
}

impl Stepper {
    pub fn new(op: &OperatorMatrix, zeta: &GridFunction, dt: f64, theta: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::domain(format!("Δt = {dt} must be positive")));
        }
        if !(0.5..=1.0).contains(&theta) {
            return Err(Error::domain(format!("θ = {theta} outside [0.5, 1]")));
        }
        let a = system(op, zeta)?;
        let n = a.nrows();
        let lhs = DMatrix::identity(n, n) + &a * (theta * dt);
        let explicit = (theta < 1.0).then(|| DMatrix::identity(n, n) - &a * ((1.0 - theta) * dt));
        let implicit = lhs
            .cholesky()
            .ok_or_else(|| Error::LinearSolve("I + θΔt(K + diag ζ) is not positive definite".into()))?;
        Ok(Self { explicit, implicit })
    }

    pub fn advance(&self, u: &DVector<f64>) -> DVector<f64> {
        match &self.explicit {
            Some(b) => self.implicit.solve(&(b * u)),
            None => self.implicit.solve(u),
        }
    }
}

/// `(I + θΔtA)u_{n+1} = (I - (1-θ)ΔtA)u_n`.
pub fn step(op: &OperatorMatrix, zeta: &GridFunction, u_n: &GridFunction, dt: f64, theta: f64) -> Result<GridFunction> {
    op.grid().check_same(u_n.grid())?;
    let s = Stepper::new(op, zeta, dt, theta)?;
    Ok(GridFunction::from_vector(*op.grid(), s.advance(u_n.values())))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerRow {
    /// `½‖uⁿ‖²_{L²,h}`
    pub half_l2_sq: f64,
    /// `Δt·ξ_h(uⁿ, uⁿ)` (0 for `n = 0`)
    pub dissipation_xi: f64,
    /// `Δt·(ζ, (uⁿ)²)_h` (0 for `n = 0`)
    pub dissipation_zeta: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub tgrid: TimeGrid,
    pub theta: f64,
    pub states: Vec<GridFunction>,
    pub ledger: Vec<LedgerRow>,
}

impl Trajectory {
    pub fn initial(&self) -> &GridFunction {
        &self.states[0]
    }

    /// `u_T = u^{N_t}`
    pub fn final_state(&self) -> &GridFunction {
        self.states.last().expect("trajectory holds u⁰")
    }
}

pub fn solve_parabolic(
    op: &OperatorMatrix,
    zeta: &GridFunction,
    u0: &GridFunction,
    tgrid: &TimeGrid,
    theta: f64,
) -> Result<Trajectory> {
    op.grid().check_same(u0.grid())?;
    let dt = tgrid.dt();
    let stepper = Stepper::new(op, zeta, dt, theta)?;
    let mut states = Vec::with_capacity(tgrid.steps() + 1);
    let mut ledger = Vec::with_capacity(tgrid.steps() + 1);
    states.push(u0.clone());
    ledger.push(LedgerRow {
        half_l2_sq: 0.5 * l2_norm(u0).powi(2),
        dissipation_xi: 0.0,
        dissipation_zeta: 0.0,
    });
    for _ in 0..tgrid.steps() {
        let next = GridFunction::from_vector(*op.grid(), stepper.advance(states.last().unwrap().values()));
        ledger.push(LedgerRow {
            half_l2_sq: 0.5 * l2_norm(&next).powi(2),
            dissipation_xi: dt * bilinear(op, &next, &next)?,
            dissipation_zeta: dt * inner_l2(&next, &next, Some(zeta))?,
        });
        states.push(next);
    }
    Ok(Trajectory {
        tgrid: *tgrid,
        theta,
        states,
        ledger,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    /// `½‖uⁿ‖² + Σ_{m≤n}(Δtξ_h(u^m,u^m) + Δt(ζ,(u^m)²)_h)` for each `n`.
    pub lhs: Vec<f64>,
    /// `½‖u⁰‖²`
    pub rhs: f64,
    /// `max_n (lhs_n - rhs) / ‖u⁰‖²`; `0` when `u⁰ = 0`.
    pub max_relative_excess: f64,
    pub holds: bool,
}

/// Discrete energy inequality; exact for implicit Euler.
pub fn energy_check(traj: &Trajectory) -> Result<EnergyReport> {
    if traj.theta != 1.0 {
        return Err(Error::domain("the discrete energy inequality is exact for θ = 1 only"));
    }
    let rhs = traj.ledger[0].half_l2_sq;
    let norm_sq = 2.0 * rhs;
    let mut acc = 0.0;
    let mut lhs = Vec::with_capacity(traj.ledger.len());
    let mut worst = f64::NEG_INFINITY;
    let mut holds = true;
    for row in &traj.ledger {
        acc += row.dissipation_xi + row.dissipation_zeta;
        let l = row.half_l2_sq + acc;
        holds &= l <= rhs + 1e-12 * norm_sq;
        worst = worst.max(if norm_sq > 0.0 { (l - rhs) / norm_sq } else { l - rhs });
        lhs.push(l);
    }
    Ok(EnergyReport {
        lhs,
        rhs,
        max_relative_excess: worst,
        holds,
    })
}

/// `max_n ‖uⁿ‖_∞`.
pub fn sup_envelope(traj: &Trajectory) -> f64 {
    traj.states.iter().map(|u| norms(u).linf).fold(0.0, f64::max)
}

/// `max_n ‖uⁿ‖_∞ ≤ Λ(1 + 1e-12)`.
pub fn max_principle_check(traj: &Trajectory, lambda: f64) -> bool {
    sup_envelope(traj) <= lambda * (1.0 + 1e-12)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimeRule {
    /// `Δt·Σ_{n=1}^{N} uⁿ`, exact against implicit Euler.
    #[default]
    RightRectangle,
    Trapezoid,
}

pub fn time_integral(traj: &Trajectory, rule: TimeRule) -> GridFunction {
    let dt = traj.tgrid.dt();
    let grid = *traj.initial().grid();
    let mut acc = DVector::zeros(grid.len());
    for u in &traj.states[1..] {
        acc += u.values();
    }
    if rule == TimeRule::Trapezoid {
        acc += (traj.initial().values() - traj.final_state().values()) * 0.5;
    }
    GridFunction::from_vector(grid, acc * dt)
}

/// `‖(u^N - u⁰) + (K + diag ζ)·I(u)‖_{L²,h}` with the right-rectangle `I`.
pub fn telescoping_residual(op: &OperatorMatrix, zeta: &GridFunction, traj: &Trajectory) -> Result<f64> {
    let a = system(op, zeta)?;
    let integral = time_integral(traj, TimeRule::RightRectangle);
    let r = traj.final_state().values() - traj.initial().values() + a * integral.values();
    Ok(l2_norm(&GridFunction::from_vector(*op.grid(), r)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::kernel::LevyKernel;
    use crate::nonlocal_op::{assemble, QuadratureSpec};
    use std::sync::Arc;

    fn op(n: usize) -> OperatorMatrix {
        let k = Arc::new(LevyKernel::fractional(1, 0.5).unwrap());
        assemble(k, &Grid::new(-1.0, 1.0, n).unwrap(), &QuadratureSpec::default()).unwrap()
    }

    #[test]
    fn zero_state_stays_zero() {
        let k = op(16);
        let g = *k.grid();
        let t = TimeGrid::new(1.0, 5).unwrap();
        let traj = solve_parabolic(&k, &g.zeros(), &g.zeros(), &t, 1.0).unwrap();
        assert!(traj.states.iter().all(|u| u.max() == 0.0 && u.min() == 0.0));
        assert!(energy_check(&traj).unwrap().holds);
        assert!(max_principle_check(&traj, 0.0));
    }

    #[test]
    fn refuses_negative_zeta_and_bad_theta() {
        let k = op(16);
        let g = *k.grid();
        let u = g.constant(1.0);
        assert!(step(&k, &g.constant(-1.0), &u, 0.1, 1.0).is_err());
        assert!(step(&k, &g.zeros(), &u, 0.1, 0.3).is_err());
        assert!(step(&k, &g.zeros(), &u, 0.0, 1.0).is_err());
    }

    #[test]
    fn telescoping_is_exact() {
        let k = op(40);
        let g = *k.grid();
        let zeta = g.sample(|x| 1.0 + x * x);
        let u0 = g.sample(|x| (1.0 - x * x) * (3.0 * x).cos());
        let traj = solve_parabolic(&k, &zeta, &u0, &TimeGrid::new(0.5, 20).unwrap(), 1.0).unwrap();
        assert!(telescoping_residual(&k, &zeta, &traj).unwrap() <= 1e-12);
    }

    #[test]
    fn constant_trajectory_integral() {
        let g = Grid::new(0.0, 1.0, 4).unwrap();
        let c = g.constant(2.0);
        let traj = Trajectory {
            tgrid: TimeGrid::new(0.75, 3).unwrap(),
            theta: 1.0,
            states: vec![g.zeros(), c.clone(), c.clone(), c.clone()],
            ledger: Vec::new(),
        };
        let i = time_integral(&traj, TimeRule::RightRectangle);
        assert!(i.as_slice().iter().all(|&v| (v - 1.5).abs() < 1e-15));
    }
}
