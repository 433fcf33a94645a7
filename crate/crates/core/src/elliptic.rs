//! Semilinear problem `Kv + χ(v) = f`: damped Newton on the convex
//! functional `𝒥`, the a-priori estimates and the monotone stability gap.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::grid::{inner_l2, l2_norm, GridFunction};
use crate::nonlocal_op::{bilinear, OperatorMatrix};
use crate::potential::Potential;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticOptions {
    /// Target for `‖Kv + χ(v) - f‖_{L²,h}`.
    pub tol: f64,
    pub max_iters: usize,
    pub armijo: f64,
    pub backtrack: f64,
    pub max_backtracks: usize,
}

impl Default for EllipticOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iters: 30,
            armijo: 1e-4,
            backtrack: 0.5,
            max_backtracks: 60,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimates {
    /// `ξ_h(v, v)`
    pub e1: f64,
    /// `‖χ(v)‖_{L²,h}`
    pub e2: f64,
    /// `‖φ(v)‖_{L²,h}`
    pub e3: f64,
}

#[derive(Debug, Clone)]
pub struct EllipticSolution {
    pub v: GridFunction,
    pub residual: f64,
    pub newton_iters: usize,
    pub j_value: f64,
    /// `𝒥` after each accepted step, starting with `𝒥(0) = 0`.
    pub j_history: Vec<f64>,
    pub estimates: Estimates,
}

/// `F(v) = Kv + χ(v) - f` as a raw vector.
fn residual_vector(op: &OperatorMatrix, p: &Potential, v: &DVector<f64>, f: &DVector<f64>) -> DVector<f64> {
    let mut r = op.matrix() * v;
    for i in 0..r.len() {
        r[i] += p.chi(v[i]) - f[i];
    }
    r
}

fn functional(op: &OperatorMatrix, p: &Potential, w: &DVector<f64>, f: &DVector<f64>) -> f64 {
    let h = op.grid().spacing();
    let quadratic = 0.5 * w.dot(&(op.matrix() * w));
    let g: f64 = w.iter().map(|&x| p.big_g(x)).sum();
    h * (quadratic + g - f.dot(w))
}

/// `𝒥(w) = ½ξ_h(w,w) + h·ΣG(w_i) - h·Σf_i w_i`.
pub fn evaluate_j(op: &OperatorMatrix, p: &Potential, w: &GridFunction, f: &GridFunction) -> Result<f64> {
    op.grid().check_same(w.grid())?;
    op.grid().check_same(f.grid())?;
    Ok(functional(op, p, w.values(), f.values()))
}

pub fn estimates(op: &OperatorMatrix, p: &Potential, v: &GridFunction) -> Result<Estimates> {
    Ok(Estimates {
        e1: bilinear(op, v, v)?,
        e2: l2_norm(&v.map(|x| p.chi(x))),
        e3: l2_norm(&v.map(|x| p.phi(x))),
    })
}

pub fn solve_elliptic(
    op: &OperatorMatrix,
    p: &Potential,
    f: &GridFunction,
    opts: &EllipticOptions,
) -> Result<EllipticSolution> {
    p.require_valid()?;
    op.grid().check_same(f.grid())?;
    let grid = *op.grid();
    let sqrt_h = grid.spacing().sqrt();
    let fv = f.values();
    let n = grid.len();

    let mut v = DVector::zeros(n);
    let mut j: f64 = 0.0;
    let mut j_history = vec![j];
    let mut r = residual_vector(op, p, &v, fv);
    let mut res = sqrt_h * r.norm();
    let mut iters = 0;

    while res > opts.tol {
        if iters >= opts.max_iters {
            return Err(Error::NewtonDiverged {
                iterations: iters,
                residual: res,
            });
        }
        let mut jac = op.matrix().clone();
        for i in 0..n {
            jac[(i, i)] += p.chi_prime(v[i]);
        }
        let chol = jac
            .cholesky()
            .ok_or_else(|| Error::LinearSolve("Newton Jacobian is not positive definite".into()))?;
        let d = -chol.solve(&r);
        // ∇𝒥 = h·F
        let slope = grid.spacing() * r.dot(&d);

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_backtracks {
            let trial = &v + &d * t;
            let j_trial = functional(op, p, &trial, fv);
            let allowance = 1e-14 * (1.0 + j.abs());
            if j_trial <= j + opts.armijo * t * slope + allowance {
                accepted = Some((trial, j_trial));
                break;
            }
            t *= opts.backtrack;
        }
        let Some((trial, j_trial)) = accepted else {
            return Err(Error::LineSearch {
                iterations: iters,
                residual: res,
            });
        };
        let r_trial = residual_vector(op, p, &trial, fv);
        let res_trial = sqrt_h * r_trial.norm();
        iters += 1;
        // at roundoff level 𝒥 no longer discriminates; stop once the residual stalls
        if t < 1.0 && res_trial >= res && res <= 1e3 * opts.tol {
            break;
        }
        v = trial;
        j = j_trial;
        r = r_trial;
        res = res_trial;
        j_history.push(j);
    }

    if res > opts.tol {
        return Err(Error::LineSearch {
            iterations: iters,
            residual: res,
        });
    }
    let v = GridFunction::from_vector(grid, v);
    let est = estimates(op, p, &v)?;
    Ok(EllipticSolution {
        v,
        residual: res,
        newton_iters: iters,
        j_value: j,
        j_history,
        estimates: est,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Check {
    pub value: f64,
    pub bound: f64,
    pub holds: bool,
}

impl Check {
    fn new(value: f64, bound: f64, slack: f64) -> Self {
        Self {
            value,
            bound,
            holds: value <= bound + slack,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateReport {
    /// `ξ_h(v,v) ≤ 2C_P‖f‖²`
    pub energy: Check,
    /// `‖χ(v)‖ ≤ ‖f‖`
    pub chi: Check,
    /// `‖φ(v)‖² ≤ δ⁻²‖f‖² + |Ω|`
    pub phi: Check,
}

impl EstimateReport {
    pub fn all_hold(&self) -> bool {
        self.energy.holds && self.chi.holds && self.phi.holds
    }
}

/// Checks the three a-priori bounds; `delta` is the potential's unit level.
pub fn verify_elliptic_estimates(
    sol: &EllipticSolution,
    f: &GridFunction,
    c_poincare: f64,
    delta: f64,
) -> Result<EstimateReport> {
    sol.v.grid().check_same(f.grid())?;
    let grid = sol.v.grid();
    let fnorm = l2_norm(f);
    let e = sol.estimates;
    let energy_bound = 2.0 * c_poincare * fnorm * fnorm;
    let inv_delta_sq = if delta.is_infinite() {
        0.0
    } else {
        1.0 / (delta * delta)
    };
    let phi_bound = inv_delta_sq * fnorm * fnorm + grid.diameter();
    Ok(EstimateReport {
        energy: Check::new(e.e1, energy_bound, 1e-8 * (1.0 + energy_bound)),
        chi: Check::new(e.e2, fnorm, 1e-8),
        phi: Check::new(e.e3 * e.e3, phi_bound, 1e-8 * (1.0 + phi_bound)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    /// `ξ_h(Δv, Δv)`
    pub xi_term: f64,
    /// `(χ(v₁) - χ(v₂), Δv)_h`
    pub monotone_term: f64,
    /// `(Δf, Δv)_h`
    pub rhs: f64,
    pub identity_residual: f64,
    /// `‖Δv‖_{𝕏,h} = (2ξ_h(Δv,Δv))^{1/2}`
    pub x_norm: f64,
    /// `2‖Δf‖_*`, with the dual norm of the discrete energy space
    pub dual_bound: f64,
    /// `2√C_P‖Δf‖_{L²,h}`
    pub l2_bound: f64,
}

impl StabilityReport {
    pub fn bounds_hold(&self) -> bool {
        let slack = 1e-9 * (1.0 + self.x_norm);
        self.x_norm <= self.dual_bound + slack && self.x_norm <= self.l2_bound + slack
    }
}

pub fn stability_gap(
    op: &OperatorMatrix,
    p: &Potential,
    sol1: &EllipticSolution,
    sol2: &EllipticSolution,
    f1: &GridFunction,
    f2: &GridFunction,
    c_poincare: f64,
) -> Result<StabilityReport> {
    for g in [sol1.v.grid(), sol2.v.grid(), f1.grid(), f2.grid()] {
        op.grid().check_same(g)?;
    }
    let dv = &sol1.v - &sol2.v;
    let df = f1 - f2;
    let dchi = &sol1.v.map(|x| p.chi(x)) - &sol2.v.map(|x| p.chi(x));
    let xi_term = bilinear(op, &dv, &dv)?;
    let monotone_term = inner_l2(&dchi, &dv, None)?;
    let rhs = inner_l2(&df, &dv, None)?;

    let h = op.grid().spacing();
    let chol = op
        .matrix()
        .clone()
        .cholesky()
        .ok_or_else(|| Error::LinearSolve("K is not positive definite".into()))?;
    let dual = (h * df.values().dot(&chol.solve(df.values())) / 2.0).max(0.0).sqrt();

    Ok(StabilityReport {
        xi_term,
        monotone_term,
        rhs,
        identity_residual: (xi_term + monotone_term - rhs).abs(),
        x_norm: (2.0 * xi_term).max(0.0).sqrt(),
        dual_bound: 2.0 * dual,
        l2_bound: 2.0 * c_poincare.sqrt() * l2_norm(&df),
    })
}

/// Newton on the span of the `m` lowest eigenvectors of `K`: the
/// finite-dimensional Galerkin problem. `m = n` reproduces the full solve.
pub fn solve_galerkin(
    op: &OperatorMatrix,
    p: &Potential,
    f: &GridFunction,
    m: usize,
    opts: &EllipticOptions,
) -> Result<GridFunction> {
    p.require_valid()?;
    op.grid().check_same(f.grid())?;
    let n = op.grid().len();
    if m == 0 || m > n {
        return Err(Error::domain(format!("Galerkin dimension {m} outside 1..={n}")));
    }
    let eig = op.matrix().clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let basis = DMatrix::from_fn(n, m, |i, k| eig.eigenvectors[(i, order[k])]);
    let lambdas = DVector::from_fn(m, |k, _| eig.eigenvalues[order[k]]);

    let fv = f.values();
    let proj_f = basis.transpose() * fv;
    let sqrt_h = op.grid().spacing().sqrt();
    let mut c = DVector::zeros(m);
    for _ in 0..=opts.max_iters {
        let v = &basis * &c;
        let chi = v.map(|x| p.chi(x));
        let r = lambdas.component_mul(&c) + basis.transpose() * chi - &proj_f;
        if sqrt_h * r.norm() <= opts.tol {
            return Ok(GridFunction::from_vector(*op.grid(), v));
        }
        let weighted = DMatrix::from_fn(n, m, |i, k| p.chi_prime(v[i]) * basis[(i, k)]);
        let mut jac = basis.transpose() * weighted;
        for k in 0..m {
            jac[(k, k)] += lambdas[k];
        }
        let step = jac
            .cholesky()
            .ok_or_else(|| Error::LinearSolve("Galerkin Jacobian is not positive definite".into()))?
            .solve(&r);
        c -= step;
    }
    Err(Error::NewtonDiverged {
        iterations: opts.max_iters,
        residual: f64::NAN,
    })
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
    fn zero_forcing_gives_zero() {
        let k = op(32);
        let sol = solve_elliptic(&k, &Potential::quadratic(1.0), &k.grid().zeros(), &Default::default()).unwrap();
        assert_eq!(sol.newton_iters, 0);
        assert_eq!(sol.residual, 0.0);
        assert_eq!(sol.v.max(), 0.0);
        let rep = verify_elliptic_estimates(&sol, &k.grid().zeros(), 1.0, 1.0).unwrap();
        assert!(rep.all_hold());
    }

    #[test]
    fn j_decreases_and_solution_converges() {
        let k = op(64);
        let f = k.grid().sample(|x| 5.0 * (1.0 + x));
        let sol = solve_elliptic(&k, &Potential::quadratic(1.0), &f, &Default::default()).unwrap();
        assert!(sol.residual <= 1e-10);
        assert!(sol.newton_iters <= 30);
        assert!(sol.j_history.windows(2).all(|w| w[1] <= w[0] + 1e-13));
    }

    #[test]
    fn invalid_potential_is_refused() {
        let k = op(16);
        let f = k.grid().constant(1.0);
        assert!(matches!(
            solve_elliptic(&k, &Potential::quadratic(-1.0), &f, &Default::default()),
            Err(Error::Potential(_))
        ));
    }

    #[test]
    fn galerkin_full_dimension_matches() {
        let k = op(24);
        let p = Potential::quadratic(1.0);
        let f = k.grid().sample(|x| 2.0 - x);
        let full = solve_elliptic(&k, &p, &f, &Default::default()).unwrap();
        let g = solve_galerkin(&k, &p, &f, 24, &Default::default()).unwrap();
        assert!(l2_norm(&(&g - &full.v)) < 1e-9);
    }
}
