use std::f64::consts::PI;
use std::sync::Arc;

use levy_memory::elliptic::{evaluate_j, solve_elliptic, solve_galerkin, verify_elliptic_estimates, EllipticOptions};
use levy_memory::grid::{l2_norm, norms, Grid, GridFunction, TimeGrid};
use levy_memory::kernel::LevyKernel;
use levy_memory::memory::{solve_memory, MemoryProblem, PicardOptions, PicardStart};
use levy_memory::nonlocal_op::{assemble, poincare_lower_bound, OperatorMatrix, QuadratureSpec};
use levy_memory::parabolic::{solve_parabolic, telescoping_residual, Stepper};
use levy_memory::potential::Potential;
use levy_memory::Error;
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn op(s: f64, n: usize) -> OperatorMatrix {
    let grid = Grid::new(-1.0, 1.0, n).unwrap();
    assemble(
        Arc::new(LevyKernel::fractional(1, s).unwrap()),
        &grid,
        &QuadratureSpec::default(),
    )
    .unwrap()
}

fn random(rng: &mut ChaCha8Rng, grid: &Grid, lo: f64, hi: f64) -> GridFunction {
    GridFunction::new(*grid, (0..grid.len()).map(|_| rng.random_range(lo..hi)).collect()).unwrap()
}

fn opts() -> EllipticOptions {
    EllipticOptions::default()
}

#[test]
fn zero_potential_is_a_linear_solve() {
    let k = op(0.5, 60);
    let grid = *k.grid();
    let f = grid.sample(|x| x.exp());
    let v = solve_elliptic(&k, &Potential::zero(), &f, &opts()).unwrap().v;
    let direct = k.matrix().clone().lu().solve(f.values()).unwrap();
    assert!((v.values() - direct).amax() < 1e-10);
}

#[test]
fn absorption_lowers_nonnegative_solutions() {
    let k = op(0.4, 64);
    let grid = *k.grid();
    let f = grid.sample(|x| 4.0 * (1.0 - x * x));
    let free = solve_elliptic(&k, &Potential::zero(), &f, &opts()).unwrap().v;
    for p in [
        Potential::quadratic(1.0),
        Potential::absolute(2.0),
        Potential::saturating(3.0),
    ] {
        let v = solve_elliptic(&k, &p, &f, &opts()).unwrap().v;
        assert!(v.min() >= 0.0);
        assert!(v.as_slice().iter().zip(free.as_slice()).all(|(a, b)| a <= b));
    }
}

#[test]
fn solution_minimizes_the_functional() {
    let k = op(0.5, 48);
    let grid = *k.grid();
    let p = Potential::quadratic(1.0);
    let f = grid.sample(|x| 3.0 * (PI * x).cos() + 1.0);
    let sol = solve_elliptic(&k, &p, &f, &opts()).unwrap();
    let j0 = evaluate_j(&k, &p, &sol.v, &f).unwrap();
    assert!((j0 - sol.j_value).abs() < 1e-12 * (1.0 + j0.abs()));
    assert!(sol
        .j_history
        .windows(2)
        .all(|w| w[1] <= w[0] + 1e-14 * (1.0 + w[0].abs())));

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let d = random(&mut rng, &grid, -1.0, 1.0);
        for eps in [1e-1, 1e-3] {
            let j = evaluate_j(&k, &p, &(&sol.v + &d.scale(eps)), &f).unwrap();
            assert!(j >= j0 - 1e-13);
        }
        // directional derivative vanishes at the minimizer
        let e = 1e-5;
        let slope = (evaluate_j(&k, &p, &(&sol.v + &d.scale(e)), &f).unwrap()
            - evaluate_j(&k, &p, &(&sol.v - &d.scale(e)), &f).unwrap())
            / (2.0 * e);
        assert!(slope.abs() < 1e-7, "slope {slope}");
    }
}

#[test]
fn galerkin_converges_to_the_full_solve() {
    let k = op(0.5, 40);
    let grid = *k.grid();
    let p = Potential::quadratic(1.0);
    let f = grid.sample(|x| 2.0 + x);
    let full = solve_elliptic(&k, &p, &f, &opts()).unwrap().v;
    let errs: Vec<f64> = [2, 8, 20, 40]
        .iter()
        .map(|&m| l2_norm(&(&solve_galerkin(&k, &p, &f, m, &opts()).unwrap() - &full)))
        .collect();
    assert!(errs.windows(2).all(|w| w[1] <= w[0]), "{errs:?}");
    assert!(errs[3] < 1e-9);
    assert!(matches!(solve_galerkin(&k, &p, &f, 0, &opts()), Err(Error::Domain(_))));
}

#[test]
fn a_priori_estimates_hold() {
    let k = op(0.5, 64);
    let grid = *k.grid();
    let c = poincare_lower_bound(k.kernel().as_ref(), &grid, &QuadratureSpec::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for p in [
        Potential::quadratic(1.0),
        Potential::saturating(2.0),
        Potential::absolute(1.0),
    ] {
        for _ in 0..10 {
            let f = random(&mut rng, &grid, -3.0, 3.0);
            let sol = solve_elliptic(&k, &p, &f, &opts()).unwrap();
            let report = verify_elliptic_estimates(&sol, &f, c, p.delta_unit()).unwrap();
            assert!(report.all_hold(), "{p:?}: {report:?}");
        }
    }
    // for φ(t) = t² the unit level is 1, so ‖φ(v)‖² ≤ ‖f‖² + |Ω|
    let p = Potential::quadratic(1.0);
    let f = grid.sample(|x| 5.0 * (3.0 * x).sin());
    let sol = solve_elliptic(&k, &p, &f, &opts()).unwrap();
    assert!(sol.estimates.e3.powi(2) <= l2_norm(&f).powi(2) + 2.0);
}

#[test]
fn compact_kernel_has_no_poincare_bound() {
    let grid = Grid::new(-1.0, 1.0, 20).unwrap();
    let k = LevyKernel::builtin("indicator", &[("radius".to_string(), 0.5)].into()).unwrap();
    assert!(matches!(
        poincare_lower_bound(&k, &grid, &QuadratureSpec::default()),
        Err(Error::BoundUnavailable(_))
    ));
}

/// `e^{-tA}u₀` through the eigendecomposition of `A = K + diag ζ`.
fn exact_flow(k: &OperatorMatrix, zeta: &GridFunction, u0: &GridFunction, t: f64) -> DVector<f64> {
    let mut a = k.matrix().clone();
    for i in 0..a.nrows() {
        a[(i, i)] += zeta.as_slice()[i];
    }
    let eig = a.symmetric_eigen();
    let coeffs = eig.eigenvectors.transpose() * u0.values();
    let damped = DVector::from_fn(coeffs.len(), |i, _| coeffs[i] * (-t * eig.eigenvalues[i]).exp());
    &eig.eigenvectors * damped
}

#[test]
fn time_convergence_orders() {
    let k = op(0.5, 32);
    let grid = *k.grid();
    let zeta = grid.sample(|x| 1.0 + x * x);
    let u0 = grid.sample(|x| (PI * (x + 1.0) / 2.0).sin() + 0.3 * (PI * (x + 1.0)).sin());
    let exact = exact_flow(&k, &zeta, &u0, 0.4);
    let err = |steps: usize, theta: f64| {
        let traj = solve_parabolic(&k, &zeta, &u0, &TimeGrid::new(0.4, steps).unwrap(), theta).unwrap();
        (traj.final_state().values() - &exact).norm()
    };
    let euler = [err(20, 1.0), err(40, 1.0), err(80, 1.0)];
    let cn = [err(20, 0.5), err(40, 0.5), err(80, 0.5)];
    for w in euler.windows(2) {
        assert!((w[0] / w[1]).log2() >= 0.8, "{euler:?}");
    }
    for w in cn.windows(2) {
        assert!((w[0] / w[1]).log2() >= 1.8, "{cn:?}");
    }
}

#[test]
fn larger_weight_gives_smaller_nonnegative_solution() {
    let k = op(0.6, 50);
    let grid = *k.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let tgrid = TimeGrid::new(0.3, 15).unwrap();
    for _ in 0..10 {
        let u0 = random(&mut rng, &grid, 0.0, 1.0);
        let z1 = random(&mut rng, &grid, 0.0, 2.0);
        let z2 = &z1 + &random(&mut rng, &grid, 0.0, 2.0);
        let a = solve_parabolic(&k, &z1, &u0, &tgrid, 1.0).unwrap();
        let b = solve_parabolic(&k, &z2, &u0, &tgrid, 1.0).unwrap();
        for (ua, ub) in a.states.iter().zip(&b.states) {
            assert!(ub.min() >= 0.0);
            assert!(ua.as_slice().iter().zip(ub.as_slice()).all(|(x, y)| y <= &(x + 1e-14)));
        }
    }
}

#[test]
fn telescoping_identity_is_exact() {
    let k = op(0.3, 40);
    let grid = *k.grid();
    let zeta = grid.sample(|x| 2.0 - x);
    let u0 = grid.sample(|x| 1.0 - x.abs());
    let traj = solve_parabolic(&k, &zeta, &u0, &TimeGrid::new(1.0, 37).unwrap(), 1.0).unwrap();
    assert!(telescoping_residual(&k, &zeta, &traj).unwrap() < 1e-12);
}

#[test]
fn stepper_rejects_bad_parameters() {
    let k = op(0.5, 10);
    let grid = *k.grid();
    assert!(Stepper::new(&k, &grid.constant(-1.0), 0.1, 1.0).is_err());
    assert!(Stepper::new(&k, &grid.zeros(), 0.0, 1.0).is_err());
    assert!(Stepper::new(&k, &grid.zeros(), 0.1, 0.3).is_err());
    assert!(Stepper::new(&k, &grid.zeros(), 0.1, 1.2).is_err());
}

fn memory_problem(n: usize, p: Potential, u0: impl Fn(f64) -> f64, horizon: f64, steps: usize) -> MemoryProblem {
    let k = Arc::new(op(0.5, n));
    let grid = *k.grid();
    MemoryProblem::with_operator(k, p, grid.sample(u0), TimeGrid::new(horizon, steps).unwrap()).unwrap()
}

#[test]
fn iterates_stay_in_the_ball_and_v_is_the_time_integral() {
    for p in [
        Potential::quadratic(1.0),
        Potential::saturating(2.0),
        Potential::absolute(1.0),
    ] {
        let prob = memory_problem(63, p, |x| (1.0 - x * x) * (1.0 + x), 0.6, 30);
        let sol = solve_memory(&prob, &PicardOptions::default()).unwrap();
        assert_eq!(sol.report.ball_violations, 0);
        assert!(sol.consistency.v_vs_integral <= 1e-8, "{:?}", sol.consistency);
        assert!(sol.consistency.duhamel_residual <= 1e-9);
        assert!(norms(&sol.u_t).linf <= prob.lambda() * (1.0 + 1e-12));
    }
}

#[test]
fn nonconvergence_carries_the_report() {
    let prob = memory_problem(31, Potential::quadratic(1.0), |x| 1.0 - x * x, 0.5, 16);
    let err = solve_memory(
        &prob,
        &PicardOptions {
            max_iters: 2,
            tol: 1e-14,
            ..PicardOptions::default()
        },
    )
    .unwrap_err();
    let Error::NotConverged { iterations, report, .. } = err else {
        panic!("expected NotConverged");
    };
    assert_eq!(iterations, 2);
    assert_eq!(report.residual_history.len(), 3);
    assert!(!report.converged);
}

#[test]
fn damped_iteration_reaches_the_same_fixed_point() {
    let prob = memory_problem(31, Potential::quadratic(2.0), |x| (PI * (x + 1.0) / 2.0).sin(), 0.5, 16);
    let plain = solve_memory(&prob, &PicardOptions::default()).unwrap();
    let damped = solve_memory(
        &prob,
        &PicardOptions {
            damping: 0.6,
            start: PicardStart::Given(prob.u0().scale(-0.5)),
            ..PicardOptions::default()
        },
    )
    .unwrap();
    assert!(l2_norm(&(&plain.u_t - &damped.u_t)) < 1e-8);
    assert!(solve_memory(
        &prob,
        &PicardOptions {
            damping: 0.0,
            ..PicardOptions::default()
        }
    )
    .is_err());
}
