use std::sync::Arc;

use levy_memory::elliptic::{solve_elliptic, EllipticOptions};
use levy_memory::grid::{l2_norm, norms, Grid, GridFunction, TimeGrid};
use levy_memory::harness::config::ExperimentConfig;
use levy_memory::harness::io::fmt_f64;
use levy_memory::kernel::LevyKernel;
use levy_memory::nonlocal_op::{assemble, bilinear, OperatorMatrix, QuadratureSpec};
use levy_memory::parabolic::{energy_check, solve_parabolic};
use levy_memory::potential::Potential;
use proptest::prelude::*;

fn op(s: f64, n: usize) -> OperatorMatrix {
    let grid = Grid::new(-1.0, 1.0, n).unwrap();
    assemble(
        Arc::new(LevyKernel::fractional(1, s).unwrap()),
        &grid,
        &QuadratureSpec::default(),
    )
    .unwrap()
}

fn field(grid: &Grid, vals: &[f64]) -> GridFunction {
    GridFunction::new(*grid, vals[..grid.len()].to_vec()).unwrap()
}

fn potential(kind: u8, c: f64) -> Potential {
    match kind % 3 {
        0 => Potential::quadratic(c),
        1 => Potential::absolute(c),
        _ => Potential::saturating(c),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn edge_form_equals_bilinear_form(
        s in 0.1f64..0.9,
        n in 4usize..24,
        u in prop::collection::vec(-5.0f64..5.0, 24),
        w in prop::collection::vec(-5.0f64..5.0, 24),
    ) {
        let k = op(s, n);
        let (u, w) = (field(k.grid(), &u), field(k.grid(), &w));
        let a = bilinear(&k, &u, &w).unwrap();
        let b = k.edge_form(&u, &w).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
        prop_assert!((a - bilinear(&k, &w, &u).unwrap()).abs() <= 1e-10 * (1.0 + a.abs()));
        if l2_norm(&u) > 0.0 {
            prop_assert!(bilinear(&k, &u, &u).unwrap() > 0.0);
        }
    }

    #[test]
    fn parabolic_flow_is_contractive(
        s in 0.1f64..0.9,
        n in 4usize..24,
        u0 in prop::collection::vec(-1.0f64..1.0, 24),
        zeta in prop::collection::vec(0.0f64..10.0, 24),
        steps in 1usize..20,
    ) {
        let k = op(s, n);
        let traj = solve_parabolic(&k, &field(k.grid(), &zeta), &field(k.grid(), &u0), &TimeGrid::new(0.5, steps).unwrap(), 1.0).unwrap();
        let lambda = norms(traj.initial()).linf;
        for u in &traj.states {
            prop_assert!(norms(u).linf <= lambda * (1.0 + 1e-12));
        }
        prop_assert!(energy_check(&traj).unwrap().holds);
    }

    #[test]
    fn chi_of_solution_is_bounded_by_forcing(
        kind in 0u8..3,
        c in 0.1f64..4.0,
        f in prop::collection::vec(-10.0f64..10.0, 20),
    ) {
        let k = op(0.5, 20);
        let p = potential(kind, c);
        let f = field(k.grid(), &f);
        let sol = solve_elliptic(&k, &p, &f, &EllipticOptions::default()).unwrap();
        prop_assert!(sol.estimates.e2 <= l2_norm(&f) * (1.0 + 1e-8) + 1e-12);
    }

    #[test]
    fn chi_is_monotone(kind in 0u8..3, c in 0.0f64..10.0, a in -50.0f64..50.0, b in -50.0f64..50.0) {
        let p = potential(kind, c);
        prop_assert!((p.chi(a) - p.chi(b)) * (a - b) >= 0.0);
        prop_assert!(p.phi(a) >= 0.0);
        prop_assert!(p.big_g(a) >= 0.0);
    }

    #[test]
    fn number_formatting_round_trips(x in prop::num::f64::NORMAL | prop::num::f64::ZERO) {
        prop_assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn config_toml_round_trips(n in 2usize..2000, steps in 1usize..500, s in 0.01f64..0.99, c in 0.0f64..5.0) {
        let mut cfg = ExperimentConfig::default();
        cfg.domain.n = n;
        cfg.time.steps = steps;
        cfg.kernel.s = s;
        cfg.potential.c = c;
        let back = ExperimentConfig::from_toml_str(&cfg.to_toml()).unwrap();
        prop_assert_eq!(back, cfg);
    }
}
