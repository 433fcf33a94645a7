//! Configuration, subcommand pipelines, studies and acceptance checks
//! behind the `levy-memory` binary.

pub mod checks;
pub mod config;
pub mod io;
pub mod studies;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use crate::elliptic::{solve_elliptic as elliptic_solve, verify_elliptic_estimates};
use crate::error::{Error, Result};
use crate::grid::{l2_norm, Grid, GridFunction};
use crate::memory::{solve_memory as memory_solve, uniqueness_indicator, MemoryProblem, PiIterationReport};
use crate::nonlocal_op::{assemble, poincare_lower_bound};
use crate::parabolic::{
    energy_check, max_principle_check, solve_parabolic as parabolic_solve, sup_envelope, telescoping_residual,
    Trajectory,
};

pub use config::ExperimentConfig;
use io::{csv_string, fmt_f64, manifest};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    SolveElliptic,
    SolveParabolic,
    SolveMemory,
    StudyFracPoisson,
    StudyKernelLimit,
    StudyThreshold,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::SolveElliptic => "solve-elliptic",
            Subcommand::SolveParabolic => "solve-parabolic",
            Subcommand::SolveMemory => "solve-memory",
            Subcommand::StudyFracPoisson => "study-fracpoisson",
            Subcommand::StudyKernelLimit => "study-kernel-limit",
            Subcommand::StudyThreshold => "study-threshold",
        }
    }
}

/// Files produced by a run, plus the failure that ended it early (the
/// files then hold whatever diagnostics were available).
#[derive(Debug)]
pub struct RunArtifacts {
    pub files: Vec<(String, String)>,
    pub failure: Option<Error>,
}

impl RunArtifacts {
    pub fn file(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, t)| t.as_str())
    }

    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        io::write_files(dir, &self.files)
    }
}

/// Runs `sub`; solver failures before any output exist are returned as `Err`.
pub fn run(sub: Subcommand, cfg: &ExperimentConfig) -> Result<RunArtifacts> {
    let start = Instant::now();
    let (mut files, failure) = match sub {
        Subcommand::SolveElliptic => (solve_elliptic_files(cfg)?, None),
        Subcommand::SolveParabolic => (solve_parabolic_files(cfg)?, None),
        Subcommand::SolveMemory => solve_memory_files(cfg)?,
        Subcommand::StudyFracPoisson => (study_fracpoisson_files(cfg)?, None),
        Subcommand::StudyKernelLimit => (study_kernel_limit_files(cfg)?, None),
        Subcommand::StudyThreshold => (study_threshold_files(cfg)?, None),
    };
    let text = manifest(sub.name(), &cfg.to_toml(), start.elapsed().as_secs_f64());
    // solve-memory keeps its manifest inside report.txt
    match files
        .iter_mut()
        .find(|(n, _)| n == "report.txt" && sub == Subcommand::SolveMemory)
    {
        Some((_, report)) => {
            report.push('\n');
            report.push_str(&text);
        }
        None => files.push(("manifest.txt".into(), text)),
    }
    Ok(RunArtifacts { files, failure })
}

fn kv(out: &mut String, key: &str, value: impl std::fmt::Display) {
    let _ = writeln!(out, "{key} = {value}");
}

fn solve_elliptic_files(cfg: &ExperimentConfig) -> Result<Vec<(String, String)>> {
    let grid = cfg.grid()?;
    let quad = cfg.quadrature();
    let kernel = cfg.kernel()?;
    let op = assemble(kernel.clone(), &grid, &quad)?;
    let p = cfg.potential()?;
    let f = cfg.forcing(&grid)?;
    let sol = elliptic_solve(&op, &p, &f, &cfg.elliptic_options())?;

    let rows = (0..grid.len()).map(|i| {
        let v = sol.v.as_slice()[i];
        vec![fmt_f64(grid.node(i)), fmt_f64(v), fmt_f64(p.chi(v)), fmt_f64(p.phi(v))]
    });
    let solution = csv_string(&["x", "v", "chi_v", "phi_v"], rows)?;

    let mut report = String::from("[estimates]\n");
    kv(&mut report, "residual", fmt_f64(sol.residual));
    kv(&mut report, "newton_iters", sol.newton_iters);
    kv(&mut report, "J", fmt_f64(sol.j_value));
    kv(&mut report, "e1_xi", fmt_f64(sol.estimates.e1));
    kv(&mut report, "e2_chi_l2", fmt_f64(sol.estimates.e2));
    kv(&mut report, "e3_phi_l2", fmt_f64(sol.estimates.e3));
    kv(&mut report, "f_l2", fmt_f64(l2_norm(&f)));
    match poincare_lower_bound(kernel.as_ref(), &grid, &quad) {
        Ok(c) => {
            let rep = verify_elliptic_estimates(&sol, &f, c, p.delta_unit())?;
            kv(&mut report, "poincare_constant", fmt_f64(c));
            for (name, check) in [("i", rep.energy), ("ii", rep.chi), ("iii", rep.phi)] {
                kv(&mut report, &format!("bound_{name}"), fmt_f64(check.bound));
                kv(&mut report, &format!("holds_{name}"), check.holds);
            }
        }
        Err(Error::BoundUnavailable(msg)) => kv(&mut report, "poincare_constant", format!("\"unavailable: {msg}\"")),
        Err(e) => return Err(e),
    }
    Ok(vec![
        ("solution.csv".into(), solution),
        ("estimates.txt".into(), report),
    ])
}

fn trajectory_csv(grid: &Grid, traj: &Trajectory) -> Result<String> {
    let rows = traj.states.iter().enumerate().flat_map(|(k, u)| {
        let t = fmt_f64(traj.tgrid.time(k));
        (0..grid.len()).map(move |i| vec![t.clone(), fmt_f64(grid.node(i)), fmt_f64(u.as_slice()[i])])
    });
    csv_string(&["t", "x", "value"], rows)
}

fn solve_parabolic_files(cfg: &ExperimentConfig) -> Result<Vec<(String, String)>> {
    let grid = cfg.grid()?;
    let op = assemble(cfg.kernel()?, &grid, &cfg.quadrature())?;
    let zeta = cfg.zeta(&grid)?;
    let u0 = cfg.initial_state(&grid)?;
    let traj = parabolic_solve(&op, &zeta, &u0, &cfg.tgrid()?, cfg.solver.theta)?;

    let ledger = csv_string(
        &["n", "half_l2_sq", "diss_xi", "diss_zeta"],
        traj.ledger.iter().enumerate().map(|(n, r)| {
            vec![
                n.to_string(),
                fmt_f64(r.half_l2_sq),
                fmt_f64(r.dissipation_xi),
                fmt_f64(r.dissipation_zeta),
            ]
        }),
    )?;
    let lambda = crate::grid::norms(&u0).linf;
    let mut report = String::from("[parabolic]\n");
    kv(&mut report, "theta", fmt_f64(traj.theta));
    kv(&mut report, "u0_linf", fmt_f64(lambda));
    kv(&mut report, "sup_envelope", fmt_f64(sup_envelope(&traj)));
    kv(&mut report, "max_principle_holds", max_principle_check(&traj, lambda));
    kv(
        &mut report,
        "telescoping_residual",
        fmt_f64(telescoping_residual(&op, &zeta, &traj)?),
    );
    if traj.theta == 1.0 {
        let e = energy_check(&traj)?;
        kv(
            &mut report,
            "energy_max_relative_excess",
            fmt_f64(e.max_relative_excess),
        );
        kv(&mut report, "energy_holds", e.holds);
    }
    Ok(vec![
        ("trajectory.csv".into(), trajectory_csv(&grid, &traj)?),
        ("ledger.csv".into(), ledger),
        ("report.txt".into(), report),
    ])
}

fn residuals_csv(report: &PiIterationReport) -> Result<String> {
    csv_string(
        &["k", "residual", "ratio"],
        report.residual_history.iter().enumerate().map(|(k, r)| {
            let ratio = if k == 0 {
                String::new()
            } else {
                fmt_f64(report.contraction_ratios[k - 1])
            };
            vec![k.to_string(), fmt_f64(*r), ratio]
        }),
    )
}

fn picard_summary(out: &mut String, report: &PiIterationReport) {
    kv(out, "converged", report.converged);
    kv(out, "iterations", report.iterations);
    kv(
        out,
        "final_residual",
        report.residual_history.last().map_or("nan".into(), |r| fmt_f64(*r)),
    );
    kv(
        out,
        "max_ratio",
        fmt_f64(report.contraction_ratios.iter().copied().fold(0.0, f64::max)),
    );
    kv(out, "ball_violations", report.ball_violations);
    kv(out, "final_damping", fmt_f64(report.final_damping));
}

/// Files written so far, plus the solver failure that stopped the run.
type PartialRun = (Vec<(String, String)>, Option<Error>);

fn solve_memory_files(cfg: &ExperimentConfig) -> Result<PartialRun> {
    let grid = cfg.grid()?;
    let op = Arc::new(assemble(cfg.kernel()?, &grid, &cfg.quadrature())?);
    let u0 = cfg.initial_state(&grid)?;
    let prob = MemoryProblem::with_operator(op, cfg.potential()?, u0.clone(), cfg.tgrid()?)?
        .with_theta(cfg.solver.theta)
        .with_elliptic_options(cfg.elliptic_options());
    let ind = uniqueness_indicator(&prob);
    let mut report = String::from("[memory]\n");
    kv(&mut report, "kappa", fmt_f64(ind.kappa));
    kv(&mut report, "Lambda", fmt_f64(ind.lambda));
    kv(&mut report, "T", fmt_f64(prob.tgrid().horizon()));
    kv(&mut report, "kappa_Lambda_T2", fmt_f64(ind.value));
    kv(&mut report, "unique_regime", ind.unique_regime);
    kv(&mut report, "ball_radius", fmt_f64(prob.ball_radius()));

    match memory_solve(&prob, &cfg.picard_options()) {
        Ok(sol) => {
            picard_summary(&mut report, &sol.report);
            kv(
                &mut report,
                "duhamel_residual",
                fmt_f64(sol.consistency.duhamel_residual),
            );
            kv(&mut report, "v_vs_integral", fmt_f64(sol.consistency.v_vs_integral));
            let fields = csv_string(
                &["x", "u0", "v", "u_T"],
                (0..grid.len()).map(|i| {
                    vec![
                        fmt_f64(grid.node(i)),
                        fmt_f64(u0.as_slice()[i]),
                        fmt_f64(sol.v.as_slice()[i]),
                        fmt_f64(sol.u_t.as_slice()[i]),
                    ]
                }),
            )?;
            Ok((
                vec![
                    ("trajectory.csv".into(), trajectory_csv(&grid, &sol.trajectory)?),
                    ("fields.csv".into(), fields),
                    ("residuals.csv".into(), residuals_csv(&sol.report)?),
                    ("report.txt".into(), report),
                ],
                None,
            ))
        }
        Err(Error::NotConverged {
            iterations,
            residual,
            report: pi,
        }) => {
            picard_summary(&mut report, &pi);
            let files = vec![
                ("residuals.csv".into(), residuals_csv(&pi)?),
                ("report.txt".into(), report),
            ];
            Ok((
                files,
                Some(Error::NotConverged {
                    iterations,
                    residual,
                    report: pi,
                }),
            ))
        }
        Err(e) => Err(e),
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn study_fracpoisson_files(cfg: &ExperimentConfig) -> Result<Vec<(String, String)>> {
    let rows = studies::study_fracpoisson(
        cfg.domain.a,
        cfg.domain.b,
        &cfg.study.s_list,
        &cfg.study.n_list,
        &cfg.quadrature(),
        &cfg.elliptic_options(),
    )?;
    let table = csv_string(
        &["s", "n", "err_l2", "err_linf_interior", "order"],
        rows.iter().map(|r| {
            vec![
                fmt_f64(r.s),
                r.n.to_string(),
                fmt_f64(r.err_l2),
                fmt_f64(r.err_linf_interior),
                opt(r.order),
            ]
        }),
    )?;
    Ok(vec![("fracpoisson.csv".into(), table)])
}

fn study_kernel_limit_files(cfg: &ExperimentConfig) -> Result<Vec<(String, String)>> {
    let Some((mode, amplitude)) = config::sine_mode(&cfg.initial) else {
        return Err(Error::config(
            "initial.profile",
            "the kernel-limit study needs a `sine_mode` initial state",
        ));
    };
    let rows = studies::study_kernel_limit(
        &cfg.base_kernel()?,
        &cfg.study.eps_list,
        &cfg.grid()?,
        &cfg.tgrid()?,
        &cfg.quadrature(),
        mode,
        amplitude,
    )?;
    let table = csv_string(
        &["eps", "err_linf", "err_l2"],
        rows.iter()
            .map(|r| vec![fmt_f64(r.eps), fmt_f64(r.err_linf), fmt_f64(r.err_l2)]),
    )?;
    Ok(vec![("kernel_limit.csv".into(), table)])
}

fn study_threshold_files(cfg: &ExperimentConfig) -> Result<Vec<(String, String)>> {
    let grid = cfg.grid()?;
    let op = Arc::new(assemble(cfg.kernel()?, &grid, &cfg.quadrature())?);
    let u0: GridFunction = cfg.initial_state(&grid)?;
    let rows = studies::study_threshold(
        &op,
        &cfg.potential()?,
        &u0,
        &cfg.study.t_list,
        cfg.time.steps,
        &cfg.picard_options(),
        &cfg.elliptic_options(),
        cfg.solver.theta,
    )?;
    let table = csv_string(
        &[
            "T",
            "kappa",
            "kLT2",
            "converged",
            "iters",
            "last_ratio",
            "duhamel_residual",
        ],
        rows.iter().map(|r| {
            vec![
                fmt_f64(r.horizon),
                fmt_f64(r.kappa),
                fmt_f64(r.klt2),
                r.converged.to_string(),
                r.iters.to_string(),
                opt(r.last_ratio),
                opt(r.duhamel_residual),
            ]
        }),
    )?;
    Ok(vec![("threshold.csv".into(), table)])
}
