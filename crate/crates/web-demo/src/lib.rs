//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each exported function wraps a plain Rust function returning
//! `Result<_, String>`, so the numerics are testable natively.

use std::f64::consts::PI;
use std::sync::Arc;

use levy_memory::elliptic::{solve_elliptic, EllipticOptions};
use levy_memory::grid::{l2_norm, Grid, TimeGrid};
use levy_memory::harness::studies::fractional_poisson_exact;
use levy_memory::kernel::{levy_mass, rescale, JumpKernel, LevyKernel};
use levy_memory::memory::{solve_memory, uniqueness_indicator, MemoryProblem, PicardOptions};
use levy_memory::nonlocal_op::{assemble, QuadratureSpec};
use levy_memory::potential::Potential;
use levy_memory::Error;
use wasm_bindgen::prelude::*;

const MAX_NODES: usize = 1024;

fn domain_grid(n: usize) -> Result<Grid, String> {
    if !(2..=MAX_NODES).contains(&n) {
        return Err(format!("n = {n} is outside 2..={MAX_NODES}"));
    }
    Grid::new(-1.0, 1.0, n).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoissonPlot {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub exact: Vec<f64>,
    pub err_l2: f64,
}

/// `(-Δ)^s v = 1` on `(-1, 1)` with zero exterior data.
pub fn poisson(s: f64, n: usize) -> Result<PoissonPlot, String> {
    let grid = domain_grid(n)?;
    let op = assemble(
        Arc::new(LevyKernel::fractional(1, s).map_err(|e| e.to_string())?),
        &grid,
        &QuadratureSpec::default(),
    )
    .map_err(|e| e.to_string())?;
    let v = solve_elliptic(
        &op,
        &Potential::zero(),
        &grid.constant(1.0),
        &EllipticOptions::default(),
    )
    .map_err(|e| e.to_string())?
    .v;
    let exact = grid.sample(fractional_poisson_exact(s, -1.0, 1.0));
    Ok(PoissonPlot {
        x: grid.nodes(),
        err_l2: l2_norm(&(&v - &exact)),
        v: v.as_slice().to_vec(),
        exact: exact.as_slice().to_vec(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfilePlot {
    pub r: Vec<f64>,
    /// `r²ν_ε(r)`, bounded near the origin for every `s`.
    pub r2_nu: Vec<f64>,
    pub mass: f64,
}

/// Rescaled fractional kernel `ν_ε` sampled on a log grid of radii.
pub fn kernel_profile(s: f64, eps: f64, samples: usize) -> Result<ProfilePlot, String> {
    let quad = QuadratureSpec::default();
    let base = LevyKernel::fractional(1, s).map_err(|e| e.to_string())?;
    let k = rescale(&base, eps, &quad).map_err(|e| e.to_string())?;
    let samples = samples.clamp(2, 4000);
    let (lo, hi) = (1e-3f64.ln(), 10f64.ln());
    let r: Vec<f64> = (0..samples)
        .map(|i| (lo + (hi - lo) * i as f64 / (samples - 1) as f64).exp())
        .collect();
    let r2_nu = r.iter().map(|&x| x * x * k.profile(x)).collect();
    Ok(ProfilePlot {
        r,
        r2_nu,
        mass: levy_mass(&k, &quad).map_err(|e| e.to_string())?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemoryRun {
    pub x: Vec<f64>,
    pub u0: Vec<f64>,
    pub u_t: Vec<f64>,
    pub v: Vec<f64>,
    /// Rows of `u` at every time level, flattened.
    pub trajectory: Vec<f64>,
    pub residuals: Vec<f64>,
    pub indicator: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Memory problem with `φ(t) = c·t²` and `u₀ = sin(π(x+1)/2)`.
pub fn memory(c: f64, horizon: f64, n: usize, steps: usize) -> Result<MemoryRun, String> {
    let grid = domain_grid(n)?;
    if !(1..=2000).contains(&steps) {
        return Err(format!("steps = {steps} is outside 1..=2000"));
    }
    if !(c >= 0.0 && c.is_finite()) {
        return Err(format!("c = {c} must be a non-negative number"));
    }
    let op = assemble(
        Arc::new(LevyKernel::fractional(1, 0.5).map_err(|e| e.to_string())?),
        &grid,
        &QuadratureSpec::default(),
    )
    .map_err(|e| e.to_string())?;
    let u0 = grid.sample(|x| (PI * (x + 1.0) / 2.0).sin());
    let tgrid = TimeGrid::new(horizon, steps).map_err(|e| e.to_string())?;
    let prob = MemoryProblem::with_operator(Arc::new(op), Potential::quadratic(c), u0.clone(), tgrid)
        .map_err(|e| e.to_string())?;
    let indicator = uniqueness_indicator(&prob).value;
    let opts = PicardOptions {
        max_iters: 60,
        ..PicardOptions::default()
    };
    let base = |residuals: Vec<f64>, converged, iterations| MemoryRun {
        x: grid.nodes(),
        u0: u0.as_slice().to_vec(),
        u_t: Vec::new(),
        v: Vec::new(),
        trajectory: Vec::new(),
        residuals,
        indicator,
        converged,
        iterations,
    };
    match solve_memory(&prob, &opts) {
        Ok(sol) => Ok(MemoryRun {
            u_t: sol.u_t.as_slice().to_vec(),
            v: sol.v.as_slice().to_vec(),
            trajectory: sol
                .trajectory
                .states
                .iter()
                .flat_map(|u| u.as_slice().iter().copied())
                .collect(),
            ..base(sol.report.residual_history, true, sol.report.iterations)
        }),
        Err(Error::NotConverged { report, .. }) => Ok(base(report.residual_history, false, report.iterations)),
        Err(e) => Err(e.to_string()),
    }
}

fn js<T>(r: Result<T, String>) -> Result<T, JsError> {
    r.map_err(|e| JsError::new(&e))
}

/// Layout `[x…, v…, exact…, err_l2]`.
#[wasm_bindgen(js_name = fractionalPoisson)]
pub fn fractional_poisson_js(s: f64, n: usize) -> Result<Vec<f64>, JsError> {
    let p = js(poisson(s, n))?;
    Ok([p.x, p.v, p.exact, vec![p.err_l2]].concat())
}

/// Layout `[r…, r²ν…, mass]`.
#[wasm_bindgen(js_name = kernelProfile)]
pub fn kernel_profile_js(s: f64, eps: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    let p = js(kernel_profile(s, eps, samples))?;
    Ok([p.r, p.r2_nu, vec![p.mass]].concat())
}

#[wasm_bindgen]
pub struct MemoryResult(MemoryRun);

#[wasm_bindgen]
impl MemoryResult {
    pub fn x(&self) -> Vec<f64> {
        self.0.x.clone()
    }
    pub fn u0(&self) -> Vec<f64> {
        self.0.u0.clone()
    }
    #[wasm_bindgen(js_name = uT)]
    pub fn u_t(&self) -> Vec<f64> {
        self.0.u_t.clone()
    }
    pub fn v(&self) -> Vec<f64> {
        self.0.v.clone()
    }
    pub fn trajectory(&self) -> Vec<f64> {
        self.0.trajectory.clone()
    }
    pub fn residuals(&self) -> Vec<f64> {
        self.0.residuals.clone()
    }
    pub fn indicator(&self) -> f64 {
        self.0.indicator
    }
    pub fn converged(&self) -> bool {
        self.0.converged
    }
    pub fn iterations(&self) -> usize {
        self.0.iterations
    }
}

#[wasm_bindgen(js_name = memorySolve)]
pub fn memory_solve_js(c: f64, horizon: f64, n: usize, steps: usize) -> Result<MemoryResult, JsError> {
    js(memory(c, horizon, n, steps)).map(MemoryResult)
}
