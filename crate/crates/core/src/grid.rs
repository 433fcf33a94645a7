//! Uniform interior grids on `Ω = (a, b)` and grid functions with implicit
//! zero extension outside `Ω`.

use std::ops::{Add, Mul, Sub};

use nalgebra::DVector;

use crate::error::{Error, Result};

/// `n` interior nodes `x_i = a + i·h`, `i = 1..=n`, `h = (b - a)/(n + 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    a: f64,
    b: f64,
    n: usize,
}

impl Grid {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::domain(format!("domain ({a}, {b}) is not a bounded interval")));
        }
        if n < 2 {
            return Err(Error::domain(format!("need at least 2 interior nodes, got {n}")));
        }
        Ok(Self { a, b, n })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        (self.b - self.a) / (self.n + 1) as f64
    }

    /// Node `x_i` for zero-based `i` (so `node(0) = a + h`).
    pub fn node(&self, i: usize) -> f64 {
        self.a + (i + 1) as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// `diam(Ω) = b - a`, also `|Ω|`.
    pub fn diameter(&self) -> f64 {
        self.b - self.a
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.a && x < self.b
    }

    pub fn zeros(&self) -> GridFunction {
        GridFunction {
            grid: *self,
            values: DVector::zeros(self.n),
        }
    }

    pub fn constant(&self, c: f64) -> GridFunction {
        GridFunction {
            grid: *self,
            values: DVector::from_element(self.n, c),
        }
    }

    /// Samples `f` at the interior nodes.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction {
            grid: *self,
            values: DVector::from_iterator(self.n, (0..self.n).map(|i| f(self.node(i)))),
        }
    }

    pub(crate) fn check_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::Mismatch(format!(
                "grids differ: ({}, {}, n={}) vs ({}, {}, n={})",
                self.a, self.b, self.n, other.a, other.b, other.n
            )))
        }
    }
}

/// Values at the interior nodes; zero on `ℝ ∖ Ω` by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: DVector<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Mismatch(format!(
                "{} values for a grid with {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid,
            values: DVector::from_vec(values),
        })
    }

    pub(crate) fn from_vector(grid: Grid, values: DVector<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn as_slice(&self) -> &[f64] {
        self.values.as_slice()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction {
            grid: self.grid,
            values: self.values.map(f),
        }
    }

    /// Pointwise product.
    pub fn hadamard(&self, other: &GridFunction) -> Result<GridFunction> {
        self.grid.check_same(&other.grid)?;
        Ok(GridFunction {
            grid: self.grid,
            values: self.values.component_mul(&other.values),
        })
    }

    pub fn scale(&self, c: f64) -> GridFunction {
        GridFunction {
            grid: self.grid,
            values: &self.values * c,
        }
    }

    /// `self + c·other`.
    pub fn axpy(&self, c: f64, other: &GridFunction) -> Result<GridFunction> {
        self.grid.check_same(&other.grid)?;
        Ok(GridFunction {
            grid: self.grid,
            values: &self.values + &other.values * c,
        })
    }

    pub fn min(&self) -> f64 {
        self.values.min()
    }

    pub fn max(&self) -> f64 {
        self.values.max()
    }
}

impl Add for &GridFunction {
    type Output = GridFunction;

    /// Panics on grid mismatch; use [`GridFunction::axpy`] for a checked sum.
    fn add(self, rhs: &GridFunction) -> GridFunction {
        self.axpy(1.0, rhs).expect("grid mismatch in +")
    }
}

impl Sub for &GridFunction {
    type Output = GridFunction;

    fn sub(self, rhs: &GridFunction) -> GridFunction {
        self.axpy(-1.0, rhs).expect("grid mismatch in -")
    }
}

impl Mul<f64> for &GridFunction {
    type Output = GridFunction;

    fn mul(self, rhs: f64) -> GridFunction {
        self.scale(rhs)
    }
}

/// `h·Σ u_i w_i (ζ_i)`, the discrete `L²(Ω)` (or `L²(Ω, ζ)`) inner product.
pub fn inner_l2(u: &GridFunction, w: &GridFunction, weight: Option<&GridFunction>) -> Result<f64> {
    u.grid.check_same(&w.grid)?;
    let h = u.grid.spacing();
    let sum = match weight {
        None => u.values.dot(&w.values),
        Some(z) => {
            u.grid.check_same(&z.grid)?;
            u.values
                .iter()
                .zip(w.values.iter())
                .zip(z.values.iter())
                .map(|((a, b), c)| a * b * c)
                .sum()
        }
    };
    Ok(h * sum)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub l2: f64,
    pub linf: f64,
}

pub fn norms(u: &GridFunction) -> Norms {
    Norms {
        l2: (u.grid.spacing() * u.values.norm_squared()).sqrt(),
        linf: u.values.amax(),
    }
}

/// `‖u‖_{L²,h}`.
pub fn l2_norm(u: &GridFunction) -> f64 {
    norms(u).l2
}

/// Uniform time grid `t_k = k·Δt`, `k = 0..=steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::domain(format!("time horizon T = {horizon} must be positive")));
        }
        if steps == 0 {
            return Err(Error::domain("need at least one time step"));
        }
        Ok(Self { horizon, steps })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.steps {
            self.horizon
        } else {
            k as f64 * self.dt()
        }
    }
}
