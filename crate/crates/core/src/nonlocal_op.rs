//! Discrete Lévy operator on a uniform 1-D grid.
//!
//! For node `x_i` the operator is split at `|z| = r = near_cut·h`:
//!
//! * near field `|z| < r`: the odd Taylor term cancels by symmetry, the even
//!   one becomes `c·(2u_i - u_{i-1} - u_{i+1})/h²` with `c = ∫_0^r z²ρ(z)dz`;
//! * far field `|z| ≥ r`: `u` is replaced by its piecewise-linear interpolant
//!   (zero at `a`, `b` and beyond), giving weights
//!   `W_k = ∫_{|z|≥r} hat_k(z) ρ(z) dz`.
//!
//! Offsets landing outside `Ω` see `u = 0`, so their weights collapse onto
//! the diagonal as the complement tail `t_i`. Every row then reads
//! `(Ku)_i = Σ_{j≠i} w_ij (u_i - u_j) + t_i u_i` with `w_ij ≥ 0`, `t_i > 0`:
//! symmetric, an M-matrix, and positive definite.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::kernel::{check_levy_admissible, radial_moment_between, radial_moment_to_infinity, sphere_area, JumpKernel};
use crate::quad;

/// Knobs for the singular and far-field quadratures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Radius of the punched-out near-field cell, in multiples of `h`.
    pub near_cut: usize,
    /// Quadrature runs up to this radius; power-law tails are closed-form beyond it.
    pub far_radius: f64,
    /// Absolute quadrature tolerance.
    pub tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            near_cut: 1,
            far_radius: 1e3,
            tol: 1e-12,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if self.near_cut < 1 {
            return Err(Error::config("quadrature.near_cut", "must be at least 1"));
        }
        if !(self.far_radius > grid.diameter()) {
            return Err(Error::config(
                "quadrature.far_radius",
                format!("{} must exceed diam(Ω) = {}", self.far_radius, grid.diameter()),
            ));
        }
        if !(self.tol > 0.0) {
            return Err(Error::config("quadrature.tol", "must be positive"));
        }
        Ok(())
    }
}

/// Assembled operator: `K` with `(Ku)_i ≈ ℒu(x_i)` and `ξ_h(u, w) = h·wᵀKu`.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    grid: Grid,
    kernel: Arc<dyn JumpKernel>,
    matrix: DMatrix<f64>,
    tail: DVector<f64>,
    /// Jump weight between nodes `k` apart (`weights[0]` unused).
    weights: Vec<f64>,
    near_moment: f64,
}

impl OperatorMatrix {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn kernel(&self) -> &Arc<dyn JumpKernel> {
        &self.kernel
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Complement tail `t_i = ` weight of all offsets leaving `Ω`.
    pub fn tail(&self) -> &DVector<f64> {
        &self.tail
    }

    /// `w_k`, the jump weight between nodes `k` apart.
    pub fn jump_weight(&self, k: usize) -> f64 {
        self.weights[k]
    }

    /// `c = ∫_0^{near_cut·h} z²ρ(z)dz`.
    pub fn near_moment(&self) -> f64 {
        self.near_moment
    }

    /// `K` without the complement tail: annihilates constants.
    pub fn without_tail(&self) -> DMatrix<f64> {
        let mut m = self.matrix.clone();
        for i in 0..m.nrows() {
            m[(i, i)] -= self.tail[i];
        }
        m
    }

    /// Entries with `|K_ij| > threshold`, row-major.
    pub fn nonzeros(&self, threshold: f64) -> Vec<(usize, usize, f64)> {
        let n = self.matrix.nrows();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let v = self.matrix[(i, j)];
                if v.abs() > threshold {
                    out.push((i, j, v));
                }
            }
        }
        out
    }

    /// Discrete Gauss–Green edge form: `½ h Σ_{i≠j} w_ij (u_i-u_j)(v_i-v_j) + h Σ t_i u_i v_i`.
    pub fn edge_form(&self, u: &GridFunction, v: &GridFunction) -> Result<f64> {
        self.grid.check_same(u.grid())?;
        self.grid.check_same(v.grid())?;
        let (u, v) = (u.values(), v.values());
        let n = self.grid.len();
        let mut pairs = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                pairs += self.weights[j - i] * (u[i] - u[j]) * (v[i] - v[j]);
            }
        }
        let diag: f64 = (0..n).map(|i| self.tail[i] * u[i] * v[i]).sum();
        Ok(self.grid.spacing() * (pairs + diag))
    }
}

/// `∫_lo^hi ρ(z)·(z - pivot)/h dz`: the rising or falling side of a hat.
fn ramp_integral(kernel: &dyn JumpKernel, lo: f64, hi: f64, pivot: f64, h: f64, tol: f64) -> Result<f64> {
    if hi <= lo {
        return Ok(0.0);
    }
    let f = |z: f64| kernel.profile(z) * (z - pivot).abs() / h;
    quad::integrate_pieces(&f, lo, hi, &kernel.breakpoints(), tol)
}

pub fn assemble(kernel: Arc<dyn JumpKernel>, grid: &Grid, quad: &QuadratureSpec) -> Result<OperatorMatrix> {
    quad.validate(grid)?;
    if kernel.dim() != 1 {
        return Err(Error::domain("assembly is implemented for N = 1 only"));
    }
    let report = check_levy_admissible(kernel.as_ref(), quad);
    if !report.assemblable() {
        return Err(Error::Inadmissible(format!(
            "{} (symmetric: {}, finite mass: {})",
            kernel.describe(),
            report.symmetric,
            report.mass_finite
        )));
    }

    let n = grid.len();
    let h = grid.spacing();
    let m = quad.near_cut;
    let r = m as f64 * h;
    let k: &dyn JumpKernel = kernel.as_ref();
    // entries scale like 1/h; keep the absolute quadrature error below tol·h
    let tol = quad.tol * h;

    let near_moment = radial_moment_between(k, 0.0, r, 2.0, tol)?;
    let near_coeff = near_moment / (h * h);

    // cell[K] = ∫_{Kh}^{(K+1)h} ρ, rise[K] = ∫ over the same cell of ρ·(z-Kh)/h
    let kmax = n + 1;
    let mut cell = vec![0.0; kmax + 1];
    let mut rise = vec![0.0; kmax + 1];
    for kk in m..=kmax {
        let lo = kk as f64 * h;
        let hi = lo + h;
        cell[kk] = radial_moment_between(k, lo, hi, 0.0, tol)?;
        rise[kk] = ramp_integral(k, lo, hi, lo, h, tol)?;
    }
    // beyond[K] = ∫_{Kh}^∞ ρ
    let mut beyond = vec![0.0; kmax + 2];
    beyond[kmax + 1] = radial_moment_to_infinity(k, (kmax + 1) as f64 * h, 0.0, quad)?;
    for kk in (m..=kmax).rev() {
        beyond[kk] = beyond[kk + 1] + cell[kk];
    }

    // W_k = falling half on [kh, (k+1)h] + rising half on [(k-1)h, kh] ∩ [r, ∞)
    let mut weights = vec![0.0; n + 1];
    for kk in 1..=n {
        let mut w = 0.0;
        if kk >= m {
            w += cell[kk] - rise[kk];
            if kk > m {
                w += rise[kk - 1];
            }
        }
        if kk == 1 {
            w += near_coeff;
        }
        weights[kk] = w;
    }

    // Σ_{k≥K} of the above, for the first outside node K steps away
    let tail_from = |big_k: usize| -> f64 {
        let kp = big_k.max(m);
        let mut t = beyond[kp];
        if kp > m {
            t += rise[kp - 1];
        }
        if big_k == 1 {
            t += near_coeff;
        }
        t
    };

    let tail = DVector::from_iterator(n, (0..n).map(|i| tail_from(i + 1) + tail_from(n - i)));
    let mut matrix = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            if i != j {
                let w = weights[i.abs_diff(j)];
                matrix[(i, j)] = -w;
                row += w;
            }
        }
        matrix[(i, i)] = row + tail[i];
    }

    Ok(OperatorMatrix {
        grid: *grid,
        kernel,
        matrix,
        tail,
        weights,
        near_moment,
    })
}

pub fn apply(op: &OperatorMatrix, u: &GridFunction) -> Result<GridFunction> {
    op.grid.check_same(u.grid())?;
    Ok(GridFunction::from_vector(op.grid, &op.matrix * u.values()))
}

/// `ξ_h(u, w) = h·wᵀKu`.
pub fn bilinear(op: &OperatorMatrix, u: &GridFunction, w: &GridFunction) -> Result<f64> {
    op.grid.check_same(u.grid())?;
    op.grid.check_same(w.grid())?;
    Ok(op.grid.spacing() * w.values().dot(&(&op.matrix * u.values())))
}

/// `C = (2‖ν_R‖_{L¹})⁻¹` with `R = diam(Ω)`, so that `‖u‖²_{L²} ≤ C‖u‖²_𝕏`.
pub fn poincare_lower_bound(kernel: &dyn JumpKernel, grid: &Grid, quad: &QuadratureSpec) -> Result<f64> {
    let radius = grid.diameter();
    let n = kernel.dim();
    let outer = sphere_area(n) * radial_moment_to_infinity(kernel, radius, n as f64 - 1.0, quad)?;
    if !(outer > 0.0) {
        return Err(Error::BoundUnavailable(format!(
            "{} has no mass beyond diam(Ω) = {radius}",
            kernel.describe()
        )));
    }
    Ok(1.0 / (2.0 * outer))
}

/// `𝒩u(y) = Σ_i h (u(y) - u_i) ν(y - x_i)` with `u(y) = 0` for `y ∉ Ω`.
pub fn nonlocal_normal_derivative(
    kernel: &dyn JumpKernel,
    grid: &Grid,
    u: &GridFunction,
    ys: &[f64],
) -> Result<Vec<f64>> {
    grid.check_same(u.grid())?;
    let h = grid.spacing();
    ys.iter()
        .map(|&y| {
            if grid.contains(y) {
                return Err(Error::domain(format!("y = {y} lies inside Ω")));
            }
            let mut acc = 0.0;
            for (i, &ui) in u.as_slice().iter().enumerate() {
                acc -= h * ui * kernel.density(&[y - grid.node(i)])?;
            }
            Ok(acc)
        })
        .collect()
}

/// Residuals of the nonlocal Gauss–Green formula for `ψ` supported in `Ω`
/// (so the complement flux term vanishes).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussGreenReport {
    /// `|ξ_h^edge(φ,ψ) - (ψ, ℒ_hφ)_h|`: summation by parts, exact up to rounding.
    pub discrete: f64,
    /// `|ξ(φ,ψ) - (ψ, ℒ_hφ)_h|` with `ξ` from a double quadrature; shrinks with `h`.
    pub reference: f64,
    /// The quadrature value of `ξ(φ,ψ)`.
    pub form: f64,
}

pub fn gauss_green_residual(
    op: &OperatorMatrix,
    phi: &dyn Fn(f64) -> f64,
    psi: &dyn Fn(f64) -> f64,
    quad: &QuadratureSpec,
) -> Result<GaussGreenReport> {
    let grid = op.grid;
    let phi_h = grid.sample(phi);
    let psi_h = grid.sample(psi);
    let pairing = bilinear(op, &phi_h, &psi_h)?;
    let discrete = (op.edge_form(&phi_h, &psi_h)? - pairing).abs();
    let form = continuous_form(op.kernel.as_ref(), &grid, phi, psi, quad)?;
    Ok(GaussGreenReport {
        discrete,
        reference: (form - pairing).abs(),
        form,
    })
}

/// `ξ(φ,ψ) = ∫_0^∞ ρ(z) D(z) dz` with
/// `D(z) = ∫(φ(x)-φ(x+z))(ψ(x)-ψ(x+z))dx` for `φ, ψ` zero outside `Ω`.
pub fn continuous_form(
    kernel: &dyn JumpKernel,
    grid: &Grid,
    phi: &dyn Fn(f64) -> f64,
    psi: &dyn Fn(f64) -> f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let (a, b) = (grid.a(), grid.b());
    let mask = |f: &dyn Fn(f64) -> f64, x: f64| if x > a && x < b { f(x) } else { 0.0 };
    let tol = quad.tol.max(1e-14);
    let inner = |z: f64| -> f64 {
        let g = |x: f64| (mask(phi, x) - mask(phi, x + z)) * (mask(psi, x) - mask(psi, x + z));
        quad::integrate_pieces(&g, a - z, b, &[a, b - z], 0.1 * tol).unwrap_or(f64::NAN)
    };
    let diam = grid.diameter();
    let outer = |z: f64| if z <= 0.0 { 0.0 } else { kernel.profile(z) * inner(z) };
    let body = quad::integrate_pieces(&outer, 0.0, diam, &kernel.breakpoints(), tol)?;
    let plateau = quad::integrate_pieces(&|x: f64| 2.0 * phi(x) * psi(x), a, b, &[], 0.1 * tol)?;
    let tail = radial_moment_to_infinity(kernel, diam, 0.0, quad)?;
    let total = body + plateau * tail;
    if !total.is_finite() {
        return Err(Error::Quadrature("reference form did not converge".into()));
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::LevyKernel;

    fn op(n: usize) -> OperatorMatrix {
        let k = Arc::new(LevyKernel::fractional(1, 0.5).unwrap());
        assemble(k, &Grid::new(-1.0, 1.0, n).unwrap(), &QuadratureSpec::default()).unwrap()
    }

    #[test]
    fn quadrature_spec_validation() {
        let g = Grid::new(-1.0, 1.0, 10).unwrap();
        let mut q = QuadratureSpec::default();
        q.far_radius = 1.5;
        assert!(q.validate(&g).is_err());
        q.far_radius = 10.0;
        q.near_cut = 0;
        assert!(q.validate(&g).is_err());
    }

    #[test]
    fn structure_of_k() {
        let k = op(64);
        let m = k.matrix();
        let scale = m.amax();
        for i in 0..64 {
            assert!(m[(i, i)] > 0.0);
            let off: f64 = (0..64).filter(|&j| j != i).map(|j| m[(i, j)].abs()).sum();
            assert!(m[(i, i)] >= off);
            for j in 0..64 {
                if i != j {
                    assert!(m[(i, j)] <= 0.0);
                }
                assert!((m[(i, j)] - m[(j, i)]).abs() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn constants_are_annihilated_without_tail() {
        let k = op(48);
        let ones = DVector::from_element(48, 1.0);
        let r = k.without_tail() * ones;
        assert!(r.amax() <= 1e-10 * k.matrix().amax(), "{}", r.amax());
    }

    #[test]
    fn normal_derivative_sign_and_domain() {
        let k = op(32);
        let g = *k.grid();
        let u = g.sample(|x| 1.0 - x * x);
        let vals = nonlocal_normal_derivative(k.kernel().as_ref(), &g, &u, &[-3.0, -1.0, 1.0, 1.5]).unwrap();
        assert!(vals.iter().all(|&v| v < 0.0));
        let zero = nonlocal_normal_derivative(k.kernel().as_ref(), &g, &g.zeros(), &[2.0]).unwrap();
        assert_eq!(zero, vec![0.0]);
        let twice = nonlocal_normal_derivative(k.kernel().as_ref(), &g, &u.scale(2.0), &[1.5]).unwrap();
        assert!((twice[0] - 2.0 * vals[3]).abs() <= 1e-14 * vals[3].abs());
        assert!(nonlocal_normal_derivative(k.kernel().as_ref(), &g, &u, &[0.2]).is_err());
    }

    #[test]
    fn compact_kernel_has_no_poincare_bound() {
        let k = LevyKernel::builtin(
            "truncated_fractional",
            &std::collections::BTreeMap::from([("s".into(), 0.5), ("radius".into(), 0.5)]),
        )
        .unwrap();
        let g = Grid::new(-1.0, 1.0, 16).unwrap();
        assert!(matches!(
            poincare_lower_bound(&k, &g, &QuadratureSpec::default()),
            Err(Error::BoundUnavailable(_))
        ));
    }

    #[test]
    fn asymmetric_kernel_is_refused() {
        let k = LevyKernel::builtin("one_sided", &std::collections::BTreeMap::from([("s".into(), 0.5)])).unwrap();
        let g = Grid::new(-1.0, 1.0, 16).unwrap();
        assert!(matches!(
            assemble(Arc::new(k), &g, &QuadratureSpec::default()),
            Err(Error::Inadmissible(_))
        ));
    }

    #[test]
    fn grid_mismatch_on_apply() {
        let k = op(16);
        let other = Grid::new(-1.0, 1.0, 17).unwrap();
        assert!(apply(&k, &other.zeros()).is_err());
    }
}
