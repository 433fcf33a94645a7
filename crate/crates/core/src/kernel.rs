//! Symmetric Lévy jump kernels.
//!
//! A kernel is a radial profile `ρ(r)` plus the metadata that quadrature
//! needs: where the profile has kinks or jumps, how singular it is at the
//! origin, and how its tail decays. The fractional family
//! `ν(h) = C_{N,s} |h|^{-N-2s}` is built in; other profiles are registered
//! by name. [`RescaledKernel`] implements the three-branch family `ν_ε`
//! that concentrates a normalized kernel near the origin.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::nonlocal_op::QuadratureSpec;
use crate::quad;

/// Far-field behaviour of a radial profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tail {
    /// `ρ(r) = ρ(r₀)(r₀/r)^exponent` exactly for `r ≥ beyond`.
    PowerLaw { exponent: f64, beyond: f64 },
    /// `ρ(r) = 0` for `r > radius`.
    Compact { radius: f64 },
    /// Decays at least like `exp(-rate·r)`.
    Exponential { rate: f64 },
}

/// Common interface of every jump kernel the assembler understands.
pub trait JumpKernel: Send + Sync + fmt::Debug {
    /// Spatial dimension `N`.
    fn dim(&self) -> usize;

    /// Radial profile `ρ(r)` for `r > 0`. For a non-radial kernel this is
    /// the symmetrized profile.
    fn profile(&self, r: f64) -> f64;

    /// Density at the offset `h`.
    fn density(&self, h: &[f64]) -> Result<f64> {
        if h.len() != self.dim() {
            return Err(Error::Mismatch(format!(
                "offset has {} components, kernel dimension is {}",
                h.len(),
                self.dim()
            )));
        }
        let r = h.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r == 0.0 {
            return Err(Error::domain("kernel is singular at the origin (h = 0)"));
        }
        Ok(self.profile(r))
    }

    /// Radii where the profile is not smooth.
    fn breakpoints(&self) -> Vec<f64>;

    /// Exponent `p` with `ρ(r) ~ r^{-p}` as `r → 0` (0 for bounded kernels).
    fn singular_exponent(&self) -> f64;

    fn tail(&self) -> Tail;

    fn is_radial(&self) -> bool {
        true
    }

    fn describe(&self) -> String;
}

/// `C_{N,s}`, the constant that makes `ν = C_{N,s}|h|^{-N-2s}` the kernel of `(-Δ)^s`.
pub fn fractional_constant(dim: usize, s: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::domain(format!("fractional order s = {s} is outside (0, 1)")));
    }
    if dim == 0 {
        return Err(Error::domain("dimension must be positive"));
    }
    let n = dim as f64;
    Ok(4f64.powf(s) * s * gamma(0.5 * n + s) / (PI.powf(0.5 * n) * gamma(1.0 - s)))
}

/// Surface measure of the unit sphere in `ℝ^N` (2 for `N = 1`).
pub fn sphere_area(dim: usize) -> f64 {
    let n = dim as f64;
    2.0 * PI.powf(0.5 * n) / gamma(0.5 * n)
}

type ProfileFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// How a general kernel's density is specified.
#[derive(Clone)]
pub enum Density {
    /// Function of `|h|`.
    Radial(ProfileFn),
    /// Function of the signed offset; only meaningful for `N = 1`.
    Signed(ProfileFn),
}

impl fmt::Debug for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Density::Radial(_) => f.write_str("Radial(..)"),
            Density::Signed(_) => f.write_str("Signed(..)"),
        }
    }
}

/// A kernel given by a user profile plus its metadata.
#[derive(Debug, Clone)]
pub struct GeneralKernel {
    pub name: String,
    pub dim: usize,
    pub density: Density,
    pub singular_exponent: f64,
    pub tail: Tail,
    pub breakpoints: Vec<f64>,
}

#[derive(Debug, Clone)]
pub enum KernelFamily {
    Fractional { s: f64, dim: usize },
    General(GeneralKernel),
}

/// A symmetric Lévy density with a positive normalization multiplier.
#[derive(Debug, Clone)]
pub struct LevyKernel {
    family: KernelFamily,
    normalization: f64,
}

impl LevyKernel {
    pub fn fractional(dim: usize, s: f64) -> Result<Self> {
        fractional_constant(dim, s)?;
        Ok(Self {
            family: KernelFamily::Fractional { s, dim },
            normalization: 1.0,
        })
    }

    pub fn general(kernel: GeneralKernel) -> Result<Self> {
        if kernel.dim == 0 {
            return Err(Error::domain("dimension must be positive"));
        }
        if matches!(kernel.density, Density::Signed(_)) && kernel.dim != 1 {
            return Err(Error::domain("signed densities are only defined for N = 1"));
        }
        Ok(Self {
            family: KernelFamily::General(kernel),
            normalization: 1.0,
        })
    }

    /// Named one-dimensional profiles usable from config files.
    ///
    /// * `tempered` (`s`, `rate`): `e^{-rate·r} r^{-1-2s}`
    /// * `indicator` (`radius`): `1` on `r ≤ radius`
    /// * `truncated_fractional` (`s`, `radius`): `r^{-1-2s}` on `r ≤ radius`
    /// * `one_sided` (`s`): `h^{-1-2s}` for `h > 0`, zero otherwise (not symmetric)
    pub fn builtin(profile: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let get = |key: &str| {
            params
                .get(key)
                .copied()
                .ok_or_else(|| Error::config(format!("kernel.params.{key}"), "missing parameter"))
        };
        let order = |key: &str| -> Result<f64> {
            let s = get(key)?;
            if !(s > 0.0 && s < 1.0) {
                return Err(Error::config(
                    format!("kernel.params.{key}"),
                    format!("s = {s} is outside (0, 1)"),
                ));
            }
            Ok(s)
        };
        let positive = |key: &str| -> Result<f64> {
            let v = get(key)?;
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(format!("kernel.params.{key}"), "must be positive"));
            }
            Ok(v)
        };
        let kernel = match profile {
            "tempered" => {
                let s = order("s")?;
                let rate = positive("rate")?;
                GeneralKernel {
                    name: format!("tempered(s={s}, rate={rate})"),
                    dim: 1,
                    density: Density::Radial(Arc::new(move |r: f64| (-rate * r).exp() * r.powf(-1.0 - 2.0 * s))),
                    singular_exponent: 1.0 + 2.0 * s,
                    tail: Tail::Exponential { rate },
                    breakpoints: vec![],
                }
            }
            "indicator" => {
                let radius = positive("radius")?;
                GeneralKernel {
                    name: format!("indicator(radius={radius})"),
                    dim: 1,
                    density: Density::Radial(Arc::new(move |r: f64| if r <= radius { 1.0 } else { 0.0 })),
                    singular_exponent: 0.0,
                    tail: Tail::Compact { radius },
                    breakpoints: vec![radius],
                }
            }
            "truncated_fractional" => {
                let s = order("s")?;
                let radius = positive("radius")?;
                GeneralKernel {
                    name: format!("truncated_fractional(s={s}, radius={radius})"),
                    dim: 1,
                    density: Density::Radial(Arc::new(
                        move |r: f64| {
                            if r <= radius {
                                r.powf(-1.0 - 2.0 * s)
                            } else {
                                0.0
                            }
                        },
                    )),
                    singular_exponent: 1.0 + 2.0 * s,
                    tail: Tail::Compact { radius },
                    breakpoints: vec![radius],
                }
            }
            "one_sided" => {
                let s = order("s")?;
                GeneralKernel {
                    name: format!("one_sided(s={s})"),
                    dim: 1,
                    density: Density::Signed(Arc::new(
                        move |h: f64| {
                            if h > 0.0 {
                                h.powf(-1.0 - 2.0 * s)
                            } else {
                                0.0
                            }
                        },
                    )),
                    singular_exponent: 1.0 + 2.0 * s,
                    tail: Tail::PowerLaw {
                        exponent: 1.0 + 2.0 * s,
                        beyond: 0.0,
                    },
                    breakpoints: vec![],
                }
            }
            other => return Err(Error::config("kernel.profile", format!("unknown profile `{other}`"))),
        };
        Self::general(kernel)
    }

    pub fn family(&self) -> &KernelFamily {
        &self.family
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// Same family, density multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::domain("normalization must be a positive real"));
        }
        Ok(Self {
            family: self.family.clone(),
            normalization: self.normalization * factor,
        })
    }

    /// Rescales so that `∫(1∧|h|²)ν = target`.
    pub fn normalized_to(&self, target: f64, quad: &QuadratureSpec) -> Result<Self> {
        let mass = levy_mass(self, quad)?;
        self.scaled(target / mass)
    }

    fn raw_signed(&self, h: f64) -> f64 {
        match &self.family {
            KernelFamily::Fractional { s, dim } => {
                fractional_constant(*dim, *s).expect("validated at construction")
                    * h.abs().powf(-(*dim as f64) - 2.0 * s)
            }
            KernelFamily::General(g) => match &g.density {
                Density::Radial(f) => f(h.abs()),
                Density::Signed(f) => f(h),
            },
        }
    }
}

impl JumpKernel for LevyKernel {
    fn dim(&self) -> usize {
        match &self.family {
            KernelFamily::Fractional { dim, .. } => *dim,
            KernelFamily::General(g) => g.dim,
        }
    }

    fn profile(&self, r: f64) -> f64 {
        let raw = match &self.family {
            KernelFamily::General(GeneralKernel {
                density: Density::Signed(f),
                ..
            }) => 0.5 * (f(r) + f(-r)),
            _ => self.raw_signed(r),
        };
        self.normalization * raw
    }

    fn density(&self, h: &[f64]) -> Result<f64> {
        if h.len() != self.dim() {
            return Err(Error::Mismatch(format!(
                "offset has {} components, kernel dimension is {}",
                h.len(),
                self.dim()
            )));
        }
        let r = h.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r == 0.0 {
            return Err(Error::domain("kernel is singular at the origin (h = 0)"));
        }
        match &self.family {
            KernelFamily::General(GeneralKernel {
                density: Density::Signed(f),
                ..
            }) => Ok(self.normalization * f(h[0])),
            _ => Ok(self.profile(r)),
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match &self.family {
            KernelFamily::Fractional { .. } => vec![],
            KernelFamily::General(g) => g.breakpoints.clone(),
        }
    }

    fn singular_exponent(&self) -> f64 {
        match &self.family {
            KernelFamily::Fractional { s, dim } => *dim as f64 + 2.0 * s,
            KernelFamily::General(g) => g.singular_exponent,
        }
    }

    fn tail(&self) -> Tail {
        match &self.family {
            KernelFamily::Fractional { s, dim } => Tail::PowerLaw {
                exponent: *dim as f64 + 2.0 * s,
                beyond: 0.0,
            },
            KernelFamily::General(g) => g.tail,
        }
    }

    fn is_radial(&self) -> bool {
        !matches!(
            &self.family,
            KernelFamily::General(GeneralKernel {
                density: Density::Signed(_),
                ..
            })
        )
    }

    fn describe(&self) -> String {
        let base = match &self.family {
            KernelFamily::Fractional { s, dim } => format!("fractional(N={dim}, s={s})"),
            KernelFamily::General(g) => g.name.clone(),
        };
        if self.normalization == 1.0 {
            base
        } else {
            format!("{}·{base}", self.normalization)
        }
    }
}

/// `ν_ε` built from a radial base kernel normalized to Lévy mass `1/N`:
///
/// ```text
///          ⎧ ε^{-N-2} ν(h/ε)         |h| ≤ ε
/// ν_ε(h) = ⎨ ε^{-N} |h|^{-2} ν(h/ε)  ε < |h| ≤ 1
///          ⎩ ε^{-N} ν(h/ε)           |h| > 1
/// ```
///
/// The density jumps at `|h| = ε` in general; it is evaluated as written.
#[derive(Debug, Clone)]
pub struct RescaledKernel {
    base: LevyKernel,
    epsilon: f64,
}

impl RescaledKernel {
    pub fn base(&self) -> &LevyKernel {
        &self.base
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Which of the three branches `|h| = r` falls in (1, 2 or 3).
    pub fn branch(&self, r: f64) -> u8 {
        if r <= self.epsilon {
            1
        } else if r <= 1.0 {
            2
        } else {
            3
        }
    }
}

impl JumpKernel for RescaledKernel {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn profile(&self, r: f64) -> f64 {
        let eps = self.epsilon;
        let n = self.dim() as f64;
        let inner = self.base.profile(r / eps);
        match self.branch(r) {
            1 => eps.powf(-n - 2.0) * inner,
            2 => eps.powf(-n) * inner / (r * r),
            _ => eps.powf(-n) * inner,
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.base.breakpoints().into_iter().map(|x| x * self.epsilon).collect();
        b.push(self.epsilon);
        b.push(1.0);
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }

    fn singular_exponent(&self) -> f64 {
        self.base.singular_exponent()
    }

    fn tail(&self) -> Tail {
        let eps = self.epsilon;
        match self.base.tail() {
            Tail::PowerLaw { exponent, beyond } => Tail::PowerLaw {
                exponent,
                beyond: (beyond * eps).max(1.0),
            },
            Tail::Compact { radius } => Tail::Compact { radius: radius * eps },
            Tail::Exponential { rate } => Tail::Exponential { rate: rate / eps },
        }
    }

    fn describe(&self) -> String {
        format!("rescaled(eps={}, base={})", self.epsilon, self.base.describe())
    }
}

/// Builds `ν_ε`, normalizing the base to mass `1/N` first.
pub fn rescale(kernel: &LevyKernel, epsilon: f64, quad: &QuadratureSpec) -> Result<RescaledKernel> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::domain(format!("epsilon = {epsilon} is outside (0, 1]")));
    }
    if !kernel.is_radial() {
        return Err(Error::domain("rescaling requires a radial base kernel"));
    }
    let base = kernel.normalized_to(1.0 / kernel.dim() as f64, quad)?;
    Ok(RescaledKernel { base, epsilon })
}

/// Evaluates `ν(h)`; `h = 0` is a domain error.
pub fn eval_kernel(kernel: &dyn JumpKernel, h: &[f64]) -> Result<f64> {
    kernel.density(h)
}

/// `∫_lo^hi r^power ρ(r) dr` for finite `hi`, splitting at the kernel breakpoints.
pub(crate) fn radial_moment_between(kernel: &dyn JumpKernel, lo: f64, hi: f64, power: f64, tol: f64) -> Result<f64> {
    let f = |r: f64| {
        if r <= 0.0 {
            0.0
        } else {
            r.powf(power) * kernel.profile(r)
        }
    };
    quad::integrate_pieces(&f, lo, hi, &kernel.breakpoints(), tol)
}

/// `∫_lo^∞ r^power ρ(r) dr`: quadrature up to `quad.far_radius`, then the
/// analytic tail for power laws (numeric for the other tail kinds).
pub(crate) fn radial_moment_to_infinity(
    kernel: &dyn JumpKernel,
    lo: f64,
    power: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    match kernel.tail() {
        Tail::Compact { radius } => {
            if lo >= radius {
                Ok(0.0)
            } else {
                radial_moment_between(kernel, lo, radius, power, quad.tol)
            }
        }
        Tail::PowerLaw { exponent, beyond } => {
            if exponent <= power + 1.0 {
                return Err(Error::Inadmissible(format!(
                    "tail r^-{exponent} is not integrable against r^{power}"
                )));
            }
            let cut = quad.far_radius.max(beyond).max(lo);
            let body = radial_moment_between(kernel, lo, cut, power, quad.tol)?;
            let tail = kernel.profile(cut) * cut.powf(power + 1.0) / (exponent - power - 1.0);
            Ok(body + tail)
        }
        Tail::Exponential { rate } => {
            // e^{-rate·r} below 1e-300·ρ beyond ~700/rate
            let cut = quad.far_radius.max(lo + 700.0 / rate);
            radial_moment_between(kernel, lo, cut, power, quad.tol)
        }
    }
}

/// Increments of `∫_δ^1 g` over decades of `δ` stop shrinking iff `g` is
/// not integrable at the origin (for power-like `g`).
pub(crate) fn diverges_at_origin(g: &dyn Fn(f64) -> f64, tol: f64) -> Result<bool> {
    let mut increments = Vec::new();
    let mut hi: f64 = 1e-2;
    for _ in 0..4 {
        let lo = hi * 1e-2;
        increments.push(quad::integrate(g, lo, hi, tol)?);
        hi = lo;
    }
    let last = increments[increments.len() - 1];
    let prev = increments[increments.len() - 2];
    if last <= 0.0 {
        return Ok(false);
    }
    Ok(last >= prev * (1.0 - 1e-9))
}

/// `∫(1∧|h|²)ν(h)dh`, split at `|h| = 1`.
pub fn levy_mass(kernel: &dyn JumpKernel, quad: &QuadratureSpec) -> Result<f64> {
    let n = kernel.dim() as f64;
    let near_integrand = |r: f64| r.powf(n + 1.0) * kernel.profile(r);
    if diverges_at_origin(&near_integrand, quad.tol)? {
        return Err(Error::Inadmissible(format!(
            "∫|h|²ν diverges at the origin for {}",
            kernel.describe()
        )));
    }
    let near = radial_moment_between(kernel, 0.0, 1.0, n + 1.0, quad.tol)?;
    let far = radial_moment_to_infinity(kernel, 1.0, n - 1.0, quad)?;
    Ok(sphere_area(kernel.dim()) * (near + far))
}

/// Outcome of [`check_levy_admissible`]; failures are carried as flags.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport {
    pub symmetric: bool,
    pub mass_finite: bool,
    pub non_integrable_at_origin: bool,
    pub full_support: bool,
    pub mass: Option<f64>,
}

impl AdmissibilityReport {
    /// Everything assembly relies on: symmetry and finite Lévy mass.
    pub fn assemblable(&self) -> bool {
        self.symmetric && self.mass_finite
    }

    pub fn all(&self) -> bool {
        self.symmetric && self.mass_finite && self.non_integrable_at_origin && self.full_support
    }
}

pub fn check_levy_admissible(kernel: &dyn JumpKernel, quad: &QuadratureSpec) -> AdmissibilityReport {
    let dim = kernel.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let symmetric = (0..1000).all(|_| {
        let h: Vec<f64> = (0..dim)
            .map(|_| {
                let mag = 10f64.powf(rng.random_range(-4.0..3.0));
                if rng.random_bool(0.5) {
                    mag
                } else {
                    -mag
                }
            })
            .collect();
        let neg: Vec<f64> = h.iter().map(|x| -x).collect();
        match (kernel.density(&h), kernel.density(&neg)) {
            (Ok(a), Ok(b)) => a == b && a >= 0.0,
            _ => false,
        }
    });

    let mass = levy_mass(kernel, quad).ok().filter(|m| m.is_finite());

    let n = kernel.dim() as f64;
    let bare = |r: f64| r.powf(n - 1.0) * kernel.profile(r);
    let non_integrable_at_origin = diverges_at_origin(&bare, quad.tol).unwrap_or(true);

    // e^{-rate·r} underflows long before far_radius
    let reach = match kernel.tail() {
        Tail::Exponential { rate } => quad.far_radius.min(300.0 / rate),
        _ => quad.far_radius,
    };
    let full_support = (0..=200).all(|k| {
        let r = 10f64.powf(-6.0 + k as f64 * (6.0 + reach.log10()) / 200.0);
        let mut h = vec![0.0; dim];
        h[0] = r;
        let plus = kernel.density(&h).unwrap_or(0.0);
        h[0] = -r;
        let minus = kernel.density(&h).unwrap_or(0.0);
        plus > 0.0 && minus > 0.0
    });

    AdmissibilityReport {
        symmetric,
        mass_finite: mass.is_some(),
        non_integrable_at_origin,
        full_support,
        mass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn constant_rejects_order_outside_unit_interval() {
        assert!(fractional_constant(1, 0.0).is_err());
        assert!(fractional_constant(1, 1.0).is_err());
        assert!(fractional_constant(1, 1.5).is_err());
        assert!(LevyKernel::fractional(1, -0.2).is_err());
    }

    #[test]
    fn origin_is_a_domain_error() {
        let k = LevyKernel::fractional(1, 0.5).unwrap();
        assert!(matches!(eval_kernel(&k, &[0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn wrong_offset_dimension_is_rejected() {
        let k = LevyKernel::fractional(2, 0.5).unwrap();
        assert!(matches!(eval_kernel(&k, &[1.0]), Err(Error::Mismatch(_))));
    }

    #[test]
    fn scaling_doubles_mass() {
        let k = LevyKernel::fractional(1, 0.5).unwrap();
        let m1 = levy_mass(&k, &quad()).unwrap();
        let m2 = levy_mass(&k.scaled(2.0).unwrap(), &quad()).unwrap();
        assert!((m2 - 2.0 * m1).abs() < 1e-10);
    }

    #[test]
    fn rescale_rejects_bad_epsilon() {
        let k = LevyKernel::fractional(1, 0.5).unwrap();
        assert!(rescale(&k, 0.0, &quad()).is_err());
        assert!(rescale(&k, 1.5, &quad()).is_err());
        let one_sided = LevyKernel::builtin("one_sided", &BTreeMap::from([("s".into(), 0.5)])).unwrap();
        assert!(rescale(&one_sided, 0.5, &quad()).is_err());
    }

    #[test]
    fn rescale_at_one_is_the_normalized_base() {
        let k = LevyKernel::fractional(1, 0.5).unwrap();
        let r = rescale(&k, 1.0, &quad()).unwrap();
        for &x in &[0.01, 0.3, 1.0, 2.5, 40.0] {
            let a = r.profile(x);
            let b = r.base().profile(x);
            assert!((a - b).abs() <= 1e-15 * b, "{x}: {a} vs {b}");
        }
    }

    #[test]
    fn rescaled_branches() {
        let k = LevyKernel::fractional(1, 0.5).unwrap();
        let eps = 0.5;
        let r = rescale(&k, eps, &quad()).unwrap();
        assert_eq!(r.branch(0.5 * eps), 1);
        assert_eq!(r.branch(eps), 1);
        assert_eq!(r.branch(2.0 * eps), 2);
        assert_eq!(r.branch(1.5), 3);
        let base = r.base();
        let h = 0.25;
        assert!((r.profile(h) - eps.powi(-3) * base.profile(h / eps)).abs() < 1e-12);
        let h2 = 2.0 * eps;
        assert!((r.profile(h2) - base.profile(h2 / eps) / (eps * h2 * h2)).abs() < 1e-12);
    }

    #[test]
    fn divergent_near_origin_is_inadmissible() {
        let g = GeneralKernel {
            name: "r^-4".into(),
            dim: 1,
            density: Density::Radial(Arc::new(|r: f64| r.powi(-4))),
            singular_exponent: 4.0,
            tail: Tail::PowerLaw {
                exponent: 4.0,
                beyond: 0.0,
            },
            breakpoints: vec![],
        };
        let k = LevyKernel::general(g).unwrap();
        assert!(matches!(levy_mass(&k, &quad()), Err(Error::Inadmissible(_))));
        let report = check_levy_admissible(&k, &quad());
        assert!(!report.mass_finite);
    }

    #[test]
    fn builtin_errors_name_the_field() {
        let err =
            LevyKernel::builtin("tempered", &BTreeMap::from([("s".into(), 1.5), ("rate".into(), 1.0)])).unwrap_err();
        assert!(err.to_string().contains("kernel.params.s"), "{err}");
        assert!(LevyKernel::builtin("nope", &BTreeMap::new()).is_err());
    }

    #[test]
    fn tempered_and_compact_masses_are_finite() {
        let t = LevyKernel::builtin("tempered", &BTreeMap::from([("s".into(), 0.4), ("rate".into(), 2.0)])).unwrap();
        let report = check_levy_admissible(&t, &quad());
        assert!(report.all(), "{report:?}");
        let c = LevyKernel::builtin(
            "truncated_fractional",
            &BTreeMap::from([("s".into(), 0.5), ("radius".into(), 0.5)]),
        )
        .unwrap();
        let report = check_levy_admissible(&c, &quad());
        assert!(report.mass_finite && report.symmetric && !report.full_support);
        // ∫(1∧h²)|h|^{-2} on |h|≤0.5 = 2·∫_0^0.5 1 = 1
        assert!((report.mass.unwrap() - 1.0).abs() < 1e-10);
    }
}
