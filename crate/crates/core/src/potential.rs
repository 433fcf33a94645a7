//! Interaction potentials `φ` and the derived `χ(τ) = φ(τ)τ`, `χ′`,
//! `G(τ) = ∫_0^τ χ`, the unit level `δ` and the Lipschitz bound `κ`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quad;

/// Range on which every potential is validated at construction.
pub const DEFAULT_RANGE: (f64, f64) = (-10.0, 10.0);
pub const DEFAULT_SAMPLES: usize = 2001;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Profile {
    Zero,
    /// `c·τ²`
    Quadratic {
        c: f64,
    },
    /// `c·|τ|`
    Absolute {
        c: f64,
    },
    /// `c·τ²/(1+τ²)`
    Saturating {
        c: f64,
    },
    Custom {
        name: String,
        phi: ScalarFn,
        phi_prime: ScalarFn,
    },
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Zero => write!(f, "zero"),
            Profile::Quadratic { c } => write!(f, "quadratic(c={c})"),
            Profile::Absolute { c } => write!(f, "absolute(c={c})"),
            Profile::Saturating { c } => write!(f, "saturating(c={c})"),
            Profile::Custom { name, .. } => write!(f, "custom({name})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub phi: f64,
    pub chi: f64,
    pub chi_prime: f64,
    pub g: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationReport {
    pub range: (f64, f64),
    pub samples: usize,
    pub nonneg: bool,
    pub zero_at_zero: bool,
    pub chi_monotone: bool,
    pub chi_prime_bounded: bool,
    /// Largest `δ ≤ max(|lo|, |hi|)` with `φ² ≤ 1` on `[-δ, δ]`.
    pub delta_unit: f64,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.nonneg && self.zero_at_zero && self.chi_monotone && self.chi_prime_bounded
    }

    fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.nonneg {
            out.push("nonneg");
        }
        if !self.zero_at_zero {
            out.push("zero_at_zero");
        }
        if !self.chi_monotone {
            out.push("chi_monotone");
        }
        if !self.chi_prime_bounded {
            out.push("chi_prime_bounded");
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct Potential {
    profile: Profile,
    report: ValidationReport,
}

impl Potential {
    fn build(profile: Profile) -> Self {
        let mut p = Potential {
            profile,
            report: ValidationReport {
                range: DEFAULT_RANGE,
                samples: 0,
                nonneg: false,
                zero_at_zero: false,
                chi_monotone: false,
                chi_prime_bounded: false,
                delta_unit: 0.0,
            },
        };
        p.report = validate_assumption(&p, DEFAULT_RANGE.0, DEFAULT_RANGE.1, DEFAULT_SAMPLES)
            .expect("default range is ordered");
        p
    }

    pub fn zero() -> Self {
        Self::build(Profile::Zero)
    }

    pub fn quadratic(c: f64) -> Self {
        Self::build(Profile::Quadratic { c })
    }

    pub fn absolute(c: f64) -> Self {
        Self::build(Profile::Absolute { c })
    }

    pub fn saturating(c: f64) -> Self {
        Self::build(Profile::Saturating { c })
    }

    pub fn custom(
        name: impl Into<String>,
        phi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        phi_prime: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::build(Profile::Custom {
            name: name.into(),
            phi: Arc::new(phi),
            phi_prime: Arc::new(phi_prime),
        })
    }

    /// Built-in profile by config name (`zero`, `quadratic`, `absolute`, `saturating`).
    pub fn builtin(profile: &str, c: f64) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::config("potential.c", "must be finite"));
        }
        match profile {
            "zero" => Ok(Self::zero()),
            "quadratic" => Ok(Self::quadratic(c)),
            "absolute" => Ok(Self::absolute(c)),
            "saturating" => Ok(Self::saturating(c)),
            other => Err(Error::config(
                "potential.profile",
                format!("unknown profile `{other}` (expected zero, quadratic, absolute or saturating)"),
            )),
        }
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.profile, Profile::Zero)
    }

    /// Validation on [`DEFAULT_RANGE`], run at construction.
    pub fn report(&self) -> &ValidationReport {
        &self.report
    }

    pub fn is_validated(&self) -> bool {
        self.report.passed()
    }

    pub fn require_valid(&self) -> Result<()> {
        if self.is_validated() {
            Ok(())
        } else {
            Err(Error::Potential(format!(
                "{:?} fails {} on [{}, {}]",
                self.profile,
                self.report.failures().join(", "),
                self.report.range.0,
                self.report.range.1
            )))
        }
    }

    pub fn phi(&self, t: f64) -> f64 {
        match &self.profile {
            Profile::Zero => 0.0,
            Profile::Quadratic { c } => c * t * t,
            Profile::Absolute { c } => c * t.abs(),
            Profile::Saturating { c } => c * t * t / (1.0 + t * t),
            Profile::Custom { phi, .. } => phi(t),
        }
    }

    /// `φ′`; for `absolute` the one-sided value `c·sign(τ)` (0 at 0).
    pub fn phi_prime(&self, t: f64) -> f64 {
        match &self.profile {
            Profile::Zero => 0.0,
            Profile::Quadratic { c } => 2.0 * c * t,
            Profile::Absolute { c } => {
                if t == 0.0 {
                    0.0
                } else {
                    c * t.signum()
                }
            }
            Profile::Saturating { c } => {
                let d = 1.0 + t * t;
                2.0 * c * t / (d * d)
            }
            Profile::Custom { phi_prime, .. } => phi_prime(t),
        }
    }

    pub fn chi(&self, t: f64) -> f64 {
        self.phi(t) * t
    }

    pub fn chi_prime(&self, t: f64) -> f64 {
        match &self.profile {
            Profile::Zero => 0.0,
            Profile::Quadratic { c } => 3.0 * c * t * t,
            Profile::Absolute { c } => 2.0 * c * t.abs(),
            Profile::Saturating { c } => {
                let t2 = t * t;
                let d = 1.0 + t2;
                c * t2 * (t2 + 3.0) / (d * d)
            }
            Profile::Custom { phi, phi_prime, .. } => phi_prime(t) * t + phi(t),
        }
    }

    /// `G(τ) = ∫_0^τ χ`.
    pub fn big_g(&self, t: f64) -> f64 {
        match &self.profile {
            Profile::Zero => 0.0,
            Profile::Quadratic { c } => 0.25 * c * t.powi(4),
            Profile::Absolute { c } => c * t.abs().powi(3) / 3.0,
            Profile::Saturating { c } => 0.5 * c * (t * t - (t * t).ln_1p()),
            Profile::Custom { .. } => self.big_g_quadrature(t),
        }
    }

    /// `G` by adaptive quadrature, for any profile.
    pub fn big_g_quadrature(&self, t: f64) -> f64 {
        let chi = |x: f64| self.chi(x);
        let scale = 1.0 + self.chi(t).abs() * t.abs();
        quad::integrate(&chi, 0.0, t, 1e-13 * scale).unwrap_or(f64::NAN)
    }

    pub fn evaluate(&self, t: f64) -> Evaluation {
        Evaluation {
            phi: self.phi(t),
            chi: self.chi(t),
            chi_prime: self.chi_prime(t),
            g: self.big_g(t),
        }
    }

    /// Largest `δ` with `φ² ≤ 1` on `[-δ, δ]`; `∞` when `φ² ≤ 1` everywhere.
    pub fn delta_unit(&self) -> f64 {
        match &self.profile {
            Profile::Zero => f64::INFINITY,
            Profile::Quadratic { c } | Profile::Absolute { c } | Profile::Saturating { c } if *c == 0.0 => {
                f64::INFINITY
            }
            Profile::Quadratic { c } => 1.0 / c.abs().sqrt(),
            Profile::Absolute { c } => 1.0 / c.abs(),
            Profile::Saturating { c } => {
                // c·τ²/(1+τ²) = 1 at τ² = 1/(c-1)
                if c.abs() <= 1.0 {
                    f64::INFINITY
                } else {
                    1.0 / (c.abs() - 1.0).sqrt()
                }
            }
            Profile::Custom { .. } => self.report.delta_unit,
        }
    }
}

/// Dense-sample check of the structural assumptions on `[lo, hi]`.
pub fn validate_assumption(p: &Potential, lo: f64, hi: f64, samples: usize) -> Result<ValidationReport> {
    if !(lo < hi) || samples < 2 {
        return Err(Error::domain(format!(
            "validation needs lo < hi and at least 2 samples, got [{lo}, {hi}] with {samples}"
        )));
    }
    let taus: Vec<f64> = (0..samples)
        .map(|k| lo + (hi - lo) * k as f64 / (samples - 1) as f64)
        .collect();
    let phis: Vec<f64> = taus.iter().map(|&t| p.phi(t)).collect();
    let chis: Vec<f64> = taus.iter().map(|&t| p.chi(t)).collect();
    let scale = chis.iter().fold(1.0f64, |m, c| m.max(c.abs()));

    let nonneg = phis.iter().all(|&v| v >= 0.0);
    let zero_at_zero = p.phi(0.0).abs() <= 1e-14;
    let chi_monotone = chis.windows(2).all(|w| w[1] >= w[0] - 1e-12 * scale);
    let chi_prime_bounded = taus.iter().all(|&t| p.chi_prime(t).is_finite()) && chis.iter().all(|c| c.is_finite());

    Ok(ValidationReport {
        range: (lo, hi),
        samples,
        nonneg,
        zero_at_zero,
        chi_monotone,
        chi_prime_bounded,
        delta_unit: numeric_delta_unit(p, lo.abs().max(hi.abs()), samples),
    })
}

fn numeric_delta_unit(p: &Potential, reach: f64, samples: usize) -> f64 {
    let exceeds = |d: f64| p.phi(d).powi(2) > 1.0 || p.phi(-d).powi(2) > 1.0;
    if exceeds(0.0) {
        return 0.0;
    }
    let step = reach / samples as f64;
    for k in 1..=samples {
        let d = k as f64 * step;
        if exceeds(d) {
            let (mut ok, mut bad) = ((k - 1) as f64 * step, d);
            for _ in 0..80 {
                let mid = 0.5 * (ok + bad);
                if exceeds(mid) {
                    bad = mid;
                } else {
                    ok = mid;
                }
            }
            return ok;
        }
    }
    reach
}

/// `κ = sup |φ′|` over `[-ΛT, ΛT]`.
pub fn kappa(p: &Potential, lambda: f64, horizon: f64) -> f64 {
    let reach = (lambda * horizon).abs();
    match &p.profile {
        Profile::Zero => 0.0,
        Profile::Quadratic { c } => 2.0 * c.abs() * reach,
        // ess sup: the kink at 0 is a null set
        Profile::Absolute { c } => {
            if reach > 0.0 {
                c.abs()
            } else {
                0.0
            }
        }
        Profile::Saturating { c } => {
            // 2τ/(1+τ²)² peaks at τ = 1/√3
            let peak = 1.0 / 3f64.sqrt();
            if reach >= peak {
                3.0 * 3f64.sqrt() / 8.0 * c.abs()
            } else {
                let d = 1.0 + reach * reach;
                2.0 * c.abs() * reach / (d * d)
            }
        }
        Profile::Custom { .. } => {
            let n = 4001;
            (0..n)
                .map(|k| -reach + 2.0 * reach * k as f64 / (n - 1) as f64)
                .map(|t| p.phi_prime(t).abs())
                .fold(0.0, f64::max)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_at_two() {
        let e = Potential::quadratic(1.0).evaluate(2.0);
        assert_eq!((e.phi, e.chi, e.chi_prime), (4.0, 8.0, 12.0));
        assert!((e.g - 4.0).abs() < 1e-14);
    }

    #[test]
    fn zero_argument() {
        for p in [
            Potential::quadratic(1.0),
            Potential::absolute(2.0),
            Potential::saturating(3.0),
            Potential::zero(),
        ] {
            let e = p.evaluate(0.0);
            assert_eq!((e.phi, e.chi, e.chi_prime, e.g), (0.0, 0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn absolute_at_minus_one() {
        let e = Potential::absolute(1.0).evaluate(-1.0);
        assert_eq!((e.phi, e.chi, e.chi_prime), (1.0, -1.0, 2.0));
        assert!((e.g - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn validation_flags() {
        let q = Potential::quadratic(1.0);
        assert!(q.is_validated());
        assert!((q.report().delta_unit - 1.0).abs() < 1e-12);
        assert_eq!(q.delta_unit(), 1.0);

        let one = Potential::custom("one", |_| 1.0, |_| 0.0);
        assert!(!one.report().zero_at_zero);
        assert!(one.require_valid().is_err());

        let neg = Potential::quadratic(-1.0);
        assert!(!neg.report().nonneg);
        assert!(matches!(neg.require_valid(), Err(Error::Potential(_))));

        assert!(validate_assumption(&q, 1.0, -1.0, 10).is_err());
    }

    #[test]
    fn kappa_values() {
        let q = Potential::quadratic(1.0);
        assert_eq!(kappa(&q, 1.0, 0.5), 1.0);
        assert_eq!(kappa(&q, 0.0, 0.5), 0.0);
        let s = Potential::saturating(1.0);
        assert!((kappa(&s, 1.0, 2.0) - 3.0 * 3f64.sqrt() / 8.0).abs() < 1e-15);
        let custom = Potential::custom("sat", |t| t * t / (1.0 + t * t), |t| 2.0 * t / (1.0 + t * t).powi(2));
        assert!((kappa(&custom, 1.0, 2.0) - kappa(&s, 1.0, 2.0)).abs() < 1e-6);
        assert_eq!(kappa(&Potential::absolute(2.0), 1.0, 0.5), 2.0);
    }

    #[test]
    fn builtin_names() {
        assert!(Potential::builtin("quadratic", 1.0).is_ok());
        assert!(matches!(
            Potential::builtin("flory", 1.0),
            Err(Error::Config { key, .. }) if key == "potential.profile"
        ));
    }
}
