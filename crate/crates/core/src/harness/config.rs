//! TOML experiment configuration.
//!
//! Every section is optional; missing keys fall back to the defaults below.
//! Unknown keys are rejected so typos surface as config errors.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::elliptic::EllipticOptions;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction, TimeGrid};
use crate::kernel::{rescale, JumpKernel, LevyKernel};
use crate::memory::{PicardOptions, PicardStart};
use crate::nonlocal_op::QuadratureSpec;
use crate::potential::Potential;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub domain: DomainConfig,
    pub time: TimeConfig,
    pub kernel: KernelConfig,
    pub quadrature: QuadratureConfig,
    pub potential: PotentialConfig,
    pub initial: ProfileConfig,
    pub forcing: ProfileConfig,
    /// Weight `ζ` for `solve-parabolic`.
    pub zeta: ProfileConfig,
    pub solver: SolverConfig,
    pub study: StudyConfig,
    pub output: OutputConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            domain: DomainConfig::default(),
            time: TimeConfig::default(),
            kernel: KernelConfig::default(),
            quadrature: QuadratureConfig::default(),
            potential: PotentialConfig::default(),
            initial: ProfileConfig::named("sine_mode"),
            forcing: ProfileConfig::named("constant"),
            zeta: ProfileConfig::named("zero"),
            solver: SolverConfig::default(),
            study: StudyConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DomainConfig {
    pub a: f64,
    pub b: f64,
    pub n: usize,
}

impl Default for DomainConfig {
    fn default() -> Self {
        Self {
            a: -1.0,
            b: 1.0,
            n: 128,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeConfig {
    #[serde(rename = "T")]
    pub horizon: f64,
    pub steps: usize,
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self {
            horizon: 0.5,
            steps: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelConfig {
    /// `fractional` or `general`.
    pub family: String,
    /// Order for the fractional family.
    pub s: f64,
    /// Named profile for the general family.
    pub profile: Option<String>,
    pub params: BTreeMap<String, f64>,
    /// Replaces the kernel by `ν_ε` built from it.
    pub rescale_epsilon: Option<f64>,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            family: "fractional".into(),
            s: 0.5,
            profile: None,
            params: BTreeMap::new(),
            rescale_epsilon: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    pub near_cut: usize,
    pub far_radius: f64,
    pub tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        let q = QuadratureSpec::default();
        Self {
            near_cut: q.near_cut,
            far_radius: q.far_radius,
            tol: q.tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PotentialConfig {
    pub profile: String,
    pub c: f64,
}

impl Default for PotentialConfig {
    fn default() -> Self {
        Self {
            profile: "quadratic".into(),
            c: 1.0,
        }
    }
}

/// Named grid-function profile with parameters.
///
/// * `zero`
/// * `constant` (`value`, default 1)
/// * `sine_mode` (`mode` default 1, `amplitude` default 1): `A·sin(kπ(x-a)/(b-a))`
/// * `bump` (`amplitude` default 1, `power` default 4): `A·(1-ξ²)^p`, `ξ` the position mapped to `(-1, 1)`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileConfig {
    pub profile: String,
    pub params: BTreeMap<String, f64>,
}

impl ProfileConfig {
    pub fn named(profile: &str) -> Self {
        Self {
            profile: profile.into(),
            params: BTreeMap::new(),
        }
    }
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self::named("zero")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub elliptic_tol: f64,
    pub newton_max_iters: usize,
    pub theta: f64,
    pub picard_tol: f64,
    pub picard_max_iters: usize,
    pub damping: f64,
    /// Picard starting iterate: `zero` or `initial`.
    pub start: String,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let e = EllipticOptions::default();
        let p = PicardOptions::default();
        Self {
            elliptic_tol: e.tol,
            newton_max_iters: e.max_iters,
            theta: 1.0,
            picard_tol: p.tol,
            picard_max_iters: p.max_iters,
            damping: p.damping,
            start: "zero".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyConfig {
    pub s_list: Vec<f64>,
    pub n_list: Vec<usize>,
    pub eps_list: Vec<f64>,
    #[serde(rename = "T_list")]
    pub t_list: Vec<f64>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            s_list: vec![0.25, 0.5, 0.75],
            n_list: vec![64, 128, 256, 512],
            eps_list: vec![0.4, 0.2, 0.1],
            t_list: vec![0.125, 0.25, 0.5, 1.0, 1.5],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Used when `--out` is not given.
    pub dir: Option<String>,
}

fn check(cond: bool, key: &str, message: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::config(key, message))
    }
}

fn check_order(s: f64, key: &str) -> Result<()> {
    check(s > 0.0 && s < 1.0, key, format!("s = {s} is outside (0, 1)"))
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
            let location = e
                .span()
                .map(|span| {
                    let line = text[..span.start.min(text.len())].matches('\n').count() + 1;
                    format!("line {line}")
                })
                .unwrap_or_else(|| "document".into());
            Error::config(location, e.message().trim().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(path.display().to_string(), format!("cannot read: {e}")))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let d = &self.domain;
        check(
            d.a.is_finite() && d.b.is_finite() && d.a < d.b,
            "domain",
            "need finite a < b",
        )?;
        check(d.n >= 2, "domain.n", "need at least 2 interior nodes")?;
        check(
            self.time.horizon > 0.0 && self.time.horizon.is_finite(),
            "time.T",
            "must be positive",
        )?;
        check(self.time.steps >= 1, "time.steps", "must be at least 1")?;
        match self.kernel.family.as_str() {
            "fractional" => check_order(self.kernel.s, "kernel.s")?,
            "general" => check(
                self.kernel.profile.is_some(),
                "kernel.profile",
                "required for the general family",
            )?,
            other => return Err(Error::config("kernel.family", format!("unknown family `{other}`"))),
        }
        if let Some(eps) = self.kernel.rescale_epsilon {
            check(eps > 0.0 && eps <= 1.0, "kernel.rescale_epsilon", "must lie in (0, 1]")?;
        }
        let q = &self.quadrature;
        check(q.near_cut >= 1, "quadrature.near_cut", "must be at least 1")?;
        check(q.tol > 0.0, "quadrature.tol", "must be positive")?;
        check(q.far_radius > d.b - d.a, "quadrature.far_radius", "must exceed diam(Ω)")?;
        check(self.potential.c.is_finite(), "potential.c", "must be finite")?;
        let s = &self.solver;
        check(s.elliptic_tol > 0.0, "solver.elliptic_tol", "must be positive")?;
        check(s.picard_tol > 0.0, "solver.picard_tol", "must be positive")?;
        check((0.5..=1.0).contains(&s.theta), "solver.theta", "must lie in [0.5, 1]")?;
        check(
            s.damping > 0.0 && s.damping <= 1.0,
            "solver.damping",
            "must lie in (0, 1]",
        )?;
        check(
            matches!(s.start.as_str(), "zero" | "initial"),
            "solver.start",
            "expected `zero` or `initial`",
        )?;
        for (i, &v) in self.study.s_list.iter().enumerate() {
            check_order(v, &format!("study.s_list[{i}]"))?;
        }
        for (i, &n) in self.study.n_list.iter().enumerate() {
            check(n >= 2, &format!("study.n_list[{i}]"), "need at least 2 nodes")?;
        }
        for (i, &e) in self.study.eps_list.iter().enumerate() {
            check(
                e > 0.0 && e <= 1.0,
                &format!("study.eps_list[{i}]"),
                "must lie in (0, 1]",
            )?;
        }
        for (i, &t) in self.study.t_list.iter().enumerate() {
            check(
                t > 0.0 && t.is_finite(),
                &format!("study.T_list[{i}]"),
                "must be positive",
            )?;
        }
        // resolve names now so bad profiles fail as config errors
        self.base_kernel()?;
        self.potential()?;
        let grid = self.grid()?;
        self.initial_state(&grid)?;
        self.forcing(&grid)?;
        self.zeta(&grid)?;
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.domain.a, self.domain.b, self.domain.n)
    }

    pub fn grid_with(&self, n: usize) -> Result<Grid> {
        Grid::new(self.domain.a, self.domain.b, n)
    }

    pub fn tgrid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.time.horizon, self.time.steps)
    }

    pub fn quadrature(&self) -> QuadratureSpec {
        QuadratureSpec {
            near_cut: self.quadrature.near_cut,
            far_radius: self.quadrature.far_radius,
            tol: self.quadrature.tol,
        }
    }

    /// The kernel before any rescaling.
    pub fn base_kernel(&self) -> Result<LevyKernel> {
        match self.kernel.family.as_str() {
            "fractional" => {
                LevyKernel::fractional(1, self.kernel.s).map_err(|e| Error::config("kernel.s", e.to_string()))
            }
            _ => {
                let profile = self.kernel.profile.as_deref().unwrap_or_default();
                LevyKernel::builtin(profile, &self.kernel.params)
            }
        }
    }

    pub fn kernel(&self) -> Result<Arc<dyn JumpKernel>> {
        let base = self.base_kernel()?;
        Ok(match self.kernel.rescale_epsilon {
            Some(eps) => Arc::new(rescale(&base, eps, &self.quadrature())?),
            None => Arc::new(base),
        })
    }

    pub fn potential(&self) -> Result<Potential> {
        Potential::builtin(&self.potential.profile, self.potential.c)
    }

    pub fn elliptic_options(&self) -> EllipticOptions {
        EllipticOptions {
            tol: self.solver.elliptic_tol,
            max_iters: self.solver.newton_max_iters,
            ..EllipticOptions::default()
        }
    }

    pub fn picard_options(&self) -> PicardOptions {
        PicardOptions {
            tol: self.solver.picard_tol,
            max_iters: self.solver.picard_max_iters,
            damping: self.solver.damping,
            start: if self.solver.start == "initial" {
                PicardStart::InitialState
            } else {
                PicardStart::Zero
            },
            ..PicardOptions::default()
        }
    }

    pub fn initial_state(&self, grid: &Grid) -> Result<GridFunction> {
        sample_profile(&self.initial, grid, "initial")
    }

    pub fn forcing(&self, grid: &Grid) -> Result<GridFunction> {
        sample_profile(&self.forcing, grid, "forcing")
    }

    pub fn zeta(&self, grid: &Grid) -> Result<GridFunction> {
        let z = sample_profile(&self.zeta, grid, "zeta")?;
        check(z.min() >= 0.0, "zeta", "ζ must be nonnegative")?;
        Ok(z)
    }
}

/// Sine mode number of an initial profile, if it is one.
pub fn sine_mode(p: &ProfileConfig) -> Option<(f64, f64)> {
    (p.profile == "sine_mode").then(|| {
        (
            p.params.get("mode").copied().unwrap_or(1.0),
            p.params.get("amplitude").copied().unwrap_or(1.0),
        )
    })
}

pub fn sample_profile(p: &ProfileConfig, grid: &Grid, section: &str) -> Result<GridFunction> {
    let (a, b) = (grid.a(), grid.b());
    let param = |key: &str, default: f64| -> Result<f64> {
        let v = p.params.get(key).copied().unwrap_or(default);
        check(v.is_finite(), &format!("{section}.params.{key}"), "must be finite")?;
        Ok(v)
    };
    let allowed: &[&str] = match p.profile.as_str() {
        "zero" => &[],
        "constant" => &["value"],
        "sine_mode" => &["mode", "amplitude"],
        "bump" => &["amplitude", "power"],
        other => {
            return Err(Error::config(
                format!("{section}.profile"),
                format!("unknown profile `{other}` (expected zero, constant, sine_mode or bump)"),
            ))
        }
    };
    if let Some(k) = p.params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::config(
            format!("{section}.params.{k}"),
            "not a parameter of this profile",
        ));
    }
    Ok(match p.profile.as_str() {
        "zero" => grid.zeros(),
        "constant" => grid.constant(param("value", 1.0)?),
        "sine_mode" => {
            let k = param("mode", 1.0)?;
            check(
                k >= 1.0 && k.fract() == 0.0,
                &format!("{section}.params.mode"),
                "must be a positive integer",
            )?;
            let amp = param("amplitude", 1.0)?;
            grid.sample(|x| amp * (k * std::f64::consts::PI * (x - a) / (b - a)).sin())
        }
        _ => {
            let amp = param("amplitude", 1.0)?;
            let power = param("power", 4.0)?;
            check(power >= 1.0, &format!("{section}.params.power"), "must be at least 1")?;
            grid.sample(|x| {
                let xi = (2.0 * x - a - b) / (b - a);
                amp * (1.0 - xi * xi).max(0.0).powf(power)
            })
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        let back = ExperimentConfig::from_toml_str(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn bad_order_names_the_field() {
        let err = ExperimentConfig::from_toml_str("[kernel]\ns = 1.5\n").unwrap_err();
        assert!(matches!(&err, Error::Config { key, .. } if key == "kernel.s"), "{err}");
    }

    #[test]
    fn parse_errors_carry_a_line() {
        let err = ExperimentConfig::from_toml_str("[domain]\nn = 10\nbogus = 1\n").unwrap_err();
        assert!(
            matches!(&err, Error::Config { key, .. } if key.starts_with("line")),
            "{err}"
        );
    }

    #[test]
    fn unknown_profiles_are_config_errors() {
        let err = ExperimentConfig::from_toml_str("[initial]\nprofile = \"gaussian\"\n").unwrap_err();
        assert!(matches!(&err, Error::Config { key, .. } if key == "initial.profile"));
        let err = ExperimentConfig::from_toml_str("[potential]\nprofile = \"flory\"\n").unwrap_err();
        assert!(matches!(&err, Error::Config { key, .. } if key == "potential.profile"));
    }
}
