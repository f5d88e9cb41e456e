//! Run configuration files (TOML, unknown keys rejected).
//!
//! ```toml
//! seed = 7
//!
//! [model]
//! a = 1.0
//! kappa = 0.5
//! nu = 0.2
//! lambda = 4.0
//!
//! [frame]
//! dim = 1
//! degree = 12
//!
//! [initial]
//! kind = "shifted_gaussian"
//! shift = [0.1]
//!
//! [time]
//! dt = 1e-3
//! t_final = 1.0
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::calculus::DEFAULT_FLOOR;
use crate::error::{QnsError, Result};
use crate::params::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Simulate,
    Verify,
    Sweep,
    Rescaled,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Simulate => "simulate",
            Mode::Verify => "verify",
            Mode::Sweep => "sweep",
            Mode::Rescaled => "rescaled",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Option<Mode>,
    #[serde(default)]
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub model: ModelConfig,
    pub frame: FrameConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default)]
    pub velocity: VelocityConfig,
    pub time: Option<TimeConfig>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub audit: AuditConfig,
    pub verify: Option<VerifyConfig>,
    pub sweep: Option<SweepConfig>,
    pub rescaled: Option<RescaledConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub a: f64,
    pub kappa: f64,
    pub nu: f64,
    /// Trap strength; unused in rescaled mode.
    pub lambda: Option<f64>,
    #[serde(default)]
    pub r0: f64,
    #[serde(default)]
    pub r1: f64,
    #[serde(default)]
    pub r4: f64,
    #[serde(default)]
    pub delta1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameConfig {
    pub dim: usize,
    pub degree: usize,
    pub quad_order: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    /// `q = 1`.
    #[default]
    Ground,
    /// Reference Gaussian translated by `shift` (physical units).
    ShiftedGaussian,
    /// `q = 1 + amplitude * phi_mode`.
    Perturbed,
    /// Seeded random density.
    Random,
    /// Coefficient file at `path`.
    File,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    #[serde(default)]
    pub kind: InitialKind,
    pub shift: Option<Vec<f64>>,
    pub amplitude: Option<f64>,
    pub mode: Option<[usize; 2]>,
    pub path: Option<PathBuf>,
    /// Mollify and cut off the data at this index before running.
    pub mollify: Option<usize>,
}

/// Initial velocity `u(x) = offset + slope * x`, ignored when the file supplies one.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VelocityConfig {
    pub offset: Option<Vec<f64>>,
    #[serde(default)]
    pub slope: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub dt: f64,
    pub t_final: f64,
    #[serde(default = "one")]
    pub every: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub picard_tol: f64,
    pub max_sweeps: usize,
    pub floor: f64,
    /// Write a coefficient snapshot at every recorded time.
    pub snapshots: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            picard_tol: 1e-10,
            max_sweeps: 25,
            floor: DEFAULT_FLOOR,
            snapshots: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AuditConfig {
    /// Allowed excess in the energy and BD inequalities.
    pub tol: f64,
    /// Allowed deficit in the pointwise margins.
    pub margin_tol: f64,
    pub mass_tol: f64,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig {
            tol: 1e-6,
            margin_tol: 1e-8,
            mass_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub n_samples: usize,
    pub tilt: Option<Vec<f64>>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            n_samples: 200,
            tilt: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub n_list: Vec<usize>,
    #[serde(default = "eight")]
    pub burn_in: usize,
}

fn eight() -> usize {
    8
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RescaledConfig {
    /// Also integrate the scale ODE alone up to this time.
    pub tau_t_final: Option<f64>,
    pub tau_dt: Option<f64>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text.as_bytes()[..offset.min(text.len())]
        .iter()
        .filter(|b| **b == b'\n')
        .count()
        + 1
}

/// Line of `key` inside `[section]` (top level for an empty section), or of the
/// section header when the key is absent. Zero if neither is found.
pub fn locate(text: &str, section: &str, key: &str) -> usize {
    let mut current = String::new();
    let mut header = 0;
    for (i, raw) in text.lines().enumerate() {
        let l = raw.trim();
        if let Some(name) = l.strip_prefix('[').and_then(|s| s.split(']').next()) {
            current = name.trim().to_string();
            if current == section {
                header = i + 1;
            }
            continue;
        }
        if current == section {
            if let Some((k, _)) = l.split_once('=') {
                if k.trim().trim_matches('"') == key {
                    return i + 1;
                }
            }
        }
    }
    header
}

fn backticked(msg: &str) -> Option<&str> {
    let start = msg.find('`')? + 1;
    let len = msg[start..].find('`')?;
    Some(&msg[start..start + len])
}

fn from_toml(text: &str, e: toml::de::Error) -> QnsError {
    let message = e.message().trim().to_string();
    let line = e.span().map_or(0, |s| line_of(text, s.start));
    let field = backticked(&message)
        .map(str::to_string)
        .or_else(|| {
            let l = text.lines().nth(line.checked_sub(1)?)?;
            l.split_once('=').map(|(k, _)| k.trim().to_string())
        })
        .unwrap_or_default();
    QnsError::Config {
        line,
        field,
        message,
    }
}

struct Checker<'a> {
    text: &'a str,
}

impl Checker<'_> {
    fn fail(&self, section: &str, key: &str, message: impl Into<String>) -> QnsError {
        let field = if section.is_empty() {
            key.to_string()
        } else {
            format!("{section}.{key}")
        };
        QnsError::Config {
            line: locate(self.text, section, key),
            field,
            message: message.into(),
        }
    }

    fn positive(&self, section: &str, key: &str, v: f64) -> Result<()> {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(self.fail(
                section,
                key,
                format!("must be positive and finite, got {v}"),
            ))
        }
    }

    fn unit(&self, section: &str, key: &str, v: f64) -> Result<()> {
        if (0.0..=1.0).contains(&v) {
            Ok(())
        } else {
            Err(self.fail(section, key, format!("must lie in [0, 1], got {v}")))
        }
    }
}

impl RunConfig {
    fn check(&self, text: &str) -> Result<()> {
        let c = Checker { text };
        let m = &self.model;
        c.positive("model", "a", m.a)?;
        c.positive("model", "nu", m.nu)?;
        if !(m.kappa >= 0.0 && m.kappa.is_finite()) {
            return Err(c.fail(
                "model",
                "kappa",
                format!("must be nonnegative, got {}", m.kappa),
            ));
        }
        if let Some(l) = m.lambda {
            c.positive("model", "lambda", l)?;
        }
        for (k, v) in [
            ("r0", m.r0),
            ("r1", m.r1),
            ("r4", m.r4),
            ("delta1", m.delta1),
        ] {
            c.unit("model", k, v)?;
        }

        let f = &self.frame;
        if f.dim != 1 && f.dim != 2 {
            return Err(c.fail("frame", "dim", format!("must be 1 or 2, got {}", f.dim)));
        }
        if f.degree > 64 {
            return Err(c.fail("frame", "degree", format!("at most 64, got {}", f.degree)));
        }
        if let Some(qo) = f.quad_order {
            if qo < f.degree + 1 || qo > 256 {
                return Err(c.fail(
                    "frame",
                    "quad_order",
                    format!("must be in [degree + 1, 256], got {qo}"),
                ));
            }
        }

        let i = &self.initial;
        let need = |key: &str, present: bool| {
            if present {
                Ok(())
            } else {
                Err(c.fail("initial", key, format!("required for kind = {:?}", i.kind)))
            }
        };
        match i.kind {
            InitialKind::ShiftedGaussian => need("shift", i.shift.is_some())?,
            InitialKind::Perturbed => {
                need("amplitude", i.amplitude.is_some())?;
                need("mode", i.mode.is_some())?;
            }
            InitialKind::File => need("path", i.path.is_some())?,
            InitialKind::Ground | InitialKind::Random => {}
        }
        if let Some(s) = &i.shift {
            if s.len() != f.dim || s.iter().any(|v| !v.is_finite()) {
                return Err(c.fail(
                    "initial",
                    "shift",
                    format!("needs {} finite entries", f.dim),
                ));
            }
        }
        if let Some(al) = i.mode {
            if al == [0, 0] || (f.dim == 1 && al[1] != 0) || al[0] + al[1] > f.degree {
                return Err(c.fail(
                    "initial",
                    "mode",
                    format!("{al:?} is not a nonconstant basis index"),
                ));
            }
        }
        if let Some(a) = i.amplitude {
            if !a.is_finite() {
                return Err(c.fail("initial", "amplitude", "must be finite"));
            }
        }
        if i.mollify == Some(0) {
            return Err(c.fail("initial", "mollify", "must be at least 1"));
        }
        if let Some(o) = &self.velocity.offset {
            if o.len() != f.dim || o.iter().any(|v| !v.is_finite()) {
                return Err(c.fail(
                    "velocity",
                    "offset",
                    format!("needs {} finite entries", f.dim),
                ));
            }
        }
        if !self.velocity.slope.is_finite() {
            return Err(c.fail("velocity", "slope", "must be finite"));
        }

        if let Some(t) = &self.time {
            c.positive("time", "dt", t.dt)?;
            c.positive("time", "t_final", t.t_final)?;
            if t.dt > t.t_final {
                return Err(c.fail("time", "dt", "exceeds t_final"));
            }
            if t.t_final / t.dt > 1e8 {
                return Err(c.fail("time", "dt", "more than 1e8 steps"));
            }
            if t.every == 0 {
                return Err(c.fail("time", "every", "must be at least 1"));
            }
        }
        let s = &self.solver;
        c.positive("solver", "picard_tol", s.picard_tol)?;
        c.positive("solver", "floor", s.floor)?;
        if s.max_sweeps == 0 {
            return Err(c.fail("solver", "max_sweeps", "must be at least 1"));
        }
        let a = &self.audit;
        for (k, v) in [
            ("tol", a.tol),
            ("margin_tol", a.margin_tol),
            ("mass_tol", a.mass_tol),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(c.fail("audit", k, format!("must be nonnegative, got {v}")));
            }
        }
        if let Some(v) = &self.verify {
            if v.n_samples == 0 {
                return Err(c.fail("verify", "n_samples", "must be at least 1"));
            }
            if let Some(t) = &v.tilt {
                if t.len() != f.dim || t.iter().any(|x| !x.is_finite()) {
                    return Err(c.fail(
                        "verify",
                        "tilt",
                        format!("needs {} finite entries", f.dim),
                    ));
                }
            }
        }
        if let Some(sw) = &self.sweep {
            if sw.n_list.is_empty()
                || sw.n_list[0] == 0
                || sw.n_list.windows(2).any(|w| w[1] <= w[0])
            {
                return Err(c.fail(
                    "sweep",
                    "n_list",
                    "must be positive and strictly increasing",
                ));
            }
        }
        if let Some(r) = &self.rescaled {
            match (r.tau_t_final, r.tau_dt) {
                (Some(t), Some(h)) => {
                    c.positive("rescaled", "tau_t_final", t)?;
                    c.positive("rescaled", "tau_dt", h)?;
                }
                (None, None) => {}
                (Some(_), None) => {
                    return Err(c.fail("rescaled", "tau_dt", "required with tau_t_final"))
                }
                (None, Some(_)) => {
                    return Err(c.fail("rescaled", "tau_t_final", "required with tau_dt"))
                }
            }
        }
        Ok(())
    }

    /// Confirms the configuration can drive `mode`.
    pub fn check_mode(&self, mode: Mode, text: &str) -> Result<()> {
        let c = Checker { text };
        if let Some(m) = self.mode {
            if m != mode {
                return Err(c.fail(
                    "",
                    "mode",
                    format!("config is for `{}`, not `{}`", m.name(), mode.name()),
                ));
            }
        }
        let section = |name: &str| QnsError::Config {
            line: 0,
            field: name.to_string(),
            message: format!("section [{name}] is required by `{}`", mode.name()),
        };
        match mode {
            Mode::Simulate | Mode::Rescaled if self.time.is_none() => Err(section("time")),
            Mode::Sweep if self.time.is_none() => Err(section("time")),
            Mode::Sweep if self.sweep.is_none() => Err(section("sweep")),
            Mode::Simulate | Mode::Verify | Mode::Sweep if self.model.lambda.is_none() => Err(c
                .fail(
                    "model",
                    "lambda",
                    "missing field (required outside rescaled mode)",
                )),
            _ => Ok(()),
        }
    }

    pub fn model_params(&self) -> Result<ModelParams> {
        let m = &self.model;
        let lambda = m
            .lambda
            .ok_or_else(|| QnsError::InvalidParameter("lambda is not set".into()))?;
        let p = ModelParams::new(m.a, m.kappa, m.nu, lambda)
            .with_drags(m.r0, m.r1, m.r4)
            .with_delta1(m.delta1);
        p.validate()?;
        Ok(p)
    }
}

/// Parse and validate configuration text.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| from_toml(text, e))?;
    cfg.check(text)?;
    Ok(cfg)
}

/// Fuzzing entry point.
pub fn parse_config_bytes(bytes: &[u8]) -> Result<RunConfig> {
    let text = std::str::from_utf8(bytes).map_err(|e| QnsError::Config {
        line: 0,
        field: String::new(),
        message: format!("not UTF-8: {e}"),
    })?;
    parse_config(text)
}

/// Configuration with its source text, and paths resolved against the file's directory.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub text: String,
    pub base_dir: PathBuf,
}

impl LoadedConfig {
    pub fn initial_path(&self) -> Option<PathBuf> {
        self.config
            .initial
            .path
            .as_ref()
            .map(|p| self.base_dir.join(p))
    }
}

pub fn load(path: &Path) -> Result<LoadedConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| QnsError::Config {
        line: 0,
        field: String::new(),
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    let config = parse_config(&text)?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let loaded = LoadedConfig {
        config,
        text,
        base_dir,
    };
    if let Some(p) = loaded.initial_path() {
        if !p.is_file() {
            return Err(QnsError::Config {
                line: locate(&loaded.text, "initial", "path"),
                field: "initial.path".into(),
                message: format!("{} does not exist", p.display()),
            });
        }
    }
    Ok(loaded)
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = "seed = 3\n[model]\na = 1.0\nkappa = 0.5\nnu = 0.2\nlambda = 4.0\n[frame]\ndim = 1\ndegree = 8\n[time]\ndt = 0.01\nt_final = 1.0\n";

    fn config_err(text: &str) -> (usize, String) {
        match parse_config(text) {
            Err(QnsError::Config { line, field, .. }) => (line, field),
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn parses_minimal() {
        let c = parse_config(GOOD).unwrap();
        assert_eq!(c.seed, 3);
        assert_eq!(c.initial.kind, InitialKind::Ground);
        assert_eq!(c.time.unwrap().every, 1);
        assert_eq!(c.model_params().unwrap().lambda, 4.0);
    }

    #[test]
    fn unknown_key_reports_line() {
        let text = GOOD.replace("nu = 0.2\n", "nu = 0.2\nmu = 1\n");
        assert_eq!(config_err(&text), (6, "mu".into()));
    }

    #[test]
    fn bad_type_reports_line() {
        let text = GOOD.replace("degree = 8", "degree = \"eight\"");
        let (line, field) = config_err(&text);
        assert_eq!(line, 9);
        assert_eq!(field, "degree");
    }

    #[test]
    fn invalid_value_reports_line() {
        let text = GOOD.replace("dt = 0.01", "dt = -0.01");
        assert_eq!(config_err(&text), (11, "time.dt".into()));
    }

    #[test]
    fn missing_shift() {
        let text = format!("{GOOD}[initial]\nkind = \"shifted_gaussian\"\n");
        assert_eq!(config_err(&text), (13, "initial.shift".into()));
    }
}
