//! Flat run configuration, loaded from TOML or JSON.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Classify,
    Iterate,
    Wolff,
    Shoot,
    VerifySingular,
    Pohozaev,
    Scaling,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Classify => "classify",
            Command::Iterate => "iterate",
            Command::Wolff => "wolff",
            Command::Shoot => "shoot",
            Command::VerifySingular => "verify-singular",
            Command::Pohozaev => "pohozaev",
            Command::Scaling => "scaling",
            Command::Sweep => "sweep",
        }
    }

    /// Option keys the command reads, beyond `command`, the parameters and
    /// the output keys.
    fn options(self) -> &'static [&'static str] {
        match self {
            Command::Classify => &["classifyTol"],
            Command::Iterate => &["classifyTol", "maxIter", "b0"],
            Command::Wolff => &["tol", "profile", "profileFile", "alpha", "rMax", "odeTol", "radii"],
            Command::Shoot => &["alpha", "rMax", "odeTol"],
            Command::VerifySingular => &["radii"],
            Command::Pohozaev => &["tol", "profile", "profileFile", "alpha", "rMax", "odeTol", "etas"],
            Command::Scaling => &[
                "tol", "profile", "profileFile", "alpha", "rMax", "odeTol", "etas", "lambdas", "theta",
            ],
            Command::Sweep => &["classifyTol", "maxIter", "qValues", "qRange"],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Where the profile for `wolff`, `pohozaev` and `scaling` comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ProfileSource {
    /// The exact singular solution `c r^{-t}`.
    Singular,
    /// The closed-form extremal at the critical exponent.
    Bubble,
    /// A shooting run from `alpha`.
    Shoot,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl QRange {
    /// `start, start + step, ...` up to `stop` inclusive.
    pub fn values(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| self.start + i as f64 * self.step).collect()
    }
}

/// One run. Every key except `command`, `n` and `p` is optional; which
/// options a command accepts is checked by [`RunConfig::validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub n: u32,
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classify_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<ProfileSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ode_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub etas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_range: Option<QRange>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

fn key_error(key: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("`{key}`: {msg}"))
}

fn positive(key: &str, v: Option<f64>) -> Result<()> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => Err(key_error(key, format!("must be positive and finite, got {x}"))),
        _ => Ok(()),
    }
}

fn positive_list(key: &str, v: &Option<Vec<f64>>) -> Result<()> {
    if let Some(list) = v {
        if list.is_empty() {
            return Err(key_error(key, "must not be empty"));
        }
        for &x in list {
            positive(key, Some(x))?;
        }
    }
    Ok(())
}

fn tolerance(key: &str, v: Option<f64>) -> Result<()> {
    match v {
        Some(x) if !(x > 0.0 && x < 1.0) => Err(key_error(key, format!("must lie in (0, 1), got {x}"))),
        _ => Ok(()),
    }
}

impl RunConfig {
    /// A config with only the required keys set.
    pub fn new(command: Command, n: u32, p: f64) -> Self {
        RunConfig {
            command,
            n,
            p,
            q: None,
            a: None,
            beta: None,
            tol: None,
            classify_tol: None,
            max_iter: None,
            b0: None,
            radii: None,
            profile: None,
            profile_file: None,
            alpha: None,
            r_max: None,
            ode_tol: None,
            etas: None,
            lambdas: None,
            theta: None,
            q_values: None,
            q_range: None,
            out: None,
            format: None,
        }
    }

    pub fn a(&self) -> f64 {
        self.a.unwrap_or(0.0)
    }

    pub fn beta(&self) -> f64 {
        self.beta.unwrap_or(1.0)
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or_default()
    }

    fn present_options(&self) -> Vec<&'static str> {
        let flags = [
            ("tol", self.tol.is_some()),
            ("classifyTol", self.classify_tol.is_some()),
            ("maxIter", self.max_iter.is_some()),
            ("b0", self.b0.is_some()),
            ("radii", self.radii.is_some()),
            ("profile", self.profile.is_some()),
            ("profileFile", self.profile_file.is_some()),
            ("alpha", self.alpha.is_some()),
            ("rMax", self.r_max.is_some()),
            ("odeTol", self.ode_tol.is_some()),
            ("etas", self.etas.is_some()),
            ("lambdas", self.lambdas.is_some()),
            ("theta", self.theta.is_some()),
            ("qValues", self.q_values.is_some()),
            ("qRange", self.q_range.is_some()),
        ];
        flags.iter().filter(|(_, set)| *set).map(|(k, _)| *k).collect()
    }

    /// Checks that every present option belongs to the command, that the
    /// command's required options are there, and that values are in range.
    /// The parameter tuple itself is validated later, at dispatch.
    pub fn validate(&self) -> Result<()> {
        let allowed = self.command.options();
        for key in self.present_options() {
            if !allowed.contains(&key) {
                return Err(key_error(key, format!("not an option of `{}`", self.command.name())));
            }
        }

        if self.command == Command::Sweep {
            if self.q.is_some() {
                return Err(key_error("q", "a sweep takes `qValues` or `qRange` instead"));
            }
            match (&self.q_values, &self.q_range) {
                (None, None) => return Err(key_error("qValues", "a sweep needs `qValues` or `qRange`")),
                (Some(_), Some(_)) => return Err(key_error("qRange", "give either `qValues` or `qRange`, not both")),
                _ => {}
            }
        } else if self.q.is_none() {
            return Err(key_error("q", "missing"));
        }

        match self.command {
            Command::Wolff if self.radii.is_none() => return Err(key_error("radii", "missing")),
            Command::Shoot if self.alpha.is_none() => return Err(key_error("alpha", "missing")),
            _ => {}
        }
        if self.profile == Some(ProfileSource::Shoot) && self.alpha.is_none() {
            return Err(key_error("alpha", "needed for `profile = \"shoot\"`"));
        }
        if self.profile.is_some() && self.profile_file.is_some() {
            return Err(key_error("profileFile", "give either `profile` or `profileFile`, not both"));
        }

        tolerance("tol", self.tol)?;
        tolerance("odeTol", self.ode_tol)?;
        tolerance("classifyTol", self.classify_tol)?;
        positive("alpha", self.alpha)?;
        positive_list("radii", &self.radii)?;
        positive_list("etas", &self.etas)?;
        positive_list("lambdas", &self.lambdas)?;
        if let Some(v) = &self.q_values {
            if v.is_empty() {
                return Err(key_error("qValues", "must not be empty"));
            }
        }
        if let Some(r) = self.r_max {
            if !(r > 1.0 && r.is_finite()) {
                return Err(key_error("rMax", format!("must exceed 1, got {r}")));
            }
        }
        if let Some(t) = self.theta {
            if !t.is_finite() {
                return Err(key_error("theta", "must be finite"));
            }
        }
        if let Some(b) = self.b0 {
            if !(b >= 0.0 && b.is_finite()) {
                return Err(key_error("b0", format!("must be nonnegative, got {b}")));
            }
        }
        if self.max_iter == Some(0) {
            return Err(key_error("maxIter", "must be at least 1"));
        }
        if let Some(r) = &self.q_range {
            if !(r.step > 0.0 && r.step.is_finite() && r.start.is_finite() && r.stop >= r.start) {
                return Err(key_error("qRange", "needs finite start <= stop and step > 0"));
            }
            if r.values().len() > 1_000_000 {
                return Err(key_error("qRange", "more than 10^6 values"));
            }
        }
        Ok(())
    }

    /// The `q` values of a sweep.
    pub fn sweep_values(&self) -> Vec<f64> {
        match (&self.q_values, &self.q_range) {
            (Some(v), _) => v.clone(),
            (None, Some(r)) => r.values(),
            (None, None) => Vec::new(),
        }
    }
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// Parses a config; `.json` files are JSON, everything else TOML.
pub fn parse_config(text: &str, json: bool) -> Result<RunConfig> {
    if json {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    } else {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}

/// Canonical text of a config: keys in declaration order, unset options
/// omitted, one trailing newline.
pub fn render_config(cfg: &RunConfig, json: bool) -> Result<String> {
    if json {
        let mut s = serde_json::to_string_pretty(cfg).map_err(|e| Error::Config(e.to_string()))?;
        s.push('\n');
        Ok(s)
    } else {
        toml::to_string(cfg).map_err(|e| Error::Config(e.to_string()))
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text, is_json(path))
}

pub fn save_config(cfg: &RunConfig, path: &Path) -> Result<()> {
    let text = render_config(cfg, is_json(path))?;
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
