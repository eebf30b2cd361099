use std::fmt;

use serde::{Deserialize, Serialize};

use crate::params::Assumption;

/// Which end of the radial half-line an improper integral diverges at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Side {
    Origin,
    Tail,
    Both,
}

impl Side {
    pub(crate) fn combine(origin: bool, tail: bool) -> Option<Side> {
        match (origin, tail) {
            (true, true) => Some(Side::Both),
            (true, false) => Some(Side::Origin),
            (false, true) => Some(Side::Tail),
            (false, false) => None,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Origin => write!(f, "origin"),
            Side::Tail => write!(f, "tail"),
            Side::Both => write!(f, "origin and tail"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("assumption violated: {}", format_violations(.0))]
    AssumptionViolation(Vec<Assumption>),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature failed: estimated error {error:e} exceeds tolerance after {panels} panels")]
    QuadratureFailure { error: f64, panels: usize },

    #[error("integral diverges at the {0}")]
    DivergentIntegral(Side),

    #[error("Wolff potential diverges: tail exponent condition q*sigma - a > p*beta fails ({0})")]
    DivergentPotential(String),

    #[error("iteration budget of {0} steps exhausted before a verdict")]
    IterationBudgetExceeded(usize),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("derivative unavailable at r = {0:e} (too close to the grid edge)")]
    DerivativeUnavailable(f64),

    #[error("step size underflow at r = {0:e}")]
    StepSizeUnderflow(f64),

    #[error("classification ambiguous: fitted rate {rate} matches both the fast and the slow band")]
    ClassificationAmbiguous { rate: f64 },

    #[error("fit window [{0:e}, {1:e}] is too narrow or outside the grid")]
    WindowTooNarrow(f64, f64),

    #[error("q = {q} is not the critical exponent {critical}")]
    NotCritical { q: f64, critical: f64 },

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

fn format_violations(v: &[Assumption]) -> String {
    v.iter().map(|a| a.to_string()).collect::<Vec<_>>().join("; ")
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
