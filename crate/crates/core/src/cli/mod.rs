//! Batch front-end: argument parsing, config merging, dispatch and report
//! output for the `wolfflab` binary.

pub mod config;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponents::{nonexistence_sequence, slow_bootstrap, ExponentSequence, Verdict, DEFAULT_MAX_ITER};
use crate::identities::{energy_report, scaling_check, EnergyReport, ScalingReport};
use crate::params::{classify_regime, Regime, RegimeReport, ProblemParams, CRITICAL_TOL};
use crate::quadrature::QuadratureConfig;
use crate::radgeom::{log_grid, BubbleProfile, Profile, RadialProfile};
use crate::shoot::{pde_residual, shoot_radial, singular_profile, ShootingResult, DEFAULT_ODE_TOL, DEFAULT_R_MAX};
use crate::wolff::{ratio_r, RatioReport};

pub use config::{load_config, parse_config, render_config, save_config, Command, Format, ProfileSource, QRange, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ASSUMPTION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_CONFIG: i32 = 4;
pub const EXIT_IO: i32 = 5;

/// Exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::AssumptionViolation(_) | Error::NotApplicable(_) | Error::NotCritical { .. } => EXIT_ASSUMPTION,
        Error::Config(_) => EXIT_CONFIG,
        Error::Io(_) => EXIT_IO,
        _ => EXIT_NUMERICAL,
    }
}

#[derive(Debug, Parser)]
#[command(name = "wolfflab", version, about = "Wolff potentials, radial shooting and exponent checks for -Δ_p u = |x|^a u^q")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Regime and derived exponents.
    Classify(RunArgs),
    /// Nonexistence iteration (and the slow bootstrap with --b0).
    Iterate(RunArgs),
    /// Wolff potential and the ratio u/W at the given radii.
    Wolff(RunArgs),
    /// Radial shooting from u(0) = alpha.
    Shoot(RunArgs),
    /// PDE residual of the exact singular solution.
    VerifySingular(RunArgs),
    /// Energies, L^s norms, Pohozaev balance and Hardy-Sobolev quotient.
    Pohozaev(RunArgs),
    /// Norm ratios under u_λ(x) = λ^θ u(λx).
    Scaling(RunArgs),
    /// Regime and iteration verdict over a list of q values.
    Sweep(RunArgs),
}

impl Sub {
    fn split(self) -> (Command, RunArgs) {
        match self {
            Sub::Classify(a) => (Command::Classify, a),
            Sub::Iterate(a) => (Command::Iterate, a),
            Sub::Wolff(a) => (Command::Wolff, a),
            Sub::Shoot(a) => (Command::Shoot, a),
            Sub::VerifySingular(a) => (Command::VerifySingular, a),
            Sub::Pohozaev(a) => (Command::Pohozaev, a),
            Sub::Scaling(a) => (Command::Scaling, a),
            Sub::Sweep(a) => (Command::Sweep, a),
        }
    }
}

#[derive(Debug, Default, Args)]
#[command(allow_negative_numbers = true)]
pub struct RunArgs {
    /// TOML or JSON run config; flags override its keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Report path (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Relative quadrature tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Worker threads.
    #[arg(long, env = "WOLFFLAB_JOBS")]
    pub jobs: Option<usize>,

    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,

    #[arg(long)]
    pub classify_tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub b0: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub radii: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    pub profile: Option<ProfileSource>,
    /// Profile CSV as written by the library (`# {header}` then `r,u`).
    #[arg(long)]
    pub profile_file: Option<PathBuf>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long)]
    pub ode_tol: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub etas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub lambdas: Option<Vec<f64>>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub q_values: Option<Vec<f64>>,
    /// `start:stop:step`
    #[arg(long, value_parser = parse_range)]
    pub q_range: Option<QRange>,
}

fn parse_range(s: &str) -> std::result::Result<QRange, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err("expected start:stop:step".into());
    }
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t}: {e}"));
    Ok(QRange {
        start: num(parts[0])?,
        stop: num(parts[1])?,
        step: num(parts[2])?,
    })
}

macro_rules! overlay {
    ($cfg:ident, $args:ident, $($field:ident),*) => {
        $(if $args.$field.is_some() { $cfg.$field = $args.$field.clone(); })*
    };
}

/// Merges the optional config file with the flags into a validated config.
pub fn build_config(command: Command, args: &RunArgs) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let cfg = load_config(path)?;
            if cfg.command != command {
                return Err(Error::Config(format!(
                    "`command`: config is for `{}` but `{}` was invoked",
                    cfg.command.name(),
                    command.name()
                )));
            }
            cfg
        }
        None => {
            let n = args.n.ok_or_else(|| Error::Config("`n`: missing".into()))?;
            let p = args.p.ok_or_else(|| Error::Config("`p`: missing".into()))?;
            RunConfig::new(command, n, p)
        }
    };
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(p) = args.p {
        cfg.p = p;
    }
    overlay!(
        cfg, args, q, a, beta, tol, classify_tol, max_iter, b0, radii, profile, profile_file, alpha, r_max, ode_tol,
        etas, lambdas, theta, q_values, q_range, out, format
    );
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IterateReport {
    pub regime: Regime,
    pub nonexistence: ExponentSequence,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slow_bootstrap: Option<ExponentSequence>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SingularReport {
    pub t: f64,
    pub c: f64,
    pub radii: Vec<f64>,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepRow {
    pub q: f64,
    pub regime: Regime,
    pub slow_rate: f64,
    pub fast_rate: f64,
    /// `hitNonpositive`, `convergesTo`, `diverges` or `undecided`.
    pub verdict: String,
    pub j0: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Report {
    Classify(RegimeReport),
    Iterate(IterateReport),
    Wolff(RatioReport),
    Shoot(ShootingResult),
    VerifySingular(SingularReport),
    Pohozaev(EnergyReport),
    Scaling(Vec<ScalingReport>),
    Sweep(Vec<SweepRow>),
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    /// CSV with a fixed header per command:
    ///
    /// - classify: `regime,lpImpossible,s0,pStar,qCritical,qLiouville,fastRate,slowRate,integrabilityFloor`
    /// - iterate: `kind,j,term`
    /// - wolff: `radius,u,w,w1,w2,ratio`
    /// - shoot: `r,u,w`
    /// - verify-singular: `r,u,residual`
    /// - pohozaev: `quantity,value,finite`
    /// - scaling: `lambda,theta,eta,ratio,powerRatio,predictedPowerRatio`
    /// - sweep: `q,regime,slowRate,fastRate,verdict,j0`
    pub fn to_csv(&self) -> String {
        match self {
            Report::Classify(r) => {
                let e = &r.exponents;
                format!(
                    "regime,lpImpossible,s0,pStar,qCritical,qLiouville,fastRate,slowRate,integrabilityFloor\n\
                     {},{},{},{},{},{},{},{},{}\n",
                    r.regime,
                    r.lp_impossible,
                    e.s0,
                    e.p_star,
                    e.q_critical,
                    e.q_liouville,
                    e.fast_rate,
                    e.slow_rate,
                    e.integrability_floor
                )
            }
            Report::Iterate(r) => {
                let mut s = r.nonexistence.to_csv();
                if let Some(b) = &r.slow_bootstrap {
                    s.push_str(b.to_csv().split_once('\n').map(|x| x.1).unwrap_or(""));
                }
                s
            }
            Report::Wolff(r) => r.to_csv(),
            Report::Shoot(r) => r.profile_csv(),
            Report::VerifySingular(r) => {
                let mut s = String::from("r,u,residual\n");
                for (r0, res) in r.radii.iter().zip(&r.residuals) {
                    let _ = writeln!(s, "{r0},{},{res}", r.c * r0.powf(-r.t));
                }
                s
            }
            Report::Pohozaev(r) => r.to_csv(),
            Report::Scaling(list) => {
                let mut s = String::from("lambda,theta,eta,ratio,powerRatio,predictedPowerRatio\n");
                for rep in list {
                    for n in &rep.norms {
                        let _ = writeln!(
                            s,
                            "{},{},{},{},{},{}",
                            rep.lambda, rep.theta, n.eta, n.ratio, n.power_ratio, n.predicted_power_ratio
                        );
                    }
                }
                s
            }
            Report::Sweep(rows) => {
                let mut s = String::from("q,regime,slowRate,fastRate,verdict,j0\n");
                for r in rows {
                    let _ = writeln!(
                        s,
                        "{},{},{},{},{},{}",
                        r.q,
                        r.regime,
                        r.slow_rate,
                        r.fast_rate,
                        r.verdict,
                        r.j0.map(|j| j.to_string()).unwrap_or_default()
                    );
                }
                s
            }
        }
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => Ok(self.to_csv()),
        }
    }
}

fn params(cfg: &RunConfig, q: f64) -> Result<ProblemParams> {
    ProblemParams::new(cfg.n, cfg.p, q, cfg.a(), cfg.beta())
}

fn iteration_params(cfg: &RunConfig, q: f64) -> Result<ProblemParams> {
    ProblemParams::for_iteration(cfg.n, cfg.p, q, cfg.a(), cfg.beta())
}

fn quad(cfg: &RunConfig) -> QuadratureConfig {
    cfg.tol.map(QuadratureConfig::with_rel_tol).unwrap_or_default()
}

fn load_profile(cfg: &RunConfig, params: &ProblemParams, default: ProfileSource) -> Result<Profile> {
    if let Some(path) = &cfg.profile_file {
        let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        return Ok(RadialProfile::read_csv(std::io::BufReader::new(file))?.into());
    }
    Ok(match cfg.profile.unwrap_or(default) {
        ProfileSource::Singular => singular_profile(params)?.into(),
        ProfileSource::Bubble => BubbleProfile::extremal(params)?.into(),
        ProfileSource::Shoot => {
            let alpha = cfg.alpha.ok_or_else(|| Error::Config("`alpha`: missing".into()))?;
            let run = shoot_radial(
                alpha,
                params,
                cfg.r_max.unwrap_or(DEFAULT_R_MAX),
                cfg.ode_tol.unwrap_or(DEFAULT_ODE_TOL),
            )?;
            if run.crossing_radius().is_some() {
                return Err(Error::InvalidProfile("the shooting run crosses zero".into()));
            }
            run.profile.into()
        }
    })
}

fn verdict_fields(v: &Result<ExponentSequence>) -> Result<(String, Option<usize>)> {
    match v {
        Ok(seq) => Ok(match seq.verdict {
            Verdict::HitNonpositive { j0 } => ("hitNonpositive".into(), Some(j0)),
            Verdict::ConvergesTo { .. } => ("convergesTo".into(), None),
            Verdict::Diverges => ("diverges".into(), None),
        }),
        Err(Error::IterationBudgetExceeded(_)) => Ok(("undecided".into(), None)),
        Err(e) => Err(e.clone()),
    }
}

/// Runs a validated config and returns its report.
pub fn execute(cfg: &RunConfig) -> Result<Report> {
    let classify_tol = cfg.classify_tol.unwrap_or(CRITICAL_TOL);
    let max_iter = cfg.max_iter.unwrap_or(DEFAULT_MAX_ITER);
    let q = cfg.q.unwrap_or(f64::NAN);
    Ok(match cfg.command {
        Command::Classify => Report::Classify(classify_regime(&params(cfg, q)?, classify_tol)),
        Command::Iterate => {
            let pp = iteration_params(cfg, q)?;
            let slow = match cfg.b0 {
                Some(b0) => Some(slow_bootstrap(b0, &pp, max_iter)?),
                None => None,
            };
            Report::Iterate(IterateReport {
                regime: classify_regime(&pp, classify_tol).regime,
                nonexistence: nonexistence_sequence(&pp, max_iter)?,
                slow_bootstrap: slow,
            })
        }
        Command::Wolff => {
            let pp = params(cfg, q)?;
            let u = load_profile(cfg, &pp, ProfileSource::Singular)?;
            let radii = cfg.radii.clone().unwrap_or_default();
            Report::Wolff(ratio_r(&u, &pp, &radii, &quad(cfg))?)
        }
        Command::Shoot => {
            let pp = params(cfg, q)?;
            let alpha = cfg.alpha.ok_or_else(|| Error::Config("`alpha`: missing".into()))?;
            Report::Shoot(shoot_radial(
                alpha,
                &pp,
                cfg.r_max.unwrap_or(DEFAULT_R_MAX),
                cfg.ode_tol.unwrap_or(DEFAULT_ODE_TOL),
            )?)
        }
        Command::VerifySingular => {
            let pp = params(cfg, q)?;
            let sing = singular_profile(&pp)?;
            let u: Profile = sing.into();
            let radii = cfg.radii.clone().unwrap_or_else(|| log_grid(1e-3, 1e3, 2));
            let residuals = radii
                .iter()
                .map(|&r| pde_residual(&u, &pp, r))
                .collect::<Result<Vec<_>>>()?;
            let max_residual = residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
            Report::VerifySingular(SingularReport {
                t: sing.exponent,
                c: sing.coeff,
                radii,
                residuals,
                max_residual,
            })
        }
        Command::Pohozaev => {
            let pp = params(cfg, q)?;
            let u = load_profile(cfg, &pp, ProfileSource::Bubble)?;
            let etas = cfg.etas.clone().unwrap_or_else(|| vec![pp.exponents().s0]);
            Report::Pohozaev(energy_report(&u, &pp, &etas, &quad(cfg))?)
        }
        Command::Scaling => {
            let pp = params(cfg, q)?;
            let u = load_profile(cfg, &pp, ProfileSource::Bubble)?;
            let ex = pp.exponents();
            let etas = cfg.etas.clone().unwrap_or_else(|| vec![ex.s0]);
            let theta = cfg.theta.unwrap_or(ex.slow_rate);
            let lambdas = cfg.lambdas.clone().unwrap_or_else(|| vec![0.1, 2.0, 10.0]);
            let qc = quad(cfg);
            Report::Scaling(
                lambdas
                    .par_iter()
                    .map(|&l| scaling_check(&u, &pp, l, theta, &etas, &qc))
                    .collect::<Result<Vec<_>>>()?,
            )
        }
        Command::Sweep => {
            let rows = cfg
                .sweep_values()
                .par_iter()
                .map(|&q| {
                    let pp = iteration_params(cfg, q)?;
                    let rep = classify_regime(&pp, classify_tol);
                    let (verdict, j0) = verdict_fields(&nonexistence_sequence(&pp, max_iter))?;
                    Ok(SweepRow {
                        q,
                        regime: rep.regime,
                        slow_rate: rep.exponents.slow_rate,
                        fast_rate: rep.exponents.fast_rate,
                        verdict,
                        j0,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Report::Sweep(rows)
        }
    })
}

/// Runs `cfg` on a pool of `jobs` workers (rayon's default when `None`)
/// and writes the report to `cfg.out` or `stdout`.
pub fn run(cfg: &RunConfig, jobs: Option<usize>, stdout: &mut dyn Write) -> Result<()> {
    if jobs == Some(0) {
        return Err(Error::Config("`jobs`: must be at least 1".into()));
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j);
    }
    let pool = builder.build().map_err(|e| Error::Config(format!("`jobs`: {e}")))?;
    let report = pool.install(|| execute(cfg))?;
    let text = report.render(cfg.format())?;
    match &cfg.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(Error::from),
    }
}

/// Parses `args`, runs the command and returns the process exit status.
/// Diagnostics go to `stderr`.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let (command, args) = cli.command.split();
    let result = build_config(command, &args).and_then(|cfg| run(&cfg, args.jobs, stdout));
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "wolfflab: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = main_with_args(std::iter::once("wolfflab").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn classify_critical() {
        let (code, out, _) = run_args(&["classify", "--n", "3", "--p", "2", "--q", "5"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["regime"], "Critical");
        assert_eq!(v["exponents"]["s0"], 6.0);
    }

    #[test]
    fn exit_codes_by_failure_kind() {
        assert_eq!(run_args(&["classify", "--n", "3", "--p", "2.5", "--q", "5"]).0, EXIT_ASSUMPTION);
        assert_eq!(run_args(&["classify", "--n", "3", "--p", "2"]).0, EXIT_CONFIG);
        assert_eq!(run_args(&["classify", "--bogus"]).0, EXIT_CONFIG);
        assert_eq!(run_args(&["--help"]).0, EXIT_OK);
        let (code, _, err) = run_args(&["classify", "--config", "/nonexistent/run.toml"]);
        assert_eq!(code, EXIT_IO, "{err}");
        // divergent energies are reported, not failed
        assert_eq!(
            run_args(&["pohozaev", "--n", "3", "--p", "2", "--q", "4", "--profile", "singular"]).0,
            EXIT_OK
        );
    }

    #[test]
    fn negative_weight_parses() {
        let (code, out, err) = run_args(&["classify", "--n", "5", "--p", "2", "--q", "3", "--a", "-1", "--format", "csv"]);
        assert_eq!(code, 0, "{err}");
        assert!(out.starts_with("regime,lpImpossible,"));
        assert!(out.contains("\nSupercritical,false,10,"));
    }
}
