//! Positive radial profiles `u(x) = U(|x|)`.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{near, ProblemParams};

/// Leading-order behaviour `~ r^e` of a radial quantity near `0` or `∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Asymptote {
    Power(f64),
    /// Identically zero in that region.
    Vanishes,
}

/// `u(x) = coeff * |x|^{-exponent}`, exact at every radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PowerLawProfile {
    pub coeff: f64,
    pub exponent: f64,
}

impl PowerLawProfile {
    pub fn new(coeff: f64, exponent: f64) -> Result<Self> {
        if !(coeff > 0.0) || !coeff.is_finite() || !exponent.is_finite() {
            return Err(Error::InvalidProfile(format!(
                "power law needs coeff > 0 and a finite exponent (got {coeff}, {exponent})"
            )));
        }
        Ok(PowerLawProfile { coeff, exponent })
    }
}

/// `U(r) = amplitude * (1 + (scale r)^m)^{-k}`.
///
/// With `m = (p+a)/(p-1)`, `k = (n-p)/(p+a)` and the amplitude from
/// [`BubbleProfile::extremal`] this solves the radial equation exactly at the
/// critical exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BubbleProfile {
    pub amplitude: f64,
    pub scale: f64,
    pub m: f64,
    pub k: f64,
}

impl BubbleProfile {
    pub fn new(amplitude: f64, scale: f64, m: f64, k: f64) -> Result<Self> {
        if ![amplitude, scale, m, k].iter().all(|v| v.is_finite() && *v > 0.0) {
            return Err(Error::InvalidProfile(
                "bubble parameters must be positive and finite".into(),
            ));
        }
        Ok(BubbleProfile {
            amplitude,
            scale,
            m,
            k,
        })
    }

    /// The finite-energy solution at the critical exponent (PDE mode).
    pub fn extremal(params: &ProblemParams) -> Result<Self> {
        if !params.is_pde_mode() {
            return Err(Error::NotApplicable("the extremal profile needs beta = 1".into()));
        }
        let (n, p, q, a) = (params.nf(), params.p(), params.q(), params.a());
        let critical = params.exponents().q_critical;
        if !near(q, critical, 1e-10) {
            return Err(Error::NotCritical { q, critical });
        }
        let amp = ((n + a) * ((n - p) / (p - 1.0)).powf(p - 1.0)).powf(1.0 / (q - p + 1.0));
        Self::new(amp, 1.0, (p + a) / (p - 1.0), (n - p) / (p + a))
    }

    fn x(&self, r: f64) -> f64 {
        (self.scale * r).powf(self.m)
    }
}

/// `U(r) = amplitude * (1 - (r/radius)^2)^power` on `r < radius`, zero beyond.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BumpProfile {
    pub amplitude: f64,
    pub radius: f64,
    pub power: f64,
}

impl BumpProfile {
    pub fn new(amplitude: f64, radius: f64, power: f64) -> Result<Self> {
        if !(amplitude > 0.0 && radius > 0.0 && power >= 2.0)
            || ![amplitude, radius, power].iter().all(|v| v.is_finite())
        {
            return Err(Error::InvalidProfile(
                "bump needs amplitude > 0, radius > 0, power >= 2".into(),
            ));
        }
        Ok(BumpProfile {
            amplitude,
            radius,
            power,
        })
    }
}

/// Sampled positive profile on a strictly increasing grid, log-log linear
/// between nodes and extended by power laws `r^{-inner_exponent}` below the
/// grid and `r^{-tail_exponent}` above it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", try_from = "GridData")]
pub struct RadialProfile {
    grid: Vec<f64>,
    values: Vec<f64>,
    inner_exponent: f64,
    tail_exponent: f64,
    /// `d ln U / d ln r` at the nodes when known exactly (e.g. from the flux
    /// variable of a shooting run).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    log_slopes: Option<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct GridData {
    grid: Vec<f64>,
    values: Vec<f64>,
    inner_exponent: f64,
    tail_exponent: f64,
    #[serde(default)]
    log_slopes: Option<Vec<f64>>,
}

impl TryFrom<GridData> for RadialProfile {
    type Error = Error;
    fn try_from(d: GridData) -> Result<Self> {
        RadialProfile::build(d.grid, d.values, d.inner_exponent, d.tail_exponent, d.log_slopes)
    }
}

/// Points in the local polynomial fit used for derivatives.
const STENCIL: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct ProfileHeader {
    inner_exponent: f64,
    tail_exponent: f64,
}

impl RadialProfile {
    pub fn new(
        grid: Vec<f64>,
        values: Vec<f64>,
        inner_exponent: f64,
        tail_exponent: f64,
    ) -> Result<Self> {
        Self::build(grid, values, inner_exponent, tail_exponent, None)
    }

    pub fn with_log_slopes(
        grid: Vec<f64>,
        values: Vec<f64>,
        log_slopes: Vec<f64>,
        inner_exponent: f64,
        tail_exponent: f64,
    ) -> Result<Self> {
        Self::build(grid, values, inner_exponent, tail_exponent, Some(log_slopes))
    }

    fn build(
        grid: Vec<f64>,
        values: Vec<f64>,
        inner_exponent: f64,
        tail_exponent: f64,
        log_slopes: Option<Vec<f64>>,
    ) -> Result<Self> {
        if grid.len() < 2 || grid.len() != values.len() {
            return Err(Error::InvalidProfile(format!(
                "need at least two nodes and matching lengths (grid {}, values {})",
                grid.len(),
                values.len()
            )));
        }
        if !(grid[0] > 0.0) || grid.windows(2).any(|w| !(w[1] > w[0])) || !grid[grid.len() - 1].is_finite() {
            return Err(Error::InvalidProfile("grid must be positive and strictly increasing".into()));
        }
        if values.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidProfile("values must be positive and finite".into()));
        }
        if !inner_exponent.is_finite() || !tail_exponent.is_finite() {
            return Err(Error::InvalidProfile("model exponents must be finite".into()));
        }
        if let Some(s) = &log_slopes {
            if s.len() != grid.len() || s.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidProfile("log slopes must match the grid".into()));
            }
        }
        Ok(RadialProfile {
            grid,
            values,
            inner_exponent,
            tail_exponent,
            log_slopes,
        })
    }

    /// `(ln U, d ln U/ds, d² ln U/ds²)` at `s = ln r` from a degree-4 fit
    /// through the nearest nodes; `None` when no centred stencil fits.
    fn local_fit(&self, r: f64) -> Option<(f64, f64, f64)> {
        let len = self.grid.len();
        if len < STENCIL || r < self.grid[0] || r > self.grid[len - 1] {
            return None;
        }
        let i = self.segment(r);
        let nearer = if (r / self.grid[i]).ln() <= (self.grid[i + 1] / r).ln() { i } else { i + 1 };
        let half = STENCIL / 2;
        if nearer < half || nearer + half >= len {
            return None;
        }
        let idx = nearer - half..=nearer + half;
        let s: Vec<f64> = self.grid[idx.clone()].iter().map(|x| x.ln()).collect();
        let x0 = r.ln();
        let w = fornberg(x0, &s, 2);
        let logs: Vec<f64> = self.values[idx.clone()].iter().map(|v| v.ln()).collect();
        let dot = |k: usize, y: &[f64]| w[k].iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
        let l = dot(0, &logs);
        match &self.log_slopes {
            Some(sl) => {
                let y = &sl[idx];
                Some((l, dot(0, y), dot(1, y)))
            }
            None => Some((l, dot(1, &logs), dot(2, &logs))),
        }
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn inner_exponent(&self) -> f64 {
        self.inner_exponent
    }
    pub fn tail_exponent(&self) -> f64 {
        self.tail_exponent
    }
    pub fn log_slopes(&self) -> Option<&[f64]> {
        self.log_slopes.as_deref()
    }
    pub fn r_min(&self) -> f64 {
        self.grid[0]
    }
    pub fn r_max(&self) -> f64 {
        self.grid[self.grid.len() - 1]
    }

    /// Replaces the declared tail exponent, keeping the samples.
    pub fn with_tail_exponent(mut self, tail_exponent: f64) -> Self {
        self.tail_exponent = tail_exponent;
        self
    }

    /// Index `i` with `grid[i] <= r <= grid[i+1]`; `r` must lie in the grid.
    fn segment(&self, r: f64) -> usize {
        let i = self.grid.partition_point(|&g| g <= r);
        i.clamp(1, self.grid.len() - 1) - 1
    }

    pub fn value(&self, r: f64) -> f64 {
        let last = self.grid.len() - 1;
        if r <= self.grid[0] {
            return self.values[0] * (r / self.grid[0]).powf(-self.inner_exponent);
        }
        if r >= self.grid[last] {
            return self.values[last] * (r / self.grid[last]).powf(-self.tail_exponent);
        }
        self.log_value_in(self.segment(r), r.ln()).exp()
    }

    /// `ln U` at `ln r = x` inside segment `i`: linear in log-log, or the
    /// cubic Hermite through the node values and exact slopes when those
    /// are attached.
    pub(crate) fn log_value_in(&self, i: usize, x: f64) -> f64 {
        let (x0, x1) = (self.grid[i].ln(), self.grid[i + 1].ln());
        let (y0, y1) = (self.values[i].ln(), self.values[i + 1].ln());
        let l = x1 - x0;
        let w = (x - x0) / l;
        match &self.log_slopes {
            None => y0 + w * (y1 - y0),
            Some(m) => {
                let w2 = w * w;
                let w3 = w2 * w;
                (2.0 * w3 - 3.0 * w2 + 1.0) * y0
                    + (w3 - 2.0 * w2 + w) * l * m[i]
                    + (3.0 * w2 - 2.0 * w3) * y1
                    + (w3 - w2) * l * m[i + 1]
            }
        }
    }

    /// `d ln U / d ln r`. Near the grid edges, where no centred stencil
    /// fits, the slope of the log-log segment (or the node value) is used.
    pub fn log_slope(&self, r: f64) -> f64 {
        let last = self.grid.len() - 1;
        if r < self.grid[0] {
            return -self.inner_exponent;
        }
        if r > self.grid[last] {
            return -self.tail_exponent;
        }
        if let Some((_, l1, _)) = self.local_fit(r) {
            return l1;
        }
        let i = self.segment(r);
        let w = (r / self.grid[i]).ln() / (self.grid[i + 1] / self.grid[i]).ln();
        match &self.log_slopes {
            Some(sl) => sl[i] * (1.0 - w) + sl[i + 1] * w,
            None => (self.values[i + 1] / self.values[i]).ln() / (self.grid[i + 1] / self.grid[i]).ln(),
        }
    }

    /// `(U, U', U'')` at `r`, from a degree-4 fit of `ln U` (or of the exact
    /// log slopes) in `ln r` through the five nearest nodes. Radii without a
    /// centred stencil are refused.
    pub fn derivatives(&self, r: f64) -> Result<(f64, f64, f64)> {
        let last = self.grid.len() - 1;
        let (u, slope, curv) = if r < self.grid[0] {
            (self.value(r), -self.inner_exponent, 0.0)
        } else if r > self.grid[last] {
            (self.value(r), -self.tail_exponent, 0.0)
        } else {
            let (l, l1, l2) = self.local_fit(r).ok_or(Error::DerivativeUnavailable(r))?;
            (l.exp(), l1, l2)
        };
        // U = e^{L(s)}, s = ln r
        let d1 = slope * u / r;
        let d2 = (curv + slope * slope - slope) * u / (r * r);
        Ok((u, d1, d2))
    }

    /// `u_λ(r) = λ^θ u(λ r)`: same samples on the grid `r_i / λ`.
    pub fn scaled(&self, lambda: f64, theta: f64) -> RadialProfile {
        let factor = lambda.powf(theta);
        RadialProfile {
            grid: self.grid.iter().map(|r| r / lambda).collect(),
            values: self.values.iter().map(|v| v * factor).collect(),
            inner_exponent: self.inner_exponent,
            tail_exponent: self.tail_exponent,
            log_slopes: self.log_slopes.clone(),
        }
    }

    /// `# {"innerExponent":..,"tailExponent":..}` followed by an `r,u` table
    /// (plus a `dlogu_dlogr` column when exact slopes are attached).
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let header = serde_json::to_string(&ProfileHeader {
            inner_exponent: self.inner_exponent,
            tail_exponent: self.tail_exponent,
        })
        .map_err(|e| Error::Io(e.to_string()))?;
        let mut s = format!("# {header}\n");
        match &self.log_slopes {
            None => {
                s.push_str("r,u\n");
                for (r, u) in self.grid.iter().zip(&self.values) {
                    let _ = writeln!(s, "{r},{u}");
                }
            }
            Some(sl) => {
                s.push_str("r,u,dlogu_dlogr\n");
                for ((r, u), d) in self.grid.iter().zip(&self.values).zip(sl) {
                    let _ = writeln!(s, "{r},{u},{d}");
                }
            }
        }
        out.write_all(s.as_bytes())?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(mut input: R) -> Result<Self> {
        let mut first = String::new();
        input.read_line(&mut first)?;
        let json = first
            .trim()
            .strip_prefix('#')
            .ok_or_else(|| Error::InvalidProfile("missing '# {json}' header line".into()))?;
        let header: ProfileHeader = serde_json::from_str(json.trim())
            .map_err(|e| Error::InvalidProfile(format!("bad profile header: {e}")))?;
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let cols = rdr
            .headers()
            .map_err(|e| Error::InvalidProfile(e.to_string()))?
            .len();
        if cols != 2 && cols != 3 {
            return Err(Error::InvalidProfile(format!("expected 2 or 3 columns, found {cols}")));
        }
        let (mut grid, mut values, mut slopes) = (Vec::new(), Vec::new(), Vec::new());
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::InvalidProfile(e.to_string()))?;
            let num = |i: usize| -> Result<f64> {
                rec.get(i)
                    .and_then(|s| s.trim().parse::<f64>().ok())
                    .ok_or_else(|| Error::InvalidProfile(format!("unparsable field in row {rec:?}")))
            };
            grid.push(num(0)?);
            values.push(num(1)?);
            if cols == 3 {
                slopes.push(num(2)?);
            }
        }
        let slopes = (cols == 3).then_some(slopes);
        Self::build(grid, values, header.inner_exponent, header.tail_exponent, slopes)
    }
}

/// Fornberg's finite-difference weights: `w[k][j]` applied to samples at
/// `x[j]` gives the `k`-th derivative of the interpolating polynomial at `x0`.
fn fornberg(x0: f64, x: &[f64], order: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = x[0] - x0;
    for i in 1..n {
        let mm = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - x0;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mm).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mm).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Log-spaced nodes from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let decades = (hi / lo).log10();
    let count = ((decades * per_decade as f64).ceil() as usize).max(1);
    let step = (hi / lo).ln() / count as f64;
    let mut g: Vec<f64> = (0..=count).map(|i| lo * (step * i as f64).exp()).collect();
    g[0] = lo;
    g[count] = hi;
    g
}

/// Any radial profile the toolkit can integrate, differentiate or rescale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "kind")]
pub enum Profile {
    PowerLaw(PowerLawProfile),
    Grid(RadialProfile),
    Bubble(BubbleProfile),
    Bump(BumpProfile),
}

impl From<PowerLawProfile> for Profile {
    fn from(p: PowerLawProfile) -> Self {
        Profile::PowerLaw(p)
    }
}
impl From<RadialProfile> for Profile {
    fn from(p: RadialProfile) -> Self {
        Profile::Grid(p)
    }
}
impl From<BubbleProfile> for Profile {
    fn from(p: BubbleProfile) -> Self {
        Profile::Bubble(p)
    }
}
impl From<BumpProfile> for Profile {
    fn from(p: BumpProfile) -> Self {
        Profile::Bump(p)
    }
}

impl Profile {
    pub fn value(&self, r: f64) -> f64 {
        match self {
            Profile::PowerLaw(pl) => pl.coeff * r.powf(-pl.exponent),
            Profile::Grid(g) => g.value(r),
            Profile::Bubble(b) => b.amplitude * (1.0 + b.x(r)).powf(-b.k),
            Profile::Bump(b) => {
                if r >= b.radius {
                    0.0
                } else {
                    let y = r / b.radius;
                    b.amplitude * (1.0 - y * y).powf(b.power)
                }
            }
        }
    }

    /// `(U, U', U'')` at `r > 0`.
    pub fn derivatives(&self, r: f64) -> Result<(f64, f64, f64)> {
        match self {
            Profile::PowerLaw(pl) => {
                let t = pl.exponent;
                let u = pl.coeff * r.powf(-t);
                Ok((u, -t * u / r, t * (t + 1.0) * u / (r * r)))
            }
            Profile::Grid(g) => g.derivatives(r),
            Profile::Bubble(b) => {
                let x = b.x(r);
                let u = b.amplitude * (1.0 + x).powf(-b.k);
                let ckm = b.amplitude * b.k * b.m;
                let d1 = -ckm * x / r * (1.0 + x).powf(-b.k - 1.0);
                let d2 = -ckm * x / (r * r)
                    * (1.0 + x).powf(-b.k - 2.0)
                    * ((b.m - 1.0) * (1.0 + x) - (b.k + 1.0) * b.m * x);
                Ok((u, d1, d2))
            }
            Profile::Bump(b) => {
                if r >= b.radius {
                    return Ok((0.0, 0.0, 0.0));
                }
                let y = (r / b.radius).powi(2);
                let (a, k, rr) = (b.amplitude, b.power, b.radius);
                let u = a * (1.0 - y).powf(k);
                let d1 = -2.0 * a * k * r / (rr * rr) * (1.0 - y).powf(k - 1.0);
                let d2 = -2.0 * a * k / (rr * rr)
                    * ((1.0 - y).powf(k - 1.0) - 2.0 * (k - 1.0) * y * (1.0 - y).powf(k - 2.0));
                Ok((u, d1, d2))
            }
        }
    }

    /// `|U'(r)|`, available everywhere (no stencil restriction).
    pub fn abs_derivative(&self, r: f64) -> f64 {
        match self {
            Profile::Grid(g) => match g.derivatives(r) {
                Ok(d) => d.1.abs(),
                Err(_) => (g.log_slope(r) * g.value(r) / r).abs(),
            },
            other => other.derivatives(r).map(|d| d.1.abs()).unwrap_or(0.0),
        }
    }

    /// Behaviour of `U` at the origin and at infinity.
    pub fn value_asymptotes(&self) -> (Asymptote, Asymptote) {
        match self {
            Profile::PowerLaw(pl) => (Asymptote::Power(-pl.exponent), Asymptote::Power(-pl.exponent)),
            Profile::Grid(g) => (Asymptote::Power(-g.inner_exponent), Asymptote::Power(-g.tail_exponent)),
            Profile::Bubble(b) => (Asymptote::Power(0.0), Asymptote::Power(-b.m * b.k)),
            Profile::Bump(_) => (Asymptote::Power(0.0), Asymptote::Vanishes),
        }
    }

    /// Behaviour of `|U'|` at the origin and at infinity.
    pub fn derivative_asymptotes(&self) -> (Asymptote, Asymptote) {
        let from_sigma = |sigma: f64| {
            if sigma == 0.0 {
                Asymptote::Vanishes
            } else {
                Asymptote::Power(-sigma - 1.0)
            }
        };
        match self {
            Profile::PowerLaw(pl) => (from_sigma(pl.exponent), from_sigma(pl.exponent)),
            Profile::Grid(g) => (from_sigma(g.inner_exponent), from_sigma(g.tail_exponent)),
            Profile::Bubble(b) => (Asymptote::Power(b.m - 1.0), Asymptote::Power(-b.m * b.k - 1.0)),
            Profile::Bump(_) => (Asymptote::Power(1.0), Asymptote::Vanishes),
        }
    }

    /// Declared decay exponent at the origin (`U ~ r^{-sigma0}`).
    pub fn inner_exponent(&self) -> f64 {
        match self.value_asymptotes().0 {
            Asymptote::Power(e) => 0.0 - e,
            Asymptote::Vanishes => f64::INFINITY,
        }
    }

    /// Declared decay exponent at infinity; `+inf` for compact support.
    pub fn tail_exponent(&self) -> f64 {
        match self.value_asymptotes().1 {
            Asymptote::Power(e) => 0.0 - e,
            Asymptote::Vanishes => f64::INFINITY,
        }
    }

    /// Radius beyond which the profile vanishes identically.
    pub fn support(&self) -> f64 {
        match self {
            Profile::Bump(b) => b.radius,
            _ => f64::INFINITY,
        }
    }

    /// `u_λ(x) = λ^θ u(λ x)`, represented exactly in the same family.
    pub fn scaled(&self, lambda: f64, theta: f64) -> Profile {
        let f = lambda.powf(theta);
        match self {
            Profile::PowerLaw(pl) => Profile::PowerLaw(PowerLawProfile {
                coeff: pl.coeff * f * lambda.powf(-pl.exponent),
                exponent: pl.exponent,
            }),
            Profile::Grid(g) => Profile::Grid(g.scaled(lambda, theta)),
            Profile::Bubble(b) => Profile::Bubble(BubbleProfile {
                amplitude: b.amplitude * f,
                scale: b.scale * lambda,
                ..*b
            }),
            Profile::Bump(b) => Profile::Bump(BumpProfile {
                amplitude: b.amplitude * f,
                radius: b.radius / lambda,
                power: b.power,
            }),
        }
    }

    /// Samples onto a log grid, attaching exact log slopes where the
    /// profile is analytic. Fails for compactly supported profiles.
    pub fn to_grid(&self, lo: f64, hi: f64, per_decade: usize) -> Result<RadialProfile> {
        if let Profile::Grid(g) = self {
            return Ok(g.clone());
        }
        if hi > self.support() {
            return Err(Error::InvalidProfile("cannot sample past the support".into()));
        }
        let grid = log_grid(lo, hi, per_decade);
        let mut values = Vec::with_capacity(grid.len());
        let mut slopes = Vec::with_capacity(grid.len());
        for &r in &grid {
            let (u, d1, _) = self.derivatives(r)?;
            values.push(u);
            slopes.push(d1 * r / u);
        }
        RadialProfile::with_log_slopes(grid, values, slopes, self.inner_exponent(), self.tail_exponent())
    }

    /// Where radial quadrature should run and where power-law closures take
    /// over.
    pub(crate) fn window(&self) -> Window {
        match self {
            Profile::PowerLaw(_) => Window {
                lo: 1.0,
                hi: 1.0,
                breakpoints: vec![1.0],
            },
            Profile::Grid(g) => Window {
                lo: g.r_min(),
                hi: g.r_max(),
                breakpoints: g.grid.clone(),
            },
            Profile::Bubble(b) => {
                // the power-law closures are accurate once (scale r)^{±m} < 1e-13
                let spread = 10f64.powf((13.0 / b.m).min(200.0));
                let centre = 1.0 / b.scale;
                let lo = centre / spread;
                let hi = centre * spread;
                let mut breakpoints = vec![lo];
                let mut r = centre;
                while r / 1e4 > lo {
                    r /= 1e4;
                }
                while r < hi {
                    breakpoints.push(r);
                    r *= 1e4;
                }
                breakpoints.push(hi);
                Window {
                    lo,
                    hi,
                        breakpoints,
                }
            }
            Profile::Bump(b) => Window {
                // constant to relative order (lo/R)^2 below lo
                lo: 1e-8 * b.radius,
                hi: b.radius,
                breakpoints: vec![1e-8 * b.radius, 0.5 * b.radius, 0.9 * b.radius, b.radius],
            },
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Window {
    pub lo: f64,
    pub hi: f64,
    pub breakpoints: Vec<f64>,
}
