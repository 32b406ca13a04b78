//! Parameter sweeps and figure presets, with deterministic CSV / JSON output.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fisher_single::{f_tot_coherence, f_tot_concurrence};
use crate::oracle::{numeric_qfim, numeric_weighted_fi, OracleConfig};
use crate::qfim::{
    precision, precision_concurrence, precision_gamma, qfim, qfim_concurrence, qfim_gamma,
    PrecisionPair, Qfim2,
};
use crate::state_model::{
    concurrence_max, concurrence_unnormalized, overlap, theta_from_concurrence, ModelParams,
};

/// Exact CSV header.
pub const CSV_HEADER: &str = "s,sigma,theta,gamma,C,d,f_tot,f_ss,f_tt,f_st,h_s,h_nuisance,status";

/// Largest oracle-vs-closed-form relative delta accepted by `verify` and `--oracle`.
pub const VERIFY_TOL: f64 = 1e-6;

/// Floor on the denominator of relative deltas, so elements that are exactly
/// zero analytically are compared in absolute terms.
const DELTA_FLOOR: f64 = 1e-3;

/// First separation used by the figure presets; every closed form is singular at `s = 0`.
pub const PRESET_S_MIN: f64 = 1e-3;
pub const PRESET_S_MAX: f64 = 5.0;
pub const PRESET_STEPS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Single-parameter Fisher information `F_tot`.
    Single,
    /// Two-parameter QFIM and nuisance-corrected precisions.
    Qfim,
    /// Closed-form QFIM against the grid oracle, in the `θ` chart.
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Nuisance {
    Theta,
    Concurrence,
    Coherence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Inclusive linear range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Range {
    pub fn new(min: f64, max: f64, steps: usize) -> Self {
        Self { min, max, steps }
    }

    pub fn point(value: f64) -> Self {
        Self {
            min: value,
            max: value,
            steps: 1,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.min];
        }
        let last = self.steps - 1;
        (0..self.steps)
            .map(|i| {
                if i == last {
                    self.max
                } else {
                    self.min + (self.max - self.min) * i as f64 / last as f64
                }
            })
            .collect()
    }

    fn validate(&self, what: &str) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::Usage(format!("{what}: steps must be >= 1")));
        }
        if !self.min.is_finite() || !self.max.is_finite() || self.min > self.max {
            return Err(Error::Usage(format!(
                "{what}: need finite min <= max (got {} .. {})",
                self.min, self.max
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub mode: Mode,
    pub nuisance: Nuisance,
    pub sigma: f64,
    pub phi: f64,
    pub s_range: Range,
    pub nuisance_range: Range,
    pub oracle: bool,
    pub oracle_config: OracleConfig,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(Error::Usage(format!(
                "sigma must be positive (got {})",
                self.sigma
            )));
        }
        if self.phi != 0.0 {
            return Err(Error::Usage(format!(
                "closed-form sweeps require phi = 0 (got {})",
                self.phi
            )));
        }
        self.s_range.validate("s range")?;
        self.nuisance_range.validate("nuisance range")?;
        if self.s_range.min < 0.0 {
            return Err(Error::Usage(format!(
                "s range must be nonnegative (got min {})",
                self.s_range.min
            )));
        }
        let (lo, hi) = (self.nuisance_range.min, self.nuisance_range.max);
        match self.nuisance {
            Nuisance::Theta if lo < 0.0 || hi > FRAC_PI_2 => {
                return Err(Error::Usage(format!(
                    "theta range must lie in [0, pi/2] (got {lo} .. {hi})"
                )))
            }
            Nuisance::Coherence if lo < 0.0 || hi > 1.0 => {
                return Err(Error::Usage(format!(
                    "coherence range must lie in [0, 1] (got {lo} .. {hi})"
                )))
            }
            Nuisance::Concurrence if lo < 0.0 || hi > 1.0 => {
                return Err(Error::Usage(format!(
                    "concurrence range must lie in [0, 1] (got {lo} .. {hi})"
                )))
            }
            _ => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    /// Requested concurrence exceeds `sqrt(1 - d²)` at this separation.
    OutOfReach,
    /// `s = 0`, where the closed forms are undefined.
    Degenerate,
    /// The nuisance coordinate is singular here (`γ = 1`, `C = C_max`); its entries are left empty.
    SingularChart,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::OutOfReach => "out_of_reach",
            Status::Degenerate => "degenerate",
            Status::SingularChart => "singular_chart",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub s: f64,
    pub sigma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_tot: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_ss: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_tt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_st: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_nuisance: Option<f64>,
    pub status: Status,
    /// Largest relative oracle delta at this point; JSON only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_max_rel_delta: Option<f64>,
}

impl SweepRecord {
    fn blank(s: f64, sigma: f64, status: Status) -> Self {
        Self {
            s,
            sigma,
            theta: None,
            gamma: None,
            c: None,
            d: None,
            f_tot: None,
            f_ss: None,
            f_tt: None,
            f_st: None,
            h_s: None,
            h_nuisance: None,
            status,
            oracle_max_rel_delta: None,
        }
    }

    fn with_qfim(mut self, f: &Qfim2, h: &PrecisionPair) -> Self {
        self.f_ss = finite(f.f_ss);
        self.f_tt = finite(f.f_tt);
        self.f_st = finite(f.f_st);
        self.h_s = finite(h.h_s);
        self.h_nuisance = finite(h.h_nuisance);
        if [f.f_ss, f.f_tt, f.f_st, h.h_nuisance]
            .iter()
            .any(|x| !x.is_finite())
        {
            self.status = Status::SingularChart;
        }
        self
    }
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn rel_delta(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(DELTA_FLOOR)
}

/// Resolves a nuisance value to `θ`; `None` when a concurrence is out of reach.
fn resolve_theta(nuisance: Nuisance, value: f64, s: f64, sigma: f64) -> Result<Option<f64>> {
    Ok(match nuisance {
        Nuisance::Theta => Some(value),
        Nuisance::Coherence => Some(value.acos()),
        Nuisance::Concurrence => {
            if value > concurrence_max(s, sigma)? * (1.0 + 1e-12) {
                None
            } else {
                Some(theta_from_concurrence(s, sigma, value)?)
            }
        }
    })
}

fn evaluate(spec: &SweepSpec, s: f64, value: f64) -> Result<SweepRecord> {
    let sigma = spec.sigma;
    let Some(theta) = resolve_theta(spec.nuisance, value, s, sigma)? else {
        let mut rec = SweepRecord::blank(s, sigma, Status::OutOfReach);
        rec.c = Some(value);
        rec.d = Some(overlap(s, sigma)?.d);
        return Ok(rec);
    };
    let p = ModelParams::real(s, sigma, theta)?;
    let mut rec = SweepRecord::blank(s, sigma, Status::Ok);
    rec.theta = Some(theta);
    rec.gamma = Some(match spec.nuisance {
        Nuisance::Coherence => value,
        _ => theta.cos(),
    });
    rec.c = Some(match spec.nuisance {
        Nuisance::Concurrence => value,
        _ => concurrence_unnormalized(&p),
    });
    rec.d = Some(overlap(s, sigma)?.d);

    match spec.mode {
        Mode::Single => {
            let fi = match spec.nuisance {
                Nuisance::Concurrence if s > 0.0 => f_tot_concurrence(s, sigma, value)?,
                Nuisance::Concurrence => {
                    rec.status = Status::Degenerate;
                    return Ok(rec);
                }
                _ => f_tot_coherence(s, sigma, rec.gamma.unwrap_or(1.0))?,
            };
            rec.f_tot = Some(fi.f_tot);
            if spec.oracle {
                let numeric = numeric_weighted_fi(&p, &spec.oracle_config)?;
                rec.oracle_max_rel_delta = Some(rel_delta(fi.f_tot, numeric));
            }
        }
        Mode::Qfim | Mode::Verify if s == 0.0 => {
            rec.status = Status::Degenerate;
        }
        Mode::Qfim => {
            let (f, h) = match spec.nuisance {
                Nuisance::Theta => (qfim(&p)?, precision(&p)?),
                Nuisance::Coherence => (
                    qfim_gamma(s, sigma, value)?,
                    precision_gamma(s, sigma, value)?,
                ),
                Nuisance::Concurrence => (
                    qfim_concurrence(s, sigma, value)?,
                    precision_concurrence(s, sigma, value)?,
                ),
            };
            rec = rec.with_qfim(&f, &h);
            if spec.oracle {
                rec.oracle_max_rel_delta = Some(oracle_delta(&p, &spec.oracle_config)?);
            }
        }
        Mode::Verify => {
            rec = rec.with_qfim(&qfim(&p)?, &precision(&p)?);
            rec.oracle_max_rel_delta = Some(oracle_delta(&p, &spec.oracle_config)?);
        }
    }
    Ok(rec)
}

/// Largest relative delta between the closed-form and oracle QFIM in the `θ` chart.
pub fn oracle_delta(p: &ModelParams, config: &OracleConfig) -> Result<f64> {
    let a = qfim(p)?;
    let n = numeric_qfim(p, config)?;
    Ok(rel_delta(a.f_ss, n.f_ss)
        .max(rel_delta(a.f_tt, n.f_tt))
        .max(rel_delta(a.f_st, n.f_st)))
}

/// Evaluates the Cartesian product of the two ranges, `s`-major.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRecord>> {
    spec.validate()?;
    let s_values = spec.s_range.values();
    let n_values = spec.nuisance_range.values();
    let points: Vec<(f64, f64)> = s_values
        .iter()
        .flat_map(|&s| n_values.iter().map(move |&v| (s, v)))
        .collect();
    points
        .par_iter()
        .map(|&(s, v)| evaluate(spec, s, v))
        .collect()
}

/// Runs several specs and concatenates their records in order.
pub fn run_all(specs: &[SweepSpec]) -> Result<Vec<SweepRecord>> {
    let mut out = Vec::new();
    for spec in specs {
        out.extend(run_sweep(spec)?);
    }
    Ok(out)
}

pub const PRESETS: [&str; 5] = ["fig1a", "fig1b", "fig1c", "fig2a", "fig2b"];

/// Sweep specifications reproducing the figure surfaces and lines.
///
/// `fig1a`/`fig2a` sweep concurrence and `fig1b`/`fig2b` coherence; `fig1c` holds
/// `s = 0.3` and runs one line in each.
pub fn figure_preset(name: &str) -> Result<Vec<SweepSpec>> {
    let base = |mode, nuisance, nuisance_range| SweepSpec {
        mode,
        nuisance,
        sigma: 1.0,
        phi: 0.0,
        s_range: Range::new(PRESET_S_MIN, PRESET_S_MAX, PRESET_STEPS),
        nuisance_range,
        oracle: false,
        oracle_config: OracleConfig::default(),
    };
    let unit = Range::new(0.0, 1.0, PRESET_STEPS);
    Ok(match name {
        "fig1a" => vec![base(Mode::Single, Nuisance::Concurrence, unit)],
        "fig1b" => vec![base(Mode::Single, Nuisance::Coherence, unit)],
        "fig1c" => {
            let s = 0.3;
            let c_max = concurrence_max(s, 1.0)?;
            vec![
                SweepSpec {
                    s_range: Range::point(s),
                    ..base(Mode::Single, Nuisance::Coherence, unit)
                },
                SweepSpec {
                    s_range: Range::point(s),
                    ..base(
                        Mode::Single,
                        Nuisance::Concurrence,
                        Range::new(0.0, c_max, PRESET_STEPS),
                    )
                },
            ]
        }
        "fig2a" => vec![base(Mode::Qfim, Nuisance::Concurrence, unit)],
        "fig2b" => vec![base(Mode::Qfim, Nuisance::Coherence, unit)],
        other => {
            return Err(Error::Usage(format!(
                "unknown preset '{other}'; available: {}",
                PRESETS.join(", ")
            )))
        }
    })
}

fn csv_field(out: &mut String, v: Option<f64>) {
    if let Some(x) = v {
        write!(out, "{x:.16e}").expect("write to String");
    }
    out.push(',');
}

/// Renders records; CSV numbers carry 17 significant digits.
pub fn render(records: &[SweepRecord], format: Format) -> Result<String> {
    match format {
        Format::Csv => {
            let mut out = String::with_capacity(records.len() * 256);
            out.push_str(CSV_HEADER);
            out.push('\n');
            for r in records {
                for v in [
                    Some(r.s),
                    Some(r.sigma),
                    r.theta,
                    r.gamma,
                    r.c,
                    r.d,
                    r.f_tot,
                    r.f_ss,
                    r.f_tt,
                    r.f_st,
                    r.h_s,
                    r.h_nuisance,
                ] {
                    csv_field(&mut out, v);
                }
                out.push_str(r.status.as_str());
                out.push('\n');
            }
            Ok(out)
        }
        Format::Json => {
            let mut out = serde_json::to_string_pretty(records)?;
            out.push('\n');
            Ok(out)
        }
    }
}

/// Writes rendered records to `destination`, or stdout when `None`.
pub fn emit(records: &[SweepRecord], format: Format, destination: Option<&Path>) -> Result<()> {
    let text = render(records, format)?;
    match destination {
        Some(path) => std::fs::write(path, text).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())
                .and_then(|_| lock.flush())
                .map_err(|source| Error::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

/// Largest oracle delta across records, if the oracle ran.
pub fn max_oracle_delta(records: &[SweepRecord]) -> Option<f64> {
    records
        .iter()
        .filter_map(|r| r.oracle_max_rel_delta)
        .fold(None, |acc, x| Some(acc.map_or(x, |a: f64| a.max(x))))
}
