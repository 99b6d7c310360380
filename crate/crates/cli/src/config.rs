//! Run configuration: JSON schema, validation and sweep expansion.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_path_to_error::Segment;
use spinbath::compiler::Level;
use spinbath::echo::{uniform_times, Method};
use spinbath::ed::SectorRule;
use spinbath::model::{Geometry, PeriodicConvention};
use spinbath::{Chain, Coupling};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Uniform time grid of `steps` points on `[0, t_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_max: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
}

fn default_steps() -> usize {
    2001
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self { t_max: 50.0, steps: default_steps() }
    }
}

impl TimeGrid {
    pub fn times(&self) -> Vec<f64> {
        uniform_times(self.t_max, self.steps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParam {
    #[serde(rename = "lambda")]
    Lambda,
    #[serde(rename = "gamma")]
    Gamma,
    #[serde(rename = "delta")]
    Delta,
    #[serde(rename = "epsilon")]
    Epsilon,
    #[serde(rename = "m")]
    M,
    #[serde(rename = "N")]
    N,
}

impl SweepParam {
    pub fn label(&self) -> &'static str {
        match self {
            SweepParam::Lambda => "lambda",
            SweepParam::Gamma => "gamma",
            SweepParam::Delta => "delta",
            SweepParam::Epsilon => "epsilon",
            SweepParam::M => "m",
            SweepParam::N => "N",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

/// Settings read only by particular subcommands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Analysis {
    /// Trotter step for `method = trotter`.
    pub dt: f64,
    /// Short-time rate fits use `fit_points` uniform points on `[0, fit_t_max]`.
    pub fit_t_max: f64,
    pub fit_points: usize,
    /// Critical field for the log-divergence fit of an alpha scan over lambda.
    pub lambda_c: Option<f64>,
    /// Half-width around `lambda_c` left out of that fit.
    pub exclusion: f64,
    /// Window searched for the echo minimum; defaults to `[0, N/2]`.
    pub minimum_window: Option<(f64, f64)>,
    pub coarse_step: f64,
    /// Power `n` in `|cos(eps t)|^{n/2}`; defaults to the number of linked sites.
    pub exponent: Option<usize>,
    /// Trotter steps of a compiled schedule.
    pub n_steps: usize,
    /// Step counts compared by `verify`.
    pub verify_steps: Vec<usize>,
    pub level: Level,
}

impl Default for Analysis {
    fn default() -> Self {
        Self {
            dt: 0.01,
            fit_t_max: 0.1,
            fit_points: 41,
            lambda_c: None,
            exclusion: 0.0,
            minimum_window: None,
            coarse_step: 0.5,
            exponent: None,
            n_steps: 10,
            verify_steps: vec![10, 20, 40, 80],
            level: Level::Step,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub model: Chain,
    pub coupling: Coupling,
    #[serde(default)]
    pub time: TimeGrid,
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    /// Ground-state tie-break for the dense engines.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sector: Option<SectorRule>,
    #[serde(default)]
    pub convention: PeriodicConvention,
    #[serde(default)]
    pub analysis: Analysis,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

fn default_method() -> Method {
    Method::Determinant
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

/// One evaluation point of a (possibly trivial) sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub index: usize,
    /// Swept value, `None` without a sweep.
    pub value: Option<f64>,
    pub chain: Chain,
    pub coupling: Coupling,
}

impl RunConfig {
    pub fn new(model: Chain, coupling: Coupling) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            model,
            coupling,
            time: TimeGrid::default(),
            method: default_method(),
            sweep: None,
            output: default_output(),
            threads: None,
            sector: None,
            convention: PeriodicConvention::default(),
            analysis: Analysis::default(),
        }
    }

    pub fn with_sweep(mut self, param: SweepParam, values: Vec<f64>) -> Self {
        self.sweep = Some(Sweep { param, values });
        self
    }

    pub fn with_time(mut self, t_max: f64, steps: usize) -> Self {
        self.time = TimeGrid { t_max, steps };
        self
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    /// Parses and validates a JSON config; errors carry a JSON pointer to the offending field.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: RunConfig = serde_path_to_error::deserialize(de)
            .map_err(|e| CliError::config(json_pointer(e.path()), e.inner().to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config("", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::config(
                "/schema_version",
                format!("unsupported schema version {} (expected {SCHEMA_VERSION})", self.schema_version),
            ));
        }
        if !(self.time.t_max.is_finite() && self.time.t_max >= 0.0) {
            return Err(CliError::config("/time/t_max", "must be finite and non-negative"));
        }
        if self.time.steps < 2 {
            return Err(CliError::config("/time/steps", "at least 2 time points required"));
        }
        if self.threads == Some(0) {
            return Err(CliError::config("/threads", "must be positive"));
        }
        self.model.validate().map_err(|e| CliError::config("/model", e.to_string()))?;
        self.coupling
            .resolve_sites(&self.model)
            .map_err(|e| CliError::config("/coupling", e.to_string()))?;
        let a = &self.analysis;
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(a.dt) {
            return Err(CliError::config("/analysis/dt", "must be positive"));
        }
        if !positive(a.fit_t_max) {
            return Err(CliError::config("/analysis/fit_t_max", "must be positive"));
        }
        if a.fit_points < 3 {
            return Err(CliError::config("/analysis/fit_points", "at least 3 points required"));
        }
        if !positive(a.coarse_step) {
            return Err(CliError::config("/analysis/coarse_step", "must be positive"));
        }
        if !(a.exclusion.is_finite() && a.exclusion >= 0.0) {
            return Err(CliError::config("/analysis/exclusion", "must be finite and non-negative"));
        }
        if let Some((lo, hi)) = a.minimum_window {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(CliError::config("/analysis/minimum_window", "need finite lo < hi"));
            }
        }
        if a.n_steps == 0 {
            return Err(CliError::config("/analysis/n_steps", "must be positive"));
        }
        if a.verify_steps.is_empty() || a.verify_steps.contains(&0) {
            return Err(CliError::config("/analysis/verify_steps", "need positive step counts"));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(CliError::config("/sweep/values", "empty sweep"));
            }
            if let Some(i) = sweep.values.iter().position(|v| !v.is_finite()) {
                return Err(CliError::config(format!("/sweep/values/{i}"), "value must be finite"));
            }
        }
        self.points().map(|_| ())
    }

    /// Expands the sweep; without one, the base model is the single point.
    pub fn points(&self) -> Result<Vec<Point>> {
        match &self.sweep {
            None => Ok(vec![Point { index: 0, value: None, chain: self.model, coupling: self.coupling.clone() }]),
            Some(sweep) => sweep
                .values
                .iter()
                .enumerate()
                .map(|(index, &v)| {
                    let (chain, coupling) = self.apply(sweep.param, v, index)?;
                    Ok(Point { index, value: Some(v), chain, coupling })
                })
                .collect(),
        }
    }

    fn apply(&self, param: SweepParam, value: f64, index: usize) -> Result<(Chain, Coupling)> {
        let at = format!("/sweep/values/{index}");
        let count = || -> Result<usize> {
            if value >= 1.0 && value.fract() == 0.0 {
                Ok(value as usize)
            } else {
                Err(CliError::config(&at, format!("{} must be a positive integer, got {value}", param.label())))
            }
        };
        let mut chain = self.model;
        let mut coupling = self.coupling.clone();
        match param {
            SweepParam::Lambda => chain = chain.with_lambda(value),
            SweepParam::Gamma => chain = chain.with_gamma(value),
            SweepParam::Delta => chain = chain.with_delta(value),
            SweepParam::Epsilon => coupling = coupling.with_epsilon(value),
            SweepParam::M => {
                if coupling.geometry == Geometry::Explicit {
                    return Err(CliError::config("/coupling/geometry", "sweeping m needs geometry A or B"));
                }
                coupling.m = count()?;
            }
            SweepParam::N => {
                let n = count()?;
                // a coupling that links every site keeps doing so
                let links_all = self.coupling.resolve_sites(&self.model).is_ok_and(|s| s.len() == self.model.n);
                chain = chain.with_n(n);
                if links_all {
                    if coupling.geometry == Geometry::Explicit {
                        coupling.sites = (1..=n).collect();
                    }
                    coupling.m = n;
                }
            }
        }
        chain.validate().map_err(|e| CliError::config(&at, e.to_string()))?;
        coupling.resolve_sites(&chain).map_err(|e| CliError::config(&at, e.to_string()))?;
        Ok((chain, coupling))
    }

    /// Sector rule for a point: the configured one, else even parity at `delta = 0` and max `S^z` otherwise.
    pub fn sector_for(&self, chain: &Chain) -> SectorRule {
        self.sector.unwrap_or(if chain.delta == 0.0 { SectorRule::EvenParity } else { SectorRule::MaxSz })
    }

    pub fn fit_times(&self) -> Vec<f64> {
        uniform_times(self.analysis.fit_t_max, self.analysis.fit_points)
    }
}

fn json_pointer(path: &serde_path_to_error::Path) -> String {
    let mut out = String::new();
    for segment in path.iter() {
        out.push('/');
        match segment {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    out
}
