//! Config-driven experiment runner behind the `condibeam` binary.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::cat::{
    beta_from_measured, cat_norm_and_prob, chi_state, measured_from_beta, multi_cat_ln_norm,
    multi_cat_state, scheme_a, scheme_a_oracle, scheme_b_state, CatSpec,
};
use crate::conditional::{y_displaced_fock, BeamSplitterParams};
use crate::error::Error;
use crate::fock::{displacement_op, fock_state, FockVector, TruncationPolicy};
use crate::oracle::{conditional_reduce, oracle_y, photon_counting_povm, TwoModeState};
use crate::phase_space::{
    husimi, husimi_chi_closed, husimi_multi_cat_closed, quadrature_chi_closed, quadrature_map, wigner_cat_closed,
    wigner_numeric, Axis, GridFunction, IntegrationSpec,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    YMatrix,
    SchemeA,
    SchemeB,
    MultiCat,
    QGrid,
    WignerGrid,
    QuadratureGrid,
    ProbScan,
    PovmDemo,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 9] = [
        ExperimentKind::YMatrix,
        ExperimentKind::SchemeA,
        ExperimentKind::SchemeB,
        ExperimentKind::MultiCat,
        ExperimentKind::QGrid,
        ExperimentKind::WignerGrid,
        ExperimentKind::QuadratureGrid,
        ExperimentKind::ProbScan,
        ExperimentKind::PovmDemo,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::YMatrix => "y-matrix",
            ExperimentKind::SchemeA => "scheme-a",
            ExperimentKind::SchemeB => "scheme-b",
            ExperimentKind::MultiCat => "multi-cat",
            ExperimentKind::QGrid => "q-grid",
            ExperimentKind::WignerGrid => "wigner-grid",
            ExperimentKind::QuadratureGrid => "quadrature-grid",
            ExperimentKind::ProbScan => "prob-scan",
            ExperimentKind::PovmDemo => "povm-demo",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| ConfigError::new("experiment", format!("unknown experiment `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Csv,
    JsonLike,
}

impl FromStr for OutputFormat {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json-like" | "json" => Ok(OutputFormat::JsonLike),
            _ => Err(ConfigError::new("format", format!("expected csv or json-like, got `{s}`"))),
        }
    }
}

/// Field-level configuration problem.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error in `{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Domain(Error),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => e.fmt(f),
            RunError::Domain(e) => write!(f, "domain error: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Domain(e)
    }
}

/// Parses `"re+imi"`, `"re-imi"`, `"re"` or `"imi"`.
pub fn parse_complex(text: &str) -> Option<C64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return None;
    }
    let Some(body) = s.strip_suffix('i') else {
        return s.parse().ok().map(|re| C64::new(re, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (body[..k].parse().ok()?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        v => v.parse().ok()?,
    };
    Some(C64::new(re, im))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexValue(pub C64);

impl<'de> Deserialize<'de> for ComplexValue {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(ComplexValue(C64::new(x, 0.0))),
            Raw::Text(s) => parse_complex(&s)
                .map(ComplexValue)
                .ok_or_else(|| serde::de::Error::custom(format!("`{s}` is not a complex number of the form re+imi"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateChoice {
    Chi,
    MultiCat,
}

fn default_cutoff() -> usize {
    48
}
fn default_tail_tol() -> f64 {
    TruncationPolicy::DEFAULT_TAIL_TOL
}
fn default_theta() -> f64 {
    std::f64::consts::FRAC_PI_4
}
fn default_one() -> usize {
    1
}
fn default_eta() -> f64 {
    1.0
}
fn default_n_max() -> usize {
    12
}
fn default_beta_sq_per_n() -> f64 {
    0.5
}

/// Parameters of one run. Every key is optional except where an experiment
/// needs it; unknown keys are rejected.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<String>,
    #[serde(default = "default_cutoff")]
    pub cutoff: usize,
    #[serde(default = "default_tail_tol")]
    pub tail_tol: f64,
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default)]
    pub phi_t: f64,
    #[serde(default)]
    pub phi_r: f64,
    #[serde(default)]
    pub m: usize,
    #[serde(default = "default_one")]
    pub n: usize,
    #[serde(default = "default_one")]
    pub k: usize,
    /// Displacement of the reference input (y-matrix).
    pub alpha: Option<ComplexValue>,
    /// Cat amplitude, or the measured displacement for y-matrix.
    pub beta: Option<ComplexValue>,
    /// Measured displacement `β′`; overrides `beta` in scheme a.
    pub beta_prime: Option<ComplexValue>,
    #[serde(default = "default_eta")]
    pub eta: f64,
    pub state: Option<StateChoice>,
    pub axis1: Option<AxisSpec>,
    pub axis2: Option<AxisSpec>,
    #[serde(default)]
    pub phi: f64,
    pub step: Option<f64>,
    pub half_range: Option<f64>,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default = "default_beta_sq_per_n")]
    pub beta_sq_per_n: f64,
    pub out: Option<String>,
    pub format: Option<OutputFormat>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            let field = msg
                .split('`')
                .nth(1)
                .filter(|_| msg.starts_with("unknown field"))
                .unwrap_or("config")
                .to_string();
            ConfigError::new(field, msg)
        })
    }

    fn policy(&self) -> Result<TruncationPolicy, ConfigError> {
        TruncationPolicy::new(self.cutoff, self.tail_tol)
            .map_err(|e| ConfigError::new("cutoff", e.to_string()))
    }

    fn beam_splitter(&self) -> Result<BeamSplitterParams, ConfigError> {
        for (name, v) in [("theta", self.theta), ("phi_t", self.phi_t), ("phi_r", self.phi_r)] {
            if !v.is_finite() {
                return Err(ConfigError::new(name, "must be finite"));
            }
        }
        BeamSplitterParams::from_angles(self.theta, self.phi_t, self.phi_r)
            .map_err(|e| ConfigError::new("theta", e.to_string()))
    }

    fn cat_beta(&self) -> C64 {
        self.beta
            .map(|b| b.0)
            .unwrap_or_else(|| C64::new((self.n as f64 / 2.0).sqrt(), 0.0))
    }

    fn axis(&self, slot: &str, name: &str) -> Result<Axis, ConfigError> {
        let spec = match slot {
            "axis1" => self.axis1,
            _ => self.axis2,
        }
        .ok_or_else(|| ConfigError::new(slot, "required for grid experiments"))?;
        if spec.points > 2001 {
            return Err(ConfigError::new(slot, "at most 2001 points per axis"));
        }
        Axis::new(name, spec.min, spec.max, spec.points).map_err(|e| ConfigError::new(slot, e.to_string()))
    }

    /// Range checks for `kind`, run before any computation.
    pub fn validate(&self, kind: ExperimentKind) -> Result<(), ConfigError> {
        if let Some(e) = &self.experiment {
            if e != kind.as_str() {
                return Err(ConfigError::new(
                    "experiment",
                    format!("config is for `{e}` but `{kind}` was requested"),
                ));
            }
        }
        let policy = self.policy()?;
        self.beam_splitter()?;
        let c = policy.cutoff();
        let limit = |field: &str, v: usize, max: usize| {
            if v > max {
                Err(ConfigError::new(field, format!("{v} exceeds {max} at cutoff {c}")))
            } else {
                Ok(())
            }
        };
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("beta_prime", self.beta_prime)] {
            if let Some(v) = v {
                if !(v.0.re.is_finite() && v.0.im.is_finite()) {
                    return Err(ConfigError::new(name, "must be finite"));
                }
            }
        }
        let balanced = |cfg: &Self| {
            if (cfg.theta - std::f64::consts::FRAC_PI_4).abs() > 1e-12 {
                Err(ConfigError::new("theta", "this scheme needs a balanced splitter, theta = pi/4"))
            } else {
                Ok(())
            }
        };
        match kind {
            ExperimentKind::YMatrix => {
                limit("m", self.m, c / 4)?;
                limit("n", self.n, c / 4)?;
            }
            ExperimentKind::SchemeA => limit("n", self.n, c / 4)?,
            ExperimentKind::SchemeB => {
                balanced(self)?;
                limit("n", self.n, c / 4)?;
            }
            ExperimentKind::MultiCat | ExperimentKind::QGrid => {
                if self.k == 0 {
                    return Err(ConfigError::new("k", "must be at least 1"));
                }
                if kind == ExperimentKind::MultiCat || self.state == Some(StateChoice::MultiCat) {
                    limit("n", self.n * self.k, c / 2)?;
                } else {
                    limit("n", self.n, c)?;
                }
                self.axis("axis1", "re")?;
                self.axis("axis2", "im")?;
            }
            ExperimentKind::WignerGrid => {
                limit("n", self.n, c)?;
                self.axis("axis1", "x")?;
                self.axis("axis2", "p")?;
                if let Some(h) = self.step {
                    if !(h > 0.0 && h <= 0.02) {
                        return Err(ConfigError::new("step", "must lie in (0, 0.02]"));
                    }
                }
                if let Some(l) = self.half_range {
                    if !(l.is_finite() && l > 0.0) {
                        return Err(ConfigError::new("half_range", "must be positive"));
                    }
                }
            }
            ExperimentKind::QuadratureGrid => {
                limit("n", self.n, c)?;
                self.axis("axis1", "x")?;
                if self.axis2.is_some() {
                    self.axis("axis2", "phi")?;
                } else if !self.phi.is_finite() {
                    return Err(ConfigError::new("phi", "must be finite"));
                }
            }
            ExperimentKind::ProbScan => {
                limit("n_max", self.n_max, c / 4)?;
                if !(self.beta_sq_per_n.is_finite() && self.beta_sq_per_n >= 0.0) {
                    return Err(ConfigError::new("beta_sq_per_n", "must be nonnegative"));
                }
            }
            ExperimentKind::PovmDemo => {
                limit("n", self.n, c / 4)?;
                if !(self.eta > 0.0 && self.eta <= 1.0) {
                    return Err(ConfigError::new("eta", "detector efficiency must lie in (0, 1]"));
                }
            }
        }
        Ok(())
    }
}

/// Output of one run. `config` is the raw config text, byte for byte.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultEnvelope {
    pub experiment: String,
    pub version: String,
    pub config: String,
    pub scalars: BTreeMap<String, f64>,
    pub vectors: BTreeMap<String, Vec<f64>>,
    #[serde(skip)]
    pub grid: Option<GridFunction>,
    #[serde(skip)]
    pub duration_ms: f64,
}

#[derive(Serialize)]
struct GridPayload<'a> {
    kind: &'a str,
    axis1: (&'a str, f64, f64, usize),
    axis2: (&'a str, f64, f64, usize),
    values: &'a [f64],
}

#[derive(Serialize)]
struct Rendered<'a> {
    #[serde(flatten)]
    envelope: &'a ResultEnvelope,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid: Option<GridPayload<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    duration_ms: Option<f64>,
}

fn axis_tuple(a: &Axis) -> (&str, f64, f64, usize) {
    (a.name(), a.min(), a.max(), a.points())
}

impl ResultEnvelope {
    fn new(kind: ExperimentKind, raw: &str) -> Self {
        Self {
            experiment: kind.as_str().to_string(),
            version: VERSION.to_string(),
            config: raw.to_string(),
            scalars: BTreeMap::new(),
            vectors: BTreeMap::new(),
            grid: None,
            duration_ms: 0.0,
        }
    }

    fn scalar(&mut self, name: &str, v: f64) {
        self.scalars.insert(name.to_string(), v);
    }

    fn vector(&mut self, name: &str, v: Vec<f64>) {
        self.vectors.insert(name.to_string(), v);
    }

    /// Structured text rendering. The wall-clock duration is left out unless
    /// `timing` is set, so identical configs give identical bytes.
    pub fn to_json(&self, timing: bool) -> String {
        let grid = self.grid.as_ref().map(|g| GridPayload {
            kind: g.kind().as_str(),
            axis1: axis_tuple(g.axis1()),
            axis2: axis_tuple(g.axis2()),
            values: g.values(),
        });
        let r = Rendered {
            envelope: self,
            grid,
            duration_ms: timing.then_some(self.duration_ms),
        };
        let mut s = serde_json::to_string_pretty(&r).expect("envelope serializes");
        s.push('\n');
        s
    }

    /// The grid as CSV when present, otherwise `name,value` lines.
    pub fn to_csv(&self) -> String {
        if let Some(g) = &self.grid {
            return g.to_csv();
        }
        let mut s = String::new();
        for (k, v) in &self.scalars {
            s.push_str(&format!("{k},{v}\n"));
        }
        for (k, vs) in &self.vectors {
            let joined: Vec<String> = vs.iter().map(|v| v.to_string()).collect();
            s.push_str(&format!("{k},{}\n", joined.join(",")));
        }
        s
    }

    pub fn render(&self, format: OutputFormat, timing: bool) -> String {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::JsonLike => self.to_json(timing),
        }
    }
}

fn split(v: &FockVector, upto: usize) -> (Vec<f64>, Vec<f64>) {
    v.amps()[..=upto.min(v.cutoff())].iter().map(|a| (a.re, a.im)).unzip()
}

/// Parses `raw`, validates it for `kind` and runs the experiment.
pub fn run_text(kind: ExperimentKind, raw: &str) -> Result<ResultEnvelope, RunError> {
    let cfg = ExperimentConfig::parse(raw)?;
    run(kind, &cfg, raw)
}

pub fn run(kind: ExperimentKind, cfg: &ExperimentConfig, raw: &str) -> Result<ResultEnvelope, RunError> {
    cfg.validate(kind)?;
    let start = Instant::now();
    let policy = cfg.policy()?;
    let bs = cfg.beam_splitter()?;
    let mut env = ResultEnvelope::new(kind, raw);
    match kind {
        ExperimentKind::YMatrix => y_matrix(cfg, &bs, &policy, &mut env)?,
        ExperimentKind::SchemeA => scheme_a_run(cfg, &bs, &policy, &mut env)?,
        ExperimentKind::SchemeB => scheme_b_run(cfg, &bs, &policy, &mut env)?,
        ExperimentKind::MultiCat => multi_cat_run(cfg, &policy, &mut env)?,
        ExperimentKind::QGrid => q_grid(cfg, &policy, &mut env)?,
        ExperimentKind::WignerGrid => wigner_grid(cfg, &policy, &mut env)?,
        ExperimentKind::QuadratureGrid => quadrature_grid(cfg, &policy, &mut env)?,
        ExperimentKind::ProbScan => prob_scan(cfg, &bs, &policy, &mut env)?,
        ExperimentKind::PovmDemo => povm_demo(cfg, &bs, &policy, &mut env)?,
    }
    env.duration_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(env)
}

fn y_matrix(
    cfg: &ExperimentConfig,
    bs: &BeamSplitterParams,
    policy: &TruncationPolicy,
    env: &mut ResultEnvelope,
) -> Result<(), RunError> {
    let alpha = cfg.alpha.map_or(C64::new(0.0, 0.0), |a| a.0);
    let beta = cfg.beta.map_or(C64::new(0.0, 0.0), |b| b.0);
    let y = y_displaced_fock(cfg.m, cfg.n, alpha, beta, bs, policy)?;
    let reference = oracle_y(
        &crate::conditional::ReferencePrep::displaced_fock(cfg.m, alpha),
        &crate::conditional::ReferencePrep::displaced_fock(cfg.n, beta),
        bs,
        policy,
    )?;
    let safe = policy.safe_levels();
    env.scalar("oracle_rel_diff", y.rel_diff_on_block(&reference, safe));
    env.scalar("safe_levels", safe as f64);
    env.scalar("spectral_norm_safe_block", y.spectral_norm_on_block(safe));
    let shown = safe.min(8);
    env.scalar("block_levels", shown as f64);
    let (mut re, mut im) = (Vec::new(), Vec::new());
    for p in 0..shown {
        for q in 0..shown {
            let e = y.matrix()[(p, q)];
            re.push(e.re);
            im.push(e.im);
        }
    }
    env.vector("block_re", re);
    env.vector("block_im", im);
    Ok(())
}

fn scheme_a_run(
    cfg: &ExperimentConfig,
    bs: &BeamSplitterParams,
    policy: &TruncationPolicy,
    env: &mut ResultEnvelope,
) -> Result<(), RunError> {
    let beta_prime = match cfg.beta_prime {
        Some(b) => b.0,
        None => measured_from_beta(cfg.cat_beta(), bs),
    };
    let out = scheme_a(cfg.n, beta_prime, bs, policy)?;
    let spec = CatSpec::new(cfg.n, beta_from_measured(beta_prime, bs));
    let chi = chi_state(&spec, policy)?;
    let (norm, p_closed) = cat_norm_and_prob(&spec);
    let oracle = scheme_a_oracle(cfg.n, beta_prime, bs, policy)?;
    env.scalar("probability", out.probability);
    env.scalar("probability_closed_form", p_closed);
    env.scalar("probability_oracle", oracle.probability);
    env.scalar("cat_norm", norm);
    env.scalar("fidelity_chi", out.state.fidelity(&chi)?);
    env.scalar("fidelity_oracle", out.state.fidelity(&oracle.state)?);
    env.scalar("mean_photon_number", out.state.mean_photon_number());
    env.scalar("beta_re", spec.beta.re);
    env.scalar("beta_im", spec.beta.im);
    let (re, im) = split(&chi, cfg.n);
    env.vector("chi_re", re);
    env.vector("chi_im", im);
    Ok(())
}

fn scheme_b_run(
    cfg: &ExperimentConfig,
    bs: &BeamSplitterParams,
    policy: &TruncationPolicy,
    env: &mut ResultEnvelope,
) -> Result<(), RunError> {
    let spec = CatSpec::new(cfg.n, cfg.cat_beta());
    let out = scheme_b_state(&spec, bs, policy)?;
    let displaced = displacement_op(spec.beta, policy)?.apply(&chi_state(&spec, policy)?)?;
    let (_, p_closed) = cat_norm_and_prob(&spec);
    env.scalar("probability", out.probability);
    env.scalar("probability_closed_form", p_closed);
    env.scalar("fidelity_displaced_chi", out.state.fidelity(&displaced)?);
    env.scalar("mean_photon_number", out.state.mean_photon_number());
    Ok(())
}

fn multi_cat_spec(cfg: &ExperimentConfig) -> Result<CatSpec, RunError> {
    Ok(CatSpec::multi(cfg.n, cfg.cat_beta(), cfg.k)?)
}

fn multi_cat_run(cfg: &ExperimentConfig, policy: &TruncationPolicy, env: &mut ResultEnvelope) -> Result<(), RunError> {
    let spec = multi_cat_spec(cfg)?;
    let state = multi_cat_state(&spec, policy)?;
    let (a1, a2) = (cfg.axis("axis1", "re")?, cfg.axis("axis2", "im")?);
    let closed = husimi_multi_cat_closed(&spec, &a1, &a2);
    let numeric = husimi(&state, &a1, &a2);
    env.scalar("ln_norm", multi_cat_ln_norm(&spec));
    env.scalar("mean_photon_number", state.mean_photon_number());
    env.scalar("closed_form_max_diff", closed.max_abs_diff(&numeric)?);
    env.scalar("integral", numeric.integrate());
    peaks(&numeric, env);
    env.grid = Some(numeric);
    Ok(())
}

fn peaks(g: &GridFunction, env: &mut ResultEnvelope) {
    let found = g.local_maxima(0.2);
    env.scalar("peak_count", found.len() as f64);
    env.vector("peak_axis1", found.iter().map(|p| p.0).collect());
    env.vector("peak_axis2", found.iter().map(|p| p.1).collect());
    env.vector("peak_value", found.iter().map(|p| p.2).collect());
}

fn q_grid(cfg: &ExperimentConfig, policy: &TruncationPolicy, env: &mut ResultEnvelope) -> Result<(), RunError> {
    let (a1, a2) = (cfg.axis("axis1", "re")?, cfg.axis("axis2", "im")?);
    let (state, closed) = match cfg.state.unwrap_or(StateChoice::Chi) {
        StateChoice::Chi => {
            let spec = CatSpec::new(cfg.n, cfg.cat_beta());
            (chi_state(&spec, policy)?, husimi_chi_closed(&spec, &a1, &a2))
        }
        StateChoice::MultiCat => {
            let spec = multi_cat_spec(cfg)?;
            (multi_cat_state(&spec, policy)?, husimi_multi_cat_closed(&spec, &a1, &a2))
        }
    };
    let q = husimi(&state, &a1, &a2);
    env.scalar("closed_form_max_diff", closed.max_abs_diff(&q)?);
    env.scalar("integral", q.integrate());
    peaks(&q, env);
    env.grid = Some(q);
    Ok(())
}

fn wigner_grid(cfg: &ExperimentConfig, policy: &TruncationPolicy, env: &mut ResultEnvelope) -> Result<(), RunError> {
    let (ax, ap) = (cfg.axis("axis1", "x")?, cfg.axis("axis2", "p")?);
    let spec = CatSpec::new(cfg.n, cfg.cat_beta());
    let chi = chi_state(&spec, policy)?;
    let mut integ = IntegrationSpec::default();
    if let Some(h) = cfg.step {
        integ.step = h;
    }
    integ.half_range = cfg.half_range;
    let w = wigner_numeric(&chi, &ax, &ap, &integ)?;
    let closed = wigner_cat_closed(&spec, &ax, &ap)?;
    env.scalar("closed_form_max_diff", closed.max_abs_diff(&w)?);
    env.scalar("integral", w.integrate());
    env.scalar("minimum", w.values().iter().copied().fold(f64::INFINITY, f64::min));
    env.scalar("maximum", w.argmax().2);
    env.grid = Some(w);
    Ok(())
}

fn quadrature_grid(cfg: &ExperimentConfig, policy: &TruncationPolicy, env: &mut ResultEnvelope) -> Result<(), RunError> {
    let ax = cfg.axis("axis1", "x")?;
    let aphi = if cfg.axis2.is_some() {
        cfg.axis("axis2", "phi")?
    } else {
        Axis::single("phi", cfg.phi)
    };
    let spec = CatSpec::new(cfg.n, cfg.cat_beta());
    let chi = chi_state(&spec, policy)?;
    let map = quadrature_map(&chi, &ax, &aphi);
    let closed = quadrature_chi_closed(&spec, &ax, &aphi);
    env.scalar("closed_form_max_diff", closed.max_abs_diff(&map)?);
    let w = ax.step();
    let per_phi: Vec<f64> = (0..aphi.points())
        .map(|j| {
            let col: Vec<f64> = (0..ax.points()).map(|i| map.value(i, j)).collect();
            w * (col.iter().sum::<f64>() - 0.5 * (col[0] + col[col.len() - 1]))
        })
        .collect();
    env.vector("integral_per_phi", per_phi);
    env.grid = Some(map);
    Ok(())
}

fn prob_scan(
    cfg: &ExperimentConfig,
    bs: &BeamSplitterParams,
    policy: &TruncationPolicy,
    env: &mut ResultEnvelope,
) -> Result<(), RunError> {
    let (mut ns, mut closed, mut numeric) = (Vec::new(), Vec::new(), Vec::new());
    let mut worst = 0.0f64;
    for n in 0..=cfg.n_max {
        let beta = C64::new((cfg.beta_sq_per_n * n as f64).sqrt(), 0.0);
        let (_, p) = cat_norm_and_prob(&CatSpec::new(n, beta));
        let out = scheme_a(n, measured_from_beta(beta, bs), bs, policy)?;
        worst = worst.max((out.probability - p).abs());
        ns.push(n as f64);
        closed.push(p);
        numeric.push(out.probability);
    }
    env.scalar("max_abs_diff", worst);
    env.vector("n", ns);
    env.vector("probability_closed_form", closed);
    env.vector("probability", numeric);
    Ok(())
}

fn povm_demo(
    cfg: &ExperimentConfig,
    bs: &BeamSplitterParams,
    policy: &TruncationPolicy,
    env: &mut ResultEnvelope,
) -> Result<(), RunError> {
    let beta_prime = match cfg.beta_prime {
        Some(b) => b.0,
        None => measured_from_beta(cfg.cat_beta(), bs),
    };
    let povm = photon_counting_povm(cfg.eta, policy)?;
    let dim = policy.dim();
    let mut total = crate::CMatrix::zeros(dim, dim);
    for e in povm.elements() {
        total += e.matrix();
    }
    let completeness = (total - crate::CMatrix::identity(dim, dim)).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let d = displacement_op(beta_prime, policy)?;
    let element = povm
        .element(cfg.n)
        .ok_or(Error::CutoffExceeded { n: cfg.n, cutoff: policy.cutoff() })?;
    let displaced = d.compose(element)?.compose(&d.adjoint())?;
    let input = TwoModeState::product(&fock_state(cfg.n, policy)?, &fock_state(0, policy)?)?;
    let (rho, p) = conditional_reduce(&input, &displaced, bs, policy)?;
    let spec = CatSpec::new(cfg.n, beta_from_measured(beta_prime, bs));
    let (_, p_ideal) = cat_norm_and_prob(&spec);
    env.scalar("completeness_error", completeness);
    env.scalar("probability", p);
    env.scalar("probability_ideal_detector", p_ideal);
    env.scalar("purity", rho.purity());
    env.scalar("fidelity_chi", rho.overlap_with_pure(&chi_state(&spec, policy)?)?);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_parsing() {
        assert_eq!(parse_complex("1.5+0.25i"), Some(C64::new(1.5, 0.25)));
        assert_eq!(parse_complex("-1-2i"), Some(C64::new(-1.0, -2.0)));
        assert_eq!(parse_complex("2.5"), Some(C64::new(2.5, 0.0)));
        assert_eq!(parse_complex("-0.5i"), Some(C64::new(0.0, -0.5)));
        assert_eq!(parse_complex("i"), Some(C64::new(0.0, 1.0)));
        assert_eq!(parse_complex("1e-3+2E+1i"), Some(C64::new(1e-3, 20.0)));
        assert_eq!(parse_complex(" 3 - 4i "), Some(C64::new(3.0, -4.0)));
        assert_eq!(parse_complex("abc"), None);
        assert_eq!(parse_complex("1+2j"), None);
        assert_eq!(parse_complex(""), None);
    }

    #[test]
    fn unknown_keys_are_errors() {
        let e = ExperimentConfig::parse("n = 2\nbetta = \"1+0i\"\n").unwrap_err();
        assert_eq!(e.field, "betta");
        let e = ExperimentConfig::parse("beta = \"1+2x\"\n").unwrap_err();
        assert!(e.message.contains("re+imi"));
    }

    #[test]
    fn validation_runs_first() {
        let cfg = ExperimentConfig::parse("n = 20\ncutoff = 32\n").unwrap();
        let e = cfg.validate(ExperimentKind::SchemeA).unwrap_err();
        assert_eq!(e.field, "n");
        let cfg = ExperimentConfig::parse("experiment = \"scheme-b\"\n").unwrap();
        assert_eq!(cfg.validate(ExperimentKind::SchemeA).unwrap_err().field, "experiment");
        let cfg = ExperimentConfig::parse("n = 2\n").unwrap();
        assert_eq!(cfg.validate(ExperimentKind::QGrid).unwrap_err().field, "axis1");
        let cfg = ExperimentConfig::parse("eta = 1.5\n").unwrap();
        assert_eq!(cfg.validate(ExperimentKind::PovmDemo).unwrap_err().field, "eta");
        let cfg = ExperimentConfig::parse("theta = 0.5\n").unwrap();
        assert_eq!(cfg.validate(ExperimentKind::SchemeB).unwrap_err().field, "theta");
    }

    #[test]
    fn scheme_a_envelope() {
        let raw = "n = 1\nbeta_prime = \"0.7071067811865476+0i\"\ncutoff = 16\n";
        let env = run_text(ExperimentKind::SchemeA, raw).unwrap();
        assert_eq!(env.config, raw);
        assert!((env.scalars["probability"] - 0.2274).abs() < 5e-5);
        assert!((env.scalars["fidelity_chi"] - 1.0).abs() < 1e-10);
        assert_eq!(env.vectors["chi_re"].len(), 2);
        let again = run_text(ExperimentKind::SchemeA, raw).unwrap();
        assert_eq!(env.to_json(false), again.to_json(false));
        assert!(!env.to_json(false).contains("duration_ms"));
        assert!(env.to_json(true).contains("duration_ms"));
    }

    #[test]
    fn domain_errors_surface() {
        let raw = "n = 2\ncutoff = 8\nbeta = \"6+0i\"\ntheta = 0.7853981633974483\n";
        match run_text(ExperimentKind::SchemeB, raw) {
            Err(RunError::Domain(_)) => {}
            other => panic!("expected a domain error, got {other:?}"),
        }
    }

    #[test]
    fn grid_csv_output() {
        let raw = "n = 2\ncutoff = 16\naxis1 = { min = -2.0, max = 2.0, points = 5 }\naxis2 = { min = -2.0, max = 2.0, points = 5 }\n";
        let env = run_text(ExperimentKind::QGrid, raw).unwrap();
        let csv = env.render(OutputFormat::Csv, false);
        assert!(csv.starts_with("# axis1 re -2 2 5\n# axis2 im -2 2 5\n# kind husimi\n"));
        assert_eq!(csv.lines().count(), 3 + 25);
        assert!(env.scalars["closed_form_max_diff"] < 1e-12);
    }

    #[test]
    fn every_experiment_runs_on_a_small_config() {
        let plane = "axis1 = { min = -3.0, max = 3.0, points = 7 }\naxis2 = { min = -3.0, max = 3.0, points = 7 }\n";
        let quad = "axis1 = { min = -6.0, max = 6.0, points = 121 }\naxis2 = { min = 0.0, max = 3.0, points = 4 }\n";
        for kind in ExperimentKind::ALL {
            let grid = match kind {
                ExperimentKind::MultiCat | ExperimentKind::QGrid | ExperimentKind::WignerGrid => plane,
                ExperimentKind::QuadratureGrid => quad,
                _ => "",
            };
            let raw = format!("n = 2\ncutoff = 24\nn_max = 4\neta = 0.8\n{grid}");
            let env = run_text(kind, &raw).unwrap_or_else(|e| panic!("{kind}: {e}"));
            assert_eq!(env.experiment, kind.as_str());
        }
    }
}
