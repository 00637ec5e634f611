//! Run configuration: a TOML file with `[grid]`, `[params]`, `[solver]`,
//! `[forcing]`, `[output]`, `[norms]`, `[verify]` and `[sweep]` sections.
//! The schema is documented in `CONFIG.md`.

use std::f64::consts::PI;
use std::path::Path;

use oseen2d::besov::ThmParams;
use oseen2d::fixed_point::{InitialGuess, SolverConfig};
use oseen2d::oseen::QuadratureRule;
use oseen2d::Grid2;
use serde::{Deserialize, Deserializer, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    #[serde(default)]
    pub params: ParamsConfig,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub forcing: ForcingSpec,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub norms: NormsConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "L1", deserialize_with = "length")]
    pub l1: f64,
    #[serde(rename = "N1")]
    pub n1: usize,
    #[serde(rename = "L2", deserialize_with = "length")]
    pub l2: f64,
    #[serde(rename = "N2")]
    pub n2: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParamsConfig {
    pub alpha: f64,
    pub p1: f64,
    pub p2: f64,
    pub q: f64,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        Self { alpha: 1.0, p1: 2.0, p2: 2.0, q: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub tol: f64,
    pub max_iter: usize,
    pub quadrature: String,
    /// `zero` or `linear`.
    pub initial: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c0: Option<f64>,
    /// Enforce the admissible exponent window for `solve`.
    pub guarantee: bool,
    pub track_residual: bool,
    pub uniqueness_trials: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 200,
            quadrature: QuadratureRule::default().id().to_string(),
            initial: "zero".into(),
            c0: None,
            guarantee: true,
            track_residual: true,
            uniqueness_trials: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ForcingKind {
    GaussianTensor,
    RandomBand,
    FromFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ForcingSpec {
    pub kind: ForcingKind,
    pub amplitude: f64,
    pub seed: u64,
    /// Gaussian center `[x1, x2]`.
    pub center: [f64; 2],
    /// Gaussian width.
    pub width: f64,
    /// Dyadic cells `j` of the random-band generator.
    pub bands: Vec<i32>,
    /// x1 envelope width and center spread of the random-band generator.
    pub envelope: f64,
    pub spread: f64,
    /// Stem prefix of the four component dumps for `from-file`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    /// Rescale the generated forcing to this fraction of the gate threshold.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gate_fraction: Option<f64>,
}

impl Default for ForcingSpec {
    fn default() -> Self {
        Self {
            kind: ForcingKind::RandomBand,
            amplitude: 1.0,
            seed: 0,
            center: [0.0, 0.0],
            width: 1.0,
            bands: vec![-1, 0, 1, 2],
            envelope: 3.0,
            spread: 2.0,
            path: None,
            gate_fraction: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: String,
    /// Write binary field dumps next to the CSV reports.
    pub dumps: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: "out".into(), dumps: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormRole {
    D,
    S,
    #[serde(rename = "plain")]
    Plain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NormsConfig {
    /// Scalar field dump; the generated forcing when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    pub role: NormRole,
    /// Regularity for the `plain` role.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
}

impl Default for NormsConfig {
    fn default() -> Self {
        Self { field: None, role: NormRole::D, s: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub estimates: Vec<String>,
    pub seed: u64,
    pub count: usize,
    pub jlo: i32,
    pub jhi: i32,
    pub alphas: Vec<f64>,
    pub times: Vec<f64>,
    pub p: f64,
    pub p3: f64,
    /// Repeat every estimate on the grid refined once in both directions.
    pub refine: bool,
    /// Run the product estimate outside the window as an archive record.
    pub archive_outside_window: bool,
}

pub const ESTIMATE_IDS: [&str; 6] = ["band-multipliers", "linear", "linear-half", "product", "c0", "bony"];

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            estimates: ESTIMATE_IDS.iter().map(|s| s.to_string()).collect(),
            seed: 42,
            count: 16,
            jlo: -1,
            jhi: 3,
            alphas: vec![0.5, 1.0, 2.0, 4.0],
            times: vec![0.0, 0.5, 2.0, 8.0],
            p: 2.0,
            p3: 1.0,
            refine: false,
            archive_outside_window: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Solve,
    Linear,
    Norms,
    Verify,
    Sweep,
}

impl Command {
    pub fn id(&self) -> &'static str {
        match self {
            Self::Solve => "solve",
            Self::Linear => "linear",
            Self::Norms => "norms",
            Self::Verify => "verify",
            Self::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub command: Command,
    /// Empty means `[params.alpha]`.
    pub alphas: Vec<f64>,
    /// Empty means `[forcing.seed]`.
    pub seeds: Vec<u64>,
    /// Rescale the forcing dyadically with `lambda = alpha / params.alpha`.
    pub rescale: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { command: Command::Linear, alphas: Vec::new(), seeds: Vec::new(), rescale: false }
    }
}

/// Accepts a number or a string `"<k>pi"`.
fn length<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Int(i64),
        Text(String),
    }
    match Raw::deserialize(d)? {
        Raw::Num(v) => Ok(v),
        Raw::Int(v) => Ok(v as f64),
        Raw::Text(s) => parse_length(&s).ok_or_else(|| serde::de::Error::custom(format!("bad length '{s}'"))),
    }
}

pub fn parse_length(s: &str) -> Option<f64> {
    let t = s.trim();
    match t.strip_suffix("pi") {
        Some("") => Some(PI),
        Some(k) => k.trim().trim_end_matches('*').trim().parse::<f64>().ok().map(|k| k * PI),
        None => t.parse().ok(),
    }
}

/// 1-based line of `key` inside `[section]` of `src`, if present.
pub fn locate(src: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (n, line) in src.lines().enumerate() {
        let t = line.trim();
        if let Some(name) = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            current = name.trim().to_string();
            continue;
        }
        if current == section {
            if let Some((k, _)) = t.split_once('=') {
                if k.trim() == key {
                    return Some(n + 1);
                }
            }
        }
    }
    None
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let src = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&src, &path.display().to_string())
    }

    pub fn parse(src: &str, origin: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(src).map_err(|e| {
            let line = e
                .span()
                .map(|s| src[..s.start.min(src.len())].matches('\n').count() + 1);
            match line {
                Some(l) => CliError::Config(format!("{origin}:{l}: {}", e.message())),
                None => CliError::Config(format!("{origin}: {}", e.message())),
            }
        })?;
        cfg.validate(src, origin)?;
        Ok(cfg)
    }

    fn validate(&self, src: &str, origin: &str) -> Result<(), CliError> {
        let at = |section: &str, key: &str, msg: String| {
            let loc = locate(src, section, key).map_or(String::new(), |l| format!(":{l}"));
            CliError::Config(format!("{origin}{loc}: [{section}] {key}: {msg}"))
        };
        if let Err(e) = self.grid() {
            let key = if self.grid.n1 < 8 || !self.grid.n1.is_power_of_two() { "N1" } else { "N2" };
            return Err(at("grid", key, e.to_string()));
        }
        let p = &self.params;
        if !(p.alpha > 0.0 && p.alpha.is_finite()) {
            return Err(at("params", "alpha", format!("{} must be positive", p.alpha)));
        }
        for (k, v) in [("p1", p.p1), ("p2", p.p2), ("q", p.q)] {
            if !(v >= 1.0) {
                return Err(at("params", k, format!("{v} outside [1, inf]")));
            }
        }
        let s = &self.solver;
        if !(s.tol > 0.0) {
            return Err(at("solver", "tol", format!("{} must be positive", s.tol)));
        }
        if s.max_iter == 0 {
            return Err(at("solver", "max_iter", "must be at least 1".into()));
        }
        if QuadratureRule::from_id(&s.quadrature).is_none() {
            let ids: Vec<_> = QuadratureRule::ALL.iter().map(|r| r.id()).collect();
            return Err(at("solver", "quadrature", format!("unknown rule '{}', expected one of {ids:?}", s.quadrature)));
        }
        if !matches!(s.initial.as_str(), "zero" | "linear") {
            return Err(at("solver", "initial", format!("'{}' is not zero or linear", s.initial)));
        }
        if let Some(c0) = s.c0 {
            if !(c0 > 0.0 && c0.is_finite()) {
                return Err(at("solver", "c0", format!("{c0} must be positive")));
            }
        }
        let f = &self.forcing;
        if !f.amplitude.is_finite() {
            return Err(at("forcing", "amplitude", "must be finite".into()));
        }
        if !(f.width > 0.0) {
            return Err(at("forcing", "width", format!("{} must be positive", f.width)));
        }
        if !(f.envelope > 0.0 && f.spread >= 0.0) {
            return Err(at("forcing", "envelope", "envelope must be positive and spread nonnegative".into()));
        }
        if f.kind == ForcingKind::RandomBand && f.bands.is_empty() {
            return Err(at("forcing", "bands", "random-band needs at least one cell".into()));
        }
        if f.kind == ForcingKind::FromFile && f.path.is_none() {
            return Err(at("forcing", "kind", "from-file needs [forcing] path".into()));
        }
        if let Some(g) = f.gate_fraction {
            if !(g > 0.0 && g.is_finite()) {
                return Err(at("forcing", "gate_fraction", format!("{g} must be positive")));
            }
        }
        if self.norms.role == NormRole::Plain && self.norms.s.is_none() {
            return Err(at("norms", "role", "the plain role needs s".into()));
        }
        let v = &self.verify;
        for e in &v.estimates {
            if !ESTIMATE_IDS.contains(&e.as_str()) {
                return Err(at("verify", "estimates", format!("unknown estimate '{e}', expected one of {ESTIMATE_IDS:?}")));
            }
        }
        if v.count == 0 || v.jlo > v.jhi {
            return Err(at("verify", "count", "ensemble must be nonempty with jlo <= jhi".into()));
        }
        if v.alphas.is_empty() || v.alphas.iter().any(|a| !(*a > 0.0)) {
            return Err(at("verify", "alphas", "need at least one positive alpha".into()));
        }
        if v.times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return Err(at("verify", "times", "times must be finite and nonnegative".into()));
        }
        if self.sweep.command == Command::Sweep {
            return Err(at("sweep", "command", "a sweep cannot run sweeps".into()));
        }
        if self.sweep.alphas.iter().any(|a| !(*a > 0.0)) {
            return Err(at("sweep", "alphas", "alphas must be positive".into()));
        }
        if self.sweep.rescale {
            for &a in &self.sweep.alphas {
                if oseen2d::besov::dyadic_exponent(a / p.alpha).is_err() {
                    return Err(at("sweep", "alphas", format!("alpha {a} is not a dyadic multiple of {}", p.alpha)));
                }
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> oseen2d::Result<Grid2> {
        Grid2::new(self.grid.l1, self.grid.n1, self.grid.l2, self.grid.n2)
    }

    /// Exponents, window-checked when `checked`.
    pub fn thm_params(&self, checked: bool) -> Result<ThmParams, CliError> {
        let p = &self.params;
        if checked {
            ThmParams::new(p.p1, p.p2, p.q).map_err(CliError::from)
        } else {
            ThmParams::unchecked(p.p1, p.p2, p.q).map_err(CliError::from)
        }
    }

    pub fn quadrature(&self) -> QuadratureRule {
        QuadratureRule::from_id(&self.solver.quadrature).unwrap_or_default()
    }

    pub fn solver_config(&self, tp: ThmParams, c0: Option<f64>) -> Result<SolverConfig, CliError> {
        let mut cfg = SolverConfig::new(self.params.alpha, tp)?;
        cfg.tol = self.solver.tol;
        cfg.max_iter = self.solver.max_iter;
        cfg.c0_estimate = c0.or(self.solver.c0);
        cfg.quadrature = self.quadrature();
        cfg.track_residual = self.solver.track_residual;
        cfg.initial = if self.solver.initial == "linear" { InitialGuess::Linear } else { InitialGuess::Zero };
        cfg.validate()?;
        Ok(cfg)
    }

    /// SHA-256 of the canonical TOML rendering, output directory excluded.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output.dir = String::new();
        let text = toml::to_string(&c).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}
