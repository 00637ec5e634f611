//! Picard iteration for the mild solution `u = D[F - u (x) u]`, with the
//! smallness gate and the uniqueness and Lipschitz probes.

use log::{info, warn};

use crate::besov::{data_norm_d, solution_norm_s, HybridContext, ThmParams};
use crate::ensemble::EnsembleSpec;
use crate::error::{Error, Result};
use crate::field::{TensorForcing, VectorField};
use crate::littlewood_paley::DyadicProfile;
use crate::oseen::oracle::{nonlinear_forcing, pde_residual};
use crate::oseen::kernels::assemble_d_quiet;
use crate::oseen::{assemble_d, OseenConfig, QuadratureRule};

/// Consecutive growth steps after which the iteration is declared divergent.
pub const DIVERGENCE_STREAK: usize = 5;

/// Where the iteration starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialGuess {
    #[default]
    Zero,
    /// `u0 = D[F]`, one iteration ahead of `Zero`.
    Linear,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub alpha: f64,
    pub tp: ThmParams,
    pub tol: f64,
    pub max_iter: usize,
    pub c0_estimate: Option<f64>,
    pub quadrature: QuadratureRule,
    pub initial: InitialGuess,
    /// Record the PDE residual of every iterate (costs four 2D FFT passes).
    pub track_residual: bool,
}

impl SolverConfig {
    pub fn new(alpha: f64, tp: ThmParams) -> Result<Self> {
        let cfg = Self {
            alpha,
            tp,
            tol: 1e-10,
            max_iter: 200,
            c0_estimate: None,
            quadrature: QuadratureRule::default(),
            initial: InitialGuess::Zero,
            track_residual: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        HybridContext::new(self.alpha)?;
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tol = {} must be positive", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
        }
        if let Some(c0) = self.c0_estimate {
            if !(c0 > 0.0 && c0.is_finite()) {
                return Err(Error::InvalidParameter(format!("C0 estimate {c0} must be positive")));
            }
        }
        Ok(())
    }

    pub fn oseen(&self) -> Result<OseenConfig> {
        OseenConfig::new(self.alpha, self.quadrature)
    }

    pub fn ctx(&self) -> HybridContext {
        HybridContext { alpha: self.alpha }
    }

    /// Radius `1 / (4 C0)` of the uniqueness ball.
    pub fn uniqueness_radius(&self) -> Option<f64> {
        self.c0_estimate.map(|c| 0.25 / c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    /// Reached the tolerance, but the difference norms did not decay
    /// monotonically on the way.
    NonMonotone,
    Diverged,
    MaxIter,
}

impl SolveStatus {
    pub fn id(&self) -> &'static str {
        match self {
            Self::Converged => "converged",
            Self::NonMonotone => "converged-nonmonotone",
            Self::Diverged => "diverged",
            Self::MaxIter => "max_iter",
        }
    }

    pub fn reached_tol(&self) -> bool {
        matches!(self, Self::Converged | Self::NonMonotone)
    }
}

/// One iterate `u^n`, `n >= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub n: usize,
    pub s_norm: f64,
    /// `|| u^n - u^{n-1} ||_S`.
    pub diff: f64,
    /// `diff_n / diff_{n-1}`, absent for the first iterate or a zero divisor.
    pub ratio: Option<f64>,
    /// PDE residual of `u^n`, when tracked.
    pub residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationReport {
    pub records: Vec<IterationRecord>,
    pub status: SolveStatus,
    pub data_norm: f64,
}

impl IterationReport {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    /// Largest ratio among iterates `n >= from`.
    pub fn max_ratio_from(&self, from: usize) -> Option<f64> {
        self.records
            .iter()
            .filter(|r| r.n >= from)
            .filter_map(|r| r.ratio)
            .reduce(f64::max)
    }

    pub fn max_s_norm(&self) -> f64 {
        self.records.iter().map(|r| r.s_norm).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    /// The converged field; `None` unless the tolerance was reached.
    pub solution: Option<VectorField>,
    /// The last iterate, whatever the status.
    pub last: VectorField,
    pub report: IterationReport,
}

/// `Phi[u] = D[F - u (x) u]`.
pub fn picard_map(f: &TensorForcing, u: &VectorField, oseen: &OseenConfig) -> Result<VectorField> {
    if u.is_zero() {
        return assemble_d(f, oseen);
    }
    assemble_d_quiet(&nonlinear_forcing(f, u)?, oseen)
}

pub fn picard_solve(f: &TensorForcing, cfg: &SolverConfig) -> Result<SolveOutcome> {
    let start = match cfg.initial {
        InitialGuess::Zero => VectorField::zeros(*f.grid()),
        InitialGuess::Linear => assemble_d(f, &cfg.oseen()?)?,
    };
    picard_solve_from(f, cfg, start)
}

/// Picard iteration from an explicit starting field.
pub fn picard_solve_from(f: &TensorForcing, cfg: &SolverConfig, start: VectorField) -> Result<SolveOutcome> {
    cfg.validate()?;
    let oseen = cfg.oseen()?;
    let ctx = cfg.ctx();
    let profile = DyadicProfile;
    let data_norm = data_norm_d(f, &cfg.tp, &ctx, &profile)?;
    let mut u = start;
    let mut records: Vec<IterationRecord> = Vec::new();
    let mut growth = 0;
    let mut monotone = true;
    let mut status = SolveStatus::MaxIter;
    for n in 1..=cfg.max_iter {
        let next = picard_map(f, &u, &oseen)?;
        let diff = solution_norm_s(&next.minus(&u)?, &cfg.tp, &ctx, &profile)?;
        let s_norm = solution_norm_s(&next, &cfg.tp, &ctx, &profile)?;
        let prev = records.last().map(|r| r.diff);
        let ratio = prev.and_then(|p| if p > 0.0 { Some(diff / p) } else { None });
        if let Some(p) = prev {
            if diff > p {
                growth += 1;
                monotone = false;
            } else {
                growth = 0;
            }
        }
        let residual = if cfg.track_residual {
            Some(pde_residual(&next, f, cfg.alpha, true)?)
        } else {
            None
        };
        records.push(IterationRecord { n, s_norm, diff, ratio, residual });
        u = next;
        if diff <= cfg.tol {
            status = if monotone { SolveStatus::Converged } else { SolveStatus::NonMonotone };
            break;
        }
        if growth >= DIVERGENCE_STREAK || !diff.is_finite() {
            status = SolveStatus::Diverged;
            break;
        }
    }
    match status {
        SolveStatus::Diverged => warn!("Picard iteration diverged after {} steps", records.len()),
        SolveStatus::MaxIter => warn!("Picard iteration hit max_iter = {}", cfg.max_iter),
        _ => info!("Picard iteration {} after {} steps", status.id(), records.len()),
    }
    let report = IterationReport { records, status, data_norm };
    Ok(SolveOutcome {
        solution: status.reached_tol().then(|| u.clone()),
        last: u,
        report,
    })
}

/// Relative PDE residual of `u` against `F` (see [`pde_residual`]).
pub fn residual(u: &VectorField, f: &TensorForcing, cfg: &SolverConfig) -> Result<f64> {
    pde_residual(u, f, cfg.alpha, true)
}

/// `|| u - D[F - u (x) u] ||_S`, the defect of the mild-solution identity.
pub fn mild_identity_defect(u: &VectorField, f: &TensorForcing, cfg: &SolverConfig) -> Result<f64> {
    let phi = picard_map(f, u, &cfg.oseen()?)?;
    solution_norm_s(&u.minus(&phi)?, &cfg.tp, &cfg.ctx(), &DyadicProfile)
}

/// Outcome of the smallness test `||F||_D <= 1 / (8 C0^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateReport {
    pub data_norm: f64,
    /// `None` when no constant was supplied and the gate was skipped.
    pub threshold: Option<f64>,
    pub pass: Option<bool>,
    /// `threshold / data_norm` (infinite for zero data).
    pub margin: Option<f64>,
}

impl GateReport {
    pub fn passed(&self) -> bool {
        self.pass == Some(true)
    }
}

/// Relative slack treating a data norm within a few ulps of the threshold
/// as on it.
pub const GATE_ULPS: f64 = 4.0 * f64::EPSILON;

pub fn gate_threshold(c0: f64) -> f64 {
    1.0 / (8.0 * c0 * c0)
}

pub fn check_smallness(f: &TensorForcing, cfg: &SolverConfig) -> Result<GateReport> {
    let data_norm = data_norm_d(f, &cfg.tp, &cfg.ctx(), &DyadicProfile)?;
    let Some(c0) = cfg.c0_estimate else {
        warn!("no C0 estimate supplied; smallness gate skipped");
        return Ok(GateReport { data_norm, threshold: None, pass: None, margin: None });
    };
    let threshold = gate_threshold(c0);
    let margin = if data_norm == 0.0 { f64::INFINITY } else { threshold / data_norm };
    Ok(GateReport {
        data_norm,
        threshold: Some(threshold),
        pass: Some(data_norm <= threshold * (1.0 + GATE_ULPS)),
        margin: Some(margin),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniquenessTrial {
    pub initial_norm: f64,
    pub distance: f64,
    pub iterations: usize,
    pub status: SolveStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniquenessReport {
    pub radius: f64,
    pub tolerance: f64,
    pub trials: Vec<UniquenessTrial>,
}

impl UniquenessReport {
    pub fn violations(&self) -> usize {
        self.trials
            .iter()
            .filter(|t| !t.status.reached_tol() || t.distance > self.tolerance)
            .count()
    }
}

/// Restarts the iteration from `trials` random fields inside the ball of
/// radius `1 / (4 C0)` and measures the distance of every endpoint to
/// `baseline`.
pub fn uniqueness_probe(
    f: &TensorForcing,
    cfg: &SolverConfig,
    baseline: &VectorField,
    trials: usize,
    seed: u64,
) -> Result<UniquenessReport> {
    let radius = cfg
        .uniqueness_radius()
        .ok_or_else(|| Error::Gate("uniqueness probe needs a C0 estimate".into()))?;
    let tolerance = 100.0 * cfg.tol;
    let grid = *f.grid();
    let range = crate::littlewood_paley::BandRange::for_grid(&grid);
    let ens = EnsembleSpec::new(seed, trials.max(1), range.jmin + 1, (range.jmax - 2).max(range.jmin + 1));
    let ctx = cfg.ctx();
    let mut out = Vec::with_capacity(trials);
    for t in 0..trials {
        let raw = ens.vector(&grid, t);
        let norm = solution_norm_s(&raw, &cfg.tp, &ctx, &DyadicProfile)?;
        // fractions spread over (0.3, 0.9) of the radius
        let frac = 0.3 + 0.6 * (t as f64 + 0.5) / trials as f64;
        let start = raw.scaled(frac * radius / norm);
        let initial_norm = solution_norm_s(&start, &cfg.tp, &ctx, &DyadicProfile)?;
        let outcome = picard_solve_from(f, cfg, start)?;
        let distance = solution_norm_s(&outcome.last.minus(baseline)?, &cfg.tp, &ctx, &DyadicProfile)?;
        out.push(UniquenessTrial {
            initial_norm,
            distance,
            iterations: outcome.report.iterations(),
            status: outcome.report.status,
        });
    }
    Ok(UniquenessReport { radius, tolerance, trials: out })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LipschitzStatus {
    IdenticalInputs,
    Ratio(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzReport {
    pub status: LipschitzStatus,
    pub solution_distance: f64,
    pub data_distance: f64,
}

/// `|| u_F - u_G ||_S / || F - G ||_D` for two gated data.
pub fn lipschitz_probe(f: &TensorForcing, g: &TensorForcing, cfg: &SolverConfig) -> Result<LipschitzReport> {
    for (name, x) in [("F", f), ("G", g)] {
        let gate = check_smallness(x, cfg)?;
        if !gate.passed() {
            return Err(Error::Gate(format!(
                "{name} fails the smallness gate (||.||_D = {:e}, threshold {:?})",
                gate.data_norm, gate.threshold
            )));
        }
    }
    let data_distance = data_norm_d(&f.minus(g)?, &cfg.tp, &cfg.ctx(), &DyadicProfile)?;
    if data_distance == 0.0 {
        return Ok(LipschitzReport {
            status: LipschitzStatus::IdenticalInputs,
            solution_distance: 0.0,
            data_distance,
        });
    }
    let solve = |x: &TensorForcing| -> Result<VectorField> {
        let out = picard_solve(x, cfg)?;
        out.solution.ok_or_else(|| {
            Error::Gate(format!("iteration ended with status {}", out.report.status.id()))
        })
    };
    let uf = solve(f)?;
    let ug = solve(g)?;
    let solution_distance = solution_norm_s(&uf.minus(&ug)?, &cfg.tp, &cfg.ctx(), &DyadicProfile)?;
    Ok(LipschitzReport {
        status: LipschitzStatus::Ratio(solution_distance / data_distance),
        solution_distance,
        data_distance,
    })
}
