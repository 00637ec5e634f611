//! The five subcommands. Each writes its artifacts into an output directory
//! and returns a one-row summary that `sweep` collects.

use std::fs;
use std::path::Path;

use log::{info, warn};
use oseen2d::besov::{
    data_norm_from_bands, lq_aggregate, rescale_tensor, solution_norm_from_bands, solution_norm_s,
    weight, BandDecomposition, HybridContext, ThmParams,
};
use oseen2d::ensemble::EnsembleSpec;
use oseen2d::estimates::{self, ConstantReport};
use oseen2d::fixed_point::{check_smallness, picard_solve, uniqueness_probe, SolveStatus};
use oseen2d::littlewood_paley::is_high;
use oseen2d::oseen::{assemble_d, divergence_defect, interior_relative_error, oseen_oracle, pde_residual};
use oseen2d::{dump, DyadicProfile, Grid2, TensorForcing};

use crate::config::{Command, GridConfig, NormRole, RunConfig};
use crate::error::CliError;
use crate::forcing::{generate_forcing, Generated};
use crate::output::{num, opt, read_rows, Csv, OutDir, Provenance};

/// Ordered key/value summary of one run.
pub type Summary = Vec<(String, String)>;

fn entry(k: &str, v: impl ToString) -> (String, String) {
    (k.to_string(), v.to_string())
}

/// Everything a subcommand needs besides its config.
pub struct Job<'a> {
    pub cfg: &'a RunConfig,
    pub out: &'a Path,
    /// Summary CSV written by `verify`, providing the gate constant.
    pub gate: Option<&'a Path>,
}

pub fn run(cmd: Command, job: &Job) -> Result<Summary, CliError> {
    match cmd {
        Command::Solve => solve(job),
        Command::Linear => linear(job, None),
        Command::Norms => norms(job, None),
        Command::Verify => verify(job),
        Command::Sweep => sweep(job),
    }
}

/// Reads the `c0` row of a summary written by `verify`.
pub fn read_gate(path: &Path) -> Result<f64, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("--gate {}: {e}", path.display())))?;
    let (header, rows) = read_rows(&text);
    let col = header
        .iter()
        .position(|h| h == "sup")
        .ok_or_else(|| CliError::Config(format!("--gate {}: no sup column", path.display())))?;
    let row = rows
        .iter()
        .find(|r| r.first().map(String::as_str) == Some("c0"))
        .ok_or_else(|| CliError::Config(format!("--gate {}: no c0 row; run verify with the c0 estimate", path.display())))?;
    row.get(col)
        .and_then(|v| v.parse::<f64>().ok())
        .filter(|v| *v > 0.0 && v.is_finite())
        .ok_or_else(|| CliError::Config(format!("--gate {}: bad c0 value", path.display())))
}

fn c0_of(job: &Job) -> Result<Option<f64>, CliError> {
    match job.gate {
        Some(p) => read_gate(p).map(Some),
        None => Ok(job.cfg.solver.c0),
    }
}

fn provenance(job: &Job, cmd: Command, grid: Grid2) -> Provenance {
    Provenance::new(cmd.id(), &job.cfg.hash(), grid).with("seed", job.cfg.forcing.seed)
}

/// Generated forcing, optionally rescaled onto a fraction of the gate.
fn forcing(job: &Job, tp: &ThmParams, c0: Option<f64>) -> Result<Generated, CliError> {
    let grid = job.cfg.grid()?;
    let mut g = generate_forcing(&job.cfg.forcing, &grid)?;
    if let Some(frac) = job.cfg.forcing.gate_fraction {
        let c0 = c0.ok_or_else(|| CliError::Config("[forcing] gate_fraction needs a C0 (--gate or [solver] c0)".into()))?;
        let ctx = HybridContext::new(job.cfg.params.alpha)?;
        let d = oseen2d::besov::data_norm_d(&g.forcing, tp, &ctx, &DyadicProfile)?;
        if d > 0.0 {
            g.forcing = g.forcing.scaled(frac * oseen2d::fixed_point::gate_threshold(c0) / d);
        }
    }
    Ok(g)
}

pub fn solve(job: &Job) -> Result<Summary, CliError> {
    let (summary, status) = solve_with(job, None)?;
    match status {
        SolveStatus::Diverged => Err(CliError::Diverged("Picard iteration diverged".into())),
        SolveStatus::MaxIter => Err(CliError::Diverged(format!(
            "Picard iteration did not converge in {} steps",
            job.cfg.solver.max_iter
        ))),
        _ => Ok(summary),
    }
}

fn solve_with(job: &Job, given: Option<Generated>) -> Result<(Summary, SolveStatus), CliError> {
    let cfg = job.cfg;
    let tp = cfg.thm_params(cfg.solver.guarantee)?;
    let c0 = c0_of(job)?;
    let gen = match given {
        Some(g) => g,
        None => forcing(job, &tp, c0)?,
    };
    let f = &gen.forcing;
    let grid = *f.grid();
    let scfg = cfg.solver_config(tp, c0)?;
    let out = OutDir::create(job.out, cfg.output.dumps)?;
    let prov = provenance(job, Command::Solve, grid).with("discarded_mean", num(gen.discarded_mean));

    let gate = check_smallness(f, &scfg)?;
    let mut gcsv = Csv::new(&["data_norm", "threshold", "pass", "margin", "c0"]);
    gcsv.row(vec![
        num(gate.data_norm),
        opt(gate.threshold),
        gate.pass.map(|p| p.to_string()).unwrap_or_else(|| "skipped".into()),
        opt(gate.margin),
        opt(scfg.c0_estimate),
    ]);
    gcsv.write(&out.path("gate.csv"), &prov)?;
    if gate.pass == Some(false) {
        return Err(CliError::Admissibility(format!(
            "||F||_D = {:e} exceeds the smallness bound 1/(8 C0^2) = {:e}",
            gate.data_norm,
            gate.threshold.unwrap_or(f64::NAN)
        )));
    }
    if gate.pass.is_none() {
        warn!("no C0 available; running without the smallness guarantee");
    }

    let outcome = picard_solve(f, &scfg)?;
    let rep = &outcome.report;
    let mut csv = Csv::new(&["n", "s_norm", "diff", "ratio", "residual"]);
    for r in &rep.records {
        csv.row(vec![r.n.to_string(), num(r.s_norm), num(r.diff), opt(r.ratio), opt(r.residual)]);
    }
    let prov = prov.with("status", rep.status.id());
    csv.write(&out.path("iterations.csv"), &prov)?;
    out.tensor("forcing", f, &prov)?;
    out.vector("solution", &outcome.last, &prov)?;

    let mut uniq = String::new();
    if cfg.solver.uniqueness_trials > 0 && rep.status.reached_tol() && scfg.c0_estimate.is_some() {
        let r = uniqueness_probe(f, &scfg, &outcome.last, cfg.solver.uniqueness_trials, cfg.forcing.seed)?;
        let mut ucsv = Csv::new(&["trial", "initial_norm", "distance", "iterations", "status"]);
        for (i, t) in r.trials.iter().enumerate() {
            ucsv.row(vec![i.to_string(), num(t.initial_norm), num(t.distance), t.iterations.to_string(), t.status.id().into()]);
        }
        ucsv.write(&out.path("uniqueness.csv"), &prov.clone().with("radius", num(r.radius)))?;
        uniq = r.violations().to_string();
    }

    let last = rep.last();
    let summary = vec![
        entry("status", rep.status.id()),
        entry("iterations", rep.iterations()),
        entry("data_norm", num(rep.data_norm)),
        entry("s_norm", num(last.map_or(0.0, |r| r.s_norm))),
        entry("residual", opt(last.and_then(|r| r.residual))),
        entry("gate_margin", opt(gate.margin)),
        entry("uniqueness_violations", uniq),
    ];
    info!("solve: {} after {} iterations", rep.status.id(), rep.iterations());
    Ok((summary, rep.status))
}

pub fn linear(job: &Job, given: Option<Generated>) -> Result<Summary, CliError> {
    let cfg = job.cfg;
    let tp = cfg.thm_params(false)?;
    let gen = match given {
        Some(g) => g,
        None => forcing(job, &tp, c0_of(job)?)?,
    };
    let f = &gen.forcing;
    let alpha = cfg.params.alpha;
    let oseen = oseen2d::oseen::OseenConfig::new(alpha, cfg.quadrature())?;
    let u = assemble_d(f, &oseen)?;
    let v = oseen_oracle(f, &oseen)?;
    let ctx = HybridContext::new(alpha)?;
    let d = oseen2d::besov::data_norm_d(f, &tp, &ctx, &DyadicProfile)?;
    let s = solution_norm_s(&u, &tp, &ctx, &DyadicProfile)?;
    let err = interior_relative_error(&u, &v)?;
    let res = pde_residual(&u, f, alpha, false)?;
    let div = divergence_defect(&u);

    let out = OutDir::create(job.out, cfg.output.dumps)?;
    let prov = provenance(job, Command::Linear, *f.grid()).with("discarded_mean", num(gen.discarded_mean));
    let mut csv = Csv::new(&["alpha", "data_norm", "s_norm", "oracle_error", "pde_residual", "divergence_defect", "boundary_ratio"]);
    csv.row(vec![num(alpha), num(d), num(s), num(err), num(res), num(div), num(gen.boundary_ratio)]);
    csv.write(&out.path("linear.csv"), &prov)?;
    out.tensor("forcing", f, &prov)?;
    out.vector("linear", &u, &prov)?;
    info!("linear: oracle agreement {err:e}, residual {res:e}");
    Ok(vec![
        entry("data_norm", num(d)),
        entry("s_norm", num(s)),
        entry("oracle_error", num(err)),
        entry("pde_residual", num(res)),
    ])
}

pub fn norms(job: &Job, given: Option<Generated>) -> Result<Summary, CliError> {
    let cfg = job.cfg;
    let p = &cfg.params;
    let tp = cfg.thm_params(false)?;
    let ctx = HybridContext::new(p.alpha)?;
    let (dec, grid, source, unresolved) = match (&cfg.norms.field, given) {
        (Some(stem), _) => {
            let (_, f) = dump::read_scalar(Path::new(stem)).map_err(|e| CliError::Config(format!("[norms] field {stem}: {e}")))?;
            let frac = oseen2d::besov::unresolved_fraction(&f);
            (BandDecomposition::new(&f, &DyadicProfile), *f.grid(), stem.clone(), frac)
        }
        (None, g) => {
            let g = match g {
                Some(g) => g,
                None => forcing(job, &tp, c0_of(job)?)?,
            };
            let f: TensorForcing = g.forcing;
            let frac = oseen2d::besov::unresolved_fraction(&f);
            (BandDecomposition::new(&f, &DyadicProfile), *f.grid(), "generated".to_string(), frac)
        }
    };
    let bands = dec.norms(p.p1, p.p2)?;
    let high_scale = p.alpha.powf(-1.0 / p.p1);
    let (s_high, s_low, aggregate) = match cfg.norms.role {
        NormRole::D => (tp.s_data_high(), tp.s_data_low(), data_norm_from_bands(&bands, &tp, &ctx)),
        NormRole::S => (tp.s_sol_high(), tp.s_sol_low(), solution_norm_from_bands(&bands, &tp, &ctx)),
        NormRole::Plain => {
            let s = cfg.norms.s.expect("validated");
            (s, s, lq_aggregate(&bands, s, p.q))
        }
    };
    let role = match cfg.norms.role {
        NormRole::D => "D",
        NormRole::S => "S",
        NormRole::Plain => "plain",
    };
    let mut csv = Csv::new(&["j", "two_j", "band_norm", "class", "s", "weighted"]);
    for &(j, b) in &bands {
        let high = is_high(j, p.alpha);
        let (s, scale) = match (cfg.norms.role, high) {
            (NormRole::Plain, _) => (s_high, 1.0),
            (_, true) => (s_high, high_scale),
            (_, false) => (s_low, 1.0),
        };
        csv.row(vec![
            j.to_string(),
            num(oseen2d::littlewood_paley::pow2(j)),
            num(b),
            if high { "high" } else { "low" }.into(),
            num(s),
            num(scale * weight(s, j) * b),
        ]);
    }
    csv.row(vec!["all".into(), String::new(), num(aggregate), role.into(), String::new(), num(aggregate)]);
    let out = OutDir::create(job.out, cfg.output.dumps)?;
    let prov = provenance(job, Command::Norms, grid)
        .with("source", source)
        .with("role", role)
        .with("unresolved_fraction", num(unresolved));
    csv.write(&out.path("norms.csv"), &prov)?;
    info!("norms: {role} aggregate {aggregate:e}");
    Ok(vec![entry("norm", num(aggregate)), entry("unresolved_fraction", num(unresolved))])
}

fn report_csv(r: &ConstantReport) -> Csv {
    let mut csv = Csv::new(&["member", "alpha", "j", "t", "branch", "ratio"]);
    for s in &r.samples {
        csv.row(vec![
            s.member.to_string(),
            num(s.alpha),
            s.j.map(|j| j.to_string()).unwrap_or_default(),
            opt(s.t),
            s.branch.map(|b| b.to_string()).unwrap_or_default(),
            num(s.ratio),
        ]);
    }
    csv
}

pub fn verify(job: &Job) -> Result<Summary, CliError> {
    let cfg = job.cfg;
    let v = &cfg.verify;
    let grid = cfg.grid()?;
    let tp = cfg.thm_params(false)?;
    let ens = EnsembleSpec::new(v.seed, v.count, v.jlo, v.jhi);
    let q = cfg.quadrature();
    let out = OutDir::create(job.out, cfg.output.dumps)?;
    let prov = Provenance::new(Command::Verify.id(), &cfg.hash(), grid)
        .with("ensemble", format!("seed={} count={} cells={}..{}", v.seed, v.count, v.jlo, v.jhi));

    let grids: Vec<Grid2> = if v.refine { vec![grid, grid.refined()] } else { vec![grid] };
    // per id, one report per grid
    let mut reports: Vec<(String, Vec<ConstantReport>)> = Vec::new();
    let mut push = |r: ConstantReport| match reports.iter_mut().find(|(id, _)| *id == r.id) {
        Some((_, list)) => list.push(r),
        None => reports.push((r.id.clone(), vec![r])),
    };
    let mut c0 = None;
    let mut bony = None;
    for (gi, g) in grids.iter().enumerate() {
        for id in &v.estimates {
            match id.as_str() {
                "band-multipliers" => {
                    for r in estimates::verify_band_multipliers(&ens, g, &v.alphas, &v.times, v.p)? {
                        push(r);
                    }
                }
                "linear" => push(estimates::verify_linear_estimate(&ens, g, &v.alphas, &tp, v.p3, q)?),
                "linear-half" => push(estimates::verify_linear_half(&ens, g, &v.alphas, &tp, q)?),
                "product" => {
                    let r = if v.archive_outside_window && !tp.in_window() {
                        estimates::product_archive(&ens, g, &v.alphas, &tp)?
                    } else {
                        estimates::verify_product_estimate(&ens, g, &v.alphas, &tp)?
                    };
                    push(r);
                }
                "c0" => {
                    let est = estimates::estimate_c0(&ens, g, &v.alphas, &tp, q)?;
                    if gi == 0 {
                        c0 = Some(est.value);
                    }
                    push(est.linear);
                    push(est.bilinear);
                }
                "bony" => {
                    if gi == 0 {
                        let mut worst = 0.0f64;
                        for m in 0..ens.count {
                            let e = estimates::bony_reconstruction_error(&ens.scalar(g, m, 0), &ens.scalar(g, m, 1))?;
                            worst = worst.max(e);
                        }
                        bony = Some(worst);
                    }
                }
                _ => unreachable!("validated"),
            }
        }
    }

    let mut summary = Csv::new(&["id", "sup", "samples", "skipped", "refined_sup", "refinement_factor"]);
    let mut out_summary = Vec::new();
    for (id, list) in &reports {
        let base = &list[0];
        report_csv(base).write(&out.path(&format!("constant_{id}.csv")), &prov)?;
        let (rsup, factor) = match list.get(1) {
            Some(r) => {
                report_csv(r).write(&out.path(&format!("constant_{id}_refined.csv")), &prov.clone().with("refined", "true"))?;
                (num(r.sup), num(estimates::refinement_factor(base.sup, r.sup)))
            }
            None => (String::new(), String::new()),
        };
        summary.row(vec![id.clone(), num(base.sup), base.samples.len().to_string(), base.skipped.to_string(), rsup, factor]);
        out_summary.push(entry(id, num(base.sup)));
    }
    if let Some(c) = c0 {
        summary.row(vec!["c0".into(), num(c), String::new(), String::new(), String::new(), String::new()]);
        out_summary.push(entry("c0", num(c)));
    }
    if let Some(b) = bony {
        summary.row(vec!["bony".into(), num(b), ens.count.to_string(), "0".into(), String::new(), String::new()]);
        out_summary.push(entry("bony", num(b)));
    }
    summary.write(&out.path("summary.csv"), &prov)?;
    info!("verify: {} reports written", summary.len());
    Ok(out_summary)
}

/// Runs the configured command over the cartesian product of seeds and
/// alphas, one output directory per cell.
pub fn sweep(job: &Job) -> Result<Summary, CliError> {
    let base = job.cfg;
    let sw = &base.sweep;
    let alphas = if sw.alphas.is_empty() { vec![base.params.alpha] } else { sw.alphas.clone() };
    let seeds = if sw.seeds.is_empty() { vec![base.forcing.seed] } else { sw.seeds.clone() };
    let root = OutDir::create(job.out, base.output.dumps)?;
    let grid = base.grid()?;
    let mut csv: Option<Csv> = None;
    let mut cell = 0usize;
    for &seed in &seeds {
        for &alpha in &alphas {
            let lambda = if sw.rescale { alpha / base.params.alpha } else { 1.0 };
            let mut cfg = base.clone();
            cfg.params.alpha = alpha;
            cfg.forcing.seed = seed;
            let mut given = None;
            if sw.rescale {
                let g = generate_forcing(&cfg.forcing, &grid)?;
                let f = rescale_tensor(&g.forcing, lambda)?;
                let rg = *f.grid();
                cfg.grid = GridConfig { l1: rg.l1(), n1: rg.n1(), l2: rg.l2(), n2: rg.n2() };
                given = Some(Generated { forcing: f, ..g });
            }
            let dir = root.path(&format!("cell_{cell:03}"));
            let cell_job = Job { cfg: &cfg, out: &dir, gate: job.gate };
            let result = match sw.command {
                Command::Solve => solve_with(&cell_job, given).map(|(s, _)| s)?,
                Command::Linear => linear(&cell_job, given)?,
                Command::Norms => norms(&cell_job, given)?,
                Command::Verify => verify(&cell_job)?,
                Command::Sweep => unreachable!("validated"),
            };
            let mut row = vec![entry("cell", cell), entry("seed", seed), entry("alpha", num(alpha)), entry("lambda", num(lambda))];
            row.extend(result);
            let table = csv.get_or_insert_with(|| {
                let header: Vec<&str> = row.iter().map(|(k, _)| k.as_str()).collect();
                Csv::new(&header)
            });
            table.row(row.into_iter().map(|(_, v)| v).collect());
            cell += 1;
        }
    }
    let prov = Provenance::new(Command::Sweep.id(), &base.hash(), grid).with("cell_command", sw.command.id());
    let table = csv.unwrap_or_else(|| Csv::new(&["cell"]));
    table.write(&root.path("summary.csv"), &prov)?;
    Ok(vec![entry("cells", cell)])
}
