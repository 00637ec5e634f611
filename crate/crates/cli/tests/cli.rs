use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use oseen2d::dump;
use oseen2d::norm::mixed_norm;
use oseen2d::{Grid2, ScalarField};
use oseen2d_cli::config::{ForcingKind, ForcingSpec, RunConfig};
use oseen2d_cli::forcing::{component_stem, generate_forcing, COMPONENTS};
use oseen2d_cli::output::read_rows;
use oseen2d_cli::CliError;

const SMALL: &str = r#"
[grid]
L1 = "8pi"
N1 = 128
L2 = "4pi"
N2 = 32
"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_oseen2d"))
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("run.toml");
    fs::write(&p, body).unwrap();
    p
}

fn run(sub: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    bin()
        .arg(sub)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .arg("--quiet")
        .args(extra)
        .output()
        .unwrap()
}

fn grid() -> Grid2 {
    Grid2::new(8.0 * std::f64::consts::PI, 128, 4.0 * std::f64::consts::PI, 32).unwrap()
}

#[test]
fn parse_errors_carry_line_numbers() {
    let bad = format!("{SMALL}\n[params]\nalpha = -1.0\n");
    match RunConfig::parse(&bad, "cfg") {
        Err(CliError::Config(msg)) => assert!(msg.starts_with("cfg:9:") && msg.contains("alpha"), "{msg}"),
        other => panic!("{other:?}"),
    }
    let typo = format!("{SMALL}\n[solver]\ntoll = 1e-3\n");
    match RunConfig::parse(&typo, "cfg") {
        Err(CliError::Config(msg)) => assert!(msg.starts_with("cfg:9:") && msg.contains("toll"), "{msg}"),
        other => panic!("{other:?}"),
    }
    let rule = format!("{SMALL}\n[solver]\nquadrature = \"simpson\"\n");
    assert!(matches!(RunConfig::parse(&rule, "cfg"), Err(CliError::Config(m)) if m.contains(":9:")));
    assert!(RunConfig::parse("[grid]\nL1 = 1\n", "cfg").is_err());
}

#[test]
fn lengths_accept_multiples_of_pi() {
    let cfg = RunConfig::parse(SMALL, "cfg").unwrap();
    assert_eq!(cfg.grid, grid_config());
    assert_eq!(oseen2d_cli::config::parse_length("pi"), Some(std::f64::consts::PI));
    assert_eq!(oseen2d_cli::config::parse_length("2.5"), Some(2.5));
    assert_eq!(oseen2d_cli::config::parse_length("x"), None);
}

fn grid_config() -> oseen2d_cli::config::GridConfig {
    let g = grid();
    oseen2d_cli::config::GridConfig { l1: g.l1(), n1: g.n1(), l2: g.l2(), n2: g.n2() }
}

#[test]
fn config_hash_ignores_output_dir() {
    let mut a = RunConfig::parse(SMALL, "cfg").unwrap();
    let mut b = a.clone();
    b.output.dir = "elsewhere".into();
    assert_eq!(a.hash(), b.hash());
    a.forcing.seed = 9;
    assert_ne!(a.hash(), b.hash());
}

#[test]
fn zero_amplitude_gives_zero_tensor() {
    for kind in [ForcingKind::GaussianTensor, ForcingKind::RandomBand] {
        let spec = ForcingSpec { kind, amplitude: 0.0, ..Default::default() };
        let g = generate_forcing(&spec, &grid()).unwrap();
        assert!(g.forcing.is_zero());
        assert_eq!(g.discarded_mean, 0.0);
    }
}

#[test]
fn generation_is_deterministic() {
    for kind in [ForcingKind::GaussianTensor, ForcingKind::RandomBand] {
        let spec = ForcingSpec { kind, seed: 17, ..Default::default() };
        let a = generate_forcing(&spec, &grid()).unwrap().forcing;
        let b = generate_forcing(&spec, &grid()).unwrap().forcing;
        for (x, y) in a.components().iter().zip(b.components()) {
            assert!(x.values().iter().zip(y.values()).all(|(u, v)| u.to_bits() == v.to_bits()));
        }
        let c = generate_forcing(&ForcingSpec { seed: 18, ..spec }, &grid()).unwrap().forcing;
        assert_ne!(a, c);
    }
}

#[test]
fn generated_forcing_is_mean_free() {
    let spec = ForcingSpec { kind: ForcingKind::GaussianTensor, width: 1.5, ..Default::default() };
    let g = generate_forcing(&spec, &grid()).unwrap();
    assert!(g.discarded_mean > 0.1);
    for c in g.forcing.components() {
        for i in 0..grid().n1() {
            let mean: f64 = c.row(i).iter().sum::<f64>() / grid().n2() as f64;
            assert!(mean.abs() <= 1e-14 * c.max_abs().max(1e-300));
        }
    }
}

#[test]
fn wide_gaussian_is_rejected_for_boundary_mass() {
    let g = grid();
    // exp(-(L1 / w)^2) at the x1 edge
    let ok = ForcingSpec { kind: ForcingKind::GaussianTensor, width: g.l1() / 5.0, ..Default::default() };
    assert!(generate_forcing(&ok, &g).unwrap().boundary_ratio <= 1e-10);
    for w in [g.l1() / 4.0, g.l1() / 2.0] {
        let spec = ForcingSpec { kind: ForcingKind::GaussianTensor, width: w, ..Default::default() };
        assert!(matches!(generate_forcing(&spec, &g), Err(CliError::Admissibility(_))));
    }
}

#[test]
fn from_file_round_trip_and_shape_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("f").display().to_string();
    let g = grid();
    let spec = ForcingSpec { seed: 5, ..Default::default() };
    let f = generate_forcing(&spec, &g).unwrap().forcing;
    for (name, c) in COMPONENTS.iter().zip(f.components()) {
        dump::write_scalar(&component_stem(&prefix, name), "forcing", c, &[]).unwrap();
    }
    let file = ForcingSpec { kind: ForcingKind::FromFile, path: Some(prefix.clone()), ..Default::default() };
    let back = generate_forcing(&file, &g).unwrap().forcing;
    assert!(back.minus(&f).unwrap().max_abs() <= 1e-14 * f.max_abs());
    let other = Grid2::new(g.l1(), 64, g.l2(), 32).unwrap();
    match generate_forcing(&file, &other) {
        Err(CliError::Config(msg)) => assert!(msg.contains("expected 64x32, found 128x32"), "{msg}"),
        r => panic!("{r:?}"),
    }
    let missing = ForcingSpec { path: Some(format!("{prefix}_none")), ..file };
    assert!(matches!(generate_forcing(&missing, &g), Err(CliError::Config(_))));
}

#[test]
fn solve_zero_forcing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{SMALL}\n[forcing]\namplitude = 0.0\n[solver]\nc0 = 1.5\n"));
    let out = dir.path().join("out");
    let o = run("solve", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.join("iterations.csv")).unwrap();
    let (header, rows) = read_rows(&text);
    assert_eq!(header, ["n", "s_norm", "diff", "ratio", "residual"]);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][1], "0e0");
    let (_, u1) = dump::read_scalar(&out.join("solution_u1")).unwrap();
    assert!(u1.is_zero());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let bad = write_config(dir.path(), "[grid]\nL1 = 1\nN1 = 100\nL2 = 1\nN2 = 32\n");
    assert_eq!(run("solve", &bad, &out, &[]).status.code(), Some(2));

    let window = write_config(dir.path(), &format!("{SMALL}\n[params]\np1 = 4.0\n"));
    let o = run("solve", &window, &out, &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("1/p1"));

    let gate = write_config(dir.path(), &format!("{SMALL}\n[forcing]\namplitude = 100.0\n[solver]\nc0 = 1.5\n"));
    let o = run("solve", &gate, &out, &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("1/(8 C0^2)"));

    let diverge = write_config(
        dir.path(),
        &format!("{SMALL}\n[forcing]\namplitude = 1000.0\n[solver]\ntrack_residual = false\n"),
    );
    assert_eq!(run("solve", &diverge, &out, &[]).status.code(), Some(4));

    let ok = write_config(dir.path(), SMALL);
    assert_eq!(run("solve", &ok, &out, &["--gate", "/nonexistent"]).status.code(), Some(2));
}

#[test]
fn outputs_carry_provenance_and_lf_endings() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let o = run("linear", &cfg, &out, &["--seed", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.join("linear.csv")).unwrap();
    assert!(!text.contains('\r'));
    for key in ["# config_sha256 = ", "# profile = smooth-bump-v1", "# grid = L1=", "# seed = 4"] {
        assert!(text.contains(key), "{key}");
    }
    let (_, rows) = read_rows(&text);
    let err: f64 = rows[0][3].parse().unwrap();
    assert!(err <= 1e-6, "{err}");
    let hdr = dump::read_header(&out.join("linear_u1")).unwrap();
    assert!(hdr.extra.iter().any(|(k, v)| k == "profile" && v == "smooth-bump-v1"));
    assert!(hdr.extra.iter().any(|(k, _)| k == "config_sha256"));
}

#[test]
fn norms_of_single_band_field() {
    let dir = tempfile::tempdir().unwrap();
    let g = grid();
    let (j0, s) = (1, 0.5);
    let xi = 2f64.powi(j0);
    let f = ScalarField::from_fn(g, |x1, x2| (-x1 * x1 / 4.0).exp() * (xi * x2).cos()).unwrap();
    let stem = dir.path().join("single");
    dump::write_scalar(&stem, "scalar", &f, &[]).unwrap();
    let body = format!(
        "{SMALL}\n[params]\np1 = 2.0\np2 = 3.0\nq = 2.0\n[norms]\nfield = \"{}\"\nrole = \"plain\"\ns = {s}\n",
        stem.display()
    );
    let cfg = write_config(dir.path(), &body);
    let out = dir.path().join("out");
    let o = run("norms", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (_, rows) = read_rows(&fs::read_to_string(out.join("norms.csv")).unwrap());
    let expect = 2f64.powf(s * j0 as f64) * mixed_norm(&f, 2.0, 3.0).unwrap();
    let weighted: Vec<(String, f64)> = rows.iter().map(|r| (r[0].clone(), r[5].parse().unwrap())).collect();
    let dominant = weighted.iter().filter(|(j, _)| j != "all").max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    assert_eq!(dominant.0, j0.to_string());
    assert!((dominant.1 - expect).abs() <= 1e-10 * expect, "{} vs {expect}", dominant.1);
    for (j, w) in &weighted {
        if j != "all" && *j != j0.to_string() {
            assert!(*w <= 1e-10 * expect, "band {j}: {w}");
        }
    }
}

#[test]
fn rescaled_sweep_has_equal_norms() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!("{SMALL}\n[sweep]\ncommand = \"norms\"\nalphas = [0.5, 1.0, 2.0, 4.0]\nrescale = true\n");
    let cfg = write_config(dir.path(), &body);
    let out = dir.path().join("out");
    let o = run("sweep", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_rows(&fs::read_to_string(out.join("summary.csv")).unwrap());
    let col = header.iter().position(|h| h == "norm").unwrap();
    let norms: Vec<f64> = rows.iter().map(|r| r[col].parse().unwrap()).collect();
    assert_eq!(norms.len(), 4);
    for n in &norms {
        assert!((n - norms[0]).abs() <= 1e-12 * norms[0]);
    }
    assert!(out.join("cell_003").join("norms.csv").exists());

    let bad = format!("{SMALL}\n[sweep]\nalphas = [3.0]\nrescale = true\n");
    let cfg = write_config(dir.path(), &bad);
    assert_eq!(run("sweep", &cfg, &out, &[]).status.code(), Some(2));
}

#[test]
fn verify_summary_feeds_the_gate() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!(
        "{SMALL}\n[verify]\nestimates = [\"c0\", \"product\"]\ncount = 2\nalphas = [1.0]\n\n[forcing]\ngate_fraction = 0.5\n"
    );
    let cfg = write_config(dir.path(), &body);
    let v = dir.path().join("v");
    let o = run("verify", &cfg, &v, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = v.join("summary.csv");
    let c0 = oseen2d_cli::commands::read_gate(&summary).unwrap();
    assert!(c0 > 0.0);
    let s = dir.path().join("s");
    let o = run("solve", &cfg, &s, &["--gate", summary.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (_, rows) = read_rows(&fs::read_to_string(s.join("gate.csv")).unwrap());
    assert_eq!(rows[0][2], "true");
    let margin: f64 = rows[0][3].parse().unwrap();
    assert!((margin - 2.0).abs() <= 1e-12);

    let outside = format!("{SMALL}\n[params]\np1 = 4.0\n[verify]\nestimates = [\"product\"]\ncount = 1\n");
    let cfg = write_config(dir.path(), &outside);
    assert_eq!(run("verify", &cfg, &v, &[]).status.code(), Some(3));
}
