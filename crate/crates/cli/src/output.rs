//! CSV reports and field dumps, all stamped with the same provenance lines.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use oseen2d::{dump, DyadicProfile, Grid2, ScalarField, TensorForcing, VectorField};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub command: String,
    pub config_hash: String,
    pub grid: Grid2,
    pub extra: Vec<(String, String)>,
}

impl Provenance {
    pub fn new(command: &str, config_hash: &str, grid: Grid2) -> Self {
        Self {
            command: command.into(),
            config_hash: config_hash.into(),
            grid,
            extra: Vec::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.extra.push((key.into(), value.to_string()));
        self
    }

    pub fn pairs(&self) -> Vec<(String, String)> {
        let mut v = vec![
            ("generator".to_string(), format!("oseen2d {}", env!("CARGO_PKG_VERSION"))),
            ("command".to_string(), self.command.clone()),
            ("config_sha256".to_string(), self.config_hash.clone()),
            ("profile".to_string(), DyadicProfile::ID.to_string()),
            ("grid".to_string(), self.grid.describe()),
        ];
        v.extend(self.extra.iter().cloned());
        v
    }
}

/// Shortest round-trip rendering, always in exponent form.
pub fn num(v: f64) -> String {
    format!("{v:e}")
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self, prov: &Provenance) -> String {
        let mut s = String::new();
        for (k, v) in prov.pairs() {
            writeln!(s, "# {k} = {v}").unwrap();
        }
        s.push_str(&self.header.join(","));
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }

    pub fn write(&self, path: &Path, prov: &Provenance) -> Result<(), CliError> {
        fs::write(path, self.render(prov))?;
        Ok(())
    }
}

/// Rows of a CSV written by [`Csv`], comments and header dropped.
pub fn read_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().map(|h| h.split(',').map(String::from).collect()).unwrap_or_default();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

pub struct OutDir {
    pub root: PathBuf,
    pub dumps: bool,
}

impl OutDir {
    pub fn create(root: &Path, dumps: bool) -> Result<Self, CliError> {
        fs::create_dir_all(root)
            .map_err(|e| CliError::Config(format!("output directory {}: {e}", root.display())))?;
        Ok(Self { root: root.to_path_buf(), dumps })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn scalar(&self, name: &str, kind: &str, f: &ScalarField, prov: &Provenance) -> Result<(), CliError> {
        if self.dumps {
            dump::write_scalar(&self.path(name), kind, f, &prov.pairs())?;
        }
        Ok(())
    }

    pub fn vector(&self, name: &str, u: &VectorField, prov: &Provenance) -> Result<(), CliError> {
        self.scalar(&format!("{name}_u1"), "velocity", &u.u1, prov)?;
        self.scalar(&format!("{name}_u2"), "velocity", &u.u2, prov)
    }

    pub fn tensor(&self, name: &str, f: &TensorForcing, prov: &Provenance) -> Result<(), CliError> {
        for (c, field) in crate::forcing::COMPONENTS.iter().zip(f.components()) {
            self.scalar(&format!("{name}_{c}"), "forcing", field, prov)?;
        }
        Ok(())
    }
}
