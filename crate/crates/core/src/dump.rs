//! Field dumps: a `key = value` header file next to a little-endian f64 payload.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{ScalarField, SemiSpectralField};
use crate::grid::Grid2;

/// Header describing a payload.
#[derive(Debug, Clone, PartialEq)]
pub struct DumpHeader {
    pub kind: String,
    pub grid: Grid2,
    pub complex: bool,
    /// Extra provenance lines written verbatim as `key = value`.
    pub extra: Vec<(String, String)>,
}

impl DumpHeader {
    pub fn render(&self) -> String {
        let g = &self.grid;
        let mut s = format!(
            "kind = {}\nN1 = {}\nN2 = {}\nL1 = {:?}\nL2 = {:?}\ncomplex = {}\n",
            self.kind,
            g.n1(),
            g.n2(),
            g.l1(),
            g.l2(),
            self.complex
        );
        for (k, v) in &self.extra {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut kind = None;
        let (mut n1, mut n2, mut l1, mut l2, mut complex) = (None, None, None, None, None);
        let mut extra = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Dump(format!("line {}: expected key = value", lineno + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            let bad = |what: &str| Error::Dump(format!("line {}: bad {what} '{v}'", lineno + 1));
            match k {
                "kind" => kind = Some(v.to_string()),
                "N1" => n1 = Some(v.parse::<usize>().map_err(|_| bad("N1"))?),
                "N2" => n2 = Some(v.parse::<usize>().map_err(|_| bad("N2"))?),
                "L1" => l1 = Some(v.parse::<f64>().map_err(|_| bad("L1"))?),
                "L2" => l2 = Some(v.parse::<f64>().map_err(|_| bad("L2"))?),
                "complex" => complex = Some(v.parse::<bool>().map_err(|_| bad("complex"))?),
                _ => extra.push((k.to_string(), v.to_string())),
            }
        }
        let missing = |k: &str| Error::Dump(format!("missing key {k}"));
        let grid = Grid2::new(
            l1.ok_or_else(|| missing("L1"))?,
            n1.ok_or_else(|| missing("N1"))?,
            l2.ok_or_else(|| missing("L2"))?,
            n2.ok_or_else(|| missing("N2"))?,
        )?;
        Ok(Self {
            kind: kind.ok_or_else(|| missing("kind"))?,
            grid,
            complex: complex.ok_or_else(|| missing("complex"))?,
            extra,
        })
    }
}

/// Paths `<stem>.hdr` and `<stem>.bin`.
pub fn dump_paths(stem: &Path) -> (PathBuf, PathBuf) {
    (stem.with_extension("hdr"), stem.with_extension("bin"))
}

fn write_payload(path: &Path, data: impl Iterator<Item = f64>) -> Result<()> {
    let bytes: Vec<u8> = data.flat_map(|v| v.to_le_bytes()).collect();
    fs::write(path, bytes)?;
    Ok(())
}

fn read_payload(path: &Path, expected: usize) -> Result<Vec<f64>> {
    let bytes = fs::read(path)?;
    if bytes.len() != expected * 8 {
        return Err(Error::Dump(format!(
            "{}: expected {} bytes, found {}",
            path.display(),
            expected * 8,
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

pub fn write_scalar(stem: &Path, kind: &str, f: &ScalarField, extra: &[(String, String)]) -> Result<()> {
    let (hdr, bin) = dump_paths(stem);
    let header = DumpHeader {
        kind: kind.to_string(),
        grid: *f.grid(),
        complex: false,
        extra: extra.to_vec(),
    };
    fs::write(hdr, header.render())?;
    write_payload(&bin, f.values().iter().copied())
}

pub fn write_semispectral(
    stem: &Path,
    kind: &str,
    f: &SemiSpectralField,
    extra: &[(String, String)],
) -> Result<()> {
    let (hdr, bin) = dump_paths(stem);
    let header = DumpHeader {
        kind: kind.to_string(),
        grid: *f.grid(),
        complex: true,
        extra: extra.to_vec(),
    };
    fs::write(hdr, header.render())?;
    write_payload(&bin, f.values().iter().flat_map(|c| [c.re, c.im]))
}

pub fn read_header(stem: &Path) -> Result<DumpHeader> {
    let (hdr, _) = dump_paths(stem);
    DumpHeader::parse(&fs::read_to_string(hdr)?)
}

pub fn read_scalar(stem: &Path) -> Result<(DumpHeader, ScalarField)> {
    let header = read_header(stem)?;
    if header.complex {
        return Err(Error::Dump("expected a real payload".into()));
    }
    let (_, bin) = dump_paths(stem);
    let data = read_payload(&bin, header.grid.len())?;
    let f = ScalarField::new(header.grid, data)?;
    Ok((header, f))
}

pub fn read_semispectral(stem: &Path) -> Result<(DumpHeader, SemiSpectralField)> {
    let header = read_header(stem)?;
    if !header.complex {
        return Err(Error::Dump("expected a complex payload".into()));
    }
    let (_, bin) = dump_paths(stem);
    let data = read_payload(&bin, 2 * header.grid.len())?;
    let values = data
        .chunks_exact(2)
        .map(|c| Complex64::new(c[0], c[1]))
        .collect();
    let f = SemiSpectralField::new(header.grid, values)?;
    Ok((header, f))
}
