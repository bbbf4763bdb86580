//! File output: CSV tables with `#` header comments and JSON documents.
//! Every file carries the crate version and the config hash, and nothing
//! is replaced unless the caller asks for it.

use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Column names of a trajectory table.
pub const TRAJECTORY_COLUMNS: [&str; 9] = ["t", "x1", "x2", "v1", "v2", "R", "Z", "f1", "f2"];

/// Header lines shared by every file written for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Stamp {
    pub config_hash: String,
    pub extra: Vec<String>,
}

impl Stamp {
    pub fn new(config_hash: impl Into<String>) -> Self {
        Self { config_hash: config_hash.into(), extra: Vec::new() }
    }

    pub fn with(mut self, line: impl Into<String>) -> Self {
        self.extra.push(line.into());
        self
    }

    fn lines(&self) -> Vec<String> {
        let mut out = vec![format!("bathpair {VERSION}"), format!("config_hash {}", self.config_hash)];
        out.extend(self.extra.iter().cloned());
        out
    }
}

fn create(path: &Path, force: bool) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut opts = OpenOptions::new();
    opts.write(true);
    if force {
        opts.create(true).truncate(true);
    } else {
        opts.create_new(true);
    }
    match opts.open(path) {
        Ok(f) => Ok(BufWriter::new(f)),
        Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(Error::OutputExists(path.to_path_buf())),
        Err(e) => Err(e.into()),
    }
}

/// Write equal-length columns as CSV. Values use Rust's shortest
/// round-trip formatting, so rereading gives the same bits.
pub fn write_csv(path: &Path, stamp: &Stamp, names: &[&str], columns: &[&[f64]], force: bool) -> Result<()> {
    if names.len() != columns.len() {
        return Err(Error::GridMismatch(format!("{} column names for {} columns", names.len(), columns.len())));
    }
    let rows = columns.first().map_or(0, |c| c.len());
    if columns.iter().any(|c| c.len() != rows) {
        return Err(Error::GridMismatch("columns of unequal length".into()));
    }
    let mut w = create(path, force)?;
    for line in stamp.lines() {
        writeln!(w, "# {line}")?;
    }
    writeln!(w, "{}", names.join(","))?;
    let mut buf = String::new();
    for i in 0..rows {
        buf.clear();
        for (j, c) in columns.iter().enumerate() {
            if j > 0 {
                buf.push(',');
            }
            buf.push_str(&c[i].to_string());
        }
        writeln!(w, "{buf}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T, force: bool) -> Result<()> {
    let mut w = create(path, force)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Parsed CSV: header comments, column names and columns.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub comments: Vec<String>,
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.names.iter().position(|n| n == name).map(|i| self.columns[i].as_slice())
    }
}

pub fn read_csv(path: &Path) -> Result<CsvTable> {
    let text = fs::read_to_string(path)?;
    let mut comments = Vec::new();
    let mut names: Vec<String> = Vec::new();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if let Some(c) = line.strip_prefix('#') {
            comments.push(c.trim().to_string());
        } else if names.is_empty() {
            names = line.split(',').map(str::to_string).collect();
            columns = vec![Vec::new(); names.len()];
        } else {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != names.len() {
                return Err(Error::GridMismatch(format!("{}:{}: expected {} fields", path.display(), lineno + 1, names.len())));
            }
            for (col, f) in columns.iter_mut().zip(fields) {
                let v = f.parse().map_err(|_| Error::GridMismatch(format!("{}:{}: `{f}` is not a number", path.display(), lineno + 1)))?;
                col.push(v);
            }
        }
    }
    Ok(CsvTable { comments, names, columns })
}

/// Metadata written next to each trajectory file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub version: String,
    pub config_hash: String,
    pub config: serde_json::Value,
    pub overrides: Vec<String>,
    pub seed: u64,
    pub realization: u64,
    pub solver: String,
    pub history: Option<String>,
    pub inversion_discrepancy: Option<f64>,
    pub data: String,
}

pub fn trajectory_columns(tr: &Trajectory) -> Vec<Vec<f64>> {
    let t: Vec<f64> = tr.grid.times().collect();
    let (r, z) = match (&tr.r, &tr.z) {
        (Some(r), Some(z)) => (r.clone(), z.clone()),
        _ => tr.modes(),
    };
    vec![t, tr.x1.clone(), tr.x2.clone(), tr.v1.clone(), tr.v2.clone(), r, z, tr.f1.clone(), tr.f2.clone()]
}

/// Trajectory CSV plus JSON sidecar; returns the two paths.
pub fn write_trajectory(dir: &Path, stem: &str, tr: &Trajectory, sidecar: &Sidecar, force: bool) -> Result<(PathBuf, PathBuf)> {
    let csv = dir.join(format!("{stem}.csv"));
    let json = dir.join(format!("{stem}.json"));
    let stamp = Stamp::new(&sidecar.config_hash)
        .with(format!("solver {}", sidecar.solver))
        .with(format!("seed {} realization {}", sidecar.seed, sidecar.realization));
    let cols = trajectory_columns(tr);
    let refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
    write_csv(&csv, &stamp, &TRAJECTORY_COLUMNS, &refs, force)?;
    write_json(&json, sidecar, force)?;
    Ok((csv, json))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trips_bits_and_refuses_overwrite() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/a.csv");
        let a = [0.1, 1.0 / 3.0, -2.5e-300];
        let b = [f64::MAX, 0.0, -0.0];
        let stamp = Stamp::new("abc").with("model drude");
        write_csv(&p, &stamp, &["a", "b"], &[&a, &b], false).unwrap();
        let t = read_csv(&p).unwrap();
        assert_eq!(t.comments[1], "config_hash abc");
        assert_eq!(t.column("a").unwrap(), &a);
        assert_eq!(t.column("b").unwrap()[0].to_bits(), f64::MAX.to_bits());
        assert!(matches!(write_csv(&p, &stamp, &["a"], &[&a], false), Err(Error::OutputExists(_))));
        write_csv(&p, &stamp, &["a"], &[&a], true).unwrap();
        assert_eq!(read_csv(&p).unwrap().names, vec!["a"]);
    }
}
