//! CSV emission and the trajectory reader.
//!
//! Every file starts with a `# rng=<name> seed=<seed>` comment line. Reals
//! are written with 17 significant digits so they read back bit-exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use winfree_core::certificates::CertificateReport;
use winfree_core::integrate::Trajectory;
use winfree_core::tikhonov::GapReport;
use winfree_core::EnsembleState;

use crate::error::{LabError, Result};
use crate::sample::RNG_NAME;

pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn header_comment(seed: u64) -> String {
    format!("# rng={RNG_NAME} seed={seed}\n")
}

/// Writes `contents` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    fs::write(&tmp, contents).map_err(|e| LabError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| LabError::io(path, e))
}

pub fn trajectory_csv(traj: &Trajectory, seed: u64) -> String {
    let n = traj.params.n_oscillators();
    let mut out = header_comment(seed);
    out.push('t');
    for i in 1..=n {
        let _ = write!(out, ",theta_{i}");
    }
    for i in 1..=n {
        let _ = write!(out, ",omega_{i}");
    }
    out.push('\n');
    for s in &traj.samples {
        out.push_str(&real(s.time));
        for x in s.phases.iter().chain(&s.velocities) {
            out.push(',');
            out.push_str(&real(*x));
        }
        out.push('\n');
    }
    out
}

/// Reads a trajectory CSV back into states (comment lines are skipped).
pub fn read_trajectory_csv(text: &str) -> Result<Vec<EnsembleState>> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| LabError::config("empty trajectory file"))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.first() != Some(&"t") || cols.len() % 2 == 0 {
        return Err(LabError::config("trajectory header must be t,theta_1..,omega_1.."));
    }
    let n = (cols.len() - 1) / 2;
    lines
        .map(|line| {
            let values: Vec<f64> = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| LabError::config(format!("bad trajectory row `{line}`")))?;
            if values.len() != cols.len() {
                return Err(LabError::config("trajectory row has the wrong width"));
            }
            Ok(EnsembleState::new(
                values[1..=n].to_vec(),
                values[n + 1..].to_vec(),
                values[0],
            )?)
        })
        .collect()
}

pub fn certificates_csv(reports: &[CertificateReport], seed: u64) -> String {
    let mut out = header_comment(seed);
    out.push_str("name,lhs,rhs,satisfied,margin,anchor\n");
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.name,
            real(r.lhs),
            real(r.rhs),
            r.satisfied,
            real(r.margin),
            r.anchor
        );
    }
    out
}

pub fn gap_csv(report: &GapReport, seed: u64) -> String {
    let mut out = header_comment(seed);
    out.push_str("t,phase_gap,phase_bound,velocity_gap,velocity_bound\n");
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            real(r.t),
            real(r.phase_gap),
            real(r.phase_bound),
            real(r.velocity_gap),
            real(r.velocity_bound)
        );
    }
    out
}

/// A table of named columns rendered as CSV.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn render(&self, seed: u64) -> String {
        let mut out = header_comment(seed);
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}
