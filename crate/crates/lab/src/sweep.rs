//! Parameter sweeps over a scenario template.
//!
//! Cells are the Cartesian product of the axes in declaration order (last
//! axis fastest). Replicate `r` of cell `c` draws from stream
//! `c · replicates + r` of the template seed, so every row is fixed by
//! `(seed, cell, replicate)` regardless of scheduling.

use rayon::prelude::*;

use crate::config::{parse_real_list, KeyValues};
use crate::csv::{real, Table};
use crate::error::{LabError, Result};
use crate::sample::Sampler;
use crate::scenario::{run_scenario_stream, ParameterMode, ScenarioConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisKind {
    /// `mκ`.
    InertiaCoupling,
    /// `‖𝒱‖∞/κ`, realised with sup-scaled frequencies.
    FrequencyRatio,
    /// `‖Ω⁰‖∞/κ`, realised with sup-scaled velocities.
    VelocityRatio,
    Coupling,
}

impl AxisKind {
    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "m_kappa" => AxisKind::InertiaCoupling,
            "nu_over_kappa" => AxisKind::FrequencyRatio,
            "omega_over_kappa" => AxisKind::VelocityRatio,
            "kappa" => AxisKind::Coupling,
            other => return Err(LabError::config(format!("unknown sweep axis `{other}`"))),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            AxisKind::InertiaCoupling => "m_kappa",
            AxisKind::FrequencyRatio => "nu_over_kappa",
            AxisKind::VelocityRatio => "omega_over_kappa",
            AxisKind::Coupling => "kappa",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub kind: AxisKind,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub template: ScenarioConfig,
    pub axes: Vec<Axis>,
    pub replicates: usize,
}

impl SweepSpec {
    /// Reads axes from `axis.<name> = v1, v2, ...` keys and `replicates`.
    pub fn from_kv(kv: &KeyValues) -> Result<Self> {
        let template = ScenarioConfig::from_kv(kv)?;
        let mut axes = Vec::new();
        for key in kv.keys() {
            if let Some(name) = key.strip_prefix("axis.") {
                let values = parse_real_list(kv.raw(key).unwrap_or(""))?;
                axes.push(Axis {
                    kind: AxisKind::parse(name)?,
                    values,
                });
            }
        }
        // config keys are unordered, so axes are ordered by name
        axes.sort_by_key(|a| a.kind.name());
        let spec = Self {
            template,
            axes,
            replicates: kv.get_or("replicates", 1)?,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(LabError::config("replicates must be positive"));
        }
        if self.axes.iter().any(|a| a.values.is_empty()) {
            return Err(LabError::config("every axis needs at least one value"));
        }
        if !self.axes.is_empty() && !matches!(self.template.mode, ParameterMode::Explicit { .. }) {
            return Err(LabError::config("sweep axes need an explicit-mode template"));
        }
        for (i, a) in self.axes.iter().enumerate() {
            if self.axes[..i].iter().any(|b| b.kind == a.kind) {
                return Err(LabError::config(format!("axis `{}` repeated", a.kind.name())));
            }
        }
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    /// Axis values of cell `index`.
    pub fn cell(&self, mut index: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.axes.len()];
        for (slot, axis) in out.iter_mut().zip(&self.axes).rev() {
            let len = axis.values.len();
            *slot = axis.values[index % len];
            index /= len;
        }
        out
    }

    /// The template with the values of one cell applied.
    pub fn configure(&self, values: &[f64]) -> ScenarioConfig {
        let mut cfg = self.template.clone();
        // κ first so the ratio axes scale with the swept coupling
        for (axis, &v) in self.axes.iter().zip(values) {
            if axis.kind == AxisKind::Coupling {
                cfg.kappa = v;
            }
        }
        for (axis, &v) in self.axes.iter().zip(values) {
            match axis.kind {
                AxisKind::InertiaCoupling => {
                    cfg.mode = ParameterMode::Explicit { inertia: v / cfg.kappa }
                }
                AxisKind::FrequencyRatio => cfg.frequencies = Sampler::Sup(v * cfg.kappa),
                AxisKind::VelocityRatio => cfg.velocities = Sampler::Sup(v * cfg.kappa),
                AxisKind::Coupling => {}
            }
        }
        cfg
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub cell: usize,
    pub replicate: usize,
    pub values: Vec<f64>,
    pub stream: u64,
    pub died: bool,
    pub inf_r: f64,
    pub r_end: f64,
    pub status: String,
}

/// Runs every cell × replicate on at most `workers` threads. Per-run
/// failures are recorded in the row status.
pub fn run_sweep(spec: &SweepSpec, workers: usize) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| LabError::config(format!("thread pool: {e}")))?;
    let total = spec.cell_count() * spec.replicates;
    let rows = pool.install(|| {
        (0..total)
            .into_par_iter()
            .map(|job| {
                let cell = job / spec.replicates;
                let replicate = job % spec.replicates;
                let values = spec.cell(cell);
                let stream = job as u64;
                let cfg = spec.configure(&values);
                let (died, inf_r, r_end, status) = match run_scenario_stream(&cfg, stream) {
                    Ok(rep) => (rep.summary.died, rep.summary.inf_r, rep.summary.r_end, rep.summary.status),
                    Err(e) => (false, f64::NAN, f64::NAN, e.to_string()),
                };
                SweepRow { cell, replicate, values, stream, died, inf_r, r_end, status }
            })
            .collect::<Vec<_>>()
    });
    Ok(rows)
}

pub fn sweep_table(spec: &SweepSpec, rows: &[SweepRow]) -> Table {
    let mut cols = vec!["cell", "replicate", "stream"];
    cols.extend(spec.axes.iter().map(|a| a.kind.name()));
    cols.extend(["died", "inf_r", "r_end", "status"]);
    let mut t = Table::new(&cols);
    for r in rows {
        let mut row = vec![r.cell.to_string(), r.replicate.to_string(), r.stream.to_string()];
        row.extend(r.values.iter().map(|v| real(*v)));
        row.extend([
            r.died.to_string(),
            real(r.inf_r),
            real(r.r_end),
            r.status.replace(',', ";"),
        ]);
        t.rows.push(row);
    }
    t
}
