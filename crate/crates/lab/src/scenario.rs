//! Single-run scenarios: sample initial data, integrate, certify, summarise.

use std::path::Path;

use winfree_core::certificates::{
    order_lowering_residual, pathwise_bundle, speed_limit_residual, CertificateReport,
};
use winfree_core::integrate::{
    detect_death, integrate_first_order, integrate_second_order, DeathVerdict, IntegratorOptions,
    Method, Trajectory,
};
use winfree_core::model::order_parameter_full;
use winfree_core::{EnsembleState, ModelParameters, SmallnessConstants};

use crate::config::KeyValues;
use crate::csv::{certificates_csv, real, trajectory_csv, write_atomic, Table};
use crate::error::{LabError, Result};
use crate::sample::{rng, sup_scaled, Sampler};

/// How `𝒱`, `m` and `Ω⁰` are chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum ParameterMode {
    /// Use the frequency and velocity samplers and the given inertia.
    Explicit { inertia: f64 },
    /// Place `‖𝒱‖∞/κ`, `mκ`, `‖Ω⁰‖∞/κ` at `margin` times the thresholds
    /// `(a, b, c) · R₀^{3/2}` of the pathwise theorem.
    Smallness {
        constants: SmallnessConstants,
        margin: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub n: usize,
    pub phases: Sampler,
    pub velocities: Sampler,
    pub frequencies: Sampler,
    pub kappa: f64,
    pub mode: ParameterMode,
    pub t_end: f64,
    pub options: IntegratorOptions,
    pub death_tol: f64,
    /// Tail window of the death test, as a fraction of `t_end`.
    pub death_window: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n: 4,
            phases: Sampler::Uniform {
                lo: -std::f64::consts::FRAC_PI_2,
                hi: std::f64::consts::FRAC_PI_2,
            },
            velocities: Sampler::Constant(0.0),
            frequencies: Sampler::Constant(0.0),
            kappa: 1.0,
            mode: ParameterMode::Explicit { inertia: 0.01 },
            t_end: 100.0,
            options: IntegratorOptions::default().with_sample_interval(0.5),
            death_tol: 1e-6,
            death_window: 0.1,
        }
    }
}

impl ScenarioConfig {
    pub fn from_kv(kv: &KeyValues) -> Result<Self> {
        let d = Self::default();
        let sampler = |key: &str, fallback: &Sampler| -> Result<Sampler> {
            kv.raw(key).map(Sampler::parse).unwrap_or_else(|| Ok(fallback.clone()))
        };
        let mode = match kv.raw("mode").unwrap_or("explicit") {
            "explicit" => ParameterMode::Explicit {
                inertia: kv.get_or("inertia", 0.01)?,
            },
            "smallness" => {
                let k = SmallnessConstants::PATHWISE;
                ParameterMode::Smallness {
                    constants: SmallnessConstants::new(
                        kv.get_or("a", k.a)?,
                        kv.get_or("b", k.b)?,
                        kv.get_or("c", k.c)?,
                    )?,
                    margin: kv.get_or("margin", 0.9)?,
                }
            }
            other => return Err(LabError::config(format!("unknown mode `{other}`"))),
        };
        let method = match kv.raw("method").unwrap_or("exponential-split") {
            "exponential-split" => Method::ExponentialSplit,
            "adaptive-rk" => Method::AdaptiveRk,
            other => return Err(LabError::config(format!("unknown method `{other}`"))),
        };
        let base = d.options.clone();
        let options = IntegratorOptions {
            method,
            rel_tolerance: kv.get_or("rel_tol", base.rel_tolerance)?,
            abs_tolerance: kv.get_or("abs_tol", base.abs_tolerance)?,
            max_step: kv.get_or("max_step", base.max_step)?,
            initial_step: kv.get_or("initial_step", base.initial_step)?,
            sample_interval: kv.get_or("sample_interval", base.sample_interval)?,
        };
        let cfg = Self {
            seed: kv.get_or("seed", d.seed)?,
            n: kv.get_or("n", d.n)?,
            phases: sampler("phases", &d.phases)?,
            velocities: sampler("velocities", &d.velocities)?,
            frequencies: sampler("frequencies", &d.frequencies)?,
            kappa: kv.get_or("kappa", d.kappa)?,
            mode,
            t_end: kv.get_or("t_end", d.t_end)?,
            options,
            death_tol: kv.get_or("death_tol", d.death_tol)?,
            death_window: kv.get_or("death_window", d.death_window)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(LabError::config("n must be at least 1"));
        }
        if !(self.t_end > 0.0) {
            return Err(LabError::config("t_end must be positive"));
        }
        if !(self.death_window > 0.0 && self.death_window < 1.0) {
            return Err(LabError::config("death_window must lie in (0, 1)"));
        }
        if let ParameterMode::Smallness { margin, .. } = self.mode {
            if !(margin > 0.0 && margin < 1.0) {
                return Err(LabError::config("margin must lie in (0, 1)"));
            }
        }
        Ok(())
    }

    /// Initial state and parameters; fully determined by `seed` and `stream`.
    pub fn realise(&self, stream: u64) -> Result<(EnsembleState, ModelParameters)> {
        let mut r = rng(self.seed, stream);
        let phases = self.phases.draw(self.n, &mut r)?;
        let (velocities, frequencies, inertia) = match &self.mode {
            ParameterMode::Explicit { inertia } => (
                self.velocities.draw(self.n, &mut r)?,
                self.frequencies.draw(self.n, &mut r)?,
                *inertia,
            ),
            ParameterMode::Smallness { constants, margin } => {
                let r0 = order_parameter_full(&phases);
                if !(r0 > 0.0) {
                    return Err(LabError::config("smallness mode needs R₀ > 0"));
                }
                if !(self.kappa > 0.0) {
                    return Err(LabError::config("smallness mode needs κ > 0"));
                }
                let scale = margin * r0.powf(1.5);
                let frequencies = sup_scaled(self.n, constants.a * scale * self.kappa, &mut r);
                let velocities = sup_scaled(self.n, constants.c * scale * self.kappa, &mut r);
                (velocities, frequencies, constants.b * scale / self.kappa)
            }
        };
        let params = ModelParameters::new(frequencies, self.kappa, inertia)?;
        Ok((EnsembleState::new(phases, velocities, 0.0)?, params))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub seed: u64,
    pub stream: u64,
    pub n: usize,
    pub kappa: f64,
    pub inertia: f64,
    pub r0: f64,
    /// Minimum of `R` over the samples.
    pub inf_r: f64,
    pub inf_r_time: f64,
    pub r_end: f64,
    pub died: bool,
    pub settle_time: Option<f64>,
    pub residual_velocity: f64,
    pub sample_interval: f64,
    /// `ok`, or the error message of a failed integration.
    pub status: String,
}

impl RunSummary {
    pub const COLUMNS: [&'static str; 14] = [
        "seed",
        "stream",
        "n",
        "kappa",
        "inertia",
        "r0",
        "inf_r",
        "inf_r_time",
        "r_end",
        "died",
        "settle_time",
        "residual_velocity",
        "sample_interval",
        "status",
    ];

    pub fn row(&self) -> Vec<String> {
        vec![
            self.seed.to_string(),
            self.stream.to_string(),
            self.n.to_string(),
            real(self.kappa),
            real(self.inertia),
            real(self.r0),
            real(self.inf_r),
            real(self.inf_r_time),
            real(self.r_end),
            self.died.to_string(),
            self.settle_time.map(real).unwrap_or_default(),
            real(self.residual_velocity),
            real(self.sample_interval),
            self.status.replace(',', ";"),
        ]
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub initial: EnsembleState,
    pub params: ModelParameters,
    pub trajectory: Option<Trajectory>,
    pub certificates: Vec<CertificateReport>,
    pub death: Option<DeathVerdict>,
    pub summary: RunSummary,
}

/// Certificates that can be evaluated for this run: the a-priori pathwise
/// bundle when `κ > 0`, and the pathwise velocity inequalities on the
/// computed trajectory when `m > 0`.
fn certify(
    initial: &EnsembleState,
    params: &ModelParameters,
    traj: Option<&Trajectory>,
) -> Result<Vec<CertificateReport>> {
    let mut out = Vec::new();
    if params.coupling() > 0.0 {
        out.extend(pathwise_bundle(initial, params, SmallnessConstants::PATHWISE)?);
    }
    if let Some(traj) = traj.filter(|_| params.inertia() > 0.0) {
        out.push(speed_limit_residual(traj, 1e-7)?);
        out.push(order_lowering_residual(traj, None, 1e-7)?);
    }
    Ok(out)
}

/// Runs one scenario realisation. Integration failures end up in
/// `summary.status`; only invalid configurations are errors.
pub fn run_scenario_stream(config: &ScenarioConfig, stream: u64) -> Result<RunReport> {
    config.validate()?;
    let (initial, params) = config.realise(stream)?;
    let r0 = order_parameter_full(&initial.phases);
    let integrated = if params.inertia() > 0.0 {
        integrate_second_order(&initial, &params, config.t_end, &config.options)
    } else {
        integrate_first_order(&initial, &params, config.t_end, &config.options)
    };
    let mut summary = RunSummary {
        seed: config.seed,
        stream,
        n: config.n,
        kappa: params.coupling(),
        inertia: params.inertia(),
        r0,
        inf_r: f64::NAN,
        inf_r_time: f64::NAN,
        r_end: f64::NAN,
        died: false,
        settle_time: None,
        residual_velocity: f64::NAN,
        sample_interval: config.options.sample_interval,
        status: "ok".into(),
    };
    let (trajectory, death) = match integrated {
        Ok(traj) => {
            let (inf_r, at) = traj.min_order_parameter();
            summary.inf_r = inf_r;
            summary.inf_r_time = at;
            summary.r_end = order_parameter_full(&traj.last().phases);
            let verdict = detect_death(&traj, config.death_tol, config.death_window * config.t_end)?;
            summary.died = verdict.died;
            summary.settle_time = verdict.settle_time;
            summary.residual_velocity = verdict.residual_velocity;
            (Some(traj), Some(verdict))
        }
        Err(e @ winfree_core::Error::Integration { .. }) => {
            summary.status = e.to_string();
            (None, None)
        }
        Err(e) => return Err(e.into()),
    };
    let certificates = certify(&initial, &params, trajectory.as_ref())?;
    Ok(RunReport {
        initial,
        params,
        trajectory,
        certificates,
        death,
        summary,
    })
}

pub fn run_scenario(config: &ScenarioConfig) -> Result<RunReport> {
    run_scenario_stream(config, 0)
}

/// Writes `trajectory.csv`, `certificates.csv` and `summary.csv` into `dir`.
pub fn write_run(report: &RunReport, dir: &Path) -> Result<()> {
    let seed = report.summary.seed;
    if let Some(traj) = &report.trajectory {
        write_atomic(&dir.join("trajectory.csv"), &trajectory_csv(traj, seed))?;
    }
    write_atomic(&dir.join("certificates.csv"), &certificates_csv(&report.certificates, seed))?;
    let mut table = Table::new(&RunSummary::COLUMNS);
    table.rows.push(report.summary.row());
    write_atomic(&dir.join("summary.csv"), &table.render(seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_from_text() {
        let kv = KeyValues::parse(
            "seed = 3\nn = 5\nphases = uniform(-1, 1)\nfrequencies = sup(0.1)\nkappa = 2\ninertia = 0.05\nt_end = 20\nmethod = adaptive-rk\nsample_interval = 0.25\n",
            "t",
        )
        .unwrap();
        let cfg = ScenarioConfig::from_kv(&kv).unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.mode, ParameterMode::Explicit { inertia: 0.05 });
        assert_eq!(cfg.options.method, Method::AdaptiveRk);
        assert_eq!(cfg.options.sample_interval, 0.25);
        let (init, params) = cfg.realise(0).unwrap();
        assert_eq!(init.len(), 5);
        assert!((params.frequency_sup() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn smallness_mode_sits_below_thresholds() {
        let kv = KeyValues::parse("mode = smallness\nn = 6\nmargin = 0.9\nkappa = 1.5\n", "t").unwrap();
        let cfg = ScenarioConfig::from_kv(&kv).unwrap();
        let (init, params) = cfg.realise(0).unwrap();
        let report = winfree_core::certificates::smallness_check(&init, &params, SmallnessConstants::PATHWISE)
            .unwrap();
        assert!(report.satisfied());
        for r in report.reports() {
            assert!((r.lhs / r.rhs - 0.9).abs() < 1e-12, "{}", r.name);
        }
    }

    #[test]
    fn bad_configs_are_rejected() {
        for text in ["mode = magic", "n = 0", "death_window = 1", "method = euler", "mode = smallness\nmargin = 1.2"] {
            let kv = KeyValues::parse(text, "t").unwrap();
            assert!(ScenarioConfig::from_kv(&kv).is_err(), "{text}");
        }
    }

    #[test]
    fn uncoupled_drift_does_not_die() {
        let cfg = ScenarioConfig {
            kappa: 0.0,
            frequencies: Sampler::Constant(1.0),
            t_end: 10.0,
            ..ScenarioConfig::default()
        };
        let report = run_scenario(&cfg).unwrap();
        assert!(!report.summary.died);
        assert!(report.summary.inf_r.is_finite());
    }

    #[test]
    fn equilibrium_data_dies_at_once() {
        let cfg = ScenarioConfig {
            phases: Sampler::Constant(0.0),
            t_end: 10.0,
            ..ScenarioConfig::default()
        };
        let report = run_scenario(&cfg).unwrap();
        assert!(report.summary.died);
        assert_eq!(report.summary.settle_time, Some(0.0));
        assert_eq!(report.summary.inf_r, report.summary.r0);
    }

    #[test]
    fn smallness_scenario_dies_above_quarter_floor() {
        let cfg = ScenarioConfig {
            n: 6,
            seed: 4,
            mode: ParameterMode::Smallness {
                constants: SmallnessConstants::PATHWISE,
                margin: 0.9,
            },
            t_end: 300.0,
            ..ScenarioConfig::default()
        };
        let report = run_scenario(&cfg).unwrap();
        assert!(report.summary.died);
        assert!(report.summary.inf_r >= report.summary.r0 / 4.0);
        assert!(report.certificates.iter().all(|c| c.satisfied), "{:?}", report.certificates);
    }
}
