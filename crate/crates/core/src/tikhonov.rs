//! Gap between the inertial solution `Θ(m, ·)` and the first-order solution
//! `Θ(0, ·)` started from the same phases, and the explicit bounds
//!
//! ```text
//! ‖Θ(m,t) − Θ(0,t)‖∞ ≤ ½ m (‖Ω⁰−𝒱‖∞ + 2κ) e^{4κt}
//! ‖Θ̇(m,t) − Θ̇(0,t)‖∞ ≤ ½ (‖Ω⁰−𝒱‖∞ + 2κ) e^{−t/m} + 2mκ (‖𝒱‖∞ + 2κ)
//!                        + 2mκ (‖Ω⁰−𝒱‖∞ + 2κ) e^{4κt}
//! ```

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::integrate::{integrate_first_order, integrate_second_order, IntegratorOptions};
use crate::math::exp;
use crate::model::{EnsembleState, ModelParameters};

fn velocity_offset(params: &ModelParameters, omega0: &[f64]) -> Result<f64> {
    params.check_len(omega0.len(), "initial velocities")?;
    Ok(omega0
        .iter()
        .zip(params.frequencies())
        .fold(0.0f64, |acc, (w, nu)| acc.max((w - nu).abs())))
}

fn check_time_and_inertia(t: f64, m: f64) -> Result<()> {
    if !(m > 0.0) {
        return Err(Error::domain("gap bounds need m > 0"));
    }
    if !(t >= 0.0) {
        return Err(Error::input("t must be non-negative"));
    }
    Ok(())
}

/// `½ m (‖Ω⁰−𝒱‖∞ + 2κ) e^{4κt}`. The inertia in `params` is not used.
pub fn phase_gap_bound(t: f64, m: f64, params: &ModelParameters, omega0: &[f64]) -> Result<f64> {
    check_time_and_inertia(t, m)?;
    let kappa = params.coupling();
    let spread = velocity_offset(params, omega0)? + 2.0 * kappa;
    Ok(0.5 * m * spread * exp(4.0 * kappa * t))
}

/// `½ (‖Ω⁰−𝒱‖∞+2κ) e^{−t/m} + 2mκ(‖𝒱‖∞+2κ) + 2mκ(‖Ω⁰−𝒱‖∞+2κ) e^{4κt}`.
pub fn velocity_gap_bound(
    t: f64,
    m: f64,
    params: &ModelParameters,
    omega0: &[f64],
) -> Result<f64> {
    check_time_and_inertia(t, m)?;
    let kappa = params.coupling();
    let spread = velocity_offset(params, omega0)? + 2.0 * kappa;
    let cap = params.frequency_sup() + 2.0 * kappa;
    Ok(0.5 * spread * exp(-t / m)
        + 2.0 * m * kappa * cap
        + 2.0 * m * kappa * spread * exp(4.0 * kappa * t))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapRow {
    pub t: f64,
    pub phase_gap: f64,
    pub phase_bound: f64,
    pub velocity_gap: f64,
    pub velocity_bound: f64,
}

impl GapRow {
    pub fn phase_ok(&self, slack: f64) -> bool {
        self.phase_gap <= self.phase_bound + slack
    }

    pub fn velocity_ok(&self, slack: f64) -> bool {
        self.velocity_gap <= self.velocity_bound + slack
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub inertia: f64,
    pub rows: Vec<GapRow>,
    /// Phase bound holds at every sample (no slack).
    pub phase_satisfied: bool,
    /// Velocity bound holds at every sample with `t > 0` (no slack). At
    /// `t = 0` the inertial velocity is free data and is not compared.
    pub velocity_satisfied: bool,
}

impl GapReport {
    fn from_rows(inertia: f64, rows: Vec<GapRow>) -> Self {
        let phase_satisfied = rows.iter().all(|r| r.phase_ok(0.0));
        let velocity_satisfied = rows.iter().filter(|r| r.t > 0.0).all(|r| r.velocity_ok(0.0));
        Self {
            inertia,
            rows,
            phase_satisfied,
            velocity_satisfied,
        }
    }

    pub fn phase_holds(&self, slack: f64) -> bool {
        self.rows.iter().all(|r| r.phase_ok(slack))
    }

    /// Velocity bound at every sample with `t ≥ t_min`.
    pub fn velocity_holds_from(&self, t_min: f64, slack: f64) -> bool {
        self.rows
            .iter()
            .filter(|r| r.t >= t_min)
            .all(|r| r.velocity_ok(slack))
    }

    pub fn sup_phase_gap(&self) -> f64 {
        self.rows.iter().fold(0.0, |acc, r| acc.max(r.phase_gap))
    }

    /// Largest `phase_gap / phase_bound`; above 1 means the bound failed.
    pub fn worst_phase_ratio(&self) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.phase_bound > 0.0)
            .fold(0.0, |acc, r| acc.max(r.phase_gap / r.phase_bound))
    }

    /// Largest `velocity_gap / velocity_bound` over `t ≥ t_min`.
    pub fn worst_velocity_ratio(&self, t_min: f64) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.t >= t_min && r.velocity_bound > 0.0)
            .fold(0.0, |acc, r| acc.max(r.velocity_gap / r.velocity_bound))
    }

    /// Phase gap at the sample closest to `t`.
    pub fn phase_gap_at(&self, t: f64) -> Option<f64> {
        self.rows
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
            .map(|r| r.phase_gap)
    }
}

/// Integrates the inertial system (inertia from `params`) and the
/// first-order system from the same phases on the sample grid of `options`
/// and compares them sample by sample.
pub fn compare_trajectories(
    initial: &EnsembleState,
    params: &ModelParameters,
    t_end: f64,
    options: &IntegratorOptions,
) -> Result<GapReport> {
    let m = params.inertia();
    if !(m > 0.0) {
        return Err(Error::domain("comparison needs m > 0"));
    }
    let inertial = integrate_second_order(initial, params, t_end, options)?;
    let limit = integrate_first_order(initial, params, t_end, options)?;
    let t0 = initial.time;
    let omega0 = &initial.velocities;
    let mut rows = Vec::with_capacity(inertial.samples.len());
    for (a, b) in inertial.samples.iter().zip(&limit.samples) {
        debug_assert_eq!(a.time, b.time);
        let sup_diff = |x: &[f64], y: &[f64]| {
            x.iter().zip(y).fold(0.0f64, |acc, (p, q)| acc.max((p - q).abs()))
        };
        let t = a.time - t0;
        rows.push(GapRow {
            t,
            phase_gap: sup_diff(&a.phases, &b.phases),
            phase_bound: phase_gap_bound(t, m, params, omega0)?,
            velocity_gap: sup_diff(&a.velocities, &b.velocities),
            velocity_bound: velocity_gap_bound(t, m, params, omega0)?,
        });
    }
    Ok(GapReport::from_rows(m, rows))
}
