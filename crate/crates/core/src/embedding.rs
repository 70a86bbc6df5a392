//! Embedding of the Winfree model into a Kuramoto model of size `4N`.
//!
//! The Winfree state `Θ` is extended by its reflection `−Θ` and `2N`
//! oscillators frozen at zero. With frequencies `(𝒱, −𝒱, 0)` and coupling
//! `κ̃ = 2κ`, the Kuramoto field
//! `ν̃_k + (κ̃/(4N)) Σ_l sin(φ_l − φ_k)` reproduces `F(Θ)` on the first block,
//! `−F(Θ)` on the second and zero on the spectators, so the extended state
//! solves the Kuramoto system exactly. The Kuramoto side is integrated on its
//! own, which makes the embedding a cross-check on the solvers.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::integrate::{integrate_field, IntegratorOptions, PhaseField, Trajectory};
use crate::math::sin;
use crate::model::{EnsembleState, ModelParameters};

/// Kuramoto model `m φ̈ + φ̇ = ν̃_k + (κ̃/M) Σ_l sin(φ_l − φ_k)` of size `M = 4N`.
#[derive(Debug, Clone, PartialEq)]
pub struct KuramotoSystem {
    params: ModelParameters,
}

impl KuramotoSystem {
    pub fn new(frequencies: Vec<f64>, coupling: f64, inertia: f64) -> Result<Self> {
        if frequencies.len() % 4 != 0 {
            return Err(Error::input("Kuramoto size must be divisible by 4"));
        }
        Ok(Self {
            params: ModelParameters::new(frequencies, coupling, inertia)?,
        })
    }

    pub fn size(&self) -> usize {
        self.params.n_oscillators()
    }

    /// `N`, the size of the embedded Winfree ensemble.
    pub fn winfree_size(&self) -> usize {
        self.size() / 4
    }

    pub fn frequencies(&self) -> &[f64] {
        self.params.frequencies()
    }

    pub fn coupling(&self) -> f64 {
        self.params.coupling()
    }

    pub fn inertia(&self) -> f64 {
        self.params.inertia()
    }

    /// The system viewed as parameters of a generic phase model of size `4N`.
    pub fn as_params(&self) -> &ModelParameters {
        &self.params
    }
}

/// Builds the `4N` system and the embedded state `Φ = (Θ, −Θ, 0)`,
/// `Φ̇ = (Ω, −Ω, 0)`. A state without velocities embeds without velocities.
pub fn embed(
    state: &EnsembleState,
    params: &ModelParameters,
) -> Result<(KuramotoSystem, EnsembleState)> {
    let n = params.n_oscillators();
    params.check_len(state.phases.len(), "phases")?;
    if state.has_velocities() {
        params.check_len(state.velocities.len(), "velocities")?;
    }
    let mirror = |x: &[f64]| -> Vec<f64> {
        let mut out = Vec::with_capacity(4 * n);
        out.extend_from_slice(x);
        out.extend(x.iter().map(|v| -v));
        out.resize(4 * n, 0.0);
        out
    };
    let system = KuramotoSystem::new(
        mirror(params.frequencies()),
        2.0 * params.coupling(),
        params.inertia(),
    )?;
    let velocities = if state.has_velocities() {
        mirror(&state.velocities)
    } else {
        Vec::new()
    };
    let embedded = EnsembleState {
        phases: mirror(&state.phases),
        velocities,
        time: state.time,
    };
    Ok((system, embedded))
}

fn kuramoto_rhs_into(phases: &[f64], system: &KuramotoSystem, out: &mut [f64]) {
    let scale = system.coupling() / phases.len() as f64;
    for (k, (o, nu)) in out.iter_mut().zip(system.frequencies()).enumerate() {
        let phi_k = phases[k];
        let pull: f64 = phases.iter().map(|&phi_l| sin(phi_l - phi_k)).sum();
        *o = nu + scale * pull;
    }
}

/// `ν̃_k + (κ̃/(4N)) Σ_l sin(φ_l − φ_k)`, summed pairwise.
pub fn kuramoto_rhs(phases: &[f64], system: &KuramotoSystem) -> Result<Vec<f64>> {
    system.params.check_len(phases.len(), "phases")?;
    let mut out = alloc::vec![0.0; phases.len()];
    kuramoto_rhs_into(phases, system, &mut out);
    Ok(out)
}

#[derive(Debug, Clone, Copy)]
pub struct KuramotoField<'a>(pub &'a KuramotoSystem);

impl PhaseField for KuramotoField<'_> {
    fn dim(&self) -> usize {
        self.0.size()
    }

    fn eval(&self, phases: &[f64], out: &mut [f64]) {
        kuramoto_rhs_into(phases, self.0, out);
    }
}

/// Integrates the Kuramoto system; `m = 0` gives the first-order system and
/// then `initial.velocities` may be empty.
pub fn integrate_kuramoto(
    initial: &EnsembleState,
    system: &KuramotoSystem,
    t_end: f64,
    options: &IntegratorOptions,
) -> Result<Trajectory> {
    integrate_field(&KuramotoField(system), &system.params, initial, t_end, options)
}

/// Largest departure from the embedded manifold,
/// `max(|φ_i − θ_i|, |φ_{N+i} + θ_i|, |φ_{2N+k}|)` over all samples.
pub fn verify_embedding(winfree: &Trajectory, kuramoto: &Trajectory) -> Result<f64> {
    let n = winfree.params.n_oscillators();
    if kuramoto.params.n_oscillators() != 4 * n {
        return Err(Error::input("Kuramoto trajectory is not of size 4N"));
    }
    if winfree.samples.len() != kuramoto.samples.len() {
        return Err(Error::input("trajectories have different sample counts"));
    }
    let mut worst = 0.0f64;
    for (w, k) in winfree.samples.iter().zip(&kuramoto.samples) {
        if (w.time - k.time).abs() > 1e-12 * w.time.abs().max(1.0) {
            return Err(Error::input("trajectories do not share a time grid"));
        }
        for i in 0..n {
            worst = worst
                .max((k.phases[i] - w.phases[i]).abs())
                .max((k.phases[n + i] + w.phases[i]).abs());
        }
        for phi in &k.phases[2 * n..] {
            worst = worst.max(phi.abs());
        }
    }
    Ok(worst)
}

/// `max φ − min φ`; for an embedded state this is `2‖Θ‖∞`.
pub fn phase_diameter(phases: &[f64]) -> f64 {
    let (lo, hi) = phases
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &p| (lo.min(p), hi.max(p)));
    if phases.is_empty() {
        0.0
    } else {
        hi - lo
    }
}
