//! Explicit inequalities of the pathwise oscillator-death argument, each
//! evaluated into a [`CertificateReport`].
//!
//! Strict inequalities are checked strictly. Reports keep the margin so a
//! caller can insist on more than a bare pass.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::integrate::Trajectory;
use crate::math::{cos, exp, one_minus_exp_neg, pow, sin, sqrt, sup_norm};
use crate::model::{
    force_sup_bound, order_parameter_full, partial_order_parameter, ClusterSpec, EnsembleState,
    ModelParameters, SmallnessConstants,
};

const SQRT_2: f64 = core::f64::consts::SQRT_2;
const E_INV: f64 = 0.367_879_441_171_442_33;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Less,
    LessEq,
    Greater,
    GreaterEq,
}

impl Relation {
    pub fn holds(self, lhs: f64, rhs: f64) -> bool {
        match self {
            Relation::Less => lhs < rhs,
            Relation::LessEq => lhs <= rhs,
            Relation::Greater => lhs > rhs,
            Relation::GreaterEq => lhs >= rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Less => "<",
            Relation::LessEq => "<=",
            Relation::Greater => ">",
            Relation::GreaterEq => ">=",
        }
    }
}

/// One checked inequality `lhs ⋈ rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub relation: Relation,
    pub satisfied: bool,
    /// Signed slack, positive when the inequality holds with room to spare.
    pub margin: f64,
    pub anchor: String,
}

impl CertificateReport {
    pub fn new(name: &str, lhs: f64, relation: Relation, rhs: f64, anchor: &str) -> Self {
        let margin = match relation {
            Relation::Less | Relation::LessEq => rhs - lhs,
            Relation::Greater | Relation::GreaterEq => lhs - rhs,
        };
        Self {
            name: name.into(),
            lhs,
            rhs,
            relation,
            satisfied: relation.holds(lhs, rhs),
            margin,
            anchor: anchor.into(),
        }
    }

    pub fn passes_with_margin(&self, min_margin: f64) -> bool {
        self.satisfied && self.margin >= min_margin
    }
}

/// The two scalar conditions on `(a, b, c)` that drive the pathwise theorem:
/// the initial-layer budget `4bc + (2 + 2√2 a) e⁻¹ √2 b < 1/2` and the
/// condensation balance
/// `e⁻¹c + a + 4√2 e⁻¹ bc + 4b(1 + a√2) ≤ (√3 / (8√2)) (1 − e⁻¹)`.
pub fn theorem1_margins(k: SmallnessConstants) -> (CertificateReport, CertificateReport) {
    let SmallnessConstants { a, b, c } = k;
    let layer = 4.0 * b * c + (2.0 + 2.0 * SQRT_2 * a) * E_INV * SQRT_2 * b;
    let balance = E_INV * c + a + 4.0 * SQRT_2 * E_INV * b * c + 4.0 * b * (1.0 + a * SQRT_2);
    let balance_rhs = sqrt(3.0) / (8.0 * SQRT_2) * (1.0 - E_INV);
    (
        CertificateReport::new("abc_layer_budget", layer, Relation::Less, 0.5, "pathwise/stage-a"),
        CertificateReport::new(
            "abc_balance",
            balance,
            Relation::LessEq,
            balance_rhs,
            "pathwise/stage-b",
        ),
    )
}

/// Result of [`smallness_check`].
#[derive(Debug, Clone, PartialEq)]
pub enum SmallnessReport {
    /// `R₀ = 0`: the hypotheses say nothing.
    Inapplicable { r0: f64 },
    Checked {
        r0: f64,
        frequency: CertificateReport,
        inertia: CertificateReport,
        velocity: CertificateReport,
    },
}

impl SmallnessReport {
    pub fn satisfied(&self) -> bool {
        match self {
            SmallnessReport::Inapplicable { .. } => false,
            SmallnessReport::Checked {
                frequency,
                inertia,
                velocity,
                ..
            } => frequency.satisfied && inertia.satisfied && velocity.satisfied,
        }
    }

    pub fn r0(&self) -> f64 {
        match self {
            SmallnessReport::Inapplicable { r0 } | SmallnessReport::Checked { r0, .. } => *r0,
        }
    }

    pub fn reports(&self) -> Vec<CertificateReport> {
        match self {
            SmallnessReport::Inapplicable { .. } => Vec::new(),
            SmallnessReport::Checked {
                frequency,
                inertia,
                velocity,
                ..
            } => alloc::vec![frequency.clone(), inertia.clone(), velocity.clone()],
        }
    }
}

/// `‖𝒱‖∞/κ < a R₀^{3/2}`, `mκ < b R₀^{3/2}`, `‖Ω⁰‖∞/κ < c R₀^{3/2}`.
pub fn smallness_check(
    initial: &EnsembleState,
    params: &ModelParameters,
    k: SmallnessConstants,
) -> Result<SmallnessReport> {
    params.check_len(initial.phases.len(), "initial phases")?;
    let kappa = params.coupling();
    if kappa <= 0.0 {
        return Err(Error::domain("smallness conditions need κ > 0"));
    }
    let r0 = order_parameter_full(&initial.phases);
    if r0 <= 0.0 {
        return Ok(SmallnessReport::Inapplicable { r0 });
    }
    let scale = pow(r0, 1.5);
    Ok(SmallnessReport::Checked {
        r0,
        frequency: CertificateReport::new(
            "smallness_frequency",
            params.frequency_sup() / kappa,
            Relation::Less,
            k.a * scale,
            "pathwise/smallness",
        ),
        inertia: CertificateReport::new(
            "smallness_inertia",
            params.inertia() * kappa,
            Relation::Less,
            k.b * scale,
            "pathwise/smallness",
        ),
        velocity: CertificateReport::new(
            "smallness_velocity",
            initial.velocity_sup() / kappa,
            Relation::Less,
            k.c * scale,
            "pathwise/smallness",
        ),
    })
}

/// Initial-layer hypothesis
/// `m‖Ω⁰‖∞(1 − e^{−η}) + M_F m (η − 1 + e^{−η}) < (1 − δ) R₀`.
/// When it holds, `R(t) > δ R₀` on `[0, ηm]`.
pub fn initial_layer_check(
    delta: f64,
    eta: f64,
    params: &ModelParameters,
    omega0_sup: f64,
    r0: f64,
) -> Result<CertificateReport> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::input("δ must lie in (0, 1)"));
    }
    if !(eta > 0.0) {
        return Err(Error::input("η must be positive"));
    }
    let m = params.inertia();
    let mf = force_sup_bound(params, None)?;
    let lhs = m * omega0_sup * one_minus_exp_neg(eta) + mf * m * crate::math::phi2(eta);
    Ok(CertificateReport::new(
        "initial_layer",
        lhs,
        Relation::Less,
        (1.0 - delta) * r0,
        "initial-layer",
    ))
}

/// The admissibility threshold `Q` for trapping on the cluster `ℬ`
/// (`cluster.outer()`): a level `x ∈ (−1, 1)` traps when `1 − x² ≥ Q`, with
///
/// ```text
/// Q = ( (‖Ω⁰_ℬ‖ e^{−η} + ‖𝒱_ℬ‖ + 2κ ((|ℬ|/N) m (‖Ω⁰_ℬ‖ (η∨1) e^{−(η∨1)} + M_{F,ℬ}) + (N−|ℬ|)/N))
///       / (κ ρ (1 − e^{−η})) )²
/// ```
pub fn trapping_threshold(
    cluster: &ClusterSpec,
    eta: f64,
    rho: f64,
    params: &ModelParameters,
    omega0_cluster_sup: f64,
) -> Result<f64> {
    if !(rho > 0.0) || !(eta > 0.0) {
        return Err(Error::input("ρ and η must be positive"));
    }
    let n = params.n_oscillators();
    if cluster.n() != n {
        return Err(Error::input("cluster was built for a different N"));
    }
    let kappa = params.coupling();
    let denom = kappa * rho * one_minus_exp_neg(eta);
    if denom == 0.0 {
        return Err(Error::domain("κρ(1 − e^{−η}) vanishes"));
    }
    let outer = cluster.outer();
    let nu_b = sup_norm(outer.iter().map(|&i| &params.frequencies()[i]));
    let mf_b = force_sup_bound(params, Some(outer))?;
    let share = outer.len() as f64 / n as f64;
    let spectators = (n - outer.len()) as f64 / n as f64;
    let peak = eta.max(1.0);
    let numer = omega0_cluster_sup * exp(-eta)
        + nu_b
        + 2.0 * kappa
            * (share * params.inertia() * (omega0_cluster_sup * peak * exp(-peak) + mf_b)
                + spectators);
    let ratio = numer / denom;
    Ok(ratio * ratio)
}

/// Three-part verdict of the partial-death criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct PodReport {
    /// `Q ≤ 1 − x²`.
    pub trapping: CertificateReport,
    /// `min_{i∈𝒜} cos θ_i(t₀) ≥ x`.
    pub alignment: CertificateReport,
    /// `(1/N) Σ_{i∈𝒜} (1 + cos θ_i(t₀)) > 2ρ / (1 + |x|)`.
    pub mass: CertificateReport,
    pub satisfied: bool,
}

impl PodReport {
    pub fn reports(&self) -> Vec<CertificateReport> {
        alloc::vec![self.trapping.clone(), self.alignment.clone(), self.mass.clone()]
    }
}

/// Partial oscillator-death criterion at time `t₀ = state_at_t0.time`.
///
/// When satisfied, the dynamics guarantee `R_𝒜(t) ≥ ρ` for `t ≥ t₀`,
/// `osc θ_i < 2π` on `𝒜` and `< 4π` on `ℬ`. This function only certifies;
/// it does not look at the future of the trajectory.
#[allow(clippy::too_many_arguments)]
pub fn pod_check(
    state_at_t0: &EnsembleState,
    cluster: &ClusterSpec,
    rho: f64,
    x: f64,
    eta: f64,
    params: &ModelParameters,
    omega0: &[f64],
) -> Result<PodReport> {
    params.check_len(state_at_t0.phases.len(), "state phases")?;
    params.check_len(omega0.len(), "initial velocities")?;
    if !(rho > 0.0 && rho <= 2.0) {
        return Err(Error::input("ρ must lie in (0, 2]"));
    }
    if !(x > -1.0 && x < 1.0) {
        return Err(Error::input("x must lie in (−1, 1)"));
    }
    if !(eta > 0.0) {
        return Err(Error::input("η must be positive"));
    }
    if state_at_t0.time < eta * params.inertia() {
        return Err(Error::input("t₀ precedes the initial layer ηm"));
    }
    let omega_b = sup_norm(cluster.outer().iter().map(|&i| &omega0[i]));
    let q = trapping_threshold(cluster, eta, rho, params, omega_b)?;
    let trapping =
        CertificateReport::new("pod_trapping", q, Relation::LessEq, 1.0 - x * x, "trapping-level");
    let min_cos = cluster
        .inner()
        .iter()
        .map(|&i| cos(state_at_t0.phases[i]))
        .fold(f64::INFINITY, f64::min);
    let alignment =
        CertificateReport::new("pod_alignment", min_cos, Relation::GreaterEq, x, "partial-death");
    let mass_value = partial_order_parameter(&state_at_t0.phases, cluster.inner());
    let mass = CertificateReport::new(
        "pod_mass",
        mass_value,
        Relation::Greater,
        2.0 * rho / (1.0 + x.abs()),
        "partial-death",
    );
    let satisfied = trapping.satisfied && alignment.satisfied && mass.satisfied;
    Ok(PodReport {
        trapping,
        alignment,
        mass,
        satisfied,
    })
}

/// Condensed cluster `𝒜 = {i : cos θ_i ≥ −1 + μ}` and its mass.
#[derive(Debug, Clone, PartialEq)]
pub struct Condensation {
    pub inner: Vec<usize>,
    /// `(1/N) Σ_{i∈𝒜} (1 + cos θ_i)`.
    pub mass: f64,
    /// `2 (R − μ) / (2 − μ)`.
    pub bound: f64,
    pub report: CertificateReport,
}

pub fn condensation_bound(state: &EnsembleState, mu: f64) -> Result<Condensation> {
    if !(mu > 0.0 && mu < 2.0) {
        return Err(Error::input("μ must lie in (0, 2)"));
    }
    let inner: Vec<usize> = (0..state.phases.len())
        .filter(|&i| cos(state.phases[i]) >= -1.0 + mu)
        .collect();
    let mass = partial_order_parameter(&state.phases, &inner);
    let r = order_parameter_full(&state.phases);
    let bound = 2.0 * (r - mu) / (2.0 - mu);
    let report =
        CertificateReport::new("condensation", mass, Relation::GreaterEq, bound, "condensation");
    Ok(Condensation {
        inner,
        mass,
        bound,
        report,
    })
}

/// `|ω_i⁰| e^{−t/m} + (|ν_i| + 2κ)(1 − e^{−t/m})`, or `|ν_i| + 2κ` when `m = 0`.
pub fn speed_limit_bound(t: f64, params: &ModelParameters, i: usize, omega0_i: f64) -> Result<f64> {
    let Some(&nu) = params.frequencies().get(i) else {
        return Err(Error::Input(alloc::format!("index {i} out of range")));
    };
    let cap = nu.abs() + 2.0 * params.coupling();
    let m = params.inertia();
    if m == 0.0 {
        return Ok(cap);
    }
    let decay = exp(-t / m);
    Ok(omega0_i.abs() * decay + cap * one_minus_exp_neg(t / m))
}

fn require_second_order(traj: &Trajectory) -> Result<(usize, f64)> {
    let n = traj.params.n_oscillators();
    let m = traj.params.inertia();
    if m <= 0.0 {
        return Err(Error::domain("pathwise velocity bounds need m > 0"));
    }
    if traj.samples.iter().any(|s| s.velocities.len() != n) {
        return Err(Error::input("trajectory samples lack velocities"));
    }
    Ok((n, m))
}

/// Largest excess `|θ̇_i(t)| − speed_limit_bound(t)` over samples and
/// oscillators, reported against `slack`.
pub fn speed_limit_residual(traj: &Trajectory, slack: f64) -> Result<CertificateReport> {
    let (n, _) = require_second_order(traj)?;
    let first = traj.initial();
    let mut worst = f64::NEG_INFINITY;
    for s in &traj.samples {
        let t = s.time - first.time;
        for i in 0..n {
            let bound = speed_limit_bound(t, &traj.params, i, first.velocities[i])?;
            worst = worst.max(s.velocities[i].abs() - bound);
        }
    }
    Ok(CertificateReport::new(
        "speed_limit",
        worst,
        Relation::LessEq,
        slack,
        "speed-limit",
    ))
}

/// Largest excess of the order-lowering estimate over the samples of a
/// second-order trajectory, for `i ∈ ℬ` (all oscillators when `None`):
///
/// ```text
/// |θ̇_i − ω_i⁰e^{−t/m} − ν_i(1−e^{−t/m}) + κ R_ℬ sin θ_i (1−e^{−t/m})|
///   ≤ 2κ(1−e^{−t/m}) ((|ℬ|/N)(‖Ω⁰_ℬ‖ t e^{−t/m} + m M_{F,ℬ} (1−e^{−t/m})²) + (N−|ℬ|)/N)
/// ```
pub fn order_lowering_residual(
    traj: &Trajectory,
    cluster: Option<&[usize]>,
    slack: f64,
) -> Result<CertificateReport> {
    let (n, m) = require_second_order(traj)?;
    let all: Vec<usize>;
    let outer = match cluster {
        Some(c) => {
            if c.iter().any(|&i| i >= n) {
                return Err(Error::input("cluster index out of range"));
            }
            c
        }
        None => {
            all = (0..n).collect();
            &all
        }
    };
    let params = &traj.params;
    let kappa = params.coupling();
    let first = traj.initial();
    let omega_b = sup_norm(outer.iter().map(|&i| &first.velocities[i]));
    let mf_b = force_sup_bound(params, Some(outer))?;
    let share = outer.len() as f64 / n as f64;
    let spectators = (n - outer.len()) as f64 / n as f64;

    let mut worst = f64::NEG_INFINITY;
    for s in &traj.samples {
        let t = s.time - first.time;
        let decay = exp(-t / m);
        let grown = one_minus_exp_neg(t / m);
        let r_b = partial_order_parameter(&s.phases, outer);
        let rhs = 2.0
            * kappa
            * grown
            * (share * (omega_b * t * decay + m * mf_b * grown * grown) + spectators);
        for &i in outer {
            let lhs = (s.velocities[i]
                - first.velocities[i] * decay
                - params.frequencies()[i] * grown
                + kappa * r_b * sin(s.phases[i]) * grown)
                .abs();
            worst = worst.max(lhs - rhs);
        }
    }
    Ok(CertificateReport::new(
        "order_lowering",
        worst,
        Relation::LessEq,
        slack,
        "order-lowering",
    ))
}

/// `(μ, ρ, x) = (R₀/4, R₀/4, −1 + R₀/4)`, the stage choices of the pathwise proof.
pub fn pathwise_stage_choice(r0: f64) -> (f64, f64, f64) {
    let mu = r0 / 4.0;
    (mu, mu, -1.0 + mu)
}

/// Alternative condensation level `μ = (3 + R₀ − √(R₀² − 2R₀ + 9)) / 4`.
/// Exposed for experiments; no certificate relies on it.
pub fn alternative_mu(r0: f64) -> f64 {
    (3.0 + r0 - sqrt(r0 * r0 - 2.0 * r0 + 9.0)) / 4.0
}

/// Every a-priori certificate of the pathwise theorem for given initial data:
/// the smallness conditions, the `(a, b, c)` margins, the initial layer at
/// `δ = 1/2, η = 1`, and the balance (trapping at the stage choice with
/// `ℬ = [N]`).
pub fn pathwise_bundle(
    initial: &EnsembleState,
    params: &ModelParameters,
    k: SmallnessConstants,
) -> Result<Vec<CertificateReport>> {
    let smallness = smallness_check(initial, params, k)?;
    let r0 = smallness.r0();
    let (layer_abc, balance_abc) = theorem1_margins(k);
    let mut out = smallness.reports();
    out.push(layer_abc);
    out.push(balance_abc);
    if r0 > 0.0 {
        let omega_sup = initial.velocity_sup();
        out.push(initial_layer_check(0.5, 1.0, params, omega_sup, r0)?);
        let (_, rho, x) = pathwise_stage_choice(r0);
        let q = trapping_threshold(&ClusterSpec::full(params.n_oscillators()), 1.0, rho, params, omega_sup)?;
        out.push(CertificateReport::new(
            "balance",
            q,
            Relation::LessEq,
            1.0 - x * x,
            "pathwise/stage-b",
        ));
    }
    Ok(out)
}
