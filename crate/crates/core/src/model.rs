//! Model parameters, ensemble states and the pure formulas of the prototypical
//! Winfree model (`S(θ) = −sin θ`, `I(θ) = 1 + cos θ`).
//!
//! Phases are lifted reals. Nothing in this crate reduces them modulo 2π, so
//! winding and oscillation of a phase along a trajectory stay observable.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{cos, sin, sup_norm};

/// Natural frequencies `ν_i`, coupling `κ ≥ 0` and inertia `m ≥ 0`.
///
/// `inertia == 0` selects the first-order model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParameters {
    frequencies: Vec<f64>,
    coupling: f64,
    inertia: f64,
}

impl ModelParameters {
    pub fn new(frequencies: Vec<f64>, coupling: f64, inertia: f64) -> Result<Self> {
        if frequencies.is_empty() {
            return Err(Error::input("at least one oscillator is required"));
        }
        if frequencies.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("natural frequencies must be finite"));
        }
        if !(coupling >= 0.0 && coupling.is_finite()) {
            return Err(Error::input("coupling must be a finite nonnegative real"));
        }
        if !(inertia >= 0.0 && inertia.is_finite()) {
            return Err(Error::input("inertia must be a finite nonnegative real"));
        }
        Ok(Self {
            frequencies,
            coupling,
            inertia,
        })
    }

    pub fn n_oscillators(&self) -> usize {
        self.frequencies.len()
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn inertia(&self) -> f64 {
        self.inertia
    }

    /// Same frequencies and coupling, different inertia.
    pub fn with_inertia(&self, inertia: f64) -> Result<Self> {
        Self::new(self.frequencies.clone(), self.coupling, inertia)
    }

    /// `‖𝒱‖∞`.
    pub fn frequency_sup(&self) -> f64 {
        sup_norm(&self.frequencies)
    }

    pub(crate) fn check_len(&self, len: usize, what: &str) -> Result<()> {
        if len != self.n_oscillators() {
            return Err(Error::Input(alloc::format!(
                "{what} has length {len}, expected {}",
                self.n_oscillators()
            )));
        }
        Ok(())
    }
}

/// Phases `Θ`, velocities `Ω` and a timestamp.
///
/// For first-order runs the velocities are the vector-field values `F(Θ)`,
/// or empty when the state is just an initial position.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleState {
    pub phases: Vec<f64>,
    pub velocities: Vec<f64>,
    pub time: f64,
}

impl EnsembleState {
    pub fn new(phases: Vec<f64>, velocities: Vec<f64>, time: f64) -> Result<Self> {
        if !velocities.is_empty() && velocities.len() != phases.len() {
            return Err(Error::input("phases and velocities differ in length"));
        }
        if !(time >= 0.0) || !time.is_finite() {
            return Err(Error::input("time must be a finite nonnegative real"));
        }
        Ok(Self {
            phases,
            velocities,
            time,
        })
    }

    /// State at `t = 0` with zero velocities.
    pub fn at_rest(phases: Vec<f64>) -> Self {
        let velocities = alloc::vec![0.0; phases.len()];
        Self {
            phases,
            velocities,
            time: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn has_velocities(&self) -> bool {
        !self.velocities.is_empty()
    }

    pub fn velocity_sup(&self) -> f64 {
        sup_norm(&self.velocities)
    }
}

/// Nested index sets `inner ⊆ outer ⊆ {0..N}` (the clusters 𝒜 ⊆ ℬ).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterSpec {
    inner: Vec<usize>,
    outer: Vec<usize>,
    n: usize,
}

impl ClusterSpec {
    pub fn new(mut inner: Vec<usize>, mut outer: Vec<usize>, n: usize) -> Result<Self> {
        inner.sort_unstable();
        inner.dedup();
        outer.sort_unstable();
        outer.dedup();
        if let Some(&i) = outer.last() {
            if i >= n {
                return Err(Error::Input(alloc::format!("index {i} out of range for N = {n}")));
            }
        }
        if let Some(&i) = inner.iter().find(|i| outer.binary_search(i).is_err()) {
            return Err(Error::Input(alloc::format!(
                "inner index {i} is not in the outer set"
            )));
        }
        Ok(Self { inner, outer, n })
    }

    /// `𝒜 = ℬ = [N]`.
    pub fn full(n: usize) -> Self {
        let all: Vec<usize> = (0..n).collect();
        Self {
            inner: all.clone(),
            outer: all,
            n,
        }
    }

    pub fn inner(&self) -> &[usize] {
        &self.inner
    }

    pub fn outer(&self) -> &[usize] {
        &self.outer
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// Smallness constants `(a, b, c)` bounding `‖𝒱‖∞/κ`, `mκ`, `‖Ω⁰‖∞/κ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallnessConstants {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl SmallnessConstants {
    /// The absolute constants of the pathwise death theorem.
    pub const PATHWISE: Self = Self {
        a: 1.0 / 50.0,
        b: 1.0 / 80.0,
        c: 1.0 / 20.0,
    };

    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && c > 0.0) {
            return Err(Error::input("smallness constants must be positive"));
        }
        Ok(Self { a, b, c })
    }
}

fn check_subset(subset: &[usize], n: usize) -> Result<()> {
    match subset.iter().find(|&&i| i >= n) {
        Some(i) => Err(Error::Input(alloc::format!("index {i} out of range for N = {n}"))),
        None => Ok(()),
    }
}

/// `R(Θ) = (1/N) Σ_j (1 + cos θ_j)`.
pub fn order_parameter_full(phases: &[f64]) -> f64 {
    let n = phases.len() as f64;
    phases.iter().map(|&t| 1.0 + cos(t)).sum::<f64>() / n
}

/// `R_B(Θ) = (1/N) Σ_{i∈B} (1 + cos θ_i)`; the full set when `subset` is `None`.
///
/// Note the normalisation is by `N`, not `|B|`, so `R = R_B + R_{[N]∖B}`.
pub fn order_parameter(phases: &[f64], subset: Option<&[usize]>) -> Result<f64> {
    match subset {
        None => Ok(order_parameter_full(phases)),
        Some(subset) => {
            check_subset(subset, phases.len())?;
            Ok(partial_order_parameter(phases, subset))
        }
    }
}

pub(crate) fn partial_order_parameter(phases: &[f64], subset: &[usize]) -> f64 {
    subset.iter().map(|&i| 1.0 + cos(phases[i])).sum::<f64>() / phases.len() as f64
}

/// Writes `F_i(Θ) = ν_i − κ R(Θ) sin θ_i` into `out`.
pub fn winfree_rhs_into(phases: &[f64], params: &ModelParameters, out: &mut [f64]) {
    let kr = params.coupling * order_parameter_full(phases);
    for ((o, &nu), &theta) in out.iter_mut().zip(&params.frequencies).zip(phases) {
        *o = nu - kr * sin(theta);
    }
}

pub fn winfree_rhs(phases: &[f64], params: &ModelParameters) -> Result<Vec<f64>> {
    params.check_len(phases.len(), "phase vector")?;
    let mut out = alloc::vec![0.0; phases.len()];
    winfree_rhs_into(phases, params, &mut out);
    Ok(out)
}

/// `P(Θ) = −Σ ν_k θ_k − (κN/2) R(Θ)²`. Does not depend on the inertia.
pub fn potential(phases: &[f64], params: &ModelParameters) -> Result<f64> {
    params.check_len(phases.len(), "phase vector")?;
    let linear: f64 = params
        .frequencies
        .iter()
        .zip(phases)
        .map(|(nu, theta)| nu * theta)
        .sum();
    let r = order_parameter_full(phases);
    let n = phases.len() as f64;
    Ok(-linear - 0.5 * params.coupling * n * r * r)
}

/// `∂P/∂θ_i = −ν_i + κ R sin θ_i`, the exact negation of [`winfree_rhs`].
pub fn potential_gradient(phases: &[f64], params: &ModelParameters) -> Result<Vec<f64>> {
    let mut g = winfree_rhs(phases, params)?;
    g.iter_mut().for_each(|x| *x = -*x);
    Ok(g)
}

/// Whether `max_i |ν_i − κ R sin θ_i| ≤ tolerance`.
///
/// Only the phase projection is tested; velocity smallness is the business of
/// [`crate::integrate::detect_death`].
pub fn is_death_state(phases: &[f64], params: &ModelParameters, tolerance: f64) -> Result<bool> {
    if !(tolerance >= 0.0) {
        return Err(Error::input("tolerance must be nonnegative"));
    }
    let f = winfree_rhs(phases, params)?;
    Ok(sup_norm(&f) <= tolerance)
}

/// `M_{F,B} = ‖𝒱_B‖∞ + 2κ`; with `None`, `M_F` over all oscillators.
pub fn force_sup_bound(params: &ModelParameters, subset: Option<&[usize]>) -> Result<f64> {
    let nu_sup = match subset {
        None => params.frequency_sup(),
        Some(s) => {
            check_subset(s, params.n_oscillators())?;
            sup_norm(s.iter().map(|&i| &params.frequencies[i]))
        }
    };
    Ok(nu_sup + 2.0 * params.coupling)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemOrder {
    First,
    Second,
}

/// Caller-supplied density weight: maps `R` to `(h(R), h'(R))`.
pub type DensityWeight<'a> = &'a dyn Fn(f64) -> (f64, f64);

/// Divergence of the Winfree vector field.
///
/// - first order: `κ (N R (1 − R) + (1/N) Σ sin² θ_i)`;
/// - second order on `(θ, p)`: `−N/m`;
/// - second order w.r.t. the volume form `h(R) dθ ∧ dp`:
///   `−N/m − (h'(R)/h(R)) · (1/N) Σ p_i sin θ_i`.
pub fn divergence(
    state: &EnsembleState,
    params: &ModelParameters,
    order: SystemOrder,
    weight: Option<DensityWeight<'_>>,
) -> Result<f64> {
    params.check_len(state.phases.len(), "phase vector")?;
    let n = state.phases.len() as f64;
    match order {
        SystemOrder::First => {
            if weight.is_some() {
                return Err(Error::input("a density weight requires the second-order system"));
            }
            let r = order_parameter_full(&state.phases);
            let sin2: f64 = state.phases.iter().map(|&t| sin(t) * sin(t)).sum();
            Ok(params.coupling * (n * r * (1.0 - r) + sin2 / n))
        }
        SystemOrder::Second => {
            if params.inertia <= 0.0 {
                return Err(Error::domain("second-order divergence needs m > 0"));
            }
            let base = -n / params.inertia;
            let Some(weight) = weight else {
                return Ok(base);
            };
            params.check_len(state.velocities.len(), "velocity vector")?;
            let (h, dh) = weight(order_parameter_full(&state.phases));
            if !(h > 0.0) {
                return Err(Error::domain("density weight must be positive"));
            }
            let s = state
                .phases
                .iter()
                .zip(&state.velocities)
                .map(|(&t, &p)| p * sin(t))
                .sum::<f64>()
                / n;
            Ok(base - dh / h * s)
        }
    }
}
