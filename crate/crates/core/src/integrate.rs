//! Time integration of `m θ̈ + θ̇ = G(Θ)` (m > 0) and `θ̇ = G(Θ)` (m = 0)
//! for a phase field `G`, plus trajectory diagnostics.
//!
//! Two steppers are available for the second-order system:
//!
//! - [`Method::ExponentialSplit`] (default) freezes `G` over a step and
//!   integrates the velocity relaxation exactly,
//!   `ω ← G + (ω − G) e^{−h/m}`, `θ ← θ + G h + m (ω − G)(1 − e^{−h/m})`.
//!   Step doubling estimates the local error on the phases and the accepted
//!   value is the Richardson extrapolation of the two solutions. The step is
//!   exact when `G` is constant and stays stable for any `h/m`.
//! - [`Method::AdaptiveRk`], Dormand–Prince 5(4) with an embedded error
//!   estimate on all components. Explicit, so it needs `h ≲ m`.
//!
//! First-order systems are always integrated with Dormand–Prince; the
//! exponential step degenerates to explicit Euler when `m = 0`.
//!
//! Steps are clipped so that every output time is hit exactly; no dense
//! output interpolation is involved.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{exp, one_minus_exp_neg, phi2, sup_norm};
use crate::model::{order_parameter_full, winfree_rhs_into, EnsembleState, ModelParameters};

/// A phase vector field `G: ℝ^d → ℝ^d`.
pub trait PhaseField {
    fn dim(&self) -> usize;
    fn eval(&self, phases: &[f64], out: &mut [f64]);
}

/// `G = F`, the Winfree right-hand side.
#[derive(Debug, Clone, Copy)]
pub struct WinfreeField<'a>(pub &'a ModelParameters);

impl PhaseField for WinfreeField<'_> {
    fn dim(&self) -> usize {
        self.0.n_oscillators()
    }

    fn eval(&self, phases: &[f64], out: &mut [f64]) {
        winfree_rhs_into(phases, self.0, out);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    AdaptiveRk,
    ExponentialSplit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorOptions {
    pub method: Method,
    pub rel_tolerance: f64,
    pub abs_tolerance: f64,
    pub max_step: f64,
    pub initial_step: f64,
    pub sample_interval: f64,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            method: Method::ExponentialSplit,
            rel_tolerance: 1e-8,
            abs_tolerance: 1e-10,
            max_step: 1.0,
            initial_step: 1e-4,
            sample_interval: 0.1,
        }
    }
}

impl IntegratorOptions {
    pub fn adaptive_rk() -> Self {
        Self {
            method: Method::AdaptiveRk,
            ..Self::default()
        }
    }

    pub fn with_tolerances(mut self, rel: f64, abs: f64) -> Self {
        self.rel_tolerance = rel;
        self.abs_tolerance = abs;
        self
    }

    pub fn with_sample_interval(mut self, dt: f64) -> Self {
        self.sample_interval = dt;
        self
    }

    pub fn with_max_step(mut self, h: f64) -> Self {
        self.max_step = h;
        self
    }

    fn validate(&self, duration: f64) -> Result<()> {
        let in_unit = |x: f64| x > 0.0 && x < 1.0;
        if !in_unit(self.rel_tolerance) || !in_unit(self.abs_tolerance) {
            return Err(Error::input("tolerances must lie in (0, 1)"));
        }
        if !(self.max_step > 0.0) || !(self.initial_step > 0.0) {
            return Err(Error::input("step sizes must be positive"));
        }
        if !(self.sample_interval > 0.0) || self.sample_interval > duration {
            return Err(Error::input(
                "sample interval must be positive and no longer than the integration span",
            ));
        }
        Ok(())
    }
}

/// Samples of a run together with the parameters and options that produced it.
///
/// Every sample carries velocities: `ω` for second-order runs, `G(Θ)` for
/// first-order runs.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub params: ModelParameters,
    pub options: IntegratorOptions,
    pub samples: Vec<EnsembleState>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl Trajectory {
    pub fn initial(&self) -> &EnsembleState {
        &self.samples[0]
    }

    pub fn last(&self) -> &EnsembleState {
        self.samples.last().expect("trajectories are never empty")
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.time)
    }

    pub fn duration(&self) -> f64 {
        self.last().time - self.initial().time
    }

    pub fn order_parameters(&self) -> Vec<f64> {
        self.samples
            .iter()
            .map(|s| order_parameter_full(&s.phases))
            .collect()
    }

    /// Minimum of `R` over the samples and the time where it is attained.
    pub fn min_order_parameter(&self) -> (f64, f64) {
        self.samples
            .iter()
            .map(|s| (order_parameter_full(&s.phases), s.time))
            .fold((f64::INFINITY, 0.0), |acc, x| if x.0 < acc.0 { x } else { acc })
    }
}

/// Integrates the inertial Winfree system from `initial` up to `t_end`.
pub fn integrate_second_order(
    initial: &EnsembleState,
    params: &ModelParameters,
    t_end: f64,
    options: &IntegratorOptions,
) -> Result<Trajectory> {
    if params.inertia() <= 0.0 {
        return Err(Error::domain("second-order integration needs m > 0"));
    }
    integrate_field(&WinfreeField(params), params, initial, t_end, options)
}

/// Integrates `θ̇ = F(Θ)`; the inertia stored in `params` is ignored.
pub fn integrate_first_order(
    initial: &EnsembleState,
    params: &ModelParameters,
    t_end: f64,
    options: &IntegratorOptions,
) -> Result<Trajectory> {
    let first = params.with_inertia(0.0)?;
    integrate_field(&WinfreeField(&first), &first, initial, t_end, options)
}

/// Integrates an arbitrary phase field. `params` is recorded in the
/// trajectory and supplies the inertia; `m = 0` selects the first-order system.
pub fn integrate_field<G: PhaseField>(
    field: &G,
    params: &ModelParameters,
    initial: &EnsembleState,
    t_end: f64,
    options: &IntegratorOptions,
) -> Result<Trajectory> {
    let n = field.dim();
    if initial.phases.len() != n {
        return Err(Error::input("initial phases do not match the field dimension"));
    }
    let m = params.inertia();
    if m > 0.0 && initial.velocities.len() != n {
        return Err(Error::input("second-order integration needs initial velocities"));
    }
    let t0 = initial.time;
    if !(t_end > t0) || !t_end.is_finite() {
        return Err(Error::input("t_end must be finite and after the initial time"));
    }
    options.validate(t_end - t0)?;

    let mut driver = Driver::new(field, m, options, initial);
    let mut samples = vec![driver.sample(t0)];
    let targets = sample_times(t0, t_end, options.sample_interval);
    for target in targets {
        driver.advance_to(target)?;
        samples.push(driver.sample(target));
    }
    Ok(Trajectory {
        params: params.clone(),
        options: options.clone(),
        samples,
        accepted_steps: driver.accepted,
        rejected_steps: driver.rejected,
    })
}

fn sample_times(t0: f64, t_end: f64, dt: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = 1u64;
    loop {
        let t = t0 + k as f64 * dt;
        if t >= t_end - 1e-9 * dt {
            break;
        }
        out.push(t);
        k += 1;
    }
    out.push(t_end);
    out
}

enum Stepper {
    Rk(DormandPrince),
    Split(ExponentialSplit),
}

struct Driver<'f, G: PhaseField> {
    field: &'f G,
    m: f64,
    n: usize,
    y: Vec<f64>,
    t: f64,
    h: f64,
    opts: IntegratorOptions,
    stepper: Stepper,
    accepted: usize,
    rejected: usize,
}

impl<'f, G: PhaseField> Driver<'f, G> {
    fn new(field: &'f G, m: f64, opts: &IntegratorOptions, initial: &EnsembleState) -> Self {
        let n = field.dim();
        let mut y = initial.phases.clone();
        if m > 0.0 {
            y.extend_from_slice(&initial.velocities);
        }
        let stepper = if m > 0.0 && opts.method == Method::ExponentialSplit {
            Stepper::Split(ExponentialSplit::new(n))
        } else {
            Stepper::Rk(DormandPrince::new(y.len()))
        };
        Self {
            field,
            m,
            n,
            y,
            t: initial.time,
            h: opts.initial_step.min(opts.max_step),
            opts: opts.clone(),
            stepper,
            accepted: 0,
            rejected: 0,
        }
    }

    fn sample(&self, t: f64) -> EnsembleState {
        let phases = self.y[..self.n].to_vec();
        let velocities = if self.m > 0.0 {
            self.y[self.n..].to_vec()
        } else {
            let mut v = vec![0.0; self.n];
            self.field.eval(&phases, &mut v);
            v
        };
        EnsembleState {
            phases,
            velocities,
            time: t,
        }
    }

    fn fail(&self, message: &str) -> Error {
        Error::Integration {
            message: message.into(),
            last_good: Box::new(self.sample(self.t)),
        }
    }

    fn advance_to(&mut self, target: f64) -> Result<()> {
        while self.t < target {
            let remaining = target - self.t;
            let clipped = self.h >= remaining;
            let h = if clipped { remaining } else { self.h };
            let h_min = 64.0 * f64::EPSILON * self.t.abs().max(1.0);
            if h < h_min && !clipped {
                return Err(self.fail("step size underflow"));
            }
            let sys = System {
                field: self.field,
                m: self.m,
                n: self.n,
            };
            let (err, order) = match &mut self.stepper {
                Stepper::Rk(rk) => (rk.attempt(&sys, &self.y, h, &self.opts), 5.0),
                Stepper::Split(es) => (es.attempt(&sys, &self.y, h, &self.opts), 2.0),
            };
            let factor = if err.is_finite() {
                if err == 0.0 {
                    5.0
                } else {
                    (0.9 * libm::pow(err, -1.0 / order)).clamp(0.2, 5.0)
                }
            } else {
                0.2
            };
            if err <= 1.0 {
                match &mut self.stepper {
                    Stepper::Rk(rk) => rk.accept(&mut self.y),
                    Stepper::Split(es) => es.accept(&mut self.y),
                }
                self.t = if clipped { target } else { self.t + h };
                self.accepted += 1;
                let proposal = h * factor;
                self.h = if clipped { self.h.max(proposal) } else { proposal };
            } else {
                self.rejected += 1;
                self.h = h * factor.min(1.0);
                if self.h < h_min {
                    return Err(self.fail("step size underflow after rejected step"));
                }
            }
            self.h = self.h.min(self.opts.max_step);
        }
        Ok(())
    }
}

/// Flat state `y = (θ)` or `y = (θ, ω)`.
struct System<'f, G: PhaseField> {
    field: &'f G,
    m: f64,
    n: usize,
}

impl<G: PhaseField> System<'_, G> {
    fn deriv(&self, y: &[f64], dy: &mut [f64]) {
        let n = self.n;
        if self.m > 0.0 {
            let (dtheta, domega) = dy.split_at_mut(n);
            dtheta.copy_from_slice(&y[n..]);
            self.field.eval(&y[..n], domega);
            for (d, &w) in domega.iter_mut().zip(&y[n..]) {
                *d = (*d - w) / self.m;
            }
        } else {
            self.field.eval(y, dy);
        }
    }
}

fn weighted_error(err: &[f64], y0: &[f64], y1: &[f64], opts: &IntegratorOptions) -> f64 {
    err.iter()
        .zip(y0.iter().zip(y1))
        .map(|(e, (a, b))| e.abs() / (opts.abs_tolerance + opts.rel_tolerance * a.abs().max(b.abs())))
        .fold(0.0, f64::max)
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Dormand–Prince 5(4) with first-same-as-last reuse. The fields here are
/// autonomous, so the stage times are not needed.
struct DormandPrince {
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
    y_new: Vec<f64>,
    err: Vec<f64>,
    fsal_valid: bool,
}

impl DormandPrince {
    fn new(d: usize) -> Self {
        Self {
            k: core::array::from_fn(|_| vec![0.0; d]),
            tmp: vec![0.0; d],
            y_new: vec![0.0; d],
            err: vec![0.0; d],
            fsal_valid: false,
        }
    }

    fn attempt<G: PhaseField>(
        &mut self,
        sys: &System<'_, G>,
        y: &[f64],
        h: f64,
        opts: &IntegratorOptions,
    ) -> f64 {
        if !self.fsal_valid {
            sys.deriv(y, &mut self.k[0]);
            self.fsal_valid = true;
        }
        let d = y.len();
        macro_rules! stage {
            ($out:expr, $($coef:expr => $idx:expr),+) => {{
                for i in 0..d {
                    self.tmp[i] = y[i] + h * (0.0 $(+ $coef * self.k[$idx][i])+);
                }
                let (tmp, k) = (&self.tmp, &mut self.k);
                sys.deriv(tmp, &mut k[$out]);
            }};
        }
        stage!(1, A21 => 0);
        stage!(2, A31 => 0, A32 => 1);
        stage!(3, A41 => 0, A42 => 1, A43 => 2);
        stage!(4, A51 => 0, A52 => 1, A53 => 2, A54 => 3);
        stage!(5, A61 => 0, A62 => 1, A63 => 2, A64 => 3, A65 => 4);
        let k = &self.k;
        for i in 0..d {
            self.y_new[i] = y[i]
                + h * (B1 * k[0][i] + B3 * k[2][i] + B4 * k[3][i] + B5 * k[4][i] + B6 * k[5][i]);
        }
        let (y_new, k) = (&self.y_new, &mut self.k);
        sys.deriv(y_new, &mut k[6]);
        let k = &self.k;
        for i in 0..d {
            self.err[i] = h
                * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i]
                    + E7 * k[6][i]);
        }
        weighted_error(&self.err, y, &self.y_new, opts)
    }

    fn accept(&mut self, y: &mut [f64]) {
        y.copy_from_slice(&self.y_new);
        self.k.swap(0, 6);
    }
}

/// Frozen-force exponential step with step doubling.
struct ExponentialSplit {
    force: Vec<f64>,
    full: Vec<f64>,
    half: Vec<f64>,
    y_new: Vec<f64>,
}

impl ExponentialSplit {
    fn new(n: usize) -> Self {
        Self {
            force: vec![0.0; n],
            full: vec![0.0; 2 * n],
            half: vec![0.0; 2 * n],
            y_new: vec![0.0; 2 * n],
        }
    }

    fn step<G: PhaseField>(sys: &System<'_, G>, force: &mut [f64], y: &mut [f64], h: f64) {
        let n = sys.n;
        let m = sys.m;
        let (theta, omega) = y.split_at_mut(n);
        sys.field.eval(theta, force);
        let decay = exp(-h / m);
        let relax = one_minus_exp_neg(h / m);
        for i in 0..n {
            let lag = omega[i] - force[i];
            theta[i] += force[i] * h + m * lag * relax;
            omega[i] = force[i] + lag * decay;
        }
    }

    fn attempt<G: PhaseField>(
        &mut self,
        sys: &System<'_, G>,
        y: &[f64],
        h: f64,
        opts: &IntegratorOptions,
    ) -> f64 {
        let n = sys.n;
        self.full.copy_from_slice(y);
        Self::step(sys, &mut self.force, &mut self.full, h);
        self.half.copy_from_slice(y);
        Self::step(sys, &mut self.force, &mut self.half, 0.5 * h);
        Self::step(sys, &mut self.force, &mut self.half, 0.5 * h);
        for i in 0..2 * n {
            self.y_new[i] = 2.0 * self.half[i] - self.full[i];
        }
        // velocities relax to the force and are not part of the estimate
        let mut err = 0.0f64;
        for i in 0..n {
            let e = self.half[i] - self.full[i];
            let scale = opts.abs_tolerance + opts.rel_tolerance * y[i].abs().max(self.y_new[i].abs());
            err = err.max(e.abs() / scale);
        }
        if self.y_new.iter().any(|v| !v.is_finite()) {
            return f64::INFINITY;
        }
        err
    }

    fn accept(&mut self, y: &mut [f64]) {
        y.copy_from_slice(&self.y_new);
    }
}

/// Outcome of [`detect_death`].
#[derive(Debug, Clone, PartialEq)]
pub struct DeathVerdict {
    pub died: bool,
    /// Earliest sample time after which every sampled speed stays below the tolerance.
    pub settle_time: Option<f64>,
    /// Final-sample phases, reported only when `died`.
    pub final_phases: Option<Vec<f64>>,
    /// `max_i |θ̇_i|` over the final window.
    pub residual_velocity: f64,
}

/// Two-sided finite-horizon death test over the final `window` of `traj`:
/// every sampled speed is at most `velocity_tol`, and every phase oscillates
/// by at most `velocity_tol · window`.
pub fn detect_death(traj: &Trajectory, velocity_tol: f64, window: f64) -> Result<DeathVerdict> {
    if traj.samples.len() < 2 {
        return Err(Error::input("trajectory has fewer than two samples"));
    }
    if !(velocity_tol > 0.0) || !(window > 0.0) {
        return Err(Error::input("velocity tolerance and window must be positive"));
    }
    if window >= traj.duration() {
        return Err(Error::input("window must be shorter than the trajectory"));
    }
    let n = traj.initial().len();
    if traj.samples.iter().any(|s| s.velocities.len() != n) {
        return Err(Error::input("trajectory samples lack velocities"));
    }
    let start = traj.last().time - window;
    let tail: Vec<&EnsembleState> = traj.samples.iter().filter(|s| s.time >= start).collect();
    let residual_velocity = tail
        .iter()
        .map(|s| sup_norm(&s.velocities))
        .fold(0.0, f64::max);
    let max_osc = (0..n)
        .map(|i| {
            let (lo, hi) = tail.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
                (lo.min(s.phases[i]), hi.max(s.phases[i]))
            });
            hi - lo
        })
        .fold(0.0, f64::max);
    let died = residual_velocity <= velocity_tol && max_osc <= velocity_tol * window;
    let settle_time = if died {
        let mut t = traj.last().time;
        for s in traj.samples.iter().rev() {
            if sup_norm(&s.velocities) > velocity_tol {
                break;
            }
            t = s.time;
        }
        Some(t)
    } else {
        None
    };
    Ok(DeathVerdict {
        died,
        settle_time,
        final_phases: died.then(|| traj.last().phases.clone()),
        residual_velocity,
    })
}

/// Largest violation over samples of the integrated Duhamel identity
/// `θ_i(t) = θ_i⁰ + m ω_i⁰ (1 − e^{−t/m}) + ∫₀ᵗ F_i(Θ(s)) (1 − e^{−(t−s)/m}) ds`.
///
/// The integral is computed by product integration: `F` is interpolated
/// linearly between samples and integrated against the exact kernel, using
/// the recursion `J(t_{k+1}) = e^{−Δ/m} J(t_k) + (local term)` for the
/// exponential part, so the cost is linear in the number of samples.
pub fn duhamel_residual(traj: &Trajectory, params: &ModelParameters) -> Result<f64> {
    let m = params.inertia();
    if m <= 0.0 {
        return Err(Error::domain("the Duhamel identity needs m > 0"));
    }
    let n = params.n_oscillators();
    let first = traj.initial();
    params.check_len(first.phases.len(), "trajectory phases")?;
    params.check_len(first.velocities.len(), "trajectory velocities")?;
    let t0 = first.time;

    let mut f_prev = vec![0.0; n];
    let mut f_next = vec![0.0; n];
    winfree_rhs_into(&first.phases, params, &mut f_prev);
    let mut plain = vec![0.0; n]; // ∫ F ds
    let mut damped = vec![0.0; n]; // ∫ F e^{−(t−s)/m} ds
    let mut worst = 0.0f64;

    for pair in traj.samples.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let dt = b.time - a.time;
        let x = dt / m;
        let q = exp(-x);
        // ∫_0^Δ e^{−(Δ−u)/m} du and ∫_0^Δ u e^{−(Δ−u)/m} du
        let w0 = m * one_minus_exp_neg(x);
        let w1 = m * m * phi2(x);
        winfree_rhs_into(&b.phases, params, &mut f_next);
        let elapsed = b.time - t0;
        let layer = m * one_minus_exp_neg(elapsed / m);
        for i in 0..n {
            let slope = (f_next[i] - f_prev[i]) / dt;
            plain[i] += 0.5 * dt * (f_prev[i] + f_next[i]);
            damped[i] = q * damped[i] + f_prev[i] * w0 + slope * w1;
            let predicted = first.phases[i] + first.velocities[i] * layer + plain[i] - damped[i];
            worst = worst.max((b.phases[i] - predicted).abs());
        }
        core::mem::swap(&mut f_prev, &mut f_next);
    }
    Ok(worst)
}
