//! Equilibrium theory of the first-order model, built on the unimodal
//! profile `g(s) = sin s (1 + cos s)`, increasing on `[0, π/3]` and
//! decreasing on `[π/3, π]`.
//!
//! For `α ∈ (π/3, π)` the reflected angle `α∞ ∈ (0, π/3)` solves
//! `g(α∞) = g(α)`. When `‖𝒱‖∞/κ < g(α)` the first-order system has a unique
//! equilibrium in `[−α, α]^N`, located in `(−α∞, α∞)^N`, and every solution
//! started in `[−α, α]^N` enters that box before
//! `π / (κ g(α) − ‖𝒱‖∞)` and converges at rate
//! `κ (2 cos α∞ − 1)(cos α∞ + 1)`.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_3, PI};

use crate::certificates::{CertificateReport, Relation};
use crate::error::{Error, Result};
use crate::math::{acos, asin, cos, exp, sin, sqrt};
use crate::model::{EnsembleState, ModelParameters, SmallnessConstants};

const E_INV: f64 = 0.367_879_441_171_442_33;

/// `sin s (1 + cos s)`.
pub fn g(s: f64) -> f64 {
    sin(s) * (1.0 + cos(s))
}

/// `α ∈ (π/3, π)` together with its reflection `α∞ ∈ (0, π/3)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaPair {
    pub alpha: f64,
    pub alpha_inf: f64,
}

/// Root of `g(s) = level` on `[lo, hi]` where `g` is monotone, by bisection
/// down to adjacent floats.
fn bisect_level(level: f64, mut lo: f64, mut hi: f64, increasing: bool) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (g(mid) < level) == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > FRAC_PI_3 && alpha < PI {
        Ok(())
    } else {
        Err(Error::domain("α must lie strictly inside (π/3, π)"))
    }
}

pub fn alpha_infinity(alpha: f64) -> Result<AlphaPair> {
    check_alpha(alpha)?;
    let alpha_inf = bisect_level(g(alpha), 0.0, FRAC_PI_3, true);
    Ok(AlphaPair { alpha, alpha_inf })
}

fn check_coupling(params: &ModelParameters) -> Result<f64> {
    let kappa = params.coupling();
    if kappa > 0.0 {
        Ok(kappa)
    } else {
        Err(Error::domain("equilibrium theory needs κ > 0"))
    }
}

/// `‖𝒱‖∞/κ < g(α)`.
pub fn equilibrium_exists(params: &ModelParameters, alpha: f64) -> Result<CertificateReport> {
    check_alpha(alpha)?;
    let kappa = check_coupling(params)?;
    Ok(CertificateReport::new(
        "equilibrium_exists",
        params.frequency_sup() / kappa,
        Relation::Less,
        g(alpha),
        "first-order-equilibrium",
    ))
}

/// `π / (κ g(α) − ‖𝒱‖∞)`.
pub fn entrance_time_bound(params: &ModelParameters, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let kappa = check_coupling(params)?;
    let denom = kappa * g(alpha) - params.frequency_sup();
    if denom <= 0.0 {
        return Err(Error::domain("κ g(α) − ‖𝒱‖∞ must be positive"));
    }
    Ok(PI / denom)
}

/// `κ (2 cos α∞ − 1)(cos α∞ + 1)`.
pub fn exponential_rate(pair: AlphaPair, kappa: f64) -> f64 {
    let c = cos(pair.alpha_inf);
    kappa * (2.0 * c - 1.0) * (c + 1.0)
}

/// The unique equilibrium in `(−α∞, α∞)^N`, with zero velocities.
///
/// Iterates `R ← 1 + (1/N) Σ √(1 − (ν_i/(κR))²)` from `R = 2`, averaging
/// consecutive iterates once they start to oscillate, then sets
/// `θ_i = arcsin(ν_i/(κR))`.
pub fn find_equilibrium(params: &ModelParameters, alpha: f64) -> Result<EnsembleState> {
    if !equilibrium_exists(params, alpha)?.satisfied {
        return Err(Error::domain("‖𝒱‖∞/κ ≥ g(α): no equilibrium is guaranteed"));
    }
    let pair = alpha_infinity(alpha)?;
    let kappa = params.coupling();
    let nu = params.frequencies();
    let n = nu.len() as f64;
    let update = |r: f64| -> Option<f64> {
        let mut acc = 0.0;
        for &v in nu {
            let s = v / (kappa * r);
            if s.abs() > 1.0 {
                return None;
            }
            acc += sqrt(1.0 - s * s);
        }
        Some(1.0 + acc / n)
    };

    let mut r = 2.0;
    let mut trace = alloc::vec![r];
    let mut last_step = 0.0f64;
    let mut damped = false;
    let mut converged = false;
    for _ in 0..10_000 {
        let Some(next) = update(r) else {
            return Err(Error::Solver {
                message: alloc::format!("|ν_i| exceeds κR at R = {r}"),
                trace,
            });
        };
        let mut step = next - r;
        if !damped && step * last_step < 0.0 {
            damped = true;
        }
        if damped {
            step *= 0.5;
        }
        r += step;
        trace.push(r);
        last_step = step;
        if step.abs() <= 4.0 * f64::EPSILON {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Solver {
            message: "R iteration did not settle".into(),
            trace,
        });
    }

    let phases: Vec<f64> = nu.iter().map(|&v| asin(v / (kappa * r))).collect();
    let r_actual = crate::model::order_parameter_full(&phases);
    let residual = nu
        .iter()
        .zip(&phases)
        .fold(0.0f64, |acc, (&v, &t)| acc.max((v - kappa * r_actual * sin(t)).abs()));
    if residual > 1e-10 || phases.iter().any(|t| t.abs() >= pair.alpha_inf) {
        return Err(Error::Solver {
            message: alloc::format!("fixed point misses the target (residual {residual:e})"),
            trace,
        });
    }
    Ok(EnsembleState::at_rest(phases))
}

/// Constants for the zero-inertia synchronization theorem with
/// `‖𝒱‖∞/κ < a`, `mκ < b`, `‖Ω⁰‖∞/κ < c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theorem2Parameters {
    pub theta0_sup: f64,
    pub epsilon: f64,
    pub kappa: f64,
    pub pair: AlphaPair,
    pub constants: SmallnessConstants,
    /// `T = 2π / (κ g(α))`.
    pub entrance_time: f64,
}

impl Theorem2Parameters {
    /// Re-evaluates every condition the construction relies on.
    pub fn recheck(&self) -> Vec<CertificateReport> {
        let AlphaPair { alpha, alpha_inf } = self.pair;
        let SmallnessConstants { a, b, c } = self.constants;
        let ga = g(alpha);
        let eps = self.epsilon;
        alloc::vec![
            CertificateReport::new("alpha_covers_data", self.theta0_sup, Relation::Less, alpha, "choice-of-alpha"),
            CertificateReport::new(
                "alpha_inf_small",
                cos(2.0 * alpha_inf),
                Relation::Greater,
                1.0 - eps / 2.0,
                "choice-of-alpha",
            ),
            CertificateReport::new("a_half_profile", a, Relation::LessEq, ga / 2.0, "choice-of-a"),
            CertificateReport::new(
                "inertia_below_entrance",
                b / self.kappa,
                Relation::LessEq,
                self.entrance_time,
                "entrance-time",
            ),
            CertificateReport::new(
                "tikhonov_step_displayed",
                step2_displayed(a, b, c, ga),
                Relation::Less,
                alpha_inf,
                "tikhonov-step",
            ),
            CertificateReport::new(
                "tikhonov_step_full_exponent",
                step2_full(a, b, c, ga),
                Relation::Less,
                alpha_inf,
                "tikhonov-step",
            ),
            CertificateReport::new(
                "death_criterion_step",
                step3(a, b, c, eps),
                Relation::Less,
                sin(2.0 * alpha_inf),
                "death-step",
            ),
        ]
    }
}

/// `(b/2)(a + c + 2) exp(2π/g(α))`.
fn step2_displayed(a: f64, b: f64, c: f64, ga: f64) -> f64 {
    0.5 * b * (a + c + 2.0) * exp(2.0 * PI / ga)
}

/// `b (a + c + 2) exp(4κT)` with `κT = 2π/g(α)`: the phase gap bound at the
/// entrance time, with the factor ½ dropped.
fn step2_full(a: f64, b: f64, c: f64, ga: f64) -> f64 {
    b * (a + c + 2.0) * exp(8.0 * PI / ga)
}

/// `(c e⁻¹ + a + 2bc e⁻¹ + 2b(a + 2)) / ((2 − ε)(1 − e⁻¹))`.
fn step3(a: f64, b: f64, c: f64, eps: f64) -> f64 {
    (c * E_INV + a + 2.0 * b * c * E_INV + 2.0 * b * (a + 2.0)) / ((2.0 - eps) * (1.0 - E_INV))
}

/// Picks `α` and `(a, b, c)` for initial phases in `(−θ⁰_sup, θ⁰_sup)`.
///
/// `α` is placed 5% of the way from the smallest admissible value to `π`.
/// The constants start at `(g(α)/2, 0.1, 0.1)`; all three are halved while
/// the death-criterion condition fails, then `b` alone is halved while the
/// Tikhonov condition fails. The Tikhonov condition is enforced with the
/// full exponent `exp(8π/g(α))` and without the factor ½, which implies the
/// displayed form.
pub fn theorem2_parameter_builder(
    theta0_sup: f64,
    epsilon: f64,
    kappa: f64,
) -> Result<Theorem2Parameters> {
    if !(0.0..PI).contains(&theta0_sup) {
        return Err(Error::input("θ⁰_sup must lie in [0, π)"));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::input("ε must lie in (0, 1)"));
    }
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::input("κ must be positive"));
    }
    // cos(2α∞) > 1 − ε/2  ⇔  α∞ < s_max  ⇔  α > α_c with g(α_c) = g(s_max)
    let s_max = 0.5 * acos(1.0 - epsilon / 2.0);
    let alpha_c = bisect_level(g(s_max), FRAC_PI_3, PI, false);
    let floor = alpha_c.max(theta0_sup);
    let alpha = floor + 0.05 * (PI - floor);
    let mut trace = alloc::vec![alpha_c, alpha];
    if !(alpha > floor && alpha < PI) {
        return Err(Error::Solver {
            message: "no representable α between the admissible floor and π".into(),
            trace,
        });
    }
    let pair = alpha_infinity(alpha)?;
    let ga = g(alpha);
    if !(pair.alpha_inf > 0.0) || !(cos(2.0 * pair.alpha_inf) > 1.0 - epsilon / 2.0) {
        return Err(Error::Solver {
            message: "α∞ is not resolvable in floating point".into(),
            trace,
        });
    }
    let entrance_time = 2.0 * PI / (kappa * ga);

    let (mut a, mut b, mut c) = (ga / 2.0, 0.1f64, 0.1f64);
    b = b.min(kappa * entrance_time);
    let target3 = sin(2.0 * pair.alpha_inf);
    let mut rounds = 0;
    while step3(a, b, c, epsilon) >= target3 {
        a *= 0.5;
        b *= 0.5;
        c *= 0.5;
        rounds += 1;
        trace.push(step3(a, b, c, epsilon));
        if rounds > 2000 {
            return Err(Error::Solver {
                message: "death-criterion condition unreachable".into(),
                trace,
            });
        }
    }
    while step2_full(a, b, c, ga) >= pair.alpha_inf {
        b *= 0.5;
        rounds += 1;
        trace.push(b);
        if !(b > 0.0) || rounds > 4000 {
            return Err(Error::Solver {
                message: "Tikhonov condition needs b below the float range".into(),
                trace,
            });
        }
    }
    Ok(Theorem2Parameters {
        theta0_sup,
        epsilon,
        kappa,
        pair,
        constants: SmallnessConstants { a, b, c },
        entrance_time,
    })
}
