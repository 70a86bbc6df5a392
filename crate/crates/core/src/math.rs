// Thin wrappers so call sites read like std float methods.

#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn expm1(x: f64) -> f64 {
    libm::expm1(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn asin(x: f64) -> f64 {
    libm::asin(x)
}

#[inline]
pub fn acos(x: f64) -> f64 {
    libm::acos(x)
}

#[inline]
pub fn pow(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

/// `1 − e^{−x}` without cancellation.
#[inline]
pub fn one_minus_exp_neg(x: f64) -> f64 {
    -expm1(-x)
}

/// `x − 1 + e^{−x}`, accurate for small `x`.
pub fn phi2(x: f64) -> f64 {
    if x < 1e-3 {
        let x2 = x * x;
        x2 / 2.0 - x2 * x / 6.0 + x2 * x2 / 24.0 - x2 * x2 * x / 120.0
    } else {
        x + expm1(-x)
    }
}

/// Maximum absolute value, 0 for an empty iterator.
pub fn sup_norm<'a>(xs: impl IntoIterator<Item = &'a f64>) -> f64 {
    xs.into_iter().fold(0.0, |acc, x| acc.max(x.abs()))
}
