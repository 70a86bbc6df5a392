//! Seeded sampling of initial data and parameters.
//!
//! Every random quantity comes from a [`ChaCha8Rng`] seeded with
//! `seed_from_u64(seed)`; sweep cells use distinct streams of the same seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::parse_real_list;
use crate::error::{LabError, Result};

pub const RNG_NAME: &str = "chacha8";

pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// How to fill a length-`N` vector.
#[derive(Debug, Clone, PartialEq)]
pub enum Sampler {
    /// Independent draws from `[lo, hi)`.
    Uniform { lo: f64, hi: f64 },
    /// Fixed values; the length must equal `N`.
    List(Vec<f64>),
    Constant(f64),
    /// Uniform draws on `[−1, 1)` rescaled so the sup-norm equals `sup`.
    Sup(f64),
}

impl Sampler {
    /// Parses `uniform(lo, hi)`, `list(x, ...)` or `[x, ...]`, `const(x)`,
    /// `sup(s)`, or a bare number (constant).
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        let args = |prefix: &str| -> Option<&str> {
            t.strip_prefix(prefix)?.trim().strip_prefix('(')?.strip_suffix(')')
        };
        let bad = || LabError::config(format!("unrecognised sampler `{t}`"));
        if let Some(a) = args("uniform") {
            let v = parse_real_list(a)?;
            if v.len() != 2 || !(v[0] < v[1]) {
                return Err(LabError::config(format!("uniform needs lo < hi: `{t}`")));
            }
            return Ok(Sampler::Uniform { lo: v[0], hi: v[1] });
        }
        if let Some(a) = args("list") {
            return Ok(Sampler::List(parse_real_list(a)?));
        }
        if t.starts_with('[') {
            return Ok(Sampler::List(parse_real_list(t)?));
        }
        if let Some(a) = args("const") {
            return Ok(Sampler::Constant(a.trim().parse().map_err(|_| bad())?));
        }
        if let Some(a) = args("sup") {
            let s: f64 = a.trim().parse().map_err(|_| bad())?;
            if !(s >= 0.0) {
                return Err(LabError::config("sup(s) needs s ≥ 0"));
            }
            return Ok(Sampler::Sup(s));
        }
        t.parse().map(Sampler::Constant).map_err(|_| bad())
    }

    pub fn draw(&self, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
        match self {
            Sampler::Uniform { lo, hi } => Ok((0..n).map(|_| rng.random_range(*lo..*hi)).collect()),
            Sampler::List(v) if v.len() == n => Ok(v.clone()),
            Sampler::List(v) => Err(LabError::config(format!(
                "list has {} entries but N = {n}",
                v.len()
            ))),
            Sampler::Constant(c) => Ok(vec![*c; n]),
            Sampler::Sup(s) => Ok(sup_scaled(n, *s, rng)),
        }
    }
}

impl std::fmt::Display for Sampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Sampler::Uniform { lo, hi } => write!(f, "uniform({lo:e}, {hi:e})"),
            Sampler::List(v) => {
                let items: Vec<String> = v.iter().map(|x| format!("{x:e}")).collect();
                write!(f, "list({})", items.join(", "))
            }
            Sampler::Constant(c) => write!(f, "const({c:e})"),
            Sampler::Sup(s) => write!(f, "sup({s:e})"),
        }
    }
}

/// `N` draws on `[−1, 1)` rescaled to sup-norm exactly `sup`.
pub fn sup_scaled(n: usize, sup: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let top = raw.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if top == 0.0 || sup == 0.0 {
        return vec![0.0; n];
    }
    raw.iter().map(|x| x / top * sup).collect()
}
