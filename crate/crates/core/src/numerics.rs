//! Quadrature and small numerical helpers shared across modules.

use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};

const GL_DEGREE: usize = 16;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
fn gl_rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        GaussLegendre::new(GL_DEGREE.try_into().expect("nonzero degree"))
            .iter()
            .map(|(x, w)| (*x, *w))
            .collect()
    })
}

/// Gauss–Legendre approximation of `∫_a^b f`.
pub fn gauss_legendre<F: FnMut(f64) -> f64>(a: f64, b: f64, mut f: F) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    gl_rule()
        .iter()
        .map(|&(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// Gauss–Legendre nodes and weights mapped to `[a, b]`.
pub fn gauss_legendre_nodes(a: f64, b: f64) -> Vec<(f64, f64)> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    gl_rule()
        .iter()
        .map(|&(x, w)| (mid + half * x, w * half))
        .collect()
}

/// Panels `[0, 1/2), [1/2, 3/4), …` up to `1 - 2^-(depth+1)`, matching the dyadic coronae.
pub fn dyadic_panels(depth: u32) -> impl Iterator<Item = (u32, f64, f64)> {
    (0..=depth).map(|n| {
        let a = if n == 0 {
            0.0
        } else {
            1.0 - (-(n as f64)).exp2()
        };
        (n, a, 1.0 - (-(n as f64 + 1.0)).exp2())
    })
}

/// `∫ f(r) dr` over each dyadic radial panel, returned per panel.
pub fn dyadic_radial_integrals<F: FnMut(f64) -> f64>(depth: u32, mut f: F) -> Vec<f64> {
    dyadic_panels(depth)
        .map(|(_, a, b)| gauss_legendre(a, b, &mut f))
        .collect()
}

/// Mean of `g(θ)` over the circle for an integrand sharply peaked at `θ = 0`
/// with width about `width`. Panels grow geometrically away from the peak.
pub fn peaked_circle_mean<F: FnMut(f64) -> f64>(width: f64, mut g: F) -> f64 {
    let mut delta = width.clamp(1e-15, PI);
    let mut total = 0.0;
    let mut lo = 0.0;
    loop {
        let hi = (lo + delta).min(PI);
        total += gauss_legendre(lo, hi, |t| g(t) + g(-t));
        if hi >= PI {
            break;
        }
        lo = hi;
        delta *= 2.0;
    }
    total / TAU
}

/// `(mean |v|^s)^(1/s)` over a uniform grid.
pub fn grid_lp_norm(values: &[f64], s: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mean = values.iter().map(|v| v.abs().powf(s)).sum::<f64>() / values.len() as f64;
    mean.powf(1.0 / s)
}

/// Conjugate exponent `p' = p / (p - 1)`.
pub fn conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

/// `(Σ |x|^s)^(1/s)`, or the max norm for `s = ∞`.
pub fn lp_norm(xs: &[f64], s: f64) -> f64 {
    if s.is_infinite() {
        return xs.iter().fold(0.0, |m, x| m.max(x.abs()));
    }
    let scale = xs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    scale * xs.iter().map(|x| (x.abs() / scale).powf(s)).sum::<f64>().powf(1.0 / s)
}

/// Least-squares slope of `y` on `x`.
pub fn regression_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

pub fn check_finite(value: f64, what: &str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::numerical(format!("{what} is not finite ({value})")))
    }
}

pub fn check_exponent(p: f64, name: &str) -> Result<()> {
    if p.is_finite() && p > 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} = {p} must be a finite exponent > 1")))
    }
}

pub fn is_power_of_two(m: usize) -> bool {
    m >= 1 && m.is_power_of_two()
}
