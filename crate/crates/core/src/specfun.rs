//! Sine and cosine integrals and their auxiliary functions.
//!
//! * `Si(x) = ∫₀ˣ sin t / t dt`
//! * `Ci(x) = γ + ln x + ∫₀ˣ (cos t − 1) / t dt`
//! * `f(x) = Ci(x) sin x − si(x) cos x = ∫₀^∞ sin t / (t + x) dt`
//! * `g(x) = −Ci(x) cos x − si(x) sin x = ∫₀^∞ cos t / (t + x) dt`
//!
//! with `si(x) = Si(x) − π/2`. Below [`SERIES_SWITCH`] the power series of
//! Si and Ci are summed and f, g follow from them; above it the continued
//! fraction for `e^z E₁(z)` at `z = ix` gives `g − i f` directly and Si, Ci
//! are recovered from f and g.

use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Crossover between the power-series and continued-fraction branches.
pub const SERIES_SWITCH: f64 = 4.0;

const MAX_SERIES_TERMS: usize = 100;
const MAX_CF_ITERATIONS: usize = 10_000;

/// f and g at one argument, with a rounding-level error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxEval {
    pub x: f64,
    pub f: f64,
    pub g: f64,
    pub est_abs_err: f64,
}

/// Si(x) for finite x. Odd in x.
pub fn sin_integral(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain("sin_integral", format!("non-finite argument {x}")));
    }
    let ax = x.abs();
    let value = if ax == 0.0 {
        0.0
    } else if ax <= SERIES_SWITCH {
        si_series(ax).0
    } else {
        let (f, g, _) = aux_continued_fraction(ax);
        let (s, c) = ax.sin_cos();
        FRAC_PI_2 - f * c - g * s
    };
    Ok(if x < 0.0 { -value } else { value })
}

/// Ci(x) for x > 0.
pub fn cos_integral(x: f64) -> Result<f64> {
    check_positive("cos_integral", x)?;
    if x <= SERIES_SWITCH {
        Ok(ci_series(x).0)
    } else {
        let (f, g, _) = aux_continued_fraction(x);
        let (s, c) = x.sin_cos();
        Ok(f * s - g * c)
    }
}

/// Auxiliary function f(x) for x > 0.
pub fn aux_f(x: f64) -> Result<f64> {
    aux_eval(x).map(|e| e.f)
}

/// Auxiliary function g(x) for x > 0.
pub fn aux_g(x: f64) -> Result<f64> {
    aux_eval(x).map(|e| e.g)
}

/// Both auxiliary functions at once; the continued fraction produces them
/// together, so this is the cheap entry point for quadrature kernels.
pub fn aux_eval(x: f64) -> Result<AuxEval> {
    check_positive("aux_eval", x)?;
    let (f, g, est_abs_err) = if x <= SERIES_SWITCH {
        aux_from_series(x)
    } else {
        aux_continued_fraction(x)
    };
    Ok(AuxEval {
        x,
        f,
        g,
        est_abs_err,
    })
}

fn check_positive(function: &'static str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(function, format!("argument must be finite and > 0, got {x}")))
    }
}

/// Σ (−1)ⁿ x^(2n+1) / ((2n+1)(2n+1)!), returned with Σ|terms|.
fn si_series(x: f64) -> (f64, f64) {
    let x2 = x * x;
    // term = (−1)ⁿ x^(2n+1)/(2n+1)!
    let mut term = x;
    let mut sum = x;
    let mut abs_sum = x;
    for n in 1..MAX_SERIES_TERMS {
        let k = (2 * n) as f64;
        term *= -x2 / (k * (k + 1.0));
        let contrib = term / (k + 1.0);
        sum += contrib;
        abs_sum += contrib.abs();
        if contrib.abs() <= f64::EPSILON * 1e-3 * sum.abs() {
            break;
        }
    }
    (sum, abs_sum)
}

/// γ + ln x + Σ (−1)ⁿ x^(2n) / ((2n)(2n)!), returned with Σ|terms|.
fn ci_series(x: f64) -> (f64, f64) {
    let x2 = x * x;
    let ln_x = x.ln();
    let mut term = 1.0;
    let mut tail = 0.0;
    let mut abs_sum = EULER_GAMMA + ln_x.abs();
    for n in 1..MAX_SERIES_TERMS {
        let k = (2 * n) as f64;
        term *= -x2 / ((k - 1.0) * k);
        let contrib = term / k;
        tail += contrib;
        abs_sum += contrib.abs();
        if contrib.abs() <= f64::EPSILON * 1e-3 * (tail.abs() + 1e-300) {
            break;
        }
    }
    (EULER_GAMMA + ln_x + tail, abs_sum)
}

fn aux_from_series(x: f64) -> (f64, f64, f64) {
    let (si_full, si_abs) = si_series(x);
    let (ci, ci_abs) = ci_series(x);
    let si = si_full - FRAC_PI_2;
    let (s, c) = x.sin_cos();
    let f = ci * s - si * c;
    let g = -ci * c - si * s;
    let err = 4.0 * f64::EPSILON * (si_abs + ci_abs + FRAC_PI_2);
    (f, g, err)
}

/// Modified Lentz evaluation of e^z E₁(z), z = ix, which equals g(x) − i f(x).
fn aux_continued_fraction(x: f64) -> (f64, f64, f64) {
    const TINY: f64 = 1e-300;
    let mut b = Complex64::new(1.0, x);
    let mut c = Complex64::new(1.0 / TINY, 0.0);
    let mut d = b.inv();
    let mut h = d;
    let mut iterations = 0;
    for i in 1..MAX_CF_ITERATIONS {
        let a = -((i * i) as f64);
        b += 2.0;
        d = (d * a + b).inv();
        c = b + c.inv() * a;
        let del = c * d;
        h *= del;
        iterations = i;
        if (del - 1.0).norm() <= f64::EPSILON {
            break;
        }
    }
    let err = 2.0 * f64::EPSILON * (iterations as f64).sqrt() * h.norm();
    (-h.im, h.re, err)
}
