//! Continuum limit (`L0 → ∞`) of the cross-cavity squared-field correlation.
//!
//! With scaled distances `d₁ = k₀(L0 − x₁)`, `d₂ = k₀(x₂ − L0)` the
//! correlation is a dimensionless brace times `−ħ³ck₀/(2⁶(2π)⁴ m)`:
//!
//! ```text
//! B(d₁, d₂) = S(d₁) S(d₂) + J(d₁, d₂) + J(d₂, d₁)
//! S(x)      = f(x)/x + g(x)
//! J(a, b)   = ∫₀^∞ dv v²/(1+v) w(va) S(vb),      w(u) = sin u/u − cos u
//! ```
//!
//! and `I(d) = J(d, d)`, so `B(d, d) = S(d)² + 2 I(d)`. `J(a, b)` is
//! evaluated in `u = va`, where the oscillation has fixed period: adaptive
//! panels up to a split point, then one partition per half-wave of `w`
//! with Euler-accelerated partial sums.

pub mod quad;

use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::PhysicalParams;
use crate::perturb::{CorrelationResult, Diagnostics, Method};
use crate::specfun::aux_eval;
use quad::{adaptive, euler_average, oscillation_zero, QuadEstimate};

/// Ratio of the discrete Dirichlet-cavity correlation (mode spacing π/L0)
/// to the continuum brace normalization used here. Each of the four mode
/// sums carries density `L0/π` instead of `L0/2π`, and the brace
/// normalization absorbs another `2⁴`.
pub const DIRICHLET_DENSITY_FACTOR: f64 = 256.0;

/// Nominal large-d value of `I(d)·d³` used by [`asymptotic_correlation`].
pub const TAIL_COEFFICIENT_NOMINAL: f64 = 1.8;

/// RMS log-residual above which a power-law fit is rejected.
pub const FIT_RESIDUAL_THRESHOLD: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PanelRule {
    /// Globally adaptive 21-point Gauss–Kronrod bisection, at most
    /// `max_panels` panels per partition.
    GaussKronrod21 { max_panels: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailStrategy {
    pub acceleration_order: usize,
    pub max_partitions: usize,
    /// Split point `U₀ = max(split_min, split_per_d · d)`.
    pub split_min: f64,
    pub split_per_d: f64,
}

/// Numerical policy for the semi-infinite oscillatory integrals.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSpec {
    rel_tol: f64,
    abs_tol: f64,
    panel_rule: PanelRule,
    tail: TailStrategy,
    regulator_eps_ladder: Option<Vec<f64>>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            panel_rule: PanelRule::GaussKronrod21 { max_panels: 500 },
            tail: TailStrategy {
                acceleration_order: 6,
                max_partitions: 5000,
                split_min: 10.0,
                split_per_d: 5.0,
            },
            regulator_eps_ladder: None,
        }
    }
}

impl QuadratureSpec {
    pub fn new(rel_tol: f64, abs_tol: f64) -> Result<Self> {
        Self::default().with_tolerances(rel_tol, abs_tol)
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Result<Self> {
        for (name, v) in [("rel_tol", rel_tol), ("abs_tol", abs_tol)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("must be finite and > 0, got {v}")));
            }
        }
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        Ok(self)
    }

    pub fn with_panel_rule(mut self, rule: PanelRule) -> Result<Self> {
        let PanelRule::GaussKronrod21 { max_panels } = rule;
        if max_panels == 0 {
            return Err(Error::param("max_panels", "must be at least 1"));
        }
        self.panel_rule = rule;
        Ok(self)
    }

    pub fn with_tail(mut self, tail: TailStrategy) -> Result<Self> {
        if tail.acceleration_order == 0 {
            return Err(Error::param("acceleration_order", "must be at least 1"));
        }
        if tail.max_partitions < tail.acceleration_order + 2 {
            return Err(Error::param(
                "max_partitions",
                format!(
                    "must be ≥ acceleration order + 2 = {}, got {}",
                    tail.acceleration_order + 2,
                    tail.max_partitions
                ),
            ));
        }
        if !(tail.split_min > 0.0 && tail.split_per_d >= 0.0) {
            return Err(Error::param("split", "split point must be positive"));
        }
        self.tail = tail;
        Ok(self)
    }

    /// Damping parameters for [`reduced_integral_regulated`]. At least two
    /// distinct positive values are required.
    pub fn with_regulator_eps_ladder(mut self, ladder: Vec<f64>) -> Result<Self> {
        if ladder.len() < 2 || ladder.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(Error::param(
                "regulator_eps_ladder",
                "needs at least two finite positive values",
            ));
        }
        let mut sorted = ladder.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::param("regulator_eps_ladder", "values must be distinct"));
        }
        self.regulator_eps_ladder = Some(ladder);
        Ok(self)
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    pub fn abs_tol(&self) -> f64 {
        self.abs_tol
    }

    pub fn panel_rule(&self) -> PanelRule {
        self.panel_rule
    }

    pub fn tail(&self) -> TailStrategy {
        self.tail
    }

    pub fn regulator_eps_ladder(&self) -> Option<&[f64]> {
        self.regulator_eps_ladder.as_deref()
    }

    /// Same policy with both tolerances divided by `factor`.
    pub fn tightened(&self, factor: f64) -> Result<Self> {
        self.clone()
            .with_tolerances(self.rel_tol / factor, self.abs_tol / factor)
    }

    fn max_panels(&self) -> usize {
        let PanelRule::GaussKronrod21 { max_panels } = self.panel_rule;
        max_panels
    }

    fn split_point(&self, d: f64) -> f64 {
        self.tail.split_min.max(self.tail.split_per_d * d)
    }
}

/// Dimensionless distances of the two probe points from the wall.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledDistances {
    d1: f64,
    d2: f64,
}

impl ScaledDistances {
    pub fn new(d1: f64, d2: f64) -> Result<Self> {
        for (name, d) in [("d1", d1), ("d2", d2)] {
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::param(name, format!("must be finite and > 0, got {d}")));
            }
        }
        Ok(Self { d1, d2 })
    }

    pub fn symmetric(d: f64) -> Result<Self> {
        Self::new(d, d)
    }

    /// From positions `x₁ < L0 < x₂`.
    pub fn from_positions(x1: f64, x2: f64, params: &PhysicalParams) -> Result<Self> {
        let l0 = params.half_length();
        let k0 = params.k0();
        Self::new(k0 * (l0 - x1), k0 * (x2 - l0))
    }

    pub fn d1(&self) -> f64 {
        self.d1
    }

    pub fn d2(&self) -> f64 {
        self.d2
    }

    pub fn swapped(&self) -> Self {
        Self {
            d1: self.d2,
            d2: self.d1,
        }
    }

    /// Positions `(x₁, x₂)` in a system of half-length `L0`.
    pub fn positions(&self, params: &PhysicalParams) -> (f64, f64) {
        let l0 = params.half_length();
        let k0 = params.k0();
        (l0 - self.d1 / k0, l0 + self.d2 / k0)
    }

    /// Unscaled distances `y = d/k₀`.
    pub fn unscaled(&self, params: &PhysicalParams) -> (f64, f64) {
        (self.d1 / params.k0(), self.d2 / params.k0())
    }
}

/// Quadrature result with bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralEstimate {
    pub value: f64,
    pub abs_err: f64,
    pub partitions: usize,
    pub evaluations: usize,
}

impl IntegralEstimate {
    fn diagnostics(&self) -> Diagnostics {
        Diagnostics::Quadrature {
            partitions: self.partitions,
            evaluations: self.evaluations,
        }
    }
}

fn check_distance(function: &'static str, d: f64) -> Result<()> {
    if d.is_finite() && d > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(function, format!("distance must be finite and > 0, got {d}")))
    }
}

/// `w(u) = sin u/u − cos u`, with its series below `u = 0.5`.
pub fn oscillation_factor(u: f64) -> f64 {
    if u.abs() < 0.5 {
        // Σ_{n≥1} (−1)^(n+1) 2n u^(2n) / (2n+1)!
        let u2 = u * u;
        let mut fact_term = u2 / 6.0; // u^(2n)/(2n+1)!
        let mut sum = 0.0;
        for n in 1..12 {
            let k = 2 * n;
            sum += fact_term * k as f64;
            fact_term *= -u2 / (((k + 2) * (k + 3)) as f64);
        }
        sum
    } else {
        u.sin() / u - u.cos()
    }
}

/// `S(x) = f(x)/x + g(x)` with its rounding error.
pub fn source_factor(x: f64) -> Result<(f64, f64)> {
    let e = aux_eval(x)?;
    let value = e.f / x + e.g;
    let err = e.est_abs_err * (1.0 + 1.0 / x) + 2.0 * f64::EPSILON * value.abs();
    Ok((value, err))
}

/// Closed form `½ (f(qd)/d + q g(qd))` of
/// `∫₀^∞∫₀^∞ dr ds sin(rd) sin(sd)/(q + r + s)`; at `q = 0` the limit `π/(4d)`.
pub fn factorized_double_integral(q: f64, d: f64, _spec: &QuadratureSpec) -> Result<f64> {
    check_distance("factorized_double_integral", d)?;
    if !(q.is_finite() && q >= 0.0) {
        return Err(Error::domain(
            "factorized_double_integral",
            format!("q must be finite and ≥ 0, got {q}"),
        ));
    }
    if q == 0.0 {
        return Ok(PI / (4.0 * d));
    }
    let e = aux_eval(q * d)?;
    Ok(0.5 * (e.f / d + q * e.g))
}

/// Integrand of `J(a, b)` in `u = va`, without the `1/a³`.
fn kernel(u: f64, a: f64, ratio: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    let s = match aux_eval(u * ratio) {
        Ok(e) => e.f / (u * ratio) + e.g,
        Err(_) => f64::NAN,
    };
    u * u / (1.0 + u / a) * oscillation_factor(u) * s
}

/// Partition boundaries `0, z₁, z₂, …` of the oscillation.
fn boundary(n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        oscillation_zero(n)
    }
}

/// `J(a, b) = ∫₀^∞ dv v²/(1+v) (sin(va)/(va) − cos(va)) S(vb)`.
pub fn reduced_integral_general(a: f64, b: f64, spec: &QuadratureSpec) -> Result<IntegralEstimate> {
    check_distance("reduced_integral", a)?;
    check_distance("reduced_integral", b)?;
    let ratio = b / a;
    let f = |u: f64| kernel(u, a, ratio);
    let scale = a.powi(3);
    let max_panels = spec.max_panels();
    let panel_abs = 0.1 * spec.abs_tol * scale;
    let panel_rel = 0.1 * spec.rel_tol;
    let split = spec.split_point(a);

    let mut evaluations = 0;
    let mut partitions = 0;
    let mut n = 0;
    let mut head = 0.0;
    let mut head_err = 0.0;
    while boundary(n) < split {
        let r = panel(&f, boundary(n), boundary(n + 1), panel_abs, panel_rel, max_panels)?;
        head += r.value;
        head_err += r.abs_err;
        evaluations += r.evaluations;
        partitions += 1;
        n += 1;
    }

    let order = spec.tail.acceleration_order;
    let mut partial = Vec::new();
    let mut running = 0.0;
    let mut tail_panel_err = 0.0;
    let mut prev_estimate: Option<f64> = None;
    let mut prev_diff = f64::INFINITY;
    loop {
        let r = panel(&f, boundary(n), boundary(n + 1), panel_abs, panel_rel, max_panels)?;
        running += r.value;
        tail_panel_err += r.abs_err;
        evaluations += r.evaluations;
        partitions += 1;
        n += 1;
        partial.push(running);
        if partial.len() <= order {
            continue;
        }
        let estimate = euler_average(&partial, order);
        if let Some(prev) = prev_estimate {
            let diff = (estimate - prev).abs();
            let target = 0.5 * (spec.abs_tol * scale).max(spec.rel_tol * (head + estimate).abs());
            if diff <= target && prev_diff <= target {
                let abs_err = (head_err + tail_panel_err + diff + prev_diff) / scale;
                return Ok(IntegralEstimate {
                    value: (head + estimate) / scale,
                    abs_err,
                    partitions,
                    evaluations,
                });
            }
            if partitions >= spec.tail.max_partitions {
                return Err(Error::Convergence {
                    context: "oscillatory tail acceleration",
                    best: (head + estimate) / scale,
                    abs_err: (head_err + tail_panel_err + diff + prev_diff) / scale,
                });
            }
            prev_diff = diff;
        }
        prev_estimate = Some(estimate);
    }
}

fn panel<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Result<QuadEstimate> {
    let r = adaptive(f, a, b, abs_tol, rel_tol, max_panels)?;
    if !r.value.is_finite() {
        return Err(Error::domain("reduced_integral", "non-finite integrand"));
    }
    Ok(r)
}

/// `I(d) = J(d, d)`.
pub fn reduced_integral_i(d: f64, spec: &QuadratureSpec) -> Result<IntegralEstimate> {
    reduced_integral_general(d, d, spec)
}

/// `J(a, b)` with an `e^(−εu)` damping for each ε of the configured ladder,
/// extrapolated polynomially to ε = 0. Slow; meant for cross-checks.
pub fn reduced_integral_regulated(
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<IntegralEstimate> {
    check_distance("reduced_integral", a)?;
    check_distance("reduced_integral", b)?;
    let ladder = spec.regulator_eps_ladder().ok_or_else(|| {
        Error::param("regulator_eps_ladder", "required for the regulated integral")
    })?;
    let ratio = b / a;
    let scale = a.powi(3);
    let max_panels = spec.max_panels();
    let mut evaluations = 0;
    let mut partitions = 0;
    let mut values = Vec::with_capacity(ladder.len());
    for &eps in ladder {
        let f = |u: f64| (-eps * u).exp() * kernel(u, a, ratio);
        // e^(−εu) below 1e-17 relative to the first partitions
        let cutoff = 40.0 / eps;
        let mut sum = 0.0;
        let mut n = 0;
        while boundary(n) < cutoff {
            let r = panel(&f, boundary(n), boundary(n + 1), 0.1 * spec.abs_tol * scale, 0.1 * spec.rel_tol, max_panels)?;
            sum += r.value;
            evaluations += r.evaluations;
            partitions += 1;
            n += 1;
        }
        values.push(sum / scale);
    }
    let (value, abs_err) = neville_at_zero(ladder, &values);
    Ok(IntegralEstimate {
        value,
        abs_err,
        partitions,
        evaluations,
    })
}

/// Polynomial extrapolation to zero; the error is the last correction.
fn neville_at_zero(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let mut p = ys.to_vec();
    let n = xs.len();
    let mut last_change = f64::INFINITY;
    for level in 1..n {
        for i in 0..n - level {
            let (xi, xj) = (xs[i], xs[i + level]);
            let updated = (xj * p[i] - xi * p[i + 1]) / (xj - xi);
            if i == 0 {
                last_change = (updated - p[0]).abs();
            }
            p[i] = updated;
        }
    }
    (p[0], last_change)
}

/// Dimensionless brace `B(d₁, d₂)`.
pub fn correlation_brace(dist: ScaledDistances, spec: &QuadratureSpec) -> Result<IntegralEstimate> {
    let (s1, e1) = source_factor(dist.d1)?;
    let (s2, e2) = source_factor(dist.d2)?;
    let first = s1 * s2;
    let first_err = e1 * s2.abs() + e2 * s1.abs();
    if dist.d1 == dist.d2 {
        let i = reduced_integral_i(dist.d1, spec)?;
        return Ok(IntegralEstimate {
            value: first + 2.0 * i.value,
            abs_err: first_err + 2.0 * i.abs_err,
            partitions: i.partitions,
            evaluations: i.evaluations,
        });
    }
    let j12 = reduced_integral_general(dist.d1, dist.d2, spec)?;
    let j21 = reduced_integral_general(dist.d2, dist.d1, spec)?;
    Ok(IntegralEstimate {
        value: first + j12.value + j21.value,
        abs_err: first_err + j12.abs_err + j21.abs_err,
        partitions: j12.partitions + j21.partitions,
        evaluations: j12.evaluations + j21.evaluations,
    })
}

/// `−ħ³ c k₀ / (2⁶ (2π)⁴ m)`.
pub fn continuum_prefactor(params: &PhysicalParams) -> f64 {
    let hbar = params.hbar();
    -hbar.powi(3) * params.c() * params.k0() / (64.0 * (2.0 * PI).powi(4) * params.mass())
}

fn to_result(brace: IntegralEstimate, params: &PhysicalParams) -> CorrelationResult {
    let pref = continuum_prefactor(params);
    CorrelationResult {
        value: pref * brace.value,
        method: Method::ContinuumQuadrature,
        est_abs_err: pref.abs() * brace.abs_err,
        diagnostics: brace.diagnostics(),
    }
}

/// `C(d)` for two points at the same scaled distance `d` on opposite sides.
pub fn correlation_c_of_d(
    d: f64,
    params: &PhysicalParams,
    spec: &QuadratureSpec,
) -> Result<CorrelationResult> {
    check_distance("correlation_c_of_d", d)?;
    Ok(to_result(
        correlation_brace(ScaledDistances::symmetric(d)?, spec)?,
        params,
    ))
}

pub fn correlation_c_general(
    dist: ScaledDistances,
    params: &PhysicalParams,
    spec: &QuadratureSpec,
) -> Result<CorrelationResult> {
    Ok(to_result(correlation_brace(dist, spec)?, params))
}

/// Large-d closed form `−1.8 ħ³ck₀/(2⁵(2π)⁴ m) d⁻³`.
pub fn asymptotic_correlation(d: f64, params: &PhysicalParams) -> Result<f64> {
    check_distance("asymptotic_correlation", d)?;
    Ok(2.0 * TAIL_COEFFICIENT_NOMINAL * continuum_prefactor(params) / d.powi(3))
}

/// `|y| ≈ coefficient · x^exponent`, fitted in log space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub coefficient: f64,
    pub exponent: f64,
    /// RMS of the log residuals.
    pub residual: f64,
    pub n_points: usize,
}

/// Least-squares power law through `(x, |y|)`; with `forced_exponent` only
/// the coefficient is fitted.
pub fn fit_power_law(xs: &[f64], ys: &[f64], forced_exponent: Option<f64>) -> Result<PowerLawFit> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            found: ys.len(),
        });
    }
    let needed = if forced_exponent.is_some() { 1 } else { 2 };
    if xs.len() < needed {
        return Err(Error::param("n_points", format!("need at least {needed} points")));
    }
    let mut lx = Vec::with_capacity(xs.len());
    let mut ly = Vec::with_capacity(ys.len());
    for (&x, &y) in xs.iter().zip(ys) {
        if !(x > 0.0 && x.is_finite() && y != 0.0 && y.is_finite()) {
            return Err(Error::param("data", format!("cannot take logs of ({x}, {y})")));
        }
        lx.push(x.ln());
        ly.push(y.abs().ln());
    }
    let n = lx.len() as f64;
    let mean_x = lx.iter().sum::<f64>() / n;
    let mean_y = ly.iter().sum::<f64>() / n;
    let exponent = match forced_exponent {
        Some(p) => p,
        None => {
            let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
            let sxx: f64 = lx.iter().map(|x| (x - mean_x).powi(2)).sum();
            if sxx == 0.0 {
                return Err(Error::param("data", "all abscissae coincide"));
            }
            sxy / sxx
        }
    };
    let intercept = mean_y - exponent * mean_x;
    let ss: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - exponent * x).powi(2))
        .sum();
    Ok(PowerLawFit {
        coefficient: intercept.exp(),
        exponent,
        residual: (ss / n).sqrt(),
        n_points: xs.len(),
    })
}

/// `n` log-spaced points spanning `[min, max]`.
pub fn log_grid(min: f64, max: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![min];
    }
    let (lmin, lmax) = (min.ln(), max.ln());
    (0..n)
        .map(|i| {
            if i == 0 {
                min
            } else if i + 1 == n {
                max
            } else {
                (lmin + (lmax - lmin) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// Power-law fit of the brace `B(d, d)` over log-spaced `d`.
pub fn fit_asymptotic_coefficient(
    d_min: f64,
    d_max: f64,
    n_points: usize,
    spec: &QuadratureSpec,
) -> Result<PowerLawFit> {
    check_distance("fit_asymptotic_coefficient", d_min)?;
    if !(d_max > d_min && d_max.is_finite()) {
        return Err(Error::param("d_max", format!("must exceed d_min = {d_min}")));
    }
    if n_points < 4 {
        return Err(Error::param("n_points", format!("need at least 4, got {n_points}")));
    }
    let ds = log_grid(d_min, d_max, n_points);
    let braces = ds
        .par_iter()
        .map(|&d| correlation_brace(ScaledDistances::symmetric(d)?, spec).map(|b| b.value))
        .collect::<Result<Vec<_>>>()?;
    let fit = fit_power_law(&ds, &braces, None)?;
    check_fit(fit, FIT_RESIDUAL_THRESHOLD)
}

/// Rejects a fit whose residual exceeds `threshold`.
pub fn check_fit(fit: PowerLawFit, threshold: f64) -> Result<PowerLawFit> {
    if fit.residual > threshold {
        Err(Error::FitRejected {
            coefficient: fit.coefficient,
            exponent: fit.exponent,
            residual: fit.residual,
            threshold,
        })
    } else {
        Ok(fit)
    }
}
