//! Second-order perturbative ground state and discrete-mode expectation values.
//!
//! Amplitudes are coefficients of the operator expansion of the corrected
//! ground state, summed over *ordered* mode pairs:
//!
//! ```text
//! |g⁽¹⁾⟩ = Σ_c Σ_jk  C^c_jk / ħ(ω0+ω_j+ω_k) · b† d_j† d_k† |0⟩          (d = a or c)
//! |g⁽²⁾₁⟩ = Σ_c Σ_jkl 4 C^c_jk C^c_lk / ħ²(ω0+ω_j+ω_k)(ω_l+ω_j) · d_l† d_j† |0⟩
//! |g⁽²⁾₂⟩ = Σ_c Σ_jklm C^c_jk C^c_lm / ħ²(ω0+ω_j+ω_k)(ω_j+ω_k+ω_l+ω_m) · d_j† d_k† d_l† d_m† |0⟩
//! |g⁽²⁾₁₁⟩ = Σ_jklm C¹_jk C²_lm / ħ²(ω_j+ω_k+ω_l+ω_m) · [1/(ω0+ω_j+ω_k) + 1/(ω0+ω_l+ω_m)]
//!                  · a_j† a_k† c_l† c_m† |0⟩
//! ```
//!
//! Two-phonon components never enter the observables computed here.
//!
//! The connected correlator of the squared fields reduces to
//! `2⟨α₁|φ₁²|0⟩⟨0|φ₂²|α₂⟩ + 2⟨0|φ₁²φ₂²|g⁽²⁾₁₁⟩`, where `α_c` is the
//! cavity-`c` pair state of `|g⁽¹⁾⟩`; every normalization and disconnected
//! contribution cancels at this order.

use rayon::prelude::*;
use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::model::{
    coupling_unchecked, field_amplitude, local_coordinate, mode_function, Cavity, CouplingModel,
    ModeSet, PhysicalParams,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    DiscreteSum,
    ContinuumQuadrature,
    ExactDiag,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Diagnostics {
    Modes {
        n_modes: usize,
    },
    Quadrature {
        partitions: usize,
        evaluations: usize,
    },
    ExactDiag {
        dimension: usize,
        residual: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationResult {
    pub value: f64,
    pub method: Method,
    pub est_abs_err: f64,
    pub diagnostics: Diagnostics,
}

/// Which part of `⟨φ²⟩` feeds the dispersion energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DispersionPart {
    /// Only the coupling-induced shift; finite and regulator-stable.
    #[default]
    InteractionInduced,
    /// Bare truncated vacuum value plus the shift.
    Total,
}

/// Corrected ground state of the coupled system to second order in the couplings.
///
/// Amplitudes are derived on demand from the couplings; nothing of size
/// `N²` or larger is stored.
#[derive(Debug, Clone)]
pub struct PerturbativeState {
    modes: ModeSet,
    model: CouplingModel,
    omega: Vec<f64>,
    /// Per-mode coupling factor `sign_c(j) · w_j · √ω_j` for each cavity.
    root: [Vec<f64>; 2],
    /// `λ (ħ/2)^(3/2) / (L0 √(m ω0))`.
    strength: f64,
    lambda_sq: f64,
}

/// Photon content of every component family of the corrected ground
/// state: (phonons, left quanta, right quanta).
const COMPONENT_FAMILIES: [(u32, u32, u32); 11] = [
    (0, 0, 0),
    (1, 2, 0),
    (1, 0, 2),
    (0, 2, 0),
    (0, 0, 2),
    (0, 4, 0),
    (0, 0, 4),
    (0, 2, 2),
    (2, 4, 0),
    (2, 0, 4),
    (2, 2, 2),
];

impl PerturbativeState {
    pub fn new(modes: &ModeSet, model: &CouplingModel) -> Self {
        let n = modes.n_modes();
        let omega: Vec<f64> = (1..=n).map(|j| modes.omega_unchecked(j)).collect();
        let root = Cavity::BOTH.map(|c| {
            (1..=n)
                .map(|j| modes.coupling_sign(c, j) * modes.weight_unchecked(j) * omega[j - 1].sqrt())
                .collect::<Vec<_>>()
        });
        let strength = model.prefactor() / model.params().omega0().sqrt();
        let mut state = Self {
            modes: modes.clone(),
            model: *model,
            omega,
            root,
            strength,
            lambda_sq: 0.0,
        };
        state.lambda_sq = state.compute_lambda_sq();
        state
    }

    pub fn modes(&self) -> &ModeSet {
        &self.modes
    }

    pub fn model(&self) -> &CouplingModel {
        &self.model
    }

    pub fn params(&self) -> &PhysicalParams {
        self.model.params()
    }

    fn hbar(&self) -> f64 {
        self.params().hbar()
    }

    fn omega0(&self) -> f64 {
        self.params().omega0()
    }

    #[inline]
    fn root(&self, cavity: Cavity) -> &[f64] {
        &self.root[cavity.index() - 1]
    }

    /// `C^c_jk` from the precomputed factors, 0-based indices.
    #[inline]
    fn c0(&self, cavity: Cavity, j: usize, k: usize) -> f64 {
        let r = self.root(cavity);
        CouplingModel::cavity_sign(cavity) * self.strength * (r[j] * r[k])
    }

    #[inline]
    fn pair0(&self, cavity: Cavity, j: usize, k: usize) -> f64 {
        self.c0(cavity, j, k) / (self.hbar() * (self.omega0() + (self.omega[j] + self.omega[k])))
    }

    fn check(&self, idx: &[usize]) -> Result<()> {
        idx.iter().try_for_each(|&j| self.modes.check_index(j))
    }

    /// Operator-expansion coefficient `C^c_kj / ħ(ω0 + ω_j + ω_k)` of
    /// `b† d_j† d_k† |0⟩` in the first-order correction.
    pub fn pair_coefficient(&self, cavity: Cavity, j: usize, k: usize) -> Result<f64> {
        self.check(&[j, k])?;
        Ok(self.pair0(cavity, j - 1, k - 1))
    }

    /// Amplitude of the normalized Fock state `|1; 1_j 1_k⟩` (or `|1; 2_j⟩`)
    /// in the corrected ground state. The ordered pairs (j,k) and (k,j) add
    /// up for j ≠ k; a doubly occupied mode carries `√2` from `(d_j†)²`.
    pub fn first_order_amplitude(&self, cavity: Cavity, j: usize, k: usize) -> Result<f64> {
        let coefficient = self.pair_coefficient(cavity, j, k)?;
        Ok(if j == k {
            SQRT_2 * coefficient
        } else {
            2.0 * coefficient
        })
    }

    /// Coefficient of `d_l† d_j† |0⟩` (zero phonons) in the second-order correction.
    pub fn second_order_pair(&self, cavity: Cavity, l: usize, j: usize) -> Result<f64> {
        self.check(&[l, j])?;
        let (l, j) = (l - 1, j - 1);
        let hbar = self.hbar();
        let sum: f64 = (0..self.omega.len())
            .map(|k| self.c0(cavity, l, k) * self.pair0(cavity, k, j))
            .sum();
        Ok(4.0 * sum / (hbar * (self.omega[l] + self.omega[j])))
    }

    /// Coefficient of `d_j† d_k† d_l† d_m† |0⟩` in the second-order correction.
    pub fn second_order_quartet(
        &self,
        cavity: Cavity,
        j: usize,
        k: usize,
        l: usize,
        m: usize,
    ) -> Result<f64> {
        self.check(&[j, k, l, m])?;
        let (j, k, l, m) = (j - 1, k - 1, l - 1, m - 1);
        let e4 = self.omega[j] + self.omega[k] + self.omega[l] + self.omega[m];
        Ok(self.pair0(cavity, j, k) * self.c0(cavity, l, m) / (self.hbar() * e4))
    }

    /// Coefficient of `a_j† a_k† c_l† c_m† |0⟩` in the second-order correction.
    pub fn second_order_cross(&self, j: usize, k: usize, l: usize, m: usize) -> Result<f64> {
        self.check(&[j, k, l, m])?;
        Ok(self.cross0(j - 1, k - 1, l - 1, m - 1))
    }

    #[inline]
    fn cross0(&self, j: usize, k: usize, l: usize, m: usize) -> f64 {
        let e4 = self.omega[j] + self.omega[k] + self.omega[l] + self.omega[m];
        let hbar = self.hbar();
        let left = self.pair0(Cavity::Left, j, k) * self.c0(Cavity::Right, l, m);
        let right = self.c0(Cavity::Left, j, k) * self.pair0(Cavity::Right, l, m);
        (left + right) / (hbar * e4)
    }

    /// Λ² = ⟨g⁽¹⁾|g⁽¹⁾⟩, the second-order deficit of the vacuum weight.
    pub fn normalization_deficit(&self) -> f64 {
        self.lambda_sq
    }

    fn compute_lambda_sq(&self) -> f64 {
        let n = self.omega.len();
        // Σ over distinct pair states of amplitude² = 2 Σ over ordered pairs of coefficient².
        Cavity::BOTH
            .iter()
            .map(|&c| {
                (0..n)
                    .map(|j| (0..n).map(|k| self.pair0(c, j, k).powi(2)).sum::<f64>())
                    .sum::<f64>()
            })
            .sum::<f64>()
            * 2.0
    }

    /// Connected `⟨φ(x₁)φ(x₂)⟩`. Every component of the corrected state
    /// carries an even number of quanta in each cavity while `φ(x₁)φ(x₂)`
    /// flips both parities, so the value is identically zero.
    pub fn phi_phi_correlation(&self, x1: f64, x2: f64) -> Result<CorrelationResult> {
        local_coordinate(x1, Cavity::Left, &self.modes, self.params())?;
        local_coordinate(x2, Cavity::Right, &self.modes, self.params())?;
        assert!(COMPONENT_FAMILIES
            .iter()
            .all(|&(_, left, right)| left % 2 == 0 && right % 2 == 0));
        Ok(CorrelationResult {
            value: 0.0,
            method: Method::DiscreteSum,
            est_abs_err: 0.0,
            diagnostics: Diagnostics::Modes {
                n_modes: self.modes.n_modes(),
            },
        })
    }

    /// Connected correlator `⟨φ²(x₁)φ²(x₂)⟩ − ⟨φ²(x₁)⟩⟨φ²(x₂)⟩` as a
    /// truncated mode sum, evaluated in O(N²).
    ///
    /// All denominators depend on a mode pair only through `p + q`, so each
    /// cavity is first collapsed to `h_c(n) = Σ_{p+q=n} m_c(p) m_c(q)`.
    pub fn squared_field_correlation(&self, x1: f64, x2: f64) -> Result<CorrelationResult> {
        let n = self.min_modes_for_correlation()?;
        let m1 = self.dressed_mode_values(Cavity::Left, x1)?;
        let m2 = self.dressed_mode_values(Cavity::Right, x2)?;
        let h1 = self_convolution(&m1);
        let h2 = self_convolution(&m2);

        let omega0 = self.omega0();
        let quantum = self.modes.omega_unchecked(1);
        // index i ↔ pair frequency (i + 2)·quantum
        let len = h1.len();
        let inv_a: Vec<f64> = (0..len)
            .map(|i| 1.0 / (omega0 + quantum * (i + 2) as f64))
            .collect();
        // inv_sum[i + i'] = 1 / ((i + i' + 4) quantum)
        let inv_sum: Vec<f64> = (0..2 * len)
            .map(|m| 1.0 / (quantum * (m + 4) as f64))
            .collect();

        let s1: f64 = h1.iter().zip(&inv_a).map(|(h, a)| h * a).sum();
        let s2: f64 = h2.iter().zip(&inv_a).map(|(h, a)| h * a).sum();

        let rows: Vec<f64> = (0..len)
            .into_par_iter()
            .map(|i| {
                let r = &inv_sum[i..i + len];
                let d2 = dot(r, &h2);
                let d1 = dot(r, &h1);
                inv_a[i] * (h1[i] * d2 + h2[i] * d1)
            })
            .collect();
        let t: f64 = rows.iter().sum();
        let t_abs: f64 = rows.iter().map(|r| r.abs()).sum();

        let pref = self.correlation_prefactor();
        let value = pref * (s1 * s2 + t);
        let est_abs_err =
            f64::EPSILON * (4 * n) as f64 * pref.abs() * ((s1 * s2).abs() + t_abs);
        Ok(CorrelationResult {
            value,
            method: Method::DiscreteSum,
            est_abs_err,
            diagnostics: Diagnostics::Modes { n_modes: n },
        })
    }

    /// Reference O(N⁴) evaluation of the same correlator straight from the
    /// couplings, mode functions and amplitude formulas.
    pub fn squared_field_correlation_direct(&self, x1: f64, x2: f64) -> Result<CorrelationResult> {
        let n = self.min_modes_for_correlation()?;
        let params = self.params();
        let u1: Vec<f64> = (1..=n)
            .map(|j| mode_function(x1, j, Cavity::Left, &self.modes, params))
            .collect::<Result<_>>()?;
        let u2: Vec<f64> = (1..=n)
            .map(|j| mode_function(x2, j, Cavity::Right, &self.modes, params))
            .collect::<Result<_>>()?;
        let hbar = params.hbar();
        let omega0 = params.omega0();
        let omega: Vec<f64> = (1..=n).map(|j| self.modes.omega_unchecked(j)).collect();
        let c = |cav, j: usize, k: usize| coupling_unchecked(cav, j + 1, k + 1, &self.modes, &self.model);

        let mut first1 = 0.0;
        let mut first2 = 0.0;
        let mut second = 0.0;
        for p in 0..n {
            for q in 0..n {
                let c1 = c(Cavity::Left, p, q);
                let d1 = omega0 + omega[p] + omega[q];
                let w1 = u1[p] * u1[q];
                first1 += c1 / (hbar * d1) * w1;
                let c2pq = c(Cavity::Right, p, q);
                first2 += c2pq / (hbar * d1) * u2[p] * u2[q];
                for r in 0..n {
                    for s in 0..n {
                        let c2 = c(Cavity::Right, r, s);
                        let d2 = omega0 + omega[r] + omega[s];
                        let e4 = omega[p] + omega[q] + omega[r] + omega[s];
                        let g = c1 * c2 / (hbar * hbar * e4) * (1.0 / d1 + 1.0 / d2);
                        second += g * w1 * u2[r] * u2[s];
                    }
                }
            }
        }
        let value = 2.0 * (2.0 * first1) * (2.0 * first2) + 2.0 * 4.0 * second;
        Ok(CorrelationResult {
            value,
            method: Method::DiscreteSum,
            est_abs_err: f64::EPSILON * (n * n) as f64 * value.abs(),
            diagnostics: Diagnostics::Modes { n_modes: n },
        })
    }

    /// `ħ³c⁴ λ² / (L0⁴ m ω0)` with the sign `C¹·C² < 0` applied.
    fn correlation_prefactor(&self) -> f64 {
        let amp = field_amplitude(self.params());
        let amp2 = amp * amp;
        let hbar = self.hbar();
        let sign = CouplingModel::cavity_sign(Cavity::Left) * CouplingModel::cavity_sign(Cavity::Right);
        8.0 * sign * self.strength * self.strength * amp2 * amp2 / (hbar * hbar)
    }

    /// `sign_c(p) w_p sin(k_p x̃)`: coupling factor times mode function, up to
    /// constants.
    fn dressed_mode_values(&self, cavity: Cavity, x: f64) -> Result<Vec<f64>> {
        let xt = local_coordinate(x, cavity, &self.modes, self.params())?;
        Ok((1..=self.modes.n_modes())
            .map(|p| {
                self.modes.coupling_sign(cavity, p)
                    * self.modes.weight_unchecked(p)
                    * (self.modes.k_unchecked(p) * xt).sin()
            })
            .collect())
    }

    fn min_modes_for_correlation(&self) -> Result<usize> {
        let n = self.modes.n_modes();
        if n < 2 {
            return Err(Error::param("n_modes", "correlation sums need N ≥ 2"));
        }
        Ok(n)
    }

    /// Truncated bare vacuum value `⟨0|φ²(x)|0⟩ = Σ_j u_j(x)²`.
    pub fn bare_phi_squared(&self, x: f64, cavity: Cavity) -> Result<f64> {
        let u = self.field_modes(x, cavity)?;
        Ok(u.iter().map(|v| v * v).sum())
    }

    fn field_modes(&self, x: f64, cavity: Cavity) -> Result<Vec<f64>> {
        (1..=self.modes.n_modes())
            .map(|j| mode_function(x, j, cavity, &self.modes, self.params()))
            .collect()
    }

    /// Second-order shift `⟨g̃|φ²(x)|g̃⟩ − ⟨0|φ²(x)|0⟩`.
    ///
    /// Only the same-cavity pair state contributes: with `A` the pair
    /// coefficients and `B` the zero-phonon pair coefficients of the second
    /// order, the shift is `8 Σ_k (Σ_p u_p A_pk)² + 4 Σ_pq u_p u_q B_pq`.
    pub fn phi_squared_shift(&self, x: f64, cavity: Cavity) -> Result<f64> {
        let u = self.field_modes(x, cavity)?;
        let n = u.len();
        let hbar = self.hbar();
        let omega0 = self.omega0();
        let w = &self.omega;
        let root = self.root(cavity);

        let projected: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|k| (0..n).map(|p| u[p] * self.pair0(cavity, p, k)).sum::<f64>())
            .collect();
        let term1: f64 = 8.0 * projected.iter().map(|v| v * v).sum::<f64>();

        // Σ_k C_pk A_kq = strength² r_p r_q Σ_k r_k² / ħ(ω0+ω_k+ω_q)
        let inner: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|q| {
                (0..n)
                    .map(|k| root[k] * root[k] / (omega0 + w[k] + w[q]))
                    .sum::<f64>()
                    / hbar
            })
            .collect();
        let s2 = self.strength * self.strength;
        let rows: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|p| {
                (0..n)
                    .map(|q| {
                        let b = 4.0 * s2 * root[p] * root[q] * inner[q] / (hbar * (w[p] + w[q]));
                        u[p] * u[q] * b
                    })
                    .sum::<f64>()
            })
            .collect();
        let term2 = 4.0 * rows.iter().sum::<f64>();
        Ok(term1 + term2)
    }

    /// Dispersion energy `−½ α ⟨φ²(x)⟩` of a polarizable body at `x`.
    pub fn dispersion_energy(
        &self,
        alpha: f64,
        x: f64,
        cavity: Cavity,
        part: DispersionPart,
    ) -> Result<f64> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::param("alpha", format!("must be finite and ≥ 0, got {alpha}")));
        }
        let shift = self.phi_squared_shift(x, cavity)?;
        let phi2 = match part {
            DispersionPart::InteractionInduced => shift,
            DispersionPart::Total => self.bare_phi_squared(x, cavity)? + shift,
        };
        Ok(-0.5 * alpha * phi2)
    }
}

/// `h[n] = Σ_{p+q=n} m[p] m[q]`, 0-based so `h[i]` pairs indices summing to `i`.
fn self_convolution(m: &[f64]) -> Vec<f64> {
    let n = m.len();
    (0..2 * n - 1)
        .into_par_iter()
        .map(|i| {
            let lo = i.saturating_sub(n - 1);
            let hi = i.min(n - 1);
            let mut acc = 0.0;
            for p in lo..=hi {
                acc += m[p] * m[i - p];
            }
            acc
        })
        .collect()
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    // four accumulators so the loop vectorizes
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        for l in 0..4 {
            acc[l] += a[4 * c + l] * b[4 * c + l];
        }
    }
    let mut tail = 0.0;
    for i in 4 * chunks..a.len() {
        tail += a[i] * b[i];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Doubles the number of modes (regulator fixed) until the relative
/// increment drops below `rel_tol`. `est_abs_err` is the last increment.
pub fn squared_field_correlation_converged(
    x1: f64,
    x2: f64,
    modes: &ModeSet,
    model: &CouplingModel,
    rel_tol: f64,
    max_doublings: usize,
) -> Result<CorrelationResult> {
    let mut current = modes.clone();
    let mut last = PerturbativeState::new(&current, model).squared_field_correlation(x1, x2)?;
    for _ in 0..max_doublings {
        current = current.with_n_modes(2 * current.n_modes())?;
        let next = PerturbativeState::new(&current, model).squared_field_correlation(x1, x2)?;
        let increment = (next.value - last.value).abs();
        let result = CorrelationResult {
            est_abs_err: increment.max(next.est_abs_err),
            ..next
        };
        if increment <= rel_tol * next.value.abs() {
            return Ok(result);
        }
        last = result;
    }
    Err(Error::Convergence {
        context: "squared_field_correlation_converged",
        best: last.value,
        abs_err: last.est_abs_err,
    })
}
