//! Physical parameters, cavity mode grids and the mirror–field couplings.
//!
//! Two Dirichlet cavities `(0, L0)` and `(L0, 2 L0)` share a movable wall
//! at `L0`. The wall is a harmonic oscillator of mass `m` and frequency
//! `ω0`; each cavity field couples to the wall displacement through
//!
//! ```text
//! C¹_kj = λ (−1)^(j+k) (ħ/2)^(3/2) / (L0 √m) · √(ω_j ω_k / ω0),   C²_kj = −C¹_kj
//! ```

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

use crate::error::{Error, Result};

/// CODATA 2018 reduced Planck constant, J·s.
pub const HBAR_SI: f64 = 1.054_571_817e-34;
/// Speed of light in vacuum, m/s.
pub const C_SI: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    /// ħ = c = 1.
    Natural,
    Si,
}

impl Units {
    pub fn hbar(self) -> f64 {
        match self {
            Units::Natural => 1.0,
            Units::Si => HBAR_SI,
        }
    }

    pub fn c(self) -> f64 {
        match self {
            Units::Natural => 1.0,
            Units::Si => C_SI,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    mass: f64,
    omega0: f64,
    half_length: f64,
    units: Units,
}

impl PhysicalParams {
    pub fn new(units: Units, mass: f64, omega0: f64, half_length: f64) -> Result<Self> {
        positive("m", mass)?;
        positive("omega0", omega0)?;
        positive("L0", half_length)?;
        Ok(Self {
            mass,
            omega0,
            half_length,
            units,
        })
    }

    pub fn natural(mass: f64, omega0: f64, half_length: f64) -> Result<Self> {
        Self::new(Units::Natural, mass, omega0, half_length)
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn units(&self) -> Units {
        self.units
    }

    pub fn hbar(&self) -> f64 {
        self.units.hbar()
    }

    pub fn c(&self) -> f64 {
        self.units.c()
    }

    /// Wavenumber of the mirror oscillation, `k0 = ω0 / c`.
    pub fn k0(&self) -> f64 {
        self.omega0 / self.c()
    }

    pub fn with_mass(self, mass: f64) -> Result<Self> {
        Self::new(self.units, mass, self.omega0, self.half_length)
    }

    pub fn with_omega0(self, omega0: f64) -> Result<Self> {
        Self::new(self.units, self.mass, omega0, self.half_length)
    }

    pub fn with_half_length(self, half_length: f64) -> Result<Self> {
        Self::new(self.units, self.mass, self.omega0, half_length)
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be finite and > 0, got {v}")))
    }
}

/// Which half-space a field operator lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cavity {
    /// `0 < x < L0`
    Left,
    /// `L0 < x < 2 L0`
    Right,
}

impl Cavity {
    pub const BOTH: [Cavity; 2] = [Cavity::Left, Cavity::Right];

    pub fn index(self) -> usize {
        match self {
            Cavity::Left => 1,
            Cavity::Right => 2,
        }
    }
}

/// Phase convention of the right-cavity mode functions.
///
/// `Global` uses `sin(k_j x)` on `(L0, 2 L0)`; with Dirichlet spacing this is
/// `(−1)^j sin(k_j (x − L0))`, and it is the basis in which `C² = −C¹`.
/// `MirrorLocal` uses `sin(k_j (x − L0))`; the right-cavity coupling then
/// loses its `(−1)^(j+k)` factor so that both bases describe the same physics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseConvention {
    #[default]
    Global,
    MirrorLocal,
}

/// Truncated grid of cavity modes `k_j = j Δk`, `j = 1..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet {
    n_modes: usize,
    spacing: f64,
    c: f64,
    uv_cutoff: Option<f64>,
    phase: PhaseConvention,
}

impl ModeSet {
    /// Dirichlet modes of a cavity of length `L0`: `Δk = π / L0`.
    pub fn dirichlet(n_modes: usize, params: &PhysicalParams) -> Result<Self> {
        Self::with_spacing(n_modes, PI / params.half_length(), params)
    }

    pub fn with_spacing(n_modes: usize, spacing: f64, params: &PhysicalParams) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::param("n_modes", "must be ≥ 1"));
        }
        positive("spacing", spacing)?;
        Ok(Self {
            n_modes,
            spacing,
            c: params.c(),
            uv_cutoff: None,
            phase: PhaseConvention::Global,
        })
    }

    /// Smooth regulator `e^(−ω/Ω_c)` applied to each mode entering a coupling.
    pub fn with_uv_cutoff(mut self, cutoff: Option<f64>) -> Result<Self> {
        if let Some(oc) = cutoff {
            positive("uv_cutoff", oc)?;
        }
        self.uv_cutoff = cutoff;
        Ok(self)
    }

    pub fn with_phase(mut self, phase: PhaseConvention) -> Self {
        self.phase = phase;
        self
    }

    pub fn with_n_modes(&self, n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::param("n_modes", "must be ≥ 1"));
        }
        Ok(Self {
            n_modes,
            ..self.clone()
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn uv_cutoff(&self) -> Option<f64> {
        self.uv_cutoff
    }

    pub fn phase(&self) -> PhaseConvention {
        self.phase
    }

    pub fn check_index(&self, j: usize) -> Result<()> {
        if j == 0 || j > self.n_modes {
            Err(Error::IndexOutOfRange {
                index: j,
                n_modes: self.n_modes,
            })
        } else {
            Ok(())
        }
    }

    /// Unchecked wavenumber; `j` is 1-based.
    #[inline]
    pub(crate) fn k_unchecked(&self, j: usize) -> f64 {
        j as f64 * self.spacing
    }

    #[inline]
    pub(crate) fn omega_unchecked(&self, j: usize) -> f64 {
        self.c * self.k_unchecked(j)
    }

    #[inline]
    pub(crate) fn weight_unchecked(&self, j: usize) -> f64 {
        match self.uv_cutoff {
            Some(oc) => (-self.omega_unchecked(j) / oc).exp(),
            None => 1.0,
        }
    }

    pub fn k(&self, j: usize) -> Result<f64> {
        self.check_index(j)?;
        Ok(self.k_unchecked(j))
    }

    pub fn omega(&self, j: usize) -> Result<f64> {
        self.check_index(j)?;
        Ok(self.omega_unchecked(j))
    }

    /// Regulator weight in `(0, 1]`; exactly 1 without a cutoff.
    pub fn regulator_weight(&self, j: usize) -> Result<f64> {
        self.check_index(j)?;
        Ok(self.weight_unchecked(j))
    }

    /// Sign carried by mode `j` in the coupling of `cavity` under the active
    /// phase convention.
    #[inline]
    pub(crate) fn coupling_sign(&self, cavity: Cavity, j: usize) -> f64 {
        let alternating = if j % 2 == 0 { 1.0 } else { -1.0 };
        match (cavity, self.phase) {
            (Cavity::Right, PhaseConvention::MirrorLocal) => 1.0,
            _ => alternating,
        }
    }
}

/// Coupling constants of the two-cavity Law Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingModel {
    params: PhysicalParams,
    scale: f64,
}

impl CouplingModel {
    pub fn new(params: PhysicalParams) -> Self {
        Self { params, scale: 1.0 }
    }

    /// Multiplies every coupling by `scale` (λ). Used to probe the
    /// perturbative regime.
    pub fn with_scale(mut self, scale: f64) -> Result<Self> {
        if !scale.is_finite() {
            return Err(Error::param("lambda", format!("must be finite, got {scale}")));
        }
        self.scale = scale;
        Ok(self)
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `λ (ħ/2)^(3/2) / (L0 √m)`, the mode-independent part of C¹.
    pub(crate) fn prefactor(&self) -> f64 {
        let p = &self.params;
        self.scale * (0.5 * p.hbar()).powf(1.5) / (p.half_length() * p.mass().sqrt())
    }

    /// Overall sign of the cavity coupling: +1 for the left cavity, −1 for the right.
    #[inline]
    pub(crate) fn cavity_sign(cavity: Cavity) -> f64 {
        match cavity {
            Cavity::Left => 1.0,
            Cavity::Right => -1.0,
        }
    }
}

/// Coupling constant `C^cavity_{kj}` in energy units, including the UV
/// regulator weights of both modes.
pub fn coupling(
    cavity: Cavity,
    j: usize,
    k: usize,
    modes: &ModeSet,
    model: &CouplingModel,
) -> Result<f64> {
    modes.check_index(j)?;
    modes.check_index(k)?;
    Ok(coupling_unchecked(cavity, j, k, modes, model))
}

#[inline]
pub(crate) fn coupling_unchecked(
    cavity: Cavity,
    j: usize,
    k: usize,
    modes: &ModeSet,
    model: &CouplingModel,
) -> f64 {
    let omega0 = model.params.omega0();
    let sign = modes.coupling_sign(cavity, j) * modes.coupling_sign(cavity, k);
    let freq = ((modes.omega_unchecked(j) * modes.omega_unchecked(k)) / omega0).sqrt();
    let weights = modes.weight_unchecked(j) * modes.weight_unchecked(k);
    let left = sign * model.prefactor() * freq * weights;
    CouplingModel::cavity_sign(cavity) * left
}

/// Coordinate entering `sin(k_j x̃)` for a point of `cavity`.
pub(crate) fn local_coordinate(
    x: f64,
    cavity: Cavity,
    modes: &ModeSet,
    params: &PhysicalParams,
) -> Result<f64> {
    let l0 = params.half_length();
    let (lo, hi) = match cavity {
        Cavity::Left => (0.0, l0),
        Cavity::Right => (l0, 2.0 * l0),
    };
    if !(x.is_finite() && x > lo && x < hi) {
        return Err(Error::domain(
            "mode_function",
            format!("x = {x} outside cavity {} interval ({lo}, {hi})", cavity.index()),
        ));
    }
    Ok(match (cavity, modes.phase()) {
        (Cavity::Right, PhaseConvention::MirrorLocal) => x - l0,
        _ => x,
    })
}

/// Mode function `√(ħc²/L0) sin(k_j x̃) / √ω_j` of the field expansion
/// `φ(x) = Σ_j u_j(x) (a_j + a_j†)`.
pub fn mode_function(
    x: f64,
    j: usize,
    cavity: Cavity,
    modes: &ModeSet,
    params: &PhysicalParams,
) -> Result<f64> {
    modes.check_index(j)?;
    let xt = local_coordinate(x, cavity, modes, params)?;
    Ok(field_amplitude(params) * (modes.k_unchecked(j) * xt).sin()
        / modes.omega_unchecked(j).sqrt())
}

/// `√(ħ c² / L0)`.
pub(crate) fn field_amplitude(params: &PhysicalParams) -> f64 {
    (params.hbar() * params.c() * params.c() / params.half_length()).sqrt()
}

/// JSON configuration. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub units: Units,
    pub m: f64,
    pub omega0: f64,
    #[serde(rename = "L0")]
    pub l0: f64,
    pub n_modes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uv_cutoff: Option<f64>,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
}

fn default_lambda() -> f64 {
    1.0
}

/// Everything a computation needs, built from a [`ModelConfig`].
#[derive(Debug, Clone, PartialEq)]
pub struct Setup {
    pub params: PhysicalParams,
    pub modes: ModeSet,
    pub model: CouplingModel,
}

impl ModelConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn build(&self) -> Result<Setup> {
        let params = PhysicalParams::new(self.units, self.m, self.omega0, self.l0)?;
        let modes = ModeSet::dirichlet(self.n_modes, &params)?.with_uv_cutoff(self.uv_cutoff)?;
        let model = CouplingModel::new(params).with_scale(self.lambda)?;
        Ok(Setup {
            params,
            modes,
            model,
        })
    }
}
