use std::collections::BTreeMap;

use super::basis::FockBasis;
use super::eigen::GroundState;
use super::hamiltonian::ExactSystem;
use crate::error::{Error, Result};
use crate::model::{mode_function, Cavity};
use crate::perturb::{CorrelationResult, Diagnostics, Method};

/// State vector over packed occupations, not restricted to the basis.
type SparseState = BTreeMap<Vec<u8>, f64>;

fn to_sparse(basis: &FockBasis, v: &[f64]) -> SparseState {
    v.iter()
        .enumerate()
        .filter(|(_, &c)| c != 0.0)
        .map(|(i, &c)| (basis.packed(i).to_vec(), c))
        .collect()
}

/// `Σ_j u_j (d_j + d_j†)` on every component; occupations may exceed the caps.
fn apply_field(state: &SparseState, slots: &[(usize, f64)]) -> SparseState {
    let mut out = SparseState::new();
    for (occ, &c) in state {
        for &(slot, u) in slots {
            let n = occ[slot];
            if n > 0 {
                let mut s = occ.clone();
                s[slot] = n - 1;
                *out.entry(s).or_insert(0.0) += c * u * (n as f64).sqrt();
            }
            let mut s = occ.clone();
            s[slot] = n + 1;
            *out.entry(s).or_insert(0.0) += c * u * (n as f64 + 1.0).sqrt();
        }
    }
    out
}

fn inner(a: &SparseState, b: &SparseState) -> f64 {
    // iterate the smaller map
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    small
        .iter()
        .filter_map(|(k, x)| large.get(k).map(|y| x * y))
        .sum()
}

fn norm_sq(a: &SparseState) -> f64 {
    a.values().map(|x| x * x).sum()
}

/// Observables of the exact ground state of an [`ExactSystem`].
#[derive(Debug, Clone)]
pub struct ExactMeasurement<'a> {
    system: &'a ExactSystem,
    ground: &'a GroundState,
    state: SparseState,
}

impl<'a> ExactMeasurement<'a> {
    pub fn new(system: &'a ExactSystem, ground: &'a GroundState) -> Result<Self> {
        if ground.vector.len() != system.dimension() {
            return Err(Error::DimensionMismatch {
                expected: system.dimension(),
                found: ground.vector.len(),
            });
        }
        Ok(Self {
            system,
            ground,
            state: to_sparse(system.basis(), &ground.vector),
        })
    }

    /// `(slot, u_j(x))` for the truncated field of `cavity`.
    fn field_slots(&self, x: f64, cavity: Cavity) -> Result<Vec<(usize, f64)>> {
        let trunc = self.system.truncation();
        let params = self.system.model().params();
        (1..=trunc.modes(cavity))
            .map(|j| {
                mode_function(x, j, cavity, self.system.modes(), params)
                    .map(|u| (trunc.slot(cavity, j), u))
            })
            .collect()
    }

    /// Bound on observable errors from the eigenvector residual,
    /// `residual / gap` times `scale`.
    fn error_bound(&self, scale: f64) -> f64 {
        let h = self.system.matrix();
        let gap = (1..self.system.dimension())
            .filter_map(|i| h.get(i, i).copied())
            .fold(f64::INFINITY, f64::min)
            - self.ground.energy;
        let gap = if gap.is_finite() && gap > 0.0 { gap } else { 1.0 };
        4.0 * (self.ground.residual / gap + f64::EPSILON * self.system.dimension() as f64) * scale
    }

    fn result(&self, value: f64, scale: f64) -> CorrelationResult {
        CorrelationResult {
            value,
            method: Method::ExactDiag,
            est_abs_err: self.error_bound(scale),
            diagnostics: Diagnostics::ExactDiag {
                dimension: self.system.dimension(),
                residual: self.ground.residual,
            },
        }
    }

    /// `⟨φ²(x)⟩` in the ground state, including the bare truncated vacuum value.
    pub fn phi_squared(&self, x: f64, cavity: Cavity) -> Result<f64> {
        let slots = self.field_slots(x, cavity)?;
        Ok(norm_sq(&apply_field(&self.state, &slots)))
    }

    /// `⟨φ²(x)⟩ − ⟨0|φ²(x)|0⟩`.
    pub fn phi_squared_shift(&self, x: f64, cavity: Cavity) -> Result<f64> {
        let slots = self.field_slots(x, cavity)?;
        let bare: f64 = slots.iter().map(|(_, u)| u * u).sum();
        Ok(norm_sq(&apply_field(&self.state, &slots)) - bare)
    }

    /// Connected `⟨φ(x₁)φ(x₂)⟩`, `x₁` in the left and `x₂` in the right cavity.
    pub fn phi_phi_correlation(&self, x1: f64, x2: f64) -> Result<CorrelationResult> {
        let s1 = self.field_slots(x1, Cavity::Left)?;
        let s2 = self.field_slots(x2, Cavity::Right)?;
        let p1 = apply_field(&self.state, &s1);
        let p2 = apply_field(&self.state, &s2);
        let joint = inner(&p1, &p2);
        let mean1 = inner(&self.state, &p1);
        let mean2 = inner(&self.state, &p2);
        let scale = (norm_sq(&p1) * norm_sq(&p2)).sqrt();
        Ok(self.result(joint - mean1 * mean2, scale))
    }

    /// Connected `⟨φ²(x₁)φ²(x₂)⟩ − ⟨φ²(x₁)⟩⟨φ²(x₂)⟩`.
    pub fn squared_field_correlation(&self, x1: f64, x2: f64) -> Result<CorrelationResult> {
        let s1 = self.field_slots(x1, Cavity::Left)?;
        let s2 = self.field_slots(x2, Cavity::Right)?;
        let p1 = apply_field(&self.state, &s1);
        let p12 = apply_field(&p1, &s2);
        let p2 = apply_field(&self.state, &s2);
        let joint = norm_sq(&p12);
        let (m1, m2) = (norm_sq(&p1), norm_sq(&p2));
        Ok(self.result(joint - m1 * m2, joint.abs() + m1 * m2))
    }

    /// `1 − |⟨0|g⟩|²`, summed over the non-vacuum components.
    pub fn vacuum_deficit(&self) -> f64 {
        let vac = self.system.basis().vacuum_index();
        self.ground
            .vector
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != vac)
            .map(|(_, c)| c * c)
            .sum()
    }

    /// Coefficient of a basis state; zero for states outside the basis.
    pub fn amplitude(&self, n_wall: u8, occ_left: &[u8], occ_right: &[u8]) -> f64 {
        self.system
            .basis()
            .find(n_wall, occ_left, occ_right)
            .map_or(0.0, |i| self.ground.vector[i])
    }

    /// Coefficient of `|1; 1_j 1_k⟩` (or `|1; 2_j⟩`) in `cavity`.
    pub fn pair_amplitude(&self, cavity: Cavity, j: usize, k: usize) -> Result<f64> {
        let trunc = self.system.truncation();
        let m = trunc.modes(cavity);
        for idx in [j, k] {
            if idx == 0 || idx > m {
                return Err(Error::IndexOutOfRange {
                    index: idx,
                    n_modes: m,
                });
            }
        }
        let mut occ = vec![0u8; m];
        occ[j - 1] += 1;
        occ[k - 1] += 1;
        let empty_l = vec![0u8; trunc.modes_left()];
        let empty_r = vec![0u8; trunc.modes_right()];
        Ok(match cavity {
            Cavity::Left => self.amplitude(1, &occ, &empty_r),
            Cavity::Right => self.amplitude(1, &empty_l, &occ),
        })
    }
}

/// Connected squared-field correlator of the exact ground state.
pub fn measure_correlation(
    system: &ExactSystem,
    ground: &GroundState,
    x1: f64,
    x2: f64,
) -> Result<CorrelationResult> {
    ExactMeasurement::new(system, ground)?.squared_field_correlation(x1, x2)
}

#[cfg(test)]
mod tests {
    use super::super::{build_hamiltonian, ground_state, TruncationSpec};
    use super::*;
    use crate::model::{CouplingModel, ModeSet, PhysicalParams};
    use std::f64::consts::PI;

    fn system(lambda: f64) -> ExactSystem {
        let p = PhysicalParams::natural(1.0, 1.0, PI).unwrap();
        let modes = ModeSet::dirichlet(2, &p).unwrap();
        let model = CouplingModel::new(p).with_scale(lambda).unwrap();
        build_hamiltonian(TruncationSpec::symmetric(2, 5).unwrap(), &modes, &model, 1000).unwrap()
    }

    #[test]
    fn free_vacuum_has_no_correlations() {
        let sys = system(0.0);
        let gs = ground_state(sys.matrix(), 1e-12).unwrap();
        assert_eq!(gs.energy, 0.0);
        let m = ExactMeasurement::new(&sys, &gs).unwrap();
        assert_eq!(m.vacuum_deficit(), 0.0);
        assert!(m.squared_field_correlation(2.0, 4.0).unwrap().value.abs() < 1e-15);
        assert_eq!(m.phi_squared_shift(2.0, Cavity::Left).unwrap(), 0.0);
    }

    #[test]
    fn interacting_ground_state_properties() {
        let sys = system(0.1);
        let gs = ground_state(sys.matrix(), 1e-12).unwrap();
        assert!(gs.energy < 0.0);
        assert!(gs.vector[0] > 0.0);
        let m = ExactMeasurement::new(&sys, &gs).unwrap();
        assert!(m.vacuum_deficit() > 0.0);
        let c = m.squared_field_correlation(2.0, 4.5).unwrap();
        assert_eq!(c.method, Method::ExactDiag);
        let pp = m.phi_phi_correlation(2.0, 4.5).unwrap();
        assert!(pp.value.abs() <= 1e-12);
        // pair amplitudes of the two cavities are opposite
        let l = m.pair_amplitude(Cavity::Left, 1, 2).unwrap();
        let r = m.pair_amplitude(Cavity::Right, 1, 2).unwrap();
        assert!(l != 0.0 && (l + r).abs() < 1e-12);
        assert!(m.pair_amplitude(Cavity::Left, 0, 1).is_err());
    }

    #[test]
    fn dimension_mismatch_detected() {
        let sys = system(0.1);
        let bogus = GroundState {
            energy: 0.0,
            vector: vec![1.0; 3],
            residual: 0.0,
            iterations: 0,
        };
        assert!(matches!(
            measure_correlation(&sys, &bogus, 1.0, 4.0),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
