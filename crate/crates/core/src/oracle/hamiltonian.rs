use rayon::prelude::*;
use sprs::{CsMat, TriMat};
use std::io::{self, Write};

use super::basis::{FockBasis, TruncationSpec};
use crate::error::{Error, Result};
use crate::model::{coupling, Cavity, CouplingModel, ModeSet};

/// Default cap on the basis dimension.
pub const DEFAULT_BUDGET: usize = 200_000;

/// Truncated Hamiltonian together with the data it was built from.
#[derive(Debug, Clone)]
pub struct ExactSystem {
    basis: FockBasis,
    matrix: CsMat<f64>,
    modes: ModeSet,
    model: CouplingModel,
}

impl ExactSystem {
    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    pub fn truncation(&self) -> &TruncationSpec {
        self.basis.truncation()
    }

    /// `H₀ + H_I` in CSR form.
    pub fn matrix(&self) -> &CsMat<f64> {
        &self.matrix
    }

    pub fn modes(&self) -> &ModeSet {
        &self.modes
    }

    pub fn model(&self) -> &CouplingModel {
        &self.model
    }

    pub fn dimension(&self) -> usize {
        self.basis.dimension()
    }

    /// Writes `row col value` lines (0-based, 17 significant digits).
    pub fn write_coordinate<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "% {} {} {}", self.dimension(), self.dimension(), self.matrix.nnz())?;
        for (value, (row, col)) in self.matrix.iter() {
            writeln!(out, "{row} {col} {value:.16e}")?;
        }
        Ok(())
    }
}

/// One ladder-operator action on a packed state: (new state, matrix element).
type Branch = (Vec<u8>, f64);

/// Assembles `H₀ + H_I` on the truncated basis.
///
/// `H_I = −(b + b†) Σ_c Σ_jk C^c_jk (d_j d_k + d_j† d_k† + d_j† d_k + d_k† d_j)`;
/// operators act within the caps and leave the basis otherwise. Only the
/// strict upper triangle is computed and then mirrored, so the matrix is
/// exactly symmetric.
pub fn build_hamiltonian(
    trunc: TruncationSpec,
    modes: &ModeSet,
    model: &CouplingModel,
    budget: usize,
) -> Result<ExactSystem> {
    for cavity in Cavity::BOTH {
        let m = trunc.modes(cavity);
        if m > modes.n_modes() {
            return Err(Error::DimensionMismatch {
                expected: modes.n_modes(),
                found: m,
            });
        }
    }
    let basis = FockBasis::new(trunc, budget)?;
    let hbar = model.params().hbar();
    let omega0 = model.params().omega0();

    let mut couplings: Vec<(Cavity, usize, usize, f64)> = Vec::new();
    for cavity in Cavity::BOTH {
        for j in 1..=trunc.modes(cavity) {
            for k in 1..=trunc.modes(cavity) {
                let c = coupling(cavity, j, k, modes, model)?;
                if c != 0.0 {
                    couplings.push((cavity, trunc.slot(cavity, j), trunc.slot(cavity, k), c));
                }
            }
        }
    }
    let mut slot_omega = vec![omega0];
    for cavity in Cavity::BOTH {
        for j in 1..=trunc.modes(cavity) {
            slot_omega.push(modes.omega(j)?);
        }
    }

    let dim = basis.dimension();
    let columns: Vec<Vec<(usize, f64)>> = (0..dim)
        .into_par_iter()
        .map(|col| {
            let state = basis.packed(col);
            let mut entries: Vec<(usize, f64)> = Vec::new();
            for &(_, j, k, c) in &couplings {
                for (field_state, field_amp) in field_bilinear(state, j, k) {
                    for (target, wall_amp) in wall_displacement(&field_state) {
                        if !trunc.admits(&target) {
                            continue;
                        }
                        if let Some(row) = basis.index_of(&target) {
                            if row < col {
                                entries.push((row, -c * field_amp * wall_amp));
                            }
                        }
                    }
                }
            }
            entries.sort_by_key(|e| e.0);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(entries.len());
            for (row, v) in entries {
                match merged.last_mut() {
                    Some(last) if last.0 == row => last.1 += v,
                    _ => merged.push((row, v)),
                }
            }
            merged
        })
        .collect();

    let mut tri = TriMat::new((dim, dim));
    for i in 0..dim {
        let s = basis.packed(i);
        let energy: f64 = s
            .iter()
            .zip(&slot_omega)
            .map(|(&n, &w)| n as f64 * w)
            .sum();
        tri.add_triplet(i, i, hbar * energy);
    }
    for (col, entries) in columns.iter().enumerate() {
        for &(row, v) in entries {
            if v != 0.0 {
                tri.add_triplet(row, col, v);
                tri.add_triplet(col, row, v);
            }
        }
    }
    Ok(ExactSystem {
        basis,
        matrix: tri.to_csr(),
        modes: modes.clone(),
        model: *model,
    })
}

/// `(d_j d_k + d_j† d_k† + d_j† d_k + d_k† d_j)` applied to a packed state.
fn field_bilinear(state: &[u8], j: usize, k: usize) -> Vec<Branch> {
    let mut out = Vec::with_capacity(4);
    // d_j d_k
    if let Some((s1, a1)) = lower(state, k) {
        if let Some((s2, a2)) = lower(&s1, j) {
            out.push((s2, a1 * a2));
        }
    }
    // d_j† d_k†
    let (s1, a1) = raise(state, k);
    let (s2, a2) = raise(&s1, j);
    out.push((s2, a1 * a2));
    // d_j† d_k and d_k† d_j
    for (create, annihilate) in [(j, k), (k, j)] {
        if let Some((s1, a1)) = lower(state, annihilate) {
            let (s2, a2) = raise(&s1, create);
            out.push((s2, a1 * a2));
        }
    }
    out
}

/// `(b + b†)` applied to a packed state.
fn wall_displacement(state: &[u8]) -> Vec<Branch> {
    let mut out = Vec::with_capacity(2);
    if let Some(b) = lower(state, 0) {
        out.push(b);
    }
    out.push(raise(state, 0));
    out
}

fn lower(state: &[u8], slot: usize) -> Option<Branch> {
    let n = state[slot];
    if n == 0 {
        return None;
    }
    let mut s = state.to_vec();
    s[slot] = n - 1;
    Some((s, (n as f64).sqrt()))
}

fn raise(state: &[u8], slot: usize) -> Branch {
    let n = state[slot];
    let mut s = state.to_vec();
    s[slot] = n.saturating_add(1);
    (s, ((n as f64) + 1.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PhysicalParams;
    use std::f64::consts::PI;

    fn setup(lambda: f64) -> (ModeSet, CouplingModel) {
        let p = PhysicalParams::natural(1.0, 1.0, PI).unwrap();
        let modes = ModeSet::dirichlet(2, &p).unwrap();
        (modes, CouplingModel::new(p).with_scale(lambda).unwrap())
    }

    #[test]
    fn exactly_symmetric() {
        let (modes, model) = setup(0.3);
        let sys = build_hamiltonian(TruncationSpec::symmetric(2, 5).unwrap(), &modes, &model, 1000).unwrap();
        let h = sys.matrix();
        let ht = h.transpose_view().to_csr();
        for (v, (r, c)) in h.iter() {
            assert_eq!(Some(v), ht.get(r, c));
        }
        assert_eq!(h.nnz(), ht.nnz());
    }

    #[test]
    fn free_theory_is_diagonal() {
        let (modes, model) = setup(0.0);
        let sys = build_hamiltonian(TruncationSpec::symmetric(2, 4).unwrap(), &modes, &model, 1000).unwrap();
        assert_eq!(sys.matrix().nnz(), sys.dimension());
        assert_eq!(sys.matrix().get(0, 0), Some(&0.0));
    }

    #[test]
    fn vacuum_couples_to_pair_states() {
        let (modes, model) = setup(1.0);
        let sys = build_hamiltonian(TruncationSpec::symmetric(2, 5).unwrap(), &modes, &model, 1000).unwrap();
        let b = sys.basis();
        let c11 = coupling(Cavity::Left, 1, 1, &modes, &model).unwrap();
        let c12 = coupling(Cavity::Left, 1, 2, &modes, &model).unwrap();
        let s11 = b.find(1, &[2, 0], &[0, 0]).unwrap();
        let s12 = b.find(1, &[1, 1], &[0, 0]).unwrap();
        let h = sys.matrix();
        assert!((h.get(s11, 0).unwrap() + 2f64.sqrt() * c11).abs() < 1e-15);
        // ordered pairs (1,2) and (2,1) both create |1_1 1_2⟩
        assert!((h.get(s12, 0).unwrap() + 2.0 * c12).abs() < 1e-15);
    }

    #[test]
    fn too_many_modes_rejected() {
        let (modes, model) = setup(1.0);
        let err = build_hamiltonian(TruncationSpec::symmetric(3, 3).unwrap(), &modes, &model, 1000);
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn coordinate_dump_format() {
        let (modes, model) = setup(0.5);
        let sys = build_hamiltonian(TruncationSpec::new(1, 1, 2, 2, 3).unwrap(), &modes, &model, 1000).unwrap();
        let mut buf = Vec::new();
        sys.write_coordinate(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with('%'));
        let rows: Vec<_> = lines.collect();
        assert_eq!(rows.len(), sys.matrix().nnz());
        let fields: Vec<&str> = rows[0].split(' ').collect();
        assert_eq!(fields.len(), 3);
        let mantissa = fields[2].trim_start_matches('-').split('e').next().unwrap();
        assert_eq!(mantissa.replace('.', "").len(), 17);
    }
}
