use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::model::Cavity;

/// Caps of the truncated Fock space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TruncationSpec {
    modes_left: usize,
    modes_right: usize,
    wall_max: u8,
    mode_max: u8,
    total_max: u8,
}

impl TruncationSpec {
    /// Every cap must be at least 2.
    pub fn new(
        modes_left: usize,
        modes_right: usize,
        wall_max: u8,
        mode_max: u8,
        total_max: u8,
    ) -> Result<Self> {
        for (name, cap) in [("wall_max", wall_max), ("mode_max", mode_max), ("total_max", total_max)] {
            if cap < 2 {
                return Err(Error::param(name, format!("cap must be ≥ 2, got {cap}")));
            }
        }
        if modes_left + modes_right == 0 {
            return Err(Error::param("modes", "at least one field mode is required"));
        }
        Ok(Self {
            modes_left,
            modes_right,
            wall_max,
            mode_max,
            total_max,
        })
    }

    /// `m` modes per cavity and only the total-quanta cap active.
    pub fn symmetric(m: usize, total_max: u8) -> Result<Self> {
        Self::new(m, m, total_max, total_max, total_max)
    }

    pub fn modes_left(&self) -> usize {
        self.modes_left
    }

    pub fn modes_right(&self) -> usize {
        self.modes_right
    }

    pub fn modes(&self, cavity: Cavity) -> usize {
        match cavity {
            Cavity::Left => self.modes_left,
            Cavity::Right => self.modes_right,
        }
    }

    pub fn wall_max(&self) -> u8 {
        self.wall_max
    }

    pub fn mode_max(&self) -> u8 {
        self.mode_max
    }

    pub fn total_max(&self) -> u8 {
        self.total_max
    }

    /// Slots per packed state: wall, then left modes, then right modes.
    pub fn slots(&self) -> usize {
        1 + self.modes_left + self.modes_right
    }

    /// Packed slot of field mode `j` (1-based) of `cavity`.
    pub fn slot(&self, cavity: Cavity, j: usize) -> usize {
        match cavity {
            Cavity::Left => j,
            Cavity::Right => self.modes_left + j,
        }
    }

    pub(crate) fn admits(&self, occ: &[u8]) -> bool {
        occ[0] <= self.wall_max
            && occ[1..].iter().all(|&n| n <= self.mode_max)
            && occ.iter().map(|&n| n as u32).sum::<u32>() <= self.total_max as u32
    }

    /// Basis dimension, counted without enumerating.
    pub fn dimension(&self) -> usize {
        // ways[q] = number of occupation patterns of the slots seen so far with q quanta
        let q_max = self.total_max as usize;
        let mut ways = vec![0usize; q_max + 1];
        for (q, w) in ways.iter_mut().enumerate() {
            *w = usize::from(q <= self.wall_max as usize);
        }
        for _ in 0..self.modes_left + self.modes_right {
            let mut next = vec![0usize; q_max + 1];
            for (q, &w) in ways.iter().enumerate() {
                for n in 0..=(self.mode_max as usize).min(q_max - q) {
                    next[q + n] += w;
                }
            }
            ways = next;
        }
        ways.iter().sum()
    }
}

/// A basis state `|n_wall; {n¹}; {n²}⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockBasisState<'a> {
    pub n_wall: u8,
    pub occ_left: &'a [u8],
    pub occ_right: &'a [u8],
}

impl FockBasisState<'_> {
    pub fn total_quanta(&self) -> u32 {
        self.n_wall as u32
            + self.occ_left.iter().map(|&n| n as u32).sum::<u32>()
            + self.occ_right.iter().map(|&n| n as u32).sum::<u32>()
    }
}

/// Lexicographically ordered truncated Fock basis; index 0 is the bare vacuum.
#[derive(Debug, Clone)]
pub struct FockBasis {
    trunc: TruncationSpec,
    states: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
}

impl FockBasis {
    /// Enumerates the basis, refusing when its dimension exceeds `budget`.
    pub fn new(trunc: TruncationSpec, budget: usize) -> Result<Self> {
        let dimension = trunc.dimension();
        if dimension > budget {
            return Err(Error::BasisOverflow { dimension, budget });
        }
        let mut states = Vec::with_capacity(dimension);
        let mut current = vec![0u8; trunc.slots()];
        enumerate(&trunc, 0, trunc.total_max as u32, &mut current, &mut states);
        debug_assert_eq!(states.len(), dimension);
        let index = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        Ok(Self {
            trunc,
            states,
            index,
        })
    }

    pub fn truncation(&self) -> &TruncationSpec {
        &self.trunc
    }

    pub fn dimension(&self) -> usize {
        self.states.len()
    }

    pub fn vacuum_index(&self) -> usize {
        0
    }

    pub fn packed(&self, i: usize) -> &[u8] {
        &self.states[i]
    }

    pub fn state(&self, i: usize) -> FockBasisState<'_> {
        let s = &self.states[i];
        let l = self.trunc.modes_left;
        FockBasisState {
            n_wall: s[0],
            occ_left: &s[1..1 + l],
            occ_right: &s[1 + l..],
        }
    }

    pub fn index_of(&self, packed: &[u8]) -> Option<usize> {
        self.index.get(packed).copied()
    }

    /// Index of `|n_wall; {n¹}; {n²}⟩`, if it is in the basis.
    pub fn find(&self, n_wall: u8, occ_left: &[u8], occ_right: &[u8]) -> Option<usize> {
        if occ_left.len() != self.trunc.modes_left || occ_right.len() != self.trunc.modes_right {
            return None;
        }
        let mut packed = Vec::with_capacity(self.trunc.slots());
        packed.push(n_wall);
        packed.extend_from_slice(occ_left);
        packed.extend_from_slice(occ_right);
        self.index_of(&packed)
    }
}

fn enumerate(
    trunc: &TruncationSpec,
    slot: usize,
    remaining: u32,
    current: &mut Vec<u8>,
    out: &mut Vec<Vec<u8>>,
) {
    if slot == current.len() {
        out.push(current.clone());
        return;
    }
    let cap = if slot == 0 { trunc.wall_max } else { trunc.mode_max } as u32;
    for n in 0..=cap.min(remaining) {
        current[slot] = n as u8;
        enumerate(trunc, slot + 1, remaining - n, current, out);
    }
    current[slot] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn caps_are_validated() {
        assert!(TruncationSpec::new(2, 2, 1, 5, 5).is_err());
        assert!(TruncationSpec::new(2, 2, 5, 5, 1).is_err());
        assert!(TruncationSpec::new(0, 0, 2, 2, 2).is_err());
        assert!(TruncationSpec::new(2, 0, 3, 3, 3).is_ok());
    }

    #[test]
    fn dimension_counts_match_enumeration() {
        for trunc in [
            TruncationSpec::symmetric(2, 5).unwrap(),
            TruncationSpec::new(2, 0, 3, 3, 3).unwrap(),
            TruncationSpec::new(3, 1, 2, 2, 4).unwrap(),
        ] {
            let basis = FockBasis::new(trunc, usize::MAX).unwrap();
            assert_eq!(basis.dimension(), trunc.dimension());
        }
        // five slots with at most 5 quanta: C(10, 5)
        assert_eq!(TruncationSpec::symmetric(2, 5).unwrap().dimension(), 252);
    }

    #[test]
    fn ordering_and_lookup() {
        let basis = FockBasis::new(TruncationSpec::symmetric(2, 5).unwrap(), 1000).unwrap();
        assert!(basis.packed(0).iter().all(|&n| n == 0));
        for i in 1..basis.dimension() {
            assert!(basis.packed(i - 1) < basis.packed(i));
            assert_eq!(basis.index_of(basis.packed(i)), Some(i));
            assert!(basis.state(i).total_quanta() <= 5);
        }
        assert!(basis.find(1, &[1, 1], &[0, 0]).is_some());
        assert!(basis.find(3, &[2, 1], &[0, 0]).is_none());
    }

    #[test]
    fn budget_overflow_reports_dimension() {
        let err = FockBasis::new(TruncationSpec::symmetric(2, 5).unwrap(), 100).unwrap_err();
        assert_eq!(
            err,
            Error::BasisOverflow {
                dimension: 252,
                budget: 100
            }
        );
    }
}
