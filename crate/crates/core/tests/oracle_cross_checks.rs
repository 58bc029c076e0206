//! Exact diagonalization checked against hand-built operators and against
//! the perturbative state.

use std::f64::consts::PI;
use std::sync::OnceLock;

use mirror_corr::oracle::{
    build_hamiltonian, ground_state, ExactMeasurement, ExactSystem, GroundState, TruncationSpec,
};
use mirror_corr::{Cavity, CouplingModel, ModeSet, PerturbativeState, PhaseConvention, PhysicalParams};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn params() -> PhysicalParams {
    PhysicalParams::natural(1.0, 1.0, PI).unwrap()
}

/// Annihilation operator on slot `slot` of a product space with `slots`
/// factors, each truncated at `cap` quanta; basis index `Σ n_s (cap+1)^s`.
fn lowering(slot: usize, slots: usize, cap: usize) -> DMatrix<f64> {
    let base = cap + 1;
    let dim = base.pow(slots as u32);
    let stride = base.pow(slot as u32);
    let mut a = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let n = (col / stride) % base;
        if n > 0 {
            a[(col - stride, col)] = (n as f64).sqrt();
        }
    }
    a
}

#[test]
fn single_cavity_block_matches_dense_operator_algebra() {
    // wall and two left modes; caps high enough that no intermediate state is clipped
    let lambda = 0.37;
    let p = params();
    let modes = ModeSet::dirichlet(2, &p).unwrap();
    let model = CouplingModel::new(p).with_scale(lambda).unwrap();
    let trunc = TruncationSpec::new(2, 0, 3, 3, 3).unwrap();
    let system = build_hamiltonian(trunc, &modes, &model, 1000).unwrap();

    let (slots, cap) = (3, 7);
    let b = lowering(0, slots, cap);
    let a = [lowering(1, slots, cap), lowering(2, slots, cap)];
    let omega: [f64; 2] = [1.0, 2.0];
    // C_jk = λ (−1)^(j+k) (1/2)^(3/2)/π √(ω_j ω_k) with ħ = c = m = ω₀ = 1, L0 = π
    let coupling = |j: usize, k: usize| {
        let sign = if (j + k) % 2 == 0 { 1.0 } else { -1.0 };
        lambda * sign * 0.5f64.powf(1.5) / PI * (omega[j - 1] * omega[k - 1]).sqrt()
    };
    let mut h = b.transpose() * &b;
    let mut pairs = DMatrix::zeros(h.nrows(), h.ncols());
    for j in 0..2 {
        h += omega[j] * a[j].transpose() * &a[j];
        for k in 0..2 {
            let (aj, ak) = (&a[j], &a[k]);
            let bilinear = aj * ak
                + aj.transpose() * ak.transpose()
                + aj.transpose() * ak
                + ak.transpose() * aj;
            pairs += coupling(j + 1, k + 1) * bilinear;
        }
    }
    h -= (&b + b.transpose()) * pairs;

    let dense_index = |occ: &[u8]| -> usize {
        occ.iter()
            .enumerate()
            .map(|(s, &n)| n as usize * (cap + 1).pow(s as u32))
            .sum()
    };
    let basis = system.basis();
    let dim = system.dimension();
    assert_eq!(dim, 20);
    let mut nonzero = 0;
    for r in 0..dim {
        for c in 0..dim {
            let expected = h[(dense_index(basis.packed(r)), dense_index(basis.packed(c)))];
            let got = system.matrix().get(r, c).copied().unwrap_or(0.0);
            assert!(
                (got - expected).abs() <= 1e-15 * (1.0 + expected.abs()),
                "H[{r},{c}] = {got}, dense algebra gives {expected}"
            );
            nonzero += usize::from(expected != 0.0);
        }
    }
    // the vacuum diagonal is stored although it is zero
    let stored = system.matrix().iter().filter(|(v, _)| **v != 0.0).count();
    assert_eq!(stored, nonzero);
}

struct Solved {
    system: ExactSystem,
    ground: GroundState,
    pert: PerturbativeState,
}

fn solve(lambda: f64, q_max: u8, phase: PhaseConvention) -> Solved {
    let p = params();
    let modes = ModeSet::dirichlet(2, &p).unwrap().with_phase(phase);
    let model = CouplingModel::new(p).with_scale(lambda).unwrap();
    let system =
        build_hamiltonian(TruncationSpec::symmetric(2, q_max).unwrap(), &modes, &model, 10_000)
            .unwrap();
    let ground = ground_state(system.matrix(), 1e-12).unwrap();
    Solved {
        system,
        ground,
        pert: PerturbativeState::new(&modes, &model),
    }
}

fn observables(s: &Solved, x1: f64, x2: f64) -> [f64; 4] {
    let m = ExactMeasurement::new(&s.system, &s.ground).unwrap();
    [
        m.vacuum_deficit(),
        m.pair_amplitude(Cavity::Left, 1, 2).unwrap(),
        m.phi_squared_shift(x1, Cavity::Left).unwrap(),
        m.squared_field_correlation(x1, x2).unwrap().value,
    ]
}

fn perturbative(s: &Solved, x1: f64, x2: f64) -> [f64; 4] {
    [
        s.pert.normalization_deficit(),
        s.pert.first_order_amplitude(Cavity::Left, 1, 2).unwrap(),
        s.pert.phi_squared_shift(x1, Cavity::Left).unwrap(),
        s.pert.squared_field_correlation(x1, x2).unwrap().value,
    ]
}

#[test]
fn basis_growth_is_below_perturbative_residual() {
    let (x1, x2) = (0.6 * PI, 1.4 * PI);
    let q5 = solve(0.02, 5, PhaseConvention::Global);
    let q6 = solve(0.02, 6, PhaseConvention::Global);
    let (e5, e6, p) = (observables(&q5, x1, x2), observables(&q6, x1, x2), perturbative(&q5, x1, x2));
    for i in 0..4 {
        let growth = (e6[i] - e5[i]).abs();
        let residual = (e5[i] - p[i]).abs();
        assert!(growth < residual, "observable {i}: growth {growth:.2e} vs residual {residual:.2e}");
    }
}

#[test]
fn ground_state_basics() {
    let free = solve(0.0, 5, PhaseConvention::Global);
    assert_eq!(free.ground.energy, 0.0);
    assert_eq!(free.ground.vector[0], 1.0);
    let s = solve(0.05, 5, PhaseConvention::Global);
    assert!(s.ground.energy < 0.0);
    assert!(s.ground.vector[0] > 0.0);
    assert!(s.ground.residual <= 1e-12);
}

#[test]
fn phase_convention_is_not_observable() {
    let (x1, x2) = (0.45 * PI, 1.7 * PI);
    let g = solve(0.03, 5, PhaseConvention::Global);
    let l = solve(0.03, 5, PhaseConvention::MirrorLocal);
    let mg = ExactMeasurement::new(&g.system, &g.ground).unwrap();
    let ml = ExactMeasurement::new(&l.system, &l.ground).unwrap();
    // exact observables carry the eigensolver tolerance, perturbative ones rounding only
    let checks = [
        (mg.squared_field_correlation(x1, x2).unwrap().value, ml.squared_field_correlation(x1, x2).unwrap().value, 1e-8),
        (mg.phi_squared_shift(x2, Cavity::Right).unwrap(), ml.phi_squared_shift(x2, Cavity::Right).unwrap(), 1e-8),
        (g.pert.squared_field_correlation(x1, x2).unwrap().value, l.pert.squared_field_correlation(x1, x2).unwrap().value, 1e-12),
        (g.pert.phi_squared_shift(x2, Cavity::Right).unwrap(), l.pert.phi_squared_shift(x2, Cavity::Right).unwrap(), 1e-12),
    ];
    for (i, (a, b, rel)) in checks.into_iter().enumerate() {
        assert!((a - b).abs() <= rel * a.abs(), "observable {i}: {a} vs {b}");
    }
    assert!((g.ground.energy - l.ground.energy).abs() < 1e-14);
}

fn shared() -> &'static Solved {
    static SOLVED: OnceLock<Solved> = OnceLock::new();
    SOLVED.get_or_init(|| solve(0.05, 5, PhaseConvention::Global))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn field_field_correlation_vanishes(u in 0.02f64..0.98, v in 0.02f64..0.98) {
        let s = shared();
        let (x1, x2) = (u * PI, PI + v * PI);
        prop_assert_eq!(s.pert.phi_phi_correlation(x1, x2).unwrap().value, 0.0);
        let m = ExactMeasurement::new(&s.system, &s.ground).unwrap();
        prop_assert!(m.phi_phi_correlation(x1, x2).unwrap().value.abs() <= 1e-12);
    }
}
