use nalgebra::{DMatrix, DVector, SymmetricEigen};
use sprs::CsMat;

use crate::error::{Error, Result};

/// Below this dimension the ground state comes from a dense diagonalization.
pub const DENSE_LIMIT: usize = 500;

const MAX_KRYLOV: usize = 120;
const MAX_RESTARTS: usize = 200;
const MAX_REFINE_SWEEPS: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct GroundState {
    pub energy: f64,
    /// Unit norm, with a positive component on basis state 0 (the bare vacuum).
    pub vector: Vec<f64>,
    /// `‖Hv − Ev‖`.
    pub residual: f64,
    pub iterations: usize,
}

/// `y = H x`.
pub fn apply(h: &CsMat<f64>, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; h.rows()];
    for (row, vec) in h.outer_iterator().enumerate() {
        let mut acc = 0.0;
        for (col, &v) in vec.iter() {
            acc += v * x[col];
        }
        y[row] = acc;
    }
    y
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn residual(h: &CsMat<f64>, v: &[f64], e: f64) -> (Vec<f64>, f64) {
    let r: Vec<f64> = apply(h, v).iter().zip(v).map(|(hv, x)| hv - e * x).collect();
    let n = norm(&r);
    (r, n)
}

/// Lowest eigenpair of a symmetric matrix with `‖Hv − Ev‖ ≤ tol`.
///
/// Dense diagonalization below [`DENSE_LIMIT`], restarted Lanczos with full
/// reorthogonalization above it; either way the pair is then polished by
/// diagonally preconditioned corrections, which sharpen small components.
pub fn ground_state(h: &CsMat<f64>, tol: f64) -> Result<GroundState> {
    if h.rows() != h.cols() {
        return Err(Error::DimensionMismatch {
            expected: h.rows(),
            found: h.cols(),
        });
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::param("tol", format!("must be finite and > 0, got {tol}")));
    }
    let n = h.rows();
    if n == 0 {
        return Err(Error::param("matrix", "empty matrix"));
    }
    let (mut v, mut iterations) = if n < DENSE_LIMIT {
        (dense_ground(h), 1)
    } else {
        lanczos_ground(h, tol)?
    };
    normalize(&mut v);
    let mut e = dot(&v, &apply(h, &v));
    let (refined, sweeps) = refine(h, v, e);
    v = refined;
    iterations += sweeps;
    e = dot(&v, &apply(h, &v));
    let (_, res) = residual(h, &v, e);
    if res > tol {
        return Err(Error::Eigensolver {
            residual: res,
            iterations,
        });
    }
    Ok(GroundState {
        energy: e,
        vector: v,
        residual: res,
        iterations,
    })
}

fn normalize(v: &mut [f64]) {
    let nrm = norm(v);
    let sign = if v[0] < 0.0 { -1.0 } else { 1.0 };
    for x in v.iter_mut() {
        *x *= sign / nrm;
    }
}

fn dense_ground(h: &CsMat<f64>) -> Vec<f64> {
    let n = h.rows();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for (v, (r, c)) in h.iter() {
        m[(r, c)] = *v;
    }
    let eig = SymmetricEigen::new(m);
    let idx = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("non-empty spectrum");
    eig.eigenvectors.column(idx).iter().copied().collect()
}

/// Restarted Lanczos; each cycle restarts from the current Ritz vector.
fn lanczos_ground(h: &CsMat<f64>, tol: f64) -> Result<(Vec<f64>, usize)> {
    let n = h.rows();
    // start from the diagonal minimum, slightly mixed so no symmetry sector is missed
    let diag: Vec<f64> = (0..n).map(|i| *h.get(i, i).unwrap_or(&0.0)).collect();
    let imin = (0..n).min_by(|&a, &b| diag[a].total_cmp(&diag[b])).unwrap_or(0);
    let mut start: Vec<f64> = (0..n).map(|i| 1e-3 / (1.0 + i as f64)).collect();
    start[imin] = 1.0;
    let mut best_res = f64::INFINITY;
    let krylov = MAX_KRYLOV.min(n);
    for restart in 0..MAX_RESTARTS {
        normalize(&mut start);
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alpha = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        for k in 0..krylov {
            let mut w = apply(h, &basis[k]);
            let a = dot(&w, &basis[k]);
            alpha.push(a);
            // full reorthogonalization, twice for stability
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(&w, q);
                    for (wi, qi) in w.iter_mut().zip(q) {
                        *wi -= c * qi;
                    }
                }
            }
            let b = norm(&w);
            if k + 1 == krylov || b < 1e-14 * a.abs().max(1.0) {
                break;
            }
            beta.push(b);
            basis.push(w.into_iter().map(|x| x / b).collect());
        }
        let m = alpha.len();
        let mut t = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            t[(i, i)] = alpha[i];
            if i + 1 < m {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let idx = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .expect("non-empty Ritz spectrum");
        let y: DVector<f64> = eig.eigenvectors.column(idx).into_owned();
        let mut ritz = vec![0.0; n];
        for (q, &c) in basis.iter().zip(y.iter()) {
            for (r, qi) in ritz.iter_mut().zip(q) {
                *r += c * qi;
            }
        }
        normalize(&mut ritz);
        let e = dot(&ritz, &apply(h, &ritz));
        let (_, res) = residual(h, &ritz, e);
        best_res = best_res.min(res);
        if res <= 0.1 * tol || m == n {
            return Ok((ritz, restart + 1));
        }
        start = ritz;
    }
    Err(Error::Eigensolver {
        residual: best_res,
        iterations: MAX_RESTARTS,
    })
}

/// Diagonally preconditioned corrections `v_i −= r_i / (H_ii − E)`,
/// with the largest component held fixed; stops once the residual no
/// longer decreases.
fn refine(h: &CsMat<f64>, mut v: Vec<f64>, mut e: f64) -> (Vec<f64>, usize) {
    let n = v.len();
    let diag: Vec<f64> = (0..n).map(|i| *h.get(i, i).unwrap_or(&0.0)).collect();
    let reference = (0..n)
        .max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs()))
        .unwrap_or(0);
    let (_, mut res) = residual(h, &v, e);
    for sweep in 0..MAX_REFINE_SWEEPS {
        let hv = apply(h, &v);
        let e_ref = hv[reference] / v[reference];
        let mut candidate = v.clone();
        for i in 0..n {
            if i == reference {
                continue;
            }
            let gap = diag[i] - e_ref;
            if gap.abs() < 1e-12 * (1.0 + diag[i].abs()) {
                continue;
            }
            candidate[i] -= (hv[i] - e_ref * v[i]) / gap;
        }
        normalize(&mut candidate);
        let e_new = dot(&candidate, &apply(h, &candidate));
        let (_, res_new) = residual(h, &candidate, e_new);
        if !(res_new < res) {
            return (v, sweep);
        }
        v = candidate;
        e = e_new;
        res = res_new;
    }
    let _ = e;
    (v, MAX_REFINE_SWEEPS)
}
