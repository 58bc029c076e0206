//! Panel quadrature and partition-sum acceleration for the continuum integrals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Number of integrand evaluations per Gauss–Kronrod 21 panel.
pub const GK21_POINTS: usize = 21;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadEstimate {
    pub value: f64,
    pub abs_err: f64,
    pub evaluations: usize,
}

/// One 21-point Gauss–Kronrod panel with the QUADPACK error heuristic.
pub fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resg = 0.0;
    let mut resk = WGK[10] * fc;
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
    }
    let reskh = resk * 0.5;
    let mut resasc = WGK[10] * (fc - reskh).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }
    let result = resk * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut err = ((resk - resg) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (result, err)
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Globally adaptive bisection on `[a, b]`: the panel with the largest error
/// estimate is split until `Σ err ≤ max(abs_tol, rel_tol |I|)`.
pub fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Result<QuadEstimate> {
    let (value, err) = gk21(f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value, err });
    let mut total = value;
    let mut total_err = err;
    let mut evaluations = GK21_POINTS;
    while total_err > abs_tol.max(rel_tol * total.abs()) {
        if heap.len() >= max_panels {
            return Err(Error::Convergence {
                context: "adaptive panel quadrature",
                best: total,
                abs_err: total_err,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        let (v1, e1) = gk21(f, worst.a, mid);
        let (v2, e2) = gk21(f, mid, worst.b);
        evaluations += 2 * GK21_POINTS;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            err: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            err: e2,
        });
    }
    // re-sum to shed the drift of the running updates
    let (value, abs_err) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.err));
    Ok(QuadEstimate {
        value,
        abs_err,
        evaluations,
    })
}

/// `n`-th positive zero of `sin u / u − cos u` (roots of `tan u = u`),
/// `n ≥ 1`; it lies in `(nπ, (n + ½)π)`.
pub fn oscillation_zero(n: usize) -> f64 {
    assert!(n >= 1, "zeros are numbered from 1");
    let upper = (n as f64 + 0.5) * PI;
    let lower = n as f64 * PI;
    let mut u = upper - 1.0 / upper;
    for _ in 0..50 {
        let (s, c) = u.sin_cos();
        let h = s - u * c;
        let dh = u * s;
        let step = h / dh;
        let next = (u - step).clamp(lower, upper);
        if (next - u).abs() <= 4.0 * f64::EPSILON * u {
            return next;
        }
        u = next;
    }
    u
}

/// Repeated pairwise averaging (Euler transform) of `order` levels applied
/// to the last `order + 1` partial sums.
pub fn euler_average(partial_sums: &[f64], order: usize) -> f64 {
    assert!(partial_sums.len() > order);
    let mut level: Vec<f64> = partial_sums[partial_sums.len() - order - 1..].to_vec();
    for _ in 0..order {
        level = level.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    }
    level[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk21_integrates_polynomials_exactly() {
        let (v, e) = gk21(&|x: f64| x.powi(20) - 3.0 * x.powi(7) + 1.0, -1.0, 2.0);
        let exact = (2f64.powi(21) + 1.0) / 21.0 - 3.0 * (2f64.powi(8) - 1.0) / 8.0 + 3.0;
        assert!((v - exact).abs() < 1e-9 * exact.abs());
        assert!(e >= 0.0);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let r = adaptive(&|x: f64| x.ln(), 0.0, 1.0, 1e-12, 1e-12, 500).unwrap();
        assert!((r.value + 1.0).abs() < 1e-11);
        assert!(r.abs_err <= 1e-11);
    }

    #[test]
    fn adaptive_reports_nonconvergence() {
        let err = adaptive(&|x: f64| 1.0 / x, 0.0, 1.0, 1e-14, 1e-14, 10).unwrap_err();
        assert!(matches!(err, Error::Convergence { .. }));
    }

    #[test]
    fn zeros_solve_tan_u_equals_u() {
        let z1 = oscillation_zero(1);
        assert!((z1 - 4.493_409_457_909_064).abs() < 1e-13);
        for n in [1, 2, 10, 100, 10_000] {
            let z = oscillation_zero(n);
            assert!(z > n as f64 * PI && z < (n as f64 + 0.5) * PI);
            assert!((z.sin() / z - z.cos()).abs() < 1e-14 * (1.0 + z.abs()));
        }
    }

    #[test]
    fn euler_average_sums_alternating_harmonic() {
        let mut partial = Vec::new();
        let mut s = 0.0;
        for n in 1..=40 {
            s += if n % 2 == 1 { 1.0 } else { -1.0 } / n as f64;
            partial.push(s);
        }
        let est = euler_average(&partial, 6);
        assert!((est - 2f64.ln()).abs() < 1e-10);
        assert!((partial[39] - 2f64.ln()).abs() > 1e-2);
    }
}
