use std::f64::consts::PI;
use std::fmt::{self, Write as _};

use super::basis::TruncationSpec;
use super::eigen::ground_state;
use super::hamiltonian::{build_hamiltonian, DEFAULT_BUDGET};
use super::measure::ExactMeasurement;
use crate::error::{Error, Result};
use crate::model::{Cavity, CouplingModel, ModeSet, PhysicalParams};
use crate::perturb::PerturbativeState;

/// Exact-versus-perturbative comparison at a ladder of coupling scales.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderConfig {
    pub params: PhysicalParams,
    pub trunc: TruncationSpec,
    /// Decreasing coupling scales, each half the previous one.
    pub lambdas: Vec<f64>,
    pub x1: f64,
    pub x2: f64,
    /// Minimum residual ratio per halving is `8 / slack`.
    pub slack: f64,
    pub eigen_tol: f64,
}

impl Default for LadderConfig {
    fn default() -> Self {
        Self {
            params: PhysicalParams::natural(1.0, 1.0, PI).expect("valid defaults"),
            trunc: TruncationSpec::symmetric(2, 5).expect("valid defaults"),
            lambdas: vec![0.04, 0.02, 0.01],
            x1: 0.6 * PI,
            x2: 1.4 * PI,
            slack: 1.5,
            eigen_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LadderRow {
    pub observable: &'static str,
    /// `|exact − perturbative|` at each λ.
    pub residuals: Vec<f64>,
    /// Successive residual ratios.
    pub ratios: Vec<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LadderReport {
    pub lambdas: Vec<f64>,
    pub required_ratio: f64,
    pub rows: Vec<LadderRow>,
}

impl LadderReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }
}

impl fmt::Display for LadderReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut header = format!("{:<22}", "observable");
        for l in &self.lambdas {
            let _ = write!(header, " {:>13}", format!("λ={l}"));
        }
        let _ = write!(header, "  ratios (need ≥ {:.3})", self.required_ratio);
        writeln!(f, "{header}")?;
        for row in &self.rows {
            write!(f, "{:<22}", row.observable)?;
            for r in &row.residuals {
                write!(f, " {r:>13.4e}")?;
            }
            let ratios: Vec<String> = row.ratios.iter().map(|r| format!("{r:.2}")).collect();
            writeln!(
                f,
                "  {}  {}",
                ratios.join(" "),
                if row.passed { "PASS" } else { "FAIL" }
            )?;
        }
        Ok(())
    }
}

/// Residuals of one λ: Λ², pair amplitudes, ⟨φ²⟩ shift, squared-field correlator.
fn residuals_at(config: &LadderConfig, lambda: f64) -> Result<[f64; 4]> {
    let trunc = config.trunc;
    let n = trunc.modes_left();
    if trunc.modes_right() != n {
        return Err(Error::param("trunc", "the ladder needs equal mode counts in both cavities"));
    }
    let modes = ModeSet::dirichlet(n, &config.params)?;
    let model = CouplingModel::new(config.params).with_scale(lambda)?;
    let pert = PerturbativeState::new(&modes, &model);
    let system = build_hamiltonian(trunc, &modes, &model, DEFAULT_BUDGET)?;
    let ground = ground_state(system.matrix(), config.eigen_tol)?;
    let exact = ExactMeasurement::new(&system, &ground)?;

    let lambda_sq = (exact.vacuum_deficit() - pert.normalization_deficit()).abs();
    let mut amplitude: f64 = 0.0;
    for cavity in Cavity::BOTH {
        for j in 1..=n {
            for k in j..=n {
                let diff = exact.pair_amplitude(cavity, j, k)? - pert.first_order_amplitude(cavity, j, k)?;
                amplitude = amplitude.max(diff.abs());
            }
        }
    }
    let shift = (exact.phi_squared_shift(config.x1, Cavity::Left)?
        - pert.phi_squared_shift(config.x1, Cavity::Left)?)
    .abs()
    .max(
        (exact.phi_squared_shift(config.x2, Cavity::Right)?
            - pert.phi_squared_shift(config.x2, Cavity::Right)?)
        .abs(),
    );
    let corr = (exact.squared_field_correlation(config.x1, config.x2)?.value
        - pert.squared_field_correlation(config.x1, config.x2)?.value)
        .abs();
    Ok([lambda_sq, amplitude, shift, corr])
}

/// Runs the ladder; every residual must shrink at least as `λ³`.
pub fn run_lambda_ladder(config: &LadderConfig) -> Result<LadderReport> {
    if config.lambdas.len() < 2 {
        return Err(Error::param("lambdas", "need at least two coupling scales"));
    }
    let per_lambda = config
        .lambdas
        .iter()
        .map(|&l| residuals_at(config, l))
        .collect::<Result<Vec<_>>>()?;
    let required_ratio = 8.0 / config.slack;
    let names = ["normalization Λ²", "first-order amplitude", "⟨φ²⟩ shift", "C(x1,x2)"];
    let rows = names
        .iter()
        .enumerate()
        .map(|(i, &observable)| {
            let residuals: Vec<f64> = per_lambda.iter().map(|r| r[i]).collect();
            let ratios: Vec<f64> = residuals.windows(2).map(|w| w[0] / w[1]).collect();
            let passed = ratios.iter().all(|&r| r >= required_ratio);
            LadderRow {
                observable,
                residuals,
                ratios,
                passed,
            }
        })
        .collect();
    Ok(LadderReport {
        lambdas: config.lambdas.clone(),
        required_ratio,
        rows,
    })
}
