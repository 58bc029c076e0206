use clap::ValueEnum;
use rayon::prelude::*;
use serde::Serialize;

use mirror_corr::continuum::{
    correlation_c_of_d, log_grid, reduced_integral_i, QuadratureSpec, ScaledDistances,
};
use mirror_corr::{Cavity, Error, ModelConfig, PerturbativeState};

use crate::error::{CliError, CliResult};
use crate::table::{Row, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Quantity {
    /// Discrete-mode correlator at symmetric scaled distance d.
    #[value(name = "C_discrete")]
    #[serde(rename = "C_discrete")]
    CDiscrete,
    /// Continuum correlator C(d).
    #[value(name = "C_continuum")]
    #[serde(rename = "C_continuum")]
    CContinuum,
    /// Reduced integral I(d).
    #[value(name = "I_of_d")]
    #[serde(rename = "I_of_d")]
    IOfD,
    /// Interaction-induced ⟨φ²⟩ shift at scaled distance d in the left cavity.
    #[value(name = "phi2_shift")]
    #[serde(rename = "phi2_shift")]
    Phi2Shift,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::CDiscrete => "C_discrete",
            Quantity::CContinuum => "C_continuum",
            Quantity::IOfD => "I_of_d",
            Quantity::Phi2Shift => "phi2_shift",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub n_points: usize,
    pub spacing: Spacing,
}

impl Grid {
    pub fn new(min: f64, max: f64, n_points: usize, spacing: Spacing) -> CliResult<Self> {
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(CliError::Usage(format!("grid needs min < max, got {min} and {max}")));
        }
        if n_points < 2 {
            return Err(CliError::Usage(format!("grid needs n_points ≥ 2, got {n_points}")));
        }
        if spacing == Spacing::Log && min <= 0.0 {
            return Err(CliError::Usage("log spacing requires min > 0".into()));
        }
        Ok(Self {
            min,
            max,
            n_points,
            spacing,
        })
    }

    pub fn points(&self) -> Vec<f64> {
        match self.spacing {
            Spacing::Log => log_grid(self.min, self.max, self.n_points),
            Spacing::Linear => {
                let step = (self.max - self.min) / (self.n_points - 1) as f64;
                (0..self.n_points)
                    .map(|i| {
                        if i + 1 == self.n_points {
                            self.max
                        } else {
                            self.min + step * i as f64
                        }
                    })
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRequest {
    pub quantity: Quantity,
    pub grid: Grid,
    pub model: ModelConfig,
    pub quadrature: QuadratureSpec,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
}

#[derive(Serialize)]
struct Echo<'a> {
    quantity: Quantity,
    grid: &'a Grid,
    model: &'a ModelConfig,
    tol_rel: f64,
    tol_abs: f64,
}

impl SweepRequest {
    fn metadata(&self) -> Vec<(String, String)> {
        let echo = Echo {
            quantity: self.quantity,
            grid: &self.grid,
            model: &self.model,
            tol_rel: self.quadrature.rel_tol(),
            tol_abs: self.quadrature.abs_tol(),
        };
        vec![
            ("title".into(), format!("{} sweep", self.quantity.name())),
            ("tool".into(), format!("mirrorcorr {}", env!("CARGO_PKG_VERSION"))),
            ("config".into(), serde_json::to_string(&echo).expect("config serializes")),
        ]
    }
}

/// Converts one point's outcome into a row; failures keep a status token.
fn to_row(x: f64, outcome: mirror_corr::Result<(f64, f64)>) -> Row {
    match outcome {
        Ok((value, abs_err)) if value.is_finite() => Row::ok(x, value, abs_err),
        Ok(_) => Row {
            x,
            value: None,
            abs_err: None,
            status: "non_finite".into(),
        },
        Err(Error::Convergence { best, abs_err, .. }) => Row {
            x,
            value: best.is_finite().then_some(best),
            abs_err: abs_err.is_finite().then_some(abs_err),
            status: "no_convergence".into(),
        },
        Err(_) => Row {
            x,
            value: None,
            abs_err: None,
            status: "error".into(),
        },
    }
}

/// Evaluates the quantity at every grid point. Rows come out in grid order
/// whatever the scheduling, so the table is reproducible.
pub fn run_sweep(req: &SweepRequest) -> CliResult<Table> {
    let setup = req.model.build()?;
    let xs = req.grid.points();
    let state = matches!(req.quantity, Quantity::CDiscrete | Quantity::Phi2Shift)
        .then(|| PerturbativeState::new(&setup.modes, &setup.model));
    let params = setup.params;
    let spec = &req.quadrature;

    let eval = |d: f64| -> mirror_corr::Result<(f64, f64)> {
        match req.quantity {
            Quantity::CContinuum => {
                correlation_c_of_d(d, &params, spec).map(|r| (r.value, r.est_abs_err))
            }
            Quantity::IOfD => reduced_integral_i(d, spec).map(|r| (r.value, r.abs_err)),
            Quantity::CDiscrete => {
                let (x1, x2) = ScaledDistances::symmetric(d)?.positions(&params);
                let r = state
                    .as_ref()
                    .expect("state built")
                    .squared_field_correlation(x1, x2)?;
                Ok((r.value, r.est_abs_err))
            }
            Quantity::Phi2Shift => {
                let (x1, _) = ScaledDistances::symmetric(d)?.positions(&params);
                let v = state
                    .as_ref()
                    .expect("state built")
                    .phi_squared_shift(x1, Cavity::Left)?;
                Ok((v, f64::EPSILON * v.abs() * setup.modes.n_modes() as f64))
            }
        }
    };
    let compute = || -> Vec<Row> { xs.par_iter().map(|&d| to_row(d, eval(d))).collect() };
    let rows = match req.jobs {
        Some(jobs) => {
            if jobs == 0 {
                return Err(CliError::Usage("--jobs must be at least 1".into()));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map_err(|e| CliError::Usage(format!("cannot start {jobs} workers: {e}")))?
                .install(compute)
        }
        None => compute(),
    };
    Ok(Table {
        metadata: req.metadata(),
        rows,
    })
}
