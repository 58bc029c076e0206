use std::fmt;

use mirror_corr::continuum::{check_fit, fit_power_law, PowerLawFit, FIT_RESIDUAL_THRESHOLD};

use crate::error::{CliError, CliResult};
use crate::table::Table;

pub const MIN_FIT_ROWS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub fit: PowerLawFit,
    pub threshold: f64,
}

impl fmt::Display for FitReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "coefficient = {:.16e}", self.fit.coefficient)?;
        writeln!(f, "exponent    = {:.16e}", self.fit.exponent)?;
        writeln!(f, "residual    = {:.6e} (threshold {:.1e})", self.fit.residual, self.threshold)?;
        write!(f, "points      = {}", self.fit.n_points)
    }
}

/// Power-law fit of `|value|` against `x` over the successful rows with
/// `x ∈ [d_min, d_max]`; rejected when the residual exceeds `threshold`.
pub fn run_fit(
    table: &Table,
    d_min: f64,
    d_max: f64,
    forced_exponent: Option<f64>,
    threshold: Option<f64>,
) -> CliResult<FitReport> {
    if !(d_min < d_max) {
        return Err(CliError::Usage(format!("need d_min < d_max, got {d_min} and {d_max}")));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = table
        .rows
        .iter()
        .filter(|r| r.is_ok() && r.x >= d_min && r.x <= d_max)
        .filter_map(|r| r.value.map(|v| (r.x, v)))
        .unzip();
    if xs.len() < MIN_FIT_ROWS {
        return Err(CliError::Usage(format!(
            "need at least {MIN_FIT_ROWS} usable rows in [{d_min}, {d_max}], found {}",
            xs.len()
        )));
    }
    let threshold = threshold.unwrap_or(FIT_RESIDUAL_THRESHOLD);
    let fit = check_fit(fit_power_law(&xs, &ys, forced_exponent)?, threshold)?;
    Ok(FitReport { fit, threshold })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::Row;

    fn table(f: impl Fn(f64) -> f64) -> Table {
        Table {
            metadata: vec![],
            rows: (0..8)
                .map(|i| {
                    let x = 50.0 * 10f64.powf(i as f64 / 7.0);
                    Row::ok(x, f(x), 0.0)
                })
                .collect(),
        }
    }

    #[test]
    fn exact_power_law_recovered() {
        let t = table(|x| 1.8 * x.powi(-3));
        let r = run_fit(&t, 50.0, 500.0, None, None).unwrap();
        assert!((r.fit.coefficient - 1.8).abs() < 1e-10);
        assert!((r.fit.exponent + 3.0).abs() < 1e-10);
    }

    #[test]
    fn misfit_rejected() {
        let t = table(|x| x.powi(-4));
        let err = run_fit(&t, 50.0, 500.0, Some(-3.0), None).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn too_few_rows() {
        let t = table(|x| x.powi(-3));
        let err = run_fit(&t, 50.0, 100.0, None, None).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }
}
