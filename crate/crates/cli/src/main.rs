use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mirror_corr::continuum::{correlation_c_general, QuadratureSpec, ScaledDistances};
use mirror_corr::oracle::{
    build_hamiltonian, ground_state, run_lambda_ladder, ExactMeasurement, LadderConfig,
    TruncationSpec, DEFAULT_BUDGET,
};
use mirror_corr::specfun::{aux_f, aux_g, cos_integral, sin_integral};
use mirror_corr::{CorrelationResult, ModeSet, ModelConfig, PerturbativeState};
use mirror_corr_cli::fit::run_fit;
use mirror_corr_cli::plot::{render_svg, Axes};
use mirror_corr_cli::sweep::{run_sweep, Grid, Quantity, Spacing, SweepRequest};
use mirror_corr_cli::table::Table;
use mirror_corr_cli::{default_model_config, load_model_config, CliError, CliResult};

#[derive(Parser)]
#[command(name = "mirrorcorr", version, about = "Vacuum field correlations across a movable mirror")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate Si, Ci or the auxiliary functions f, g.
    Specfun {
        #[arg(long = "fn", value_enum)]
        function: SpecialFn,
        #[arg(long, allow_negative_numbers = true)]
        x: f64,
    },
    /// Squared-field correlator at one pair of points.
    Correlate(CorrelateArgs),
    /// Evaluate a quantity over a grid and write CSV.
    Sweep(SweepArgs),
    /// Power-law fit of a sweep table.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        d_min: f64,
        #[arg(long)]
        d_max: f64,
        /// Hold the exponent fixed and fit only the coefficient.
        #[arg(long, allow_negative_numbers = true)]
        exponent: Option<f64>,
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Render a sweep table as SVG.
    Plot {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        axes: Axes,
    },
    /// Compare perturbative and exact results over a ladder of couplings.
    OracleValidate {
        #[arg(long, value_delimiter = ',')]
        lambdas: Option<Vec<f64>>,
        #[arg(long, default_value_t = 5)]
        q_max: u8,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SpecialFn {
    #[value(name = "Si")]
    Si,
    #[value(name = "Ci")]
    Ci,
    #[value(name = "f")]
    F,
    #[value(name = "g")]
    G,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CorrelateMethod {
    Discrete,
    Continuum,
    Oracle,
}

#[derive(Args)]
struct ModelArgs {
    /// JSON model configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n_modes: Option<usize>,
    #[arg(long)]
    uv_cutoff: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    tol_rel: Option<f64>,
    #[arg(long)]
    tol_abs: Option<f64>,
}

impl ModelArgs {
    fn model(&self) -> CliResult<ModelConfig> {
        let mut cfg = match &self.config {
            Some(path) => load_model_config(path)?,
            None => default_model_config(),
        };
        if let Some(n) = self.n_modes {
            cfg.n_modes = n;
        }
        if let Some(c) = self.uv_cutoff {
            cfg.uv_cutoff = Some(c);
        }
        if let Some(l) = self.lambda {
            cfg.lambda = l;
        }
        Ok(cfg)
    }

    fn quadrature(&self) -> CliResult<QuadratureSpec> {
        let base = QuadratureSpec::default();
        let rel = self.tol_rel.unwrap_or(base.rel_tol());
        let abs = self.tol_abs.unwrap_or(base.abs_tol());
        Ok(base.with_tolerances(rel, abs)?)
    }
}

#[derive(Args)]
struct CorrelateArgs {
    #[arg(long, value_enum, default_value = "continuum")]
    method: CorrelateMethod,
    /// Common scaled distance of both points from the mirror.
    #[arg(long, conflicts_with_all = ["d1", "d2"])]
    d: Option<f64>,
    #[arg(long, requires = "d2")]
    d1: Option<f64>,
    #[arg(long, requires = "d1")]
    d2: Option<f64>,
    #[command(flatten)]
    model: ModelArgs,
    /// Modes per cavity kept by the exact oracle.
    #[arg(long, default_value_t = 2)]
    oracle_modes: usize,
    /// Total-quanta cap of the oracle basis.
    #[arg(long, default_value_t = 5)]
    q_max: u8,
    /// Write the oracle Hamiltonian in coordinate format.
    #[arg(long)]
    dump_matrix: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    quantity: Quantity,
    #[arg(long)]
    min: f64,
    #[arg(long)]
    max: f64,
    #[arg(long)]
    n_points: usize,
    #[arg(long, value_enum, default_value_t)]
    spacing: Spacing,
    #[arg(long)]
    jobs: Option<usize>,
    /// Output CSV; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    model: ModelArgs,
}

fn print_result(r: &CorrelationResult) {
    println!("value   = {:.16e}", r.value);
    println!("abs_err = {:.3e}", r.est_abs_err);
    println!("method  = {:?}", r.method);
    println!("detail  = {:?}", r.diagnostics);
}

fn specfun(function: SpecialFn, x: f64) -> CliResult<()> {
    let v = match function {
        SpecialFn::Si => sin_integral(x)?,
        SpecialFn::Ci => cos_integral(x)?,
        SpecialFn::F => aux_f(x)?,
        SpecialFn::G => aux_g(x)?,
    };
    println!("{v:.14e}");
    Ok(())
}

fn correlate(args: &CorrelateArgs) -> CliResult<()> {
    let dist = match (args.d, args.d1, args.d2) {
        (Some(d), _, _) => ScaledDistances::symmetric(d)?,
        (None, Some(d1), Some(d2)) => ScaledDistances::new(d1, d2)?,
        _ => return Err(CliError::Usage("give --d or both --d1 and --d2".into())),
    };
    let cfg = args.model.model()?;
    let setup = cfg.build()?;
    if args.dump_matrix.is_some() && args.method != CorrelateMethod::Oracle {
        return Err(CliError::Usage("--dump-matrix needs --method oracle".into()));
    }
    match args.method {
        CorrelateMethod::Continuum => {
            let spec = args.model.quadrature()?;
            print_result(&correlation_c_general(dist, &setup.params, &spec)?);
        }
        CorrelateMethod::Discrete => {
            let (x1, x2) = dist.positions(&setup.params);
            let full = PerturbativeState::new(&setup.modes, &setup.model)
                .squared_field_correlation(x1, x2)?;
            print_result(&full);
            let n = setup.modes.n_modes();
            if n >= 2 {
                let half = setup.modes.with_n_modes(n / 2)?;
                let coarse = PerturbativeState::new(&half, &setup.model)
                    .squared_field_correlation(x1, x2)?;
                println!(
                    "increment = {:.3e} (N = {} vs {})",
                    (full.value - coarse.value).abs(),
                    n,
                    n / 2
                );
            }
        }
        CorrelateMethod::Oracle => {
            let trunc = TruncationSpec::symmetric(args.oracle_modes, args.q_max)?;
            let modes =
                ModeSet::dirichlet(args.oracle_modes, &setup.params)?.with_uv_cutoff(cfg.uv_cutoff)?;
            let system = build_hamiltonian(trunc, &modes, &setup.model, DEFAULT_BUDGET)?;
            if let Some(path) = &args.dump_matrix {
                let file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
                system
                    .write_coordinate(std::io::BufWriter::new(file))
                    .map_err(|e| CliError::io(path, e))?;
            }
            let tol = args.model.tol_abs.unwrap_or(1e-12);
            let ground = ground_state(system.matrix(), tol)?;
            let (x1, x2) = dist.positions(&setup.params);
            let m = ExactMeasurement::new(&system, &ground)?;
            print_result(&m.squared_field_correlation(x1, x2)?);
            println!("dimension = {}", system.dimension());
        }
    }
    Ok(())
}

fn sweep(args: &SweepArgs) -> CliResult<()> {
    let req = SweepRequest {
        quantity: args.quantity,
        grid: Grid::new(args.min, args.max, args.n_points, args.spacing)?,
        model: args.model.model()?,
        quadrature: args.model.quadrature()?,
        jobs: args.jobs,
    };
    let table = run_sweep(&req)?;
    match &args.out {
        Some(path) => table.write(path)?,
        None => print!("{}", table.to_csv_string()?),
    }
    let failed = table.rows.iter().filter(|r| !r.is_ok()).count();
    if failed > 0 {
        eprintln!("warning: {failed} of {} points did not succeed", table.rows.len());
    }
    Ok(())
}

fn plot(input: &Path, out: &Path, axes: Axes) -> CliResult<()> {
    let table = Table::read(input)?;
    let svg = render_svg(&table, axes)?;
    std::fs::write(out, svg).map_err(|e| CliError::io(out, e))
}

fn oracle_validate(lambdas: Option<Vec<f64>>, q_max: u8) -> CliResult<()> {
    let mut config = LadderConfig::default();
    if let Some(l) = lambdas {
        config.lambdas = l;
    }
    config.trunc = TruncationSpec::symmetric(config.trunc.modes_left(), q_max)?;
    let report = run_lambda_ladder(&config)?;
    print!("{report}");
    if report.passed() {
        println!("PASS");
        Ok(())
    } else {
        Err(CliError::Failed("λ-ladder residuals did not shrink fast enough".into()))
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Specfun { function, x } => specfun(function, x),
        Command::Correlate(args) => correlate(&args),
        Command::Sweep(args) => sweep(&args),
        Command::Fit {
            input,
            d_min,
            d_max,
            exponent,
            threshold,
        } => {
            let table = Table::read(&input)?;
            let report = run_fit(&table, d_min, d_max, exponent, threshold)?;
            println!("{report}");
            Ok(())
        }
        Command::Plot { input, out, axes } => plot(&input, &out, axes),
        Command::OracleValidate { lambdas, q_max } => oracle_validate(lambdas, q_max),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
