use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ftexp::pipeline::{self, ExponentMode, Grid, PipelineConfig, EXIT_INPUT};

/// Smooth a time series with Fermat–Torricelli points and interpolate the
/// nodes with a sum of complex exponentials.
#[derive(Debug, Parser)]
#[command(name = "ftexp", version)]
struct Cli {
    /// Relative tolerance on the interpolation residual.
    #[arg(long, global = true, value_name = "R")]
    tol: Option<f64>,

    /// Year subtracted from a `year` column to get `t`.
    #[arg(long, global = true, value_name = "YEAR", default_value_t = ftexp::series::DEFAULT_YEAR_OFFSET)]
    year_offset: f64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct ExponentArgs {
    /// CSV file with columns `re,im`.
    #[arg(long, value_name = "F")]
    exponents: Option<PathBuf>,

    /// Estimate M exponents from the nodes.
    #[arg(long, value_name = "M")]
    estimate: Option<usize>,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// Make the estimated set closed under negation.
    #[arg(long, requires = "estimate")]
    symmetrize: bool,

    /// Number of uniform resampling points used for estimation.
    #[arg(long, value_name = "N", requires = "estimate")]
    resample: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Replace each sliding triple of samples by its Fermat–Torricelli point.
    Smooth {
        #[arg(long, value_name = "F")]
        input: PathBuf,
        #[arg(long, value_name = "F")]
        output: PathBuf,
    },
    /// Fit an exponential model through a node table.
    Fit {
        #[arg(long, value_name = "F")]
        input: PathBuf,
        #[arg(long, value_name = "F")]
        output: PathBuf,
        #[command(flatten)]
        exponents: ExponentArgs,
        #[command(flatten)]
        estimate: EstimateArgs,
    },
    /// Evaluate a model file on a grid.
    Eval {
        #[arg(long, value_name = "F")]
        model: PathBuf,
        #[arg(long, value_name = "START:STOP:STEP")]
        grid: Grid,
        #[arg(long, value_name = "F")]
        output: PathBuf,
    },
    /// Smooth, fit and evaluate, writing all artifacts into a directory.
    Run {
        #[arg(long, value_name = "F")]
        input: PathBuf,
        /// Output directory.
        #[arg(long, value_name = "DIR")]
        output: PathBuf,
        /// Fit these nodes instead of the smoothed ones.
        #[arg(long, value_name = "F")]
        nodes: Option<PathBuf>,
        #[arg(long, value_name = "START:STOP:STEP")]
        grid: Option<Grid>,
        #[command(flatten)]
        exponents: ExponentArgs,
        #[command(flatten)]
        estimate: EstimateArgs,
    },
    /// Reproduce the published inflation nodes and model from the bundled data.
    VerifyPaper {
        /// Read the fixtures from this directory instead.
        #[arg(long, value_name = "DIR")]
        fixtures: Option<PathBuf>,
    },
}

fn exponent_mode(e: ExponentArgs, est: EstimateArgs) -> ExponentMode {
    match (e.exponents, e.estimate) {
        (Some(path), _) => ExponentMode::Given(path),
        (None, Some(m)) => ExponentMode::Estimate {
            m,
            symmetrize: est.symmetrize,
            resample_count: est.resample,
        },
        (None, None) => unreachable!("clap requires one exponent source"),
    }
}

fn init_logging() {
    let level = match std::env::var("FT_EXPFIT_LOG") {
        Ok(v) => match v.trim().to_ascii_lowercase().as_str() {
            "off" => log::LevelFilter::Off,
            "debug" => log::LevelFilter::Debug,
            _ => log::LevelFilter::Warn,
        },
        Err(_) => log::LevelFilter::Warn,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .init();
}

fn main() -> ExitCode {
    init_logging();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT as u8 } else { 0 });
        }
    };

    let (tol, year_offset) = (cli.tol, cli.year_offset);
    let configure = |input: PathBuf, output: PathBuf| {
        let mut c = PipelineConfig::new(input, output);
        c.year_offset = year_offset;
        if let Some(tol) = tol {
            c.tolerances.interpolation = tol;
        }
        c
    };

    let code = match cli.command {
        Command::Smooth { input, output } => pipeline::cmd_smooth(&configure(input, output)),
        Command::Fit {
            input,
            output,
            exponents,
            estimate,
        } => {
            let mut c = configure(input, output);
            c.exponent_mode = Some(exponent_mode(exponents, estimate));
            pipeline::cmd_fit(&c)
        }
        Command::Eval {
            model,
            grid,
            output,
        } => {
            let mut c = configure(model, output);
            c.grid = Some(grid);
            pipeline::cmd_eval(&c)
        }
        Command::Run {
            input,
            output,
            nodes,
            grid,
            exponents,
            estimate,
        } => {
            let mut c = configure(input, output);
            c.nodes = nodes;
            c.grid = grid;
            c.exponent_mode = Some(exponent_mode(exponents, estimate));
            pipeline::cmd_run(&c)
        }
        Command::VerifyPaper { fixtures } => {
            pipeline::cmd_verify_paper(fixtures.as_deref(), pipeline::NODE_TOL)
        }
    };
    ExitCode::from(code as u8)
}
