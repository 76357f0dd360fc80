use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use perfpriv::{load, report, run, seed_from_env, CliError, Command, Settings};
use perfpriv_core::correlation::SearchOptions;
use perfpriv_core::numerics::DEFAULT_RANK_TOL;
use perfpriv_core::polytope::{DEFAULT_COL_TOL, DEFAULT_MAX_Y};

/// Perfect-privacy utility, maximal correlation and trade-off slope analysis
/// of discrete joint distributions.
///
/// The optimizer seed can be overridden with PERFPRIV_SEED or TOOL_SEED;
/// doing so makes reports differ from default runs.
#[derive(Parser)]
#[command(name = "perfpriv", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Every analysis in one report
    Analyze(TableArgs),
    /// Largest I(Y;U) over perfectly private releases, with the mechanism
    G0(TableArgs),
    /// Minimum mean-square error of estimating Y under perfect privacy
    Mmse(TableArgs),
    /// Minimum probability of error of guessing Y under perfect privacy
    Minerr(TableArgs),
    /// Non-private information D_X(Y) and the equality classification
    Dx(TableArgs),
    /// Maximal correlation and the spectrum of Q
    Maxcorr(TableArgs),
    /// Supremum of the KL-divergence ratio D(q_Y||p_Y)/D(q_X||p_X)
    Vstar(TableArgs),
    /// Lower bound on the trade-off slope at zero leakage
    Slope(TableArgs),
    /// Whether a perfectly private release exists
    Feasible(TableArgs),
    /// Binary symmetric channel check of the slope upper bound
    Bsc(BscArgs),
}

#[derive(Args)]
struct TableArgs {
    /// JSON or CSV joint table
    input: PathBuf,
    /// Rescale a table whose masses do not sum to 1
    #[arg(long)]
    normalize: bool,
    /// Add polytope vertices (and 2-simplex coordinates when |Y| = 3)
    #[arg(long)]
    emit_plot_data: bool,
    /// Largest |Y| for vertex enumeration
    #[arg(long, default_value_t = DEFAULT_MAX_Y)]
    max_y: usize,
    /// Relative singular-value threshold for numerical rank
    #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
    rank_tol: f64,
    /// L-infinity tolerance for identical channel columns
    #[arg(long, default_value_t = DEFAULT_COL_TOL)]
    col_tol: f64,
    /// Also run the dense 1-D grid check with this relative step
    #[arg(long)]
    grid_step: Option<f64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct BscArgs {
    /// P(X = 1)
    #[arg(long)]
    px: f64,
    /// Crossover probability
    #[arg(long)]
    alpha: f64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct OutputArgs {
    /// Write the report here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Json,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(sub: &Sub) -> Result<(), CliError> {
    let mut search = SearchOptions::default();
    let mut warnings = Vec::new();
    if let Some((seed, var)) = seed_from_env(|k| std::env::var(k).ok())? {
        search.seed = seed;
        warnings.push(format!("optimizer seed set from {var}"));
    }
    let (cmd, a) = match sub {
        Sub::Bsc(b) => {
            let settings = Settings {
                search,
                ..Settings::default()
            };
            let report = run(
                Command::Bsc {
                    px: b.px,
                    alpha: b.alpha,
                },
                None,
                &settings,
                warnings,
            )?;
            return write(&report, &b.out);
        }
        Sub::Analyze(a) => (Command::Analyze, a),
        Sub::G0(a) => (Command::G0, a),
        Sub::Mmse(a) => (Command::Mmse, a),
        Sub::Minerr(a) => (Command::Minerr, a),
        Sub::Dx(a) => (Command::Dx, a),
        Sub::Maxcorr(a) => (Command::Maxcorr, a),
        Sub::Vstar(a) => (Command::Vstar, a),
        Sub::Slope(a) => (Command::Slope, a),
        Sub::Feasible(a) => (Command::Feasible, a),
    };
    let settings = Settings {
        normalize: a.normalize,
        emit_plot_data: a.emit_plot_data,
        max_y: a.max_y,
        rank_tol: a.rank_tol,
        col_tol: a.col_tol,
        grid_step: a.grid_step,
        search,
    };
    settings.validate()?;
    let doc = load(&a.input, a.normalize)?;
    let report = run(cmd, Some(&doc), &settings, warnings)?;
    write(&report, &a.out)
}

fn write(report: &serde_json::Value, out: &OutputArgs) -> Result<(), CliError> {
    let OutputFormat::Json = out.format;
    let text = report::render(report);
    match &out.output {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            msg: e.to_string(),
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
