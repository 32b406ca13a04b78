use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::info;

use superres::oracle::{OracleConfig, DEFAULT_POINTS};
use superres::sweep::{
    emit, figure_preset, max_oracle_delta, run_all, Format, Mode, Nuisance, Range, SweepSpec,
    PRESET_STEPS, VERIFY_TOL,
};
use superres::Error;

#[derive(Parser)]
#[command(
    name = "superres",
    about = "Fisher information and QFIM sweeps for two-point-source superresolution"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single-parameter Fisher information F_tot
    Single(SweepArgs),
    /// Two-parameter QFIM and nuisance-corrected precision H_s
    Qfim(SweepArgs),
    /// Closed-form QFIM against the grid oracle
    Verify(SweepArgs),
    /// Data for one of the figure presets (fig1a, fig1b, fig1c, fig2a, fig2b)
    Figure {
        name: String,
        #[command(flatten)]
        output: OutputArgs,
        #[command(flatten)]
        oracle: OracleArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum NuisanceArg {
    Theta,
    Concurrence,
    Coherence,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(clap::Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Output file; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct OracleArgs {
    /// Also evaluate the brute-force oracle at every point
    #[arg(long)]
    oracle: bool,
    #[arg(long, default_value_t = DEFAULT_POINTS)]
    grid_points: usize,
    #[arg(long)]
    grid_halfwidth: Option<f64>,
    #[arg(long, default_value_t = superres::oracle::DEFAULT_FD_STEP)]
    fd_step: f64,
}

impl OracleArgs {
    fn config(&self) -> OracleConfig {
        OracleConfig {
            n_points: self.grid_points,
            halfwidth: self.grid_halfwidth,
            fd_step: self.fd_step,
            ..OracleConfig::default()
        }
    }
}

#[derive(clap::Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    phi: f64,
    #[arg(long, value_enum, default_value = "theta")]
    nuisance: NuisanceArg,
    #[arg(long)]
    s_min: Option<f64>,
    #[arg(long)]
    s_max: Option<f64>,
    #[arg(long)]
    s_steps: Option<usize>,
    #[arg(long)]
    n_min: Option<f64>,
    #[arg(long)]
    n_max: Option<f64>,
    #[arg(long)]
    n_steps: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
    #[command(flatten)]
    oracle: OracleArgs,
}

impl SweepArgs {
    fn spec(&self, mode: Mode) -> SweepSpec {
        let nuisance = match self.nuisance {
            NuisanceArg::Theta => Nuisance::Theta,
            NuisanceArg::Concurrence => Nuisance::Concurrence,
            NuisanceArg::Coherence => Nuisance::Coherence,
        };
        // verify defaults to the 4x4 oracle grid; the other modes to figure resolution
        let (s_def, n_steps_def) = match mode {
            Mode::Verify => ((0.5, 3.0, 4), 4),
            _ => ((1e-3, 5.0, PRESET_STEPS), PRESET_STEPS),
        };
        let n_def = match (mode, nuisance) {
            (Mode::Verify, Nuisance::Theta) => {
                (std::f64::consts::FRAC_PI_8, std::f64::consts::FRAC_PI_2)
            }
            (_, Nuisance::Theta) => (0.0, std::f64::consts::FRAC_PI_2),
            _ => (0.0, 1.0),
        };
        SweepSpec {
            mode,
            nuisance,
            sigma: self.sigma,
            phi: self.phi,
            s_range: Range::new(
                self.s_min.unwrap_or(s_def.0 * self.sigma),
                self.s_max.unwrap_or(s_def.1 * self.sigma),
                self.s_steps.unwrap_or(s_def.2),
            ),
            nuisance_range: Range::new(
                self.n_min.unwrap_or(n_def.0),
                self.n_max.unwrap_or(n_def.1),
                self.n_steps.unwrap_or(n_steps_def),
            ),
            oracle: self.oracle.oracle || mode == Mode::Verify,
            oracle_config: self.oracle.config(),
        }
    }
}

fn format_of(f: FormatArg) -> Format {
    match f {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io { .. } => 4,
        _ => 2,
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    let (specs, output) = match &cli.command {
        Command::Single(a) => (vec![a.spec(Mode::Single)], &a.output),
        Command::Qfim(a) => (vec![a.spec(Mode::Qfim)], &a.output),
        Command::Verify(a) => (vec![a.spec(Mode::Verify)], &a.output),
        Command::Figure {
            name,
            output,
            oracle,
        } => {
            let mut specs = figure_preset(name)?;
            for s in &mut specs {
                s.oracle = oracle.oracle;
                s.oracle_config = oracle.config();
            }
            (specs, output)
        }
    };
    let records = run_all(&specs)?;
    info!("{} records", records.len());
    emit(&records, format_of(output.format), output.out.as_deref())?;
    if let Some(delta) = max_oracle_delta(&records) {
        let verdict = if delta <= VERIFY_TOL { "PASS" } else { "FAIL" };
        eprintln!(
            "{verdict}: max relative oracle delta {delta:.3e} over {} points (tolerance {VERIFY_TOL:e})",
            records.iter().filter(|r| r.oracle_max_rel_delta.is_some()).count()
        );
        if delta > VERIFY_TOL {
            return Ok(3);
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("superres: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
