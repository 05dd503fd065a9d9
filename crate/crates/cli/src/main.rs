use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fracbellman::kernel::KernelPreset;
use fracbellman_cli::{oracle, run_solve, run_sweep, CliError, Experiment, EXIT_CHECK_FAILED, EXIT_PASS};

#[derive(Parser)]
#[command(name = "fracbellman", version, about = "Solve nonlocal Bellman equations and check regularity estimates")]
struct Cli {
    /// Worker threads (0 = rayon default)
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output root; defaults to the config's `out`, then $FRACBELLMAN_OUT, then ./out
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write SVG decay plots
    #[arg(long)]
    plots: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for every order and write the fields
    Solve(RunArgs),
    /// Solve and run the enabled checks for one order
    Check {
        #[command(flatten)]
        run: RunArgs,
        /// Order to check (default: first of the sweep)
        #[arg(long)]
        sigma: Option<f64>,
    },
    /// Solve and check every order of the sweep
    Sweep(RunArgs),
    /// Print reference values
    Oracle {
        #[command(subcommand)]
        which: OracleCommand,
    },
    /// Parse and validate a config without running it
    ValidateConfig {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Fourier multiplier mu(k) of the constant-kernel operator
    Spectral {
        #[arg(long)]
        sigma: f64,
        #[arg(long = "k", default_values_t = [1.0], allow_negative_numbers = true)]
        k: Vec<f64>,
    },
    /// Masses and moments of a kernel's quadrature rule
    Quadrature {
        #[arg(long)]
        sigma: f64,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 0.0625)]
        h: f64,
        #[arg(long = "R", default_value_t = 2.0)]
        half_width: f64,
        #[arg(long, default_value = "const")]
        kernel: String,
    },
}

fn out_root(flag: Option<PathBuf>, exp: &Experiment) -> PathBuf {
    flag.or_else(|| exp.config.out.as_ref().map(PathBuf::from))
        .or_else(|| std::env::var_os("FRACBELLMAN_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn load(path: &Path) -> Result<Experiment, CliError> {
    Experiment::from_path(path).map_err(|mut e| {
        e.message = format!("{}: {}", path.display(), e.message);
        CliError::Config(e)
    })
}

fn sweep(exp: &Experiment, sigmas: &[f64], args: RunArgs) -> Result<i32, CliError> {
    let root = out_root(args.out, exp);
    let outcome = run_sweep(exp, sigmas, &root, args.plots)?;
    print!("{}", outcome.report.summary());
    println!("wrote {}", outcome.dir.display());
    Ok(if outcome.passed() { EXIT_PASS } else { EXIT_CHECK_FAILED })
}

fn run(cli: Cli) -> Result<i32, CliError> {
    if cli.threads > 0 {
        // Fails only if a pool already exists, in which case the default stays.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global();
    }
    match cli.command {
        Command::Solve(args) => {
            let exp = load(&args.config)?;
            let dir = run_solve(&exp, &exp.config.sigma, &out_root(args.out, &exp))?;
            println!("wrote {}", dir.display());
            Ok(EXIT_PASS)
        }
        Command::Check { run, sigma } => {
            let exp = load(&run.config)?;
            let s = sigma.unwrap_or(exp.config.sigma[0]);
            if !(s > 0.0 && s < 2.0) {
                return Err(CliError::Config(fracbellman_cli::ConfigError {
                    line: 0,
                    column: 0,
                    message: format!("--sigma must lie in (0, 2), got {s}"),
                }));
            }
            sweep(&exp, &[s], run)
        }
        Command::Sweep(args) => {
            let exp = load(&args.config)?;
            let sigmas = exp.config.sigma.clone();
            sweep(&exp, &sigmas, args)
        }
        Command::Oracle { which } => {
            let text = match which {
                OracleCommand::Spectral { sigma, k } => oracle::spectral(sigma, &k),
                OracleCommand::Quadrature { sigma, n, h, half_width, kernel } => {
                    kernel.parse::<KernelPreset>().and_then(|kp| oracle::quadrature(n, sigma, h, half_width, &kp))
                }
            }
            .map_err(|source| CliError::Run { stage: "oracle".into(), source })?;
            print!("{text}");
            Ok(EXIT_PASS)
        }
        Command::ValidateConfig { config } => {
            let exp = load(&config)?;
            let checks: Vec<&str> = exp.config.checks.iter().map(|c| c.name()).collect();
            println!("ok: {} ({} orders; checks: {})", exp.config.name, exp.config.sigma.len(), checks.join(", "));
            Ok(EXIT_PASS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
