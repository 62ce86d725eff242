//! Command-line front end: argument parsing and exit-code mapping only;
//! all orchestration lives in `tanksoe::io`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use tanksoe::io::{self, Command, Invocation};

/// Two-agent New Keynesian small-open-economy solver: steady state,
/// perturbation, impulse responses, simulated moments, and welfare-based
/// policy search.
///
/// Exit codes: 0 success · 2 config error · 3 steady-state failure ·
/// 4 determinacy (Blanchard-Kahn) failure · 1 other errors.
#[derive(Parser, Debug)]
#[command(name = "tanksoe", version)]
struct Cli {
    /// steady-state | irf | compare-irf | moments | welfare-grid |
    /// homothetic-compare (may instead come from the config's `command` key)
    command: Option<String>,

    /// Flat `key = value` override file; `#` starts a comment. Keys are
    /// model parameters or experiment settings; unknown keys abort.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory for all artifacts (created if missing)
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,

    /// RNG seed for simulation commands
    #[arg(long, value_name = "N")]
    seed: Option<u64>,

    /// Approximation order: 1 or 2
    #[arg(long, value_name = "ORDER")]
    order: Option<usize>,

    /// Shock name: eps_P | eps_Rstar | eps_R | eps_C | eps_A
    #[arg(long, value_name = "NAME")]
    shock: Option<String>,

    /// Shock size in standard deviations
    #[arg(long, value_name = "SIGMA")]
    size: Option<f64>,

    /// Impulse-response horizon in quarters
    #[arg(long, value_name = "N")]
    horizon: Option<usize>,

    /// Comma-separated tau_C grid for welfare-grid (e.g. "-1,-0.5,0,0.5,1")
    #[arg(long, value_name = "LIST")]
    grid_tau: Option<String>,

    /// Comma-separated phi_s grid for welfare-grid
    #[arg(long, value_name = "LIST")]
    grid_phis: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    if let Ok(raw) = std::env::var("TANKSOE_THREADS") {
        match raw.trim().parse::<usize>() {
            Ok(n) if n >= 1 => {
                // ignore the error if a pool already exists — the cap is
                // best-effort and only meaningful on first initialization
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
            _ => {
                eprintln!("tanksoe: TANKSOE_THREADS must be a positive integer, got `{raw}`");
                return ExitCode::from(2);
            }
        }
    }

    let inv = Invocation {
        command: cli.command,
        config: cli.config,
        out: cli.out,
        seed: cli.seed,
        order: cli.order,
        shock: cli.shock,
        size: cli.size,
        horizon: cli.horizon,
        grid_tau: cli.grid_tau,
        grid_phis: cli.grid_phis,
    };

    match io::assemble_and_run(&inv) {
        Ok((cfg, report)) => {
            println!(
                "{}: wrote {} artifact(s) to {} in {} ms",
                Command::name(cfg.command),
                report.artifacts.len(),
                cfg.out_dir.display(),
                report.elapsed_ms
            );
            for path in &report.artifacts {
                println!("  {}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("tanksoe: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
