//! Command-line driver for the staggered-grid transport solver.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{RawConfig, RunConfig};
use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "ap-staggered", version, about = "Staggered-grid solver for 2D linear transport in diffusive scaling")]
struct Cli {
    /// `key = value` configuration file. Flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(flatten)]
    overrides: Overrides,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Run one scenario to t_final.
    Run,
    /// Error and order table over grids and epsilons.
    Converge,
    /// Spectral radius scan of the 1D scheme.
    Stability,
    /// Compare against the diffusion limit.
    ApCheck,
    /// Print the resolved configuration.
    DumpConfig,
}

/// One flag per config key; values are parsed during resolution.
#[derive(Args, Debug, Default)]
struct Overrides {
    #[arg(long, global = true)]
    scenario: Option<String>,
    #[arg(long = "n", alias = "N", global = true)]
    n: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    epsilon: Option<String>,
    #[arg(long, global = true)]
    t_final: Option<String>,
    #[arg(long, global = true)]
    safety: Option<String>,
    #[arg(long, global = true)]
    phi: Option<String>,
    #[arg(long, global = true)]
    n_points: Option<String>,
    #[arg(long, global = true)]
    out_dir: Option<String>,
    #[arg(long, global = true)]
    snapshot_times: Option<String>,
    #[arg(long, global = true)]
    growth_limit: Option<String>,
    #[arg(long, global = true)]
    layout: Option<String>,
    #[arg(long, global = true)]
    n_list: Option<String>,
    #[arg(long, global = true)]
    epsilon_list: Option<String>,
    #[arg(long, global = true)]
    reference_n: Option<String>,
    #[arg(long, global = true)]
    stab_epsilons: Option<String>,
    #[arg(long, global = true)]
    stab_h: Option<String>,
    #[arg(long, global = true)]
    stab_sigma_s: Option<String>,
    #[arg(long, global = true)]
    stab_sigma_a: Option<String>,
    #[arg(long, global = true)]
    phi_rule: Option<String>,
    #[arg(long, global = true)]
    theta_points: Option<String>,
}

impl Overrides {
    fn apply(&self, raw: &mut RawConfig) {
        let pairs = [
            ("scenario", &self.scenario),
            ("grid.n", &self.n),
            ("physics.epsilon", &self.epsilon),
            ("time.t_final", &self.t_final),
            ("time.safety", &self.safety),
            ("relaxation.phi", &self.phi),
            ("angular.n_points", &self.n_points),
            ("output.dir", &self.out_dir),
            ("output.snapshot_times", &self.snapshot_times),
            ("run.growth_limit", &self.growth_limit),
            ("geometry.layout", &self.layout),
            ("converge.n_list", &self.n_list),
            ("converge.epsilon_list", &self.epsilon_list),
            ("converge.reference_n", &self.reference_n),
            ("stability.epsilon_list", &self.stab_epsilons),
            ("stability.h_list", &self.stab_h),
            ("stability.sigma_s_list", &self.stab_sigma_s),
            ("stability.sigma_a_list", &self.stab_sigma_a),
            ("stability.phi_rule", &self.phi_rule),
            ("stability.theta_points", &self.theta_points),
        ];
        for (key, value) in pairs {
            raw.set_flag(key, value.as_ref());
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let mut raw = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            RawConfig::parse(&text, &path.display().to_string())?
        }
        None => RawConfig::default(),
    };
    cli.overrides.apply(&mut raw);
    let cfg = RunConfig::resolve(&raw, std::env::var("AP_OUTDIR").ok())?;
    match cli.command {
        Command::Run => commands::run(&cfg),
        Command::Converge => commands::converge(&cfg),
        Command::Stability => commands::stability(&cfg),
        Command::ApCheck => commands::ap_check(&cfg),
        Command::DumpConfig => {
            print!("{}", cfg.to_text());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.report_line());
            ExitCode::from(e.exit_code())
        }
    }
}
