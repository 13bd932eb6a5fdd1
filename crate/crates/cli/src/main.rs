//! `pidmap`: gain mapping, stability reports and closed-loop experiments.

mod commands;
mod config;
mod output;
mod presets;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use config::Overrides;

#[derive(Debug, Parser)]
#[command(name = "pidmap", version, about = "Single-parameter PID tuning: gain mapping, stability analysis and simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, Args)]
struct AuxArgs {
    #[arg(long, allow_negative_numbers = true)]
    kp: f64,
    #[arg(long, allow_negative_numbers = true)]
    kd: f64,
    /// Estimator time constant.
    #[arg(long = "T", allow_negative_numbers = true)]
    t: f64,
}

#[derive(Debug, Clone, Copy, Args)]
struct TruthArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    a1: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    a2: f64,
    /// Input-gain error; the true input gain is 1 + b.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    b: f64,
}

#[derive(Debug, Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Map (kp, kd, T) to PID gains.
    Map {
        #[command(flatten)]
        aux: AuxArgs,
        #[arg(long)]
        json: bool,
    },
    /// List every (kp, kd, T) that produces the given PID gains.
    Invert {
        #[arg(long = "KP", allow_negative_numbers = true)]
        kp: f64,
        #[arg(long = "KI", allow_negative_numbers = true)]
        ki: f64,
        #[arg(long = "KD", allow_negative_numbers = true)]
        kd: f64,
        #[arg(long)]
        json: bool,
    },
    /// Partial derivatives of (KP, KD, KI) with respect to (kp, kd, T).
    Jacobian {
        #[command(flatten)]
        aux: AuxArgs,
        #[arg(long)]
        json: bool,
    },
    /// Routh verdict, closed-loop eigenvalues and the largest stabilising T.
    Stability {
        #[command(flatten)]
        aux: AuxArgs,
        #[command(flatten)]
        truth: TruthArgs,
        /// Lower end of the T search range.
        #[arg(long, default_value_t = pidmap_core::analysis::DEFAULT_T_RANGE.0)]
        t_min: f64,
        /// Upper end of the T search range.
        #[arg(long, default_value_t = pidmap_core::analysis::DEFAULT_T_RANGE.1)]
        t_max: f64,
        #[arg(long)]
        json: bool,
    },
    /// Lyapunov solution and ultimate bound of the closed-loop error state.
    LyapunovBound {
        #[command(flatten)]
        aux: AuxArgs,
        #[command(flatten)]
        truth: TruthArgs,
        /// Sup-norm of the exogenous input.
        #[arg(long)]
        u_inf: f64,
        #[arg(long, default_value_t = pidmap_core::analysis::DEFAULT_THETA)]
        theta: f64,
        #[arg(long)]
        json: bool,
    },
    /// Run one closed-loop simulation.
    Simulate {
        /// Named experiment; see `pidmap simulate --list-presets`.
        #[arg(long, conflicts_with = "config")]
        preset: Option<String>,
        /// JSON experiment file.
        #[arg(long)]
        config: Option<std::path::PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
        /// Time series output.
        #[arg(long)]
        out_csv: Option<std::path::PathBuf>,
        /// Summary output; printed to stdout when omitted.
        #[arg(long)]
        out_json: Option<std::path::PathBuf>,
        #[arg(long, exclusive = true)]
        list_presets: bool,
    },
    /// Reproduce the P1–P3 table under constant and sinusoidal disturbances.
    Table1 {
        /// Disturbance amplitude.
        #[arg(long, default_value_t = pidmap_core::plant::ELEVATION_DISTURBANCE)]
        disturbance: f64,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        out_json: Option<std::path::PathBuf>,
    },
    /// Compare full, reduced and boundary-layer solutions as T shrinks.
    SpStudy {
        /// Strictly decreasing list of time constants.
        #[arg(long = "T-list", value_delimiter = ',', default_values_t = [0.2, 0.1, 0.05, 0.025])]
        t_list: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        kp: f64,
        #[arg(long, default_value_t = 2.0)]
        kd: f64,
        #[arg(long)]
        out_csv: Option<std::path::PathBuf>,
    },
    /// Simulate the elevation experiment over a log-spaced range of T.
    #[command(name = "sweep-T")]
    SweepT {
        #[arg(long, default_value_t = 1.0)]
        kp: f64,
        #[arg(long, default_value_t = 2.0)]
        kd: f64,
        #[arg(long = "T-min", default_value_t = 0.02)]
        t_min: f64,
        #[arg(long = "T-max", default_value_t = 1.0)]
        t_max: f64,
        #[arg(long, default_value_t = 8)]
        points: usize,
        #[command(flatten)]
        truth: TruthArgs,
        /// Disturbance preset name.
        #[arg(long, default_value = "d2-elevation")]
        disturbance: String,
        #[arg(long, default_value_t = pidmap_core::sim::DEFAULT_T_END)]
        t_end: f64,
        #[arg(long)]
        out_csv: Option<std::path::PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(commands::EXIT_USAGE),
            };
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
