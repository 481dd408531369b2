use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use squidchain::sweep::{
    config_from_presets, emit_csv, load_config, render_csv, render_report, run_sweep, ConfigError,
    EmitError, Grid, Output, SweepConfig,
};
use squidchain::units::{parse_quantity, Dimension};
use squidchain::validation;

const EXIT_VALIDATION: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;

/// Noise budget and matching for two-stage dc SQUID resonator readout.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    /// TOML config file.
    #[arg(long, global = true, conflicts_with = "preset")]
    config: Option<PathBuf>,

    /// Built-in preset(s): c1, 16x1, 32x2, 48x3, magnicon, rt300, cryorf.
    /// Repeat or comma-separate to combine, e.g. `--preset 48x3,cryorf`.
    #[arg(long, global = true, value_delimiter = ',')]
    preset: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Figures of merit at one frequency.
    Report {
        /// Frequency, e.g. "30 MHz" (bare numbers are Hz). Defaults to f_start.
        #[arg(long, value_parser = frequency)]
        freq: Option<f64>,
    },
    /// CSV of the configured outputs over frequency.
    Sweep {
        #[command(flatten)]
        range: RangeArgs,
    },
    /// CSV of matched couplings over frequency for a resonator quality.
    Match {
        #[command(flatten)]
        range: RangeArgs,
        /// Resonator quality factor.
        #[arg(long)]
        q: Option<f64>,
        /// Resonator temperature, e.g. "10 mK".
        #[arg(long, value_parser = temperature)]
        t_res: Option<f64>,
    },
    /// Run the regression checks; exits 1 if any fails.
    Validate,
}

#[derive(Args)]
struct RangeArgs {
    #[arg(long, value_parser = frequency)]
    f_start: Option<f64>,
    #[arg(long, value_parser = frequency)]
    f_stop: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long, value_enum)]
    grid: Option<GridArg>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum GridArg {
    Log,
    Linear,
}

fn frequency(s: &str) -> Result<f64, String> {
    s.trim()
        .parse::<f64>()
        .or_else(|_| parse_quantity(s, Dimension::Frequency))
        .map_err(|e| e.to_string())
}

fn temperature(s: &str) -> Result<f64, String> {
    parse_quantity(s, Dimension::Temperature).map_err(|e| e.to_string())
}

enum Failure {
    Config(ConfigError),
    Emit(EmitError),
    Io(io::Error),
    Validation,
    Model(squidchain::Error),
}

impl Failure {
    fn report(&self) -> ExitCode {
        match self {
            Failure::Config(e) => {
                eprintln!("config error: {e}");
                let code = if matches!(e, ConfigError::Io { .. }) {
                    EXIT_IO
                } else {
                    EXIT_CONFIG
                };
                ExitCode::from(code)
            }
            Failure::Emit(e @ EmitError::Empty) => {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_CONFIG)
            }
            Failure::Emit(e) => {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_IO)
            }
            Failure::Io(e) => {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_IO)
            }
            Failure::Validation => ExitCode::from(EXIT_VALIDATION),
            Failure::Model(e) => {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_CONFIG)
            }
        }
    }
}

fn base_config(cli: &Cli) -> Result<SweepConfig, Failure> {
    match (&cli.config, cli.preset.is_empty()) {
        (Some(path), _) => load_config(path),
        (None, false) => config_from_presets(&cli.preset),
        (None, true) => config_from_presets(&["c1"]),
    }
    .map_err(Failure::Config)
}

fn apply_range(cfg: SweepConfig, r: &RangeArgs) -> Result<SweepConfig, Failure> {
    let mut cfg = cfg
        .with_range(r.f_start, r.f_stop, r.points)
        .map_err(Failure::Config)?;
    if let Some(g) = r.grid {
        cfg.grid = match g {
            GridArg::Log => Grid::Log,
            GridArg::Linear => Grid::Linear,
        };
    }
    Ok(cfg)
}

fn write_table(cfg: &SweepConfig, out: Option<&PathBuf>) -> Result<(), Failure> {
    let table = run_sweep(cfg);
    match out {
        Some(path) => emit_csv(&table, path).map_err(Failure::Emit),
        None => {
            let text = render_csv(&table).map_err(Failure::Emit)?;
            io::stdout().write_all(text.as_bytes()).map_err(Failure::Io)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Validate => {
            let checks = validation::run_all();
            for c in &checks {
                println!("{c}");
            }
            let failed = checks.iter().filter(|c| !c.pass).count();
            println!(
                "{} of {} checks passed",
                checks.len() - failed,
                checks.len()
            );
            if failed > 0 {
                return Err(Failure::Validation);
            }
            Ok(())
        }
        Command::Report { freq } => {
            let cfg = base_config(&cli)?;
            let f = freq.unwrap_or(cfg.f_start);
            let text = render_report(&cfg, f).map_err(Failure::Model)?;
            io::stdout().write_all(text.as_bytes()).map_err(Failure::Io)
        }
        Command::Sweep { range } => {
            let cfg = apply_range(base_config(&cli)?, range)?;
            write_table(&cfg, range.out.as_ref())
        }
        Command::Match { range, q, t_res } => {
            let mut cfg = apply_range(base_config(&cli)?, range)?;
            cfg.outputs = vec![Output::KappaGOnRes, Output::KappaGScan];
            cfg.resonator_q = q.unwrap_or(cfg.resonator_q);
            cfg.resonator_t = t_res.unwrap_or(cfg.resonator_t);
            let cfg = cfg.with_range(None, None, None).map_err(Failure::Config)?;
            write_table(&cfg, range.out.as_ref())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.report(),
    }
}
