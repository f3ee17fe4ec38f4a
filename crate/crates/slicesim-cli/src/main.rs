//! `slicesim`: analytic reports, seeded simulation runs, slice planning, and
//! one-command reproduction of the published reference results.
//!
//! Exit codes: 0 on success, 2 for configuration or usage errors, 3 for
//! runtime failures (simulation aborts, I/O).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use slicesim::sim::RlncMode;
use slicesim_cli::{commands, config, report, reproduce, CliError, OUT_DIR_ENV};

#[derive(Parser)]
#[command(name = "slicesim", version, about = "Delay/goodput analysis, simulation, and planning for sliced multi-path erasure networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory for report and artifact files (default: $SLICESIM_OUT_DIR).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report encoding on stdout and disk.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Stopwait,
    Pipelined,
}

impl From<ModeArg> for RlncMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Stopwait => RlncMode::StopAndWait,
            ModeArg::Pipelined => RlncMode::Pipelined,
        }
    }
}

#[derive(clap::Args)]
struct SimOverrides {
    /// Override the config's base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's trial count.
    #[arg(long)]
    trials: Option<u64>,
    /// Override the config's packets per application.
    #[arg(long)]
    packets: Option<u64>,
    /// Override the config's RLNC sender mode.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form delay/goodput report; no simulation.
    Analyze {
        #[arg(long)]
        config: PathBuf,
    },
    /// Seeded simulation report with analytic overlay and 95% CIs.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: SimOverrides,
        /// Also write per-packet traces of trial 0 (needs --out).
        #[arg(long)]
        trace: bool,
    },
    /// Minimum-resource and partition-feasibility report.
    Plan {
        #[arg(long)]
        config: PathBuf,
    },
    /// Re-run a published reference scenario and compare against it.
    Reproduce {
        /// One of: example1, example2, fig3, table1.
        target: String,
        #[command(flatten)]
        overrides: SimOverrides,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ CliError::Config(_)) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
        Err(e @ CliError::Runtime(_)) => {
            eprintln!("{e}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let out_dir = cli
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from));

    match cli.command {
        Command::Analyze { config } => {
            let exp = load(&config)?;
            let rows = commands::cmd_analyze(&exp)?;
            emit_report(&rows, cli.format, out_dir.as_deref(), "analyze")
        }
        Command::Simulate {
            config,
            overrides,
            trace,
        } => {
            let mut exp = load(&config)?;
            apply_overrides(&mut exp, &overrides);
            let mut traces = Vec::new();
            let rows = commands::cmd_simulate(&exp, trace.then_some(&mut traces))?;
            if trace {
                let dir = out_dir.as_deref().ok_or_else(|| {
                    CliError::Config("--trace needs --out (or the output dir env var)".into())
                })?;
                for (name, text) in &traces {
                    write_file(dir, name, text)?;
                }
            }
            emit_report(&rows, cli.format, out_dir.as_deref(), "simulate")
        }
        Command::Plan { config } => {
            let exp = load(&config)?;
            let rows = commands::cmd_plan(&exp)?;
            emit_report(&rows, cli.format, out_dir.as_deref(), "plan")
        }
        Command::Reproduce { target, overrides } => {
            let params = reproduce::RunParams {
                packets: overrides
                    .packets
                    .unwrap_or(slicesim::presets::DEFAULT_PACKETS),
                trials: overrides.trials.unwrap_or(slicesim::presets::DEFAULT_TRIALS),
                seed: overrides.seed.unwrap_or(slicesim::presets::DEFAULT_SEED),
            };
            let artifacts = reproduce::run(&target, params)?;
            print!(
                "{}",
                reproduce::comparison_text(&artifacts.comparisons, &[])
            );
            if let Some(dir) = out_dir.as_deref() {
                for (name, text) in &artifacts.files {
                    write_file(dir, name, text)?;
                }
            }
            Ok(())
        }
    }
}

fn load(path: &Path) -> Result<config::Experiment, CliError> {
    let text = fs::read_to_string(path).map_err(|e| {
        CliError::Config(format!("cannot read config {}: {e}", path.display()))
    })?;
    config::resolve(&config::parse(&text)?)
}

fn apply_overrides(exp: &mut config::Experiment, overrides: &SimOverrides) {
    if let Some(seed) = overrides.seed {
        exp.sim.seed = seed;
    }
    if let Some(trials) = overrides.trials {
        exp.sim.trials = trials;
    }
    if let Some(packets) = overrides.packets {
        exp.sim.packets_per_app = packets;
    }
    if let Some(mode) = overrides.mode {
        exp.sim.mode = mode.into();
    }
}

fn emit_report(
    rows: &[report::ReportRow],
    format: Format,
    out_dir: Option<&Path>,
    stem: &str,
) -> Result<(), CliError> {
    let (text, ext) = match format {
        Format::Csv => (report::to_csv(rows), "csv"),
        Format::Json => (report::to_json(rows)?, "json"),
    };
    print!("{text}");
    if let Some(dir) = out_dir {
        write_file(dir, &format!("{stem}.{ext}"), &text)?;
    }
    Ok(())
}

fn write_file(dir: &Path, name: &str, text: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, text)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}
