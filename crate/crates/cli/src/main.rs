use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use drama_cli::{run, CliError, Command, ExperimentConfig};

#[derive(Parser)]
#[command(
    name = "drama",
    version,
    about = "Random-phase duty-cycled power transfer experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Experiment configuration (TOML)
    #[arg(long, global = true, default_value = "drama.toml")]
    config: PathBuf,

    /// Write CSV here instead of run.output or stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Master seed; overrides run.seed
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Monte Carlo sample count; overrides run.mc_samples
    #[arg(long, global = true)]
    samples: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Mean, standard deviation and coefficient of variation of the burst power
    Stats,
    /// Densities of the burst-to-average power ratio
    Pdf,
    /// Baseline, duty-shifted and equalized efficiency curves
    Curve,
    /// Harvested power and charging time of every scheme over the power grid
    Compare,
    /// Capacitor voltage over time
    Trace,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Stats => Command::Stats,
            Cmd::Pdf => Command::Pdf,
            Cmd::Curve => Command::Curve,
            Cmd::Compare => Command::Compare,
            Cmd::Trace => Command::Trace,
        }
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let command = Command::from(cli.command);
    let mut cfg = ExperimentConfig::load(&cli.config)?;
    if let Some(seed) = cli.seed {
        cfg.run.seed = Some(seed);
    }
    if let Some(n) = cli.samples {
        cfg.run.mc_samples = n;
    }
    for s in cfg.unused_sections(command.uses()) {
        eprintln!("warning: section [{s}] is not used by `{}`", command.name());
    }

    let mut summary = Vec::new();
    let csv = run(command, &cfg, &mut summary)?;

    let target = cli.out.or_else(|| {
        cfg.run
            .output
            .as_ref()
            .map(|o| cfg.path.parent().unwrap_or(std::path::Path::new(".")).join(o))
    });
    match target {
        Some(path) => {
            std::fs::write(&path, csv).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
            eprintln!("wrote {}", path.display());
        }
        None => std::io::stdout()
            .write_all(csv.as_bytes())
            .map_err(|e| CliError::Runtime(format!("stdout: {e}")))?,
    }
    for line in summary {
        eprintln!("{line}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
