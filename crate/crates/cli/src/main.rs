use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cavity1d_cli::config::{parse_document, BackendChoice, ExperimentConfig, ExperimentKind};
use cavity1d_cli::figures::reproduce_figure;
use cavity1d_cli::runner::run_experiment;
use cavity1d_cli::CliError;

/// Single-excitation simulator for two-level atoms in a 1-D multimode
/// cavity. Each subcommand runs one experiment and writes delimited tables
/// plus a manifest that regenerates the run.
#[derive(Parser)]
#[command(name = "cavity1d", version, disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Key-value config file; omitted keys take reference-cavity defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Master RNG seed; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Propagation backend; overrides the config file.
    #[arg(long, global = true, value_parser = ["eig", "rk"])]
    backend: Option<String>,

    /// Worker threads for ensembles and sweeps (0 = automatic). Results are
    /// identical for any thread count.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Spontaneous decay of a single atom.
    Decay,
    /// Independent decays over a set of emitter position offsets.
    Sweep,
    /// Decay of the central atom of a linear crystal.
    Crystal,
    /// Seeded ensemble average over random crystals.
    Ensemble,
    /// Mode-occupation spectra and the eigenstate overlap spectrum.
    Spectrum,
    /// Analyzer-atom absorption spectrum against the mode envelope.
    Analyzer,
    /// Reconstructed time-dependent decay rate and level shift.
    MasterEq,
    /// Emit the data behind one of the reference figures.
    ReproduceFigure {
        /// Figure id: 1, 2, 3, 4, 5, 6, 7, 7b, or 8.
        id: String,
    },
}

impl Command {
    fn kind(&self) -> Option<ExperimentKind> {
        match self {
            Command::Decay => Some(ExperimentKind::Decay),
            Command::Sweep => Some(ExperimentKind::Sweep),
            Command::Crystal => Some(ExperimentKind::Crystal),
            Command::Ensemble => Some(ExperimentKind::Ensemble),
            Command::Spectrum => Some(ExperimentKind::Spectrum),
            Command::Analyzer => Some(ExperimentKind::Analyzer),
            Command::MasterEq => Some(ExperimentKind::MasterEq),
            Command::ReproduceFigure { .. } => None,
        }
    }
}

fn load_config(cli: &Cli, kind: ExperimentKind) -> Result<ExperimentConfig, CliError> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.display().to_string(),
                source,
            })?;
            parse_document(&text, Some(kind))?
        }
        None => ExperimentConfig::defaults(kind),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(backend) = &cli.backend {
        config.backend = BackendChoice::parse(backend)
            .ok_or_else(|| CliError::Config(format!("unknown backend `{backend}`")))?;
    }
    Ok(config)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let artifacts = match &cli.command {
        Command::ReproduceFigure { id } => reproduce_figure(id, &cli.out, cli.seed.unwrap_or(0))?,
        command => {
            let kind = command.kind().expect("experiment subcommand");
            let config = load_config(cli, kind)?;
            run_experiment(&config, &cli.out)?
        }
    };
    for file in &artifacts.files {
        println!("wrote {}", artifacts.out_dir.join(file).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build();
    let pool = match pool {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error kind=config exit=2 message={:?}", e.to_string());
            return ExitCode::from(2);
        }
    };
    match pool.install(|| run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
