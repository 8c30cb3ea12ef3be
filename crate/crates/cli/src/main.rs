use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ionkin::config::Config;
use ionkin::error::EXIT_NUMERICAL;
use ionkin::{commands, init_threads, Result};

#[derive(Parser)]
#[command(
    name = "ionkin",
    version,
    about = "Multiphoton ionization yields of neon under XUV pulses"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON configuration file.
    #[arg(short, long)]
    config: PathBuf,
    /// Override a configuration key, e.g. `--set scan.points_per_decade=5`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Overrides `ensemble.master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; replaces `output.dir`.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

impl ConfigArgs {
    fn load(&self) -> Result<Config> {
        let mut cfg = Config::load(&self.config, &self.overrides, self.seed)?;
        if let Some(o) = &self.out {
            cfg.output.dir = std::path::absolute(o).unwrap_or_else(|_| o.clone());
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Yields over the configured intensity range.
    Scan(ConfigArgs),
    /// Population trajectories at one intensity.
    Single {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Peak intensity in W/cm2.
        #[arg(long)]
        intensity: f64,
        /// Realization index for ensemble configurations.
        #[arg(long, default_value_t = 0)]
        realization: u64,
    },
    /// Intensity correlations of chaotic pulse realizations.
    PulseDiag {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, default_value_t = 1000)]
        realizations: usize,
        /// Peak intensity in W/cm2; ratios do not depend on it.
        #[arg(long, default_value_t = 1e15)]
        intensity: f64,
    },
    /// Volume quadrature against a brute-force average.
    VolumeCheck {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Saturation intensity of the test family, W/cm2.
        #[arg(long, default_value_t = 1e15)]
        saturation: f64,
    },
    /// Model histogram against measured relative heights.
    Compare {
        #[arg(long)]
        histogram: PathBuf,
        #[arg(long)]
        experiment: PathBuf,
        #[arg(short, long, default_value = ".")]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<i32> {
    init_threads()?;
    let written = match cli.command {
        Command::Scan(a) => commands::scan(&a.load()?)?,
        Command::Single {
            cfg,
            intensity,
            realization,
        } => commands::single(&cfg.load()?, intensity, realization)?,
        Command::PulseDiag {
            cfg,
            realizations,
            intensity,
        } => commands::pulse_diag(&cfg.load()?, realizations, intensity)?,
        Command::VolumeCheck { cfg, saturation } => {
            let (w, ok) = commands::volume_check(&cfg.load()?, saturation)?;
            for p in &w {
                println!("{}", p.display());
            }
            return Ok(if ok { 0 } else { EXIT_NUMERICAL });
        }
        Command::Compare {
            histogram,
            experiment,
            out,
        } => {
            let (w, metric) = commands::compare(&histogram, &experiment, &out)?;
            eprintln!("rms of ln(model/experiment): {metric:.4e}");
            w
        }
    };
    for p in &written {
        println!("{}", p.display());
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
