use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use icd_harness::config::{Ablation, ExperimentConfig, GridConfig};
use icd_harness::report::{histogram_csv, write_all};
use icd_harness::runner::{roundtrip_check, run_experiment, Link};
use icd_harness::HarnessError;

#[derive(Parser)]
#[command(name = "icd", about = "Text link experiments with in-context decoding")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment exactly as configured.
    Run(Common),
    /// Run all configured ablations over an SNR list.
    SweepSnr {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        snr: Option<Vec<f64>>,
    },
    /// Full ICD over the L_c × L_s grid.
    Grid {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        l_c: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        l_s: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        snr: Option<Vec<f64>>,
    },
    /// Reliability-bin correctness rates of the channel decoder.
    Hist {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        snr: Option<Vec<f64>>,
    },
    /// Lossless source-coding check over the test split.
    RoundtripCheck(Common),
}

fn load(common: &Common) -> Result<ExperimentConfig, HarnessError> {
    let mut cfg = ExperimentConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.output = out.clone();
    }
    Ok(cfg)
}

fn run_and_write(cfg: &ExperimentConfig) -> Result<(), HarnessError> {
    let output = run_experiment(cfg)?;
    for path in write_all(&output, &cfg.snr_db, &cfg.output)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn execute(command: Command) -> Result<(), HarnessError> {
    match command {
        Command::Run(common) => run_and_write(&load(&common)?),
        Command::SweepSnr { common, snr } => {
            let mut cfg = load(&common)?;
            if let Some(snr) = snr {
                cfg.snr_db = snr;
            }
            run_and_write(&cfg)
        }
        Command::Grid { common, l_c, l_s, snr } => {
            let mut cfg = load(&common)?;
            cfg.ablations = vec![Ablation::FullIcd];
            cfg.grid = GridConfig {
                l_c: l_c.unwrap_or_else(|| vec![8, 16, 32]),
                l_s: l_s.unwrap_or_else(|| vec![2, 4, 6]),
            };
            if let Some(snr) = snr {
                cfg.snr_db = snr;
            }
            run_and_write(&cfg)
        }
        Command::Hist { common, snr } => {
            let mut cfg = load(&common)?;
            cfg.ablations = vec![Ablation::ContextOnly];
            if let Some(snr) = snr {
                cfg.snr_db = snr;
            }
            let output = run_experiment(&cfg)?;
            let path = if common.out.is_some() {
                cfg.output.clone()
            } else {
                icd_harness::report::sidecar_path(&cfg.output, "hist")
            };
            icd_harness::report::write(&path, &histogram_csv(&output, &cfg.snr_db))?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::RoundtripCheck(common) => {
            let cfg = load(&common)?;
            let n = roundtrip_check(&Link::prepare(&cfg)?)?;
            println!("roundtrip ok: {n} sentences");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("icd: {e}");
            match e {
                HarnessError::Config(_) | HarnessError::Io { .. } | HarnessError::Code { .. } => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
