//! Seeded Monte Carlo experiments over the text link: arithmetic coding,
//! block channel code, noisy channel, soft decoding, and the three receiver
//! ablations.

pub mod config;
pub mod report;
pub mod runner;

use std::path::PathBuf;

pub use config::{Ablation, ExperimentConfig, GridConfig};
pub use runner::{run_experiment, ExperimentOutput, Link, ResultRow, Stat, TrialRecord};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Code {
        path: PathBuf,
        #[source]
        source: icd_core::code::CodeError,
    },
    #[error(transparent)]
    Model(#[from] icd_core::model::ModelError),
    #[error(transparent)]
    Codec(#[from] icd_core::arith::CodecError),
    #[error(transparent)]
    Icd(#[from] icd_core::icd::IcdError),
    #[error("budget violated: {used} source decodes for L_s = {l_s}")]
    Budget { used: usize, l_s: usize },
    #[error("roundtrip failed for sentence {index}: {detail}")]
    Roundtrip { index: usize, detail: String },
}
