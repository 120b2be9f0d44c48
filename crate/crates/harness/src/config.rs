//! Experiment configuration, read from TOML.
//!
//! Relative paths resolve against the directory of the config file. See
//! `configs/default.toml` for every key with its default.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use icd_core::channel::{ChannelKind, Fading};
use icd_core::decoder::BpParams;
use icd_core::icd::IcdParams;
use serde::{Deserialize, Serialize};

use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ablation {
    /// Single decode of `m̂`, transmitter and receiver without context.
    Baseline,
    /// Single decode of `m̂` conditioned on `m_pre`.
    ContextOnly,
    /// Candidate generation, sampling and fused ranking under `m_pre`.
    FullIcd,
}

impl Ablation {
    pub const ALL: [Ablation; 3] = [Ablation::Baseline, Ablation::ContextOnly, Ablation::FullIcd];

    pub fn as_str(self) -> &'static str {
        match self {
            Ablation::Baseline => "baseline",
            Ablation::ContextOnly => "context_only",
            Ablation::FullIcd => "full_icd",
        }
    }

    pub fn uses_context(self) -> bool {
        self != Ablation::Baseline
    }
}

impl fmt::Display for Ablation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Ablation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ablation::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| format!("unknown ablation `{s}`"))
    }
}

/// `L_c × L_s` points evaluated for `full_icd`; empty lists mean the single
/// point from `[icd]`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub l_c: Vec<usize>,
    pub l_s: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// UTF-8 corpus, one sentence per line.
    pub corpus: PathBuf,
    pub min_words: usize,
    pub max_words: usize,
    /// Leading words of each sentence known at the receiver.
    pub context_words: usize,
    /// Held-out sentences; the rest of the corpus trains the model.
    pub test_size: usize,
    /// Bigram back-off mass.
    pub kappa: f64,
    pub channel: ChannelKind,
    pub fading: Fading,
    pub snr_db: Vec<f64>,
    /// `ldpc_49_24`, `hamming_7_4`, or a path to an alist file.
    pub code: String,
    pub bp: BpParams,
    pub icd: IcdParams,
    pub grid: GridConfig,
    /// Sentences per SNR point, cycling through the test split.
    pub trials: usize,
    pub seed: u64,
    pub ablations: Vec<Ablation>,
    /// Number of reliability bins in the histogram file.
    pub hist_bins: usize,
    pub output: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            corpus: PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/data/corpus.txt")),
            min_words: 4,
            max_words: 30,
            context_words: 3,
            test_size: 200,
            kappa: 1.0,
            channel: ChannelKind::Awgn,
            fading: Fading::PerSymbol,
            snr_db: vec![-3.0, 0.0, 3.0, 6.0],
            code: "ldpc_49_24".into(),
            bp: BpParams::default(),
            icd: IcdParams::default(),
            grid: GridConfig::default(),
            trials: 200,
            seed: 1,
            ablations: Ablation::ALL.to_vec(),
            hist_bins: 10,
            output: PathBuf::from("results.csv"),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    /// Reads `path` and resolves relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io {
            path: path.to_owned(),
            source: e,
        })?;
        let mut cfg = Self::from_toml(&text).map_err(|e| match e {
            HarnessError::Config(m) => HarnessError::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.corpus = base.join(&cfg.corpus);
        cfg.output = base.join(&cfg.output);
        if !is_builtin_code(&cfg.code) {
            cfg.code = base.join(&cfg.code).to_string_lossy().into_owned();
        }
        Ok(cfg)
    }

    /// `(L_c, L_s)` points for `full_icd`.
    pub fn grid_points(&self) -> Vec<(usize, usize)> {
        let l_c = if self.grid.l_c.is_empty() { vec![self.icd.l_c] } else { self.grid.l_c.clone() };
        let l_s = if self.grid.l_s.is_empty() { vec![self.icd.l_s] } else { self.grid.l_s.clone() };
        l_c.iter().flat_map(|&c| l_s.iter().map(move |&s| (c, s))).collect()
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.snr_db.is_empty() {
            return bad("snr_db must not be empty".into());
        }
        if let Some(s) = self.snr_db.iter().find(|s| !s.is_finite()) {
            return bad(format!("snr {s} is not finite"));
        }
        if self.ablations.is_empty() {
            return bad("ablations must not be empty".into());
        }
        if self.min_words == 0 || self.min_words > self.max_words {
            return bad(format!("invalid length bounds {}..={}", self.min_words, self.max_words));
        }
        if self.context_words >= self.min_words {
            return bad(format!(
                "context_words {} leaves no payload for {}-word sentences",
                self.context_words, self.min_words
            ));
        }
        if self.test_size == 0 {
            return bad("test_size must be at least 1".into());
        }
        if self.hist_bins == 0 {
            return bad("hist_bins must be at least 1".into());
        }
        if self.bp.max_iter == 0 || !(self.bp.llr_clamp > 0.0) {
            return bad("bp.max_iter and bp.llr_clamp must be positive".into());
        }
        for (l_c, l_s) in self.grid_points() {
            IcdParams { l_c, l_s, ..self.icd }
                .validate()
                .map_err(|e| HarnessError::Config(format!("icd point ({l_c}, {l_s}): {e}")))?;
        }
        Ok(())
    }
}

pub fn is_builtin_code(name: &str) -> bool {
    matches!(name, "ldpc_49_24" | "hamming_7_4")
}
