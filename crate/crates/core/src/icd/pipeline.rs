use serde::{Deserialize, Serialize};

use super::ccg::{ccg_generate, CandidatePool};
use super::ccs::{mh_sample, SamplerParams, StepRecord};
use super::clr::{clr_select, FusionParams, ScoredReconstruction};
use super::IcdError;
use crate::arith::{self, CodecConfig, DecodeOutcome, DecodeStatus};
use crate::bits::BitStream;
use crate::model::{ProbabilityModel, TokenId};

/// Sampler sharpness. Confidence is measured in bits of `ρ`, so at this
/// value giving up one fully reliable bit costs a factor `e^-10` in `π`.
pub const DEFAULT_BETA: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IcdParams {
    pub l_c: usize,
    pub l_s: usize,
    pub beta: f64,
    /// Diversity weight; `None` means `0.05 / K`.
    pub lambda: Option<f64>,
    pub n_step: usize,
    pub seed: u64,
    pub fusion: FusionParams,
    /// Re-encode each decode and require it to reproduce the candidate bits.
    pub framing_check: bool,
}

impl Default for IcdParams {
    fn default() -> Self {
        Self {
            l_c: 16,
            l_s: 4,
            beta: DEFAULT_BETA,
            lambda: None,
            n_step: 200,
            seed: 0,
            fusion: FusionParams::default(),
            framing_check: true,
        }
    }
}

impl IcdParams {
    pub fn lambda_for(&self, k_total: usize) -> f64 {
        self.lambda.unwrap_or(0.05 / k_total.max(1) as f64)
    }

    pub fn validate(&self) -> Result<(), IcdError> {
        if self.l_s == 0 || self.l_s + 2 > self.l_c {
            return Err(IcdError::SubsetSize {
                l_s: self.l_s,
                l_c: self.l_c,
            });
        }
        SamplerParams {
            beta: self.beta,
            lambda: self.lambda.unwrap_or(0.0),
            n_step: self.n_step,
            seed: self.seed,
        }
        .validate()
    }

    /// Pool and subset sizes after clamping to the `2^K` candidates that exist.
    pub fn effective_sizes(&self, k_total: usize) -> (usize, usize) {
        let space = if k_total >= 63 { u64::MAX } else { 1u64 << k_total };
        let l_c = (self.l_c as u64).min(space) as usize;
        let l_s = if l_c >= 3 { self.l_s.min(l_c - 2) } else { l_c };
        (l_c, l_s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IcdDiagnostics {
    pub k_total: usize,
    pub l_c: usize,
    pub l_s: usize,
    pub pool_confs: Vec<f64>,
    pub pool_flips: Vec<Vec<usize>>,
    pub initial: Vec<usize>,
    pub sampled: Vec<usize>,
    pub trace: Vec<StepRecord>,
    pub scored: Vec<ScoredReconstruction>,
    pub selected: usize,
    pub codec_invocations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IcdResult {
    pub outcome: DecodeOutcome,
    /// Bits of the selected candidate.
    pub bits: Vec<u8>,
    pub diagnostics: IcdDiagnostics,
}

fn framing_ok(
    model: &dyn ProbabilityModel,
    outcome: &DecodeOutcome,
    bits: &[u8],
    m_pre: &[TokenId],
    cfg: &CodecConfig,
) -> Result<bool, IcdError> {
    if outcome.status != DecodeStatus::Completed {
        return Ok(false);
    }
    let again = arith::encode(model, &outcome.tokens, m_pre, cfg)?;
    Ok(again.as_slice() == bits)
}

/// Candidate generation, subset sampling, decoding of every sampled
/// candidate under the context `m_pre`, and fused selection.
///
/// The source decoder runs exactly once per sampled candidate.
pub fn icd_decode(
    m_hat: &[u8],
    rho_m: &[f64],
    m_pre: &[TokenId],
    model: &dyn ProbabilityModel,
    cfg: &CodecConfig,
    params: &IcdParams,
) -> Result<IcdResult, IcdError> {
    params.validate()?;
    let k_total = m_hat.len();
    let (l_c, l_s) = params.effective_sizes(k_total);
    let pool: CandidatePool = ccg_generate(m_hat, rho_m, l_c)?;

    let (initial, sampled, trace) = if l_s + 2 <= l_c {
        let sp = SamplerParams {
            beta: params.beta,
            lambda: params.lambda_for(k_total),
            n_step: params.n_step,
            seed: params.seed,
        };
        let run = mh_sample(&pool, l_s, &sp)?;
        (run.initial.members, run.state.members, run.trace)
    } else {
        let all: Vec<usize> = (0..pool.len()).collect();
        (all.clone(), all, Vec::new())
    };

    let mut scored = Vec::with_capacity(sampled.len());
    for &j in &sampled {
        let cand = &pool.candidates[j];
        let bits = BitStream::from(cand.bits.clone());
        let outcome = arith::decode(model, &bits, m_pre, cfg)?;
        let framed = if params.framing_check {
            framing_ok(model, &outcome, &cand.bits, m_pre, cfg)?
        } else {
            outcome.status == DecodeStatus::Completed
        };
        scored.push(params.fusion.score(j, cand.conf, k_total, outcome, framed));
    }
    let winner = clr_select(&scored)?.clone();

    let diagnostics = IcdDiagnostics {
        k_total,
        l_c,
        l_s: sampled.len(),
        pool_confs: pool.confs(),
        pool_flips: pool.candidates.iter().map(|c| c.flips.clone()).collect(),
        initial,
        sampled: sampled.clone(),
        trace,
        codec_invocations: scored.len(),
        selected: winner.candidate_index,
        scored,
    };
    Ok(IcdResult {
        bits: pool.candidates[winner.candidate_index].bits.clone(),
        outcome: winner.outcome,
        diagnostics,
    })
}
