//! Final selection by confidence plus weighted log-likelihood.

use serde::{Deserialize, Serialize};

use super::IcdError;
use crate::arith::{DecodeOutcome, DecodeStatus};

/// Large enough to rank any framed decode above any unframed one for
/// messages of realistic size.
pub const DEFAULT_FRAMING_PENALTY: f64 = 1.0e4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FusionParams {
    /// Weight of the log-likelihood term.
    pub alpha: f64,
    /// Use `conf / K` and `ℓ / tokens` instead of raw sums.
    pub normalize: bool,
    /// Subtracted from the score of decodes that fail the framing check
    /// (truncated, or not re-encoding to exactly the candidate bits).
    pub framing_penalty: f64,
    /// Drop the likelihood term for unframed decodes, so that when nothing
    /// frames the most reliable candidate wins.
    pub unframed_confidence_only: bool,
}

impl Default for FusionParams {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            normalize: false,
            framing_penalty: DEFAULT_FRAMING_PENALTY,
            unframed_confidence_only: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredReconstruction {
    pub candidate_index: usize,
    pub outcome: DecodeOutcome,
    pub conf: f64,
    /// Whether the decode passed the framing check.
    pub framed: bool,
    pub fused_score: f64,
}

impl FusionParams {
    pub fn score(
        &self,
        candidate_index: usize,
        conf: f64,
        k_total: usize,
        outcome: DecodeOutcome,
        framed: bool,
    ) -> ScoredReconstruction {
        let (c, l) = if self.normalize {
            (
                conf / k_total.max(1) as f64,
                outcome.log_likelihood / outcome.tokens.len().max(1) as f64,
            )
        } else {
            (conf, outcome.log_likelihood)
        };
        let framed = framed && outcome.status == DecodeStatus::Completed;
        let fused_score = if framed {
            c + self.alpha * l
        } else if self.unframed_confidence_only {
            c - self.framing_penalty
        } else {
            c + self.alpha * l - self.framing_penalty
        };
        ScoredReconstruction {
            candidate_index,
            conf,
            framed,
            fused_score,
            outcome,
        }
    }
}

/// Highest fused score; ties go to the lowest candidate index.
pub fn clr_select(scored: &[ScoredReconstruction]) -> Result<&ScoredReconstruction, IcdError> {
    scored
        .iter()
        .reduce(|best, s| {
            let better = s.fused_score > best.fused_score
                || (s.fused_score == best.fused_score && s.candidate_index < best.candidate_index);
            if better {
                s
            } else {
                best
            }
        })
        .ok_or(IcdError::EmptySelection)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outcome(ll: f64, n: usize) -> DecodeOutcome {
        DecodeOutcome {
            tokens: vec![0; n],
            log_likelihood: ll,
            status: DecodeStatus::Completed,
            padding_bits: 0,
        }
    }

    #[test]
    fn fusion_arithmetic() {
        let f = FusionParams::default();
        let s = vec![
            f.score(0, 10.0, 12, outcome(-5.0, 3), true),
            f.score(1, 9.0, 12, outcome(-1.0, 3), true),
        ];
        assert_eq!(clr_select(&s).unwrap().candidate_index, 1);
        assert_eq!(s[1].fused_score, 8.0);
    }

    #[test]
    fn zero_alpha_is_confidence_argmax() {
        let f = FusionParams {
            alpha: 0.0,
            ..Default::default()
        };
        let s = vec![
            f.score(0, 10.0, 12, outcome(-50.0, 3), true),
            f.score(1, 9.0, 12, outcome(-1.0, 3), true),
        ];
        assert_eq!(clr_select(&s).unwrap().candidate_index, 0);
    }

    #[test]
    fn ties_and_edge_cases() {
        let f = FusionParams::default();
        let s = vec![
            f.score(3, 1.0, 4, outcome(-1.0, 1), true),
            f.score(2, 1.0, 4, outcome(-1.0, 1), true),
        ];
        assert_eq!(clr_select(&s).unwrap().candidate_index, 2);
        assert_eq!(clr_select(&s[..1]).unwrap().candidate_index, 3);
        assert!(matches!(clr_select(&[]), Err(IcdError::EmptySelection)));
    }

    #[test]
    fn normalization_and_penalty() {
        let f = FusionParams {
            alpha: 2.0,
            normalize: true,
            framing_penalty: 100.0,
            unframed_confidence_only: false,
        };
        let s = f.score(0, 6.0, 12, outcome(-4.0, 4), true);
        assert!((s.fused_score - (0.5 - 2.0)).abs() < 1e-12);
        let mut trunc = outcome(-4.0, 4);
        trunc.status = DecodeStatus::Truncated;
        let t = f.score(0, 6.0, 12, trunc.clone(), true);
        assert!(!t.framed);
        assert!((t.fused_score - (0.5 - 2.0 - 100.0)).abs() < 1e-12);
        let g = FusionParams {
            unframed_confidence_only: true,
            ..f
        };
        assert!((g.score(0, 6.0, 12, trunc, true).fused_score - (0.5 - 100.0)).abs() < 1e-12);
    }

    #[test]
    fn unframed_pool_falls_back_to_confidence() {
        let f = FusionParams::default();
        let s = vec![
            f.score(0, 20.0, 24, outcome(-30.0, 6), false),
            f.score(1, 19.5, 24, outcome(-5.0, 2), false),
        ];
        assert_eq!(clr_select(&s).unwrap().candidate_index, 0);
        let framed = f.score(2, 18.0, 24, outcome(-40.0, 8), true);
        let mut all = s.clone();
        all.push(framed);
        assert_eq!(clr_select(&all).unwrap().candidate_index, 2);
    }
}
