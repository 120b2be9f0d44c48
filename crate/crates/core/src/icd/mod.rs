//! Receiver-side in-context decoding.
//!
//! Stage I ([`ccg`]) ranks bit-flip patterns of the channel decision by
//! aggregate reliability and keeps the top `L_c`. Stage II ([`ccs`]) picks
//! `L_s` of them with a Metropolis–Hastings chain over subsets. Stage III
//! ([`clr`]) source-decodes each pick under the known context and selects by
//! confidence plus weighted log-likelihood. [`icd_decode`] runs all three.

pub mod ccg;
pub mod ccs;
pub mod clr;
mod pipeline;

pub use ccg::{ccg_generate, Candidate, CandidatePool};
pub use ccs::{exact_kernel, mh_sample, mh_step, ExactKernel, SamplerParams, SubsetState};
pub use clr::{clr_select, FusionParams, ScoredReconstruction};
pub use pipeline::{icd_decode, IcdDiagnostics, IcdParams, IcdResult};

use crate::arith::CodecError;

#[derive(Debug, thiserror::Error)]
pub enum IcdError {
    #[error("cannot keep {l_c} candidates from a {k}-bit message")]
    Capacity { l_c: usize, k: usize },
    #[error("subset size {l_s} needs 1 ≤ L_s ≤ L_c − 2 with L_c = {l_c}")]
    SubsetSize { l_s: usize, l_c: usize },
    #[error("equal-confidence class exceeds {0} patterns")]
    TieClassTooLarge(usize),
    #[error("state space of {0} subsets is too large to enumerate")]
    StateSpaceTooLarge(u128),
    #[error("no reconstructions to select from")]
    EmptySelection,
    #[error("invalid sampler parameters: {0}")]
    Params(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error(transparent)]
    Codec(#[from] CodecError),
}
