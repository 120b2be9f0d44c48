//! Soft-output channel decoders.
//!
//! A decoder maps one received block to a hard codeword decision and a
//! per-bit reliability `ρ_d ∈ [0, 1]`, the decoder's confidence that bit `d`
//! is correct. [`BpDecoder`] is the built-in sum-product implementation;
//! [`external`] reads disturbance estimates produced by another program.

mod bp;
pub mod external;

pub use bp::{BpDecoder, BpParams};

use crate::channel::SoftObservation;
use crate::code::LinearBlockCode;

#[derive(Debug, Clone, PartialEq)]
pub struct BlockDecodeResult {
    pub x_hat_b: Vec<u8>,
    pub rho: Vec<f64>,
    /// Zero syndrome reached.
    pub converged: bool,
    pub iterations: usize,
}

pub trait ReliabilityDecoder: Send + Sync {
    fn decode_block(&self, code: &LinearBlockCode, obs: &SoftObservation) -> BlockDecodeResult;
}

/// Info bits and their reliabilities: the first `k` positions of a
/// systematic codeword.
pub fn extract_info(result: &BlockDecodeResult, code: &LinearBlockCode) -> (Vec<u8>, Vec<f64>) {
    let k = code.k();
    (result.x_hat_b[..k].to_vec(), result.rho[..k].to_vec())
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
