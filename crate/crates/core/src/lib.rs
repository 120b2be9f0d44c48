//! Building blocks for a separate source/channel coding text link with
//! receiver-side in-context decoding.
//!
//! The transmit chain is: tokenize, arithmetic-encode under a probability
//! model ([`arith`]), segment and LDPC-encode ([`code`]), BPSK-modulate and pass
//! through an AWGN or Rayleigh channel ([`channel`]). The receiver runs a
//! soft-output channel decoder ([`decoder`]) and hands the info bits with their
//! reliabilities to the candidate pipeline in [`icd`].

pub mod arith;
pub mod bits;
pub mod channel;
pub mod code;
pub mod decoder;
pub mod icd;
pub mod metrics;
pub mod model;

pub use arith::{CodecConfig, DecodeOutcome, DecodeStatus};
pub use bits::BitStream;
pub use model::{ProbabilityModel, TokenId};
