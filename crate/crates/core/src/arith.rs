//! Finite-precision integer arithmetic coding under any [`ProbabilityModel`].
//!
//! The coder keeps `precision`-bit `low`/`high` registers and renormalizes on
//! half and quarter boundaries, carrying straddle (E3) scalings as pending
//! bits. Messages are self-delimiting: the token sequence ends with the
//! model's end-of-text token and the encoder flushes two disambiguation bits.
//!
//! The decoder is total. Reads past the end of the stream return zero bits;
//! decoding stops at end-of-text ([`DecodeStatus::Completed`]), at the token
//! budget, or once the value register holds nothing but padding
//! ([`DecodeStatus::Truncated`]). A valid stream of precision `P` never needs
//! more than `P - 2` padding bits.

use thiserror::Error;

use crate::bits::BitStream;
use crate::model::{
    step_log_prob, FrequencyTable, LikelihoodMode, ModelError, ProbabilityModel, TokenId,
    DEFAULT_F_BITS,
};

#[derive(Debug, Error)]
pub enum CodecError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("token sequence must end with the end-of-text token")]
    MissingEot,
    #[error("token {0} has an empty interval")]
    EmptyInterval(TokenId),
    #[error("invalid codec configuration: {0}")]
    Config(String),
}

/// Longest source sentence, in words, the default budget is sized for.
pub const MAX_SOURCE_WORDS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodecConfig {
    /// Register width in bits.
    pub precision: u32,
    /// Frequency-table precision; tables sum to `2^f_bits`.
    pub f_bits: u32,
    /// Decode budget in tokens, end-of-text included.
    pub max_tokens: usize,
    pub likelihood: LikelihoodMode,
}

impl Default for CodecConfig {
    fn default() -> Self {
        Self {
            precision: 31,
            f_bits: DEFAULT_F_BITS,
            max_tokens: 2 * MAX_SOURCE_WORDS + 8,
            likelihood: LikelihoodMode::Quantized,
        }
    }
}

impl CodecConfig {
    pub fn validate(&self) -> Result<(), CodecError> {
        if !(4..=32).contains(&self.precision) {
            return Err(CodecError::Config(format!(
                "precision {} outside 4..=32",
                self.precision
            )));
        }
        if self.precision < self.f_bits + 2 {
            return Err(CodecError::Config(format!(
                "precision {} must be at least f_bits + 2 = {}",
                self.precision,
                self.f_bits + 2
            )));
        }
        if self.max_tokens == 0 {
            return Err(CodecError::Config("max_tokens must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum DecodeStatus {
    /// The final token is end-of-text.
    Completed,
    /// Stopped by the token budget or by exhausting the stream.
    Truncated,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DecodeOutcome {
    pub tokens: Vec<TokenId>,
    /// Natural-log likelihood accumulated along the decode path.
    pub log_likelihood: f64,
    pub status: DecodeStatus,
    /// Zero bits read past the end of the stream.
    pub padding_bits: usize,
}

impl DecodeOutcome {
    /// Tokens with a trailing end-of-text removed.
    pub fn content(&self, eot: TokenId) -> &[TokenId] {
        match self.tokens.split_last() {
            Some((&last, rest)) if last == eot => rest,
            _ => &self.tokens,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Registers {
    half: u64,
    quarter: u64,
    max: u64,
}

impl Registers {
    fn new(precision: u32) -> Self {
        let full = 1u64 << precision;
        Self {
            half: full >> 1,
            quarter: full >> 2,
            max: full - 1,
        }
    }
}

/// Narrows `[low, high]` to the sub-interval of `token`.
fn narrow(low: &mut u64, high: &mut u64, table: &FrequencyTable, token: TokenId) {
    let range = *high - *low + 1;
    let total = table.total();
    let (c_lo, c_hi) = table.interval(token);
    *high = *low + range * c_hi / total - 1;
    *low += range * c_lo / total;
}

struct BitSink {
    out: BitStream,
    pending: usize,
}

impl BitSink {
    fn emit(&mut self, bit: u8) {
        self.out.push(bit);
        for _ in 0..self.pending {
            self.out.push(bit ^ 1);
        }
        self.pending = 0;
    }
}

/// Encodes `tokens` (which must end with end-of-text) conditioned on
/// `context_prefix`.
pub fn encode(
    model: &dyn ProbabilityModel,
    tokens: &[TokenId],
    context_prefix: &[TokenId],
    cfg: &CodecConfig,
) -> Result<BitStream, CodecError> {
    cfg.validate()?;
    let vocab = model.vocab();
    vocab.validate_context(context_prefix)?;
    vocab.validate_sequence(tokens)?;
    if tokens.last() != Some(&vocab.eot()) {
        return Err(CodecError::MissingEot);
    }
    let reg = Registers::new(cfg.precision);
    let (mut low, mut high) = (0u64, reg.max);
    let mut sink = BitSink {
        out: BitStream::new(),
        pending: 0,
    };
    let mut context = context_prefix.to_vec();
    for &t in tokens {
        let table = model.next_frequencies(&context, cfg.f_bits)?;
        let (c_lo, c_hi) = table.interval(t);
        if c_lo == c_hi {
            return Err(CodecError::EmptyInterval(t));
        }
        narrow(&mut low, &mut high, &table, t);
        loop {
            if high < reg.half {
                sink.emit(0);
            } else if low >= reg.half {
                sink.emit(1);
                low -= reg.half;
                high -= reg.half;
            } else if low >= reg.quarter && high < reg.half + reg.quarter {
                sink.pending += 1;
                low -= reg.quarter;
                high -= reg.quarter;
            } else {
                break;
            }
            low <<= 1;
            high = (high << 1) | 1;
        }
        context.push(t);
    }
    // low < half <= high here; one more bit plus the pending run pins a point
    // (quarter or half) inside the final interval when followed by zeros.
    sink.pending += 1;
    if low < reg.quarter {
        sink.emit(0);
    } else {
        sink.emit(1);
    }
    Ok(sink.out)
}

struct BitSource<'a> {
    bits: &'a [u8],
    pos: usize,
}

impl BitSource<'_> {
    fn next(&mut self) -> u64 {
        let b = self.bits.get(self.pos).copied().unwrap_or(0);
        self.pos += 1;
        b as u64
    }

    fn padding(&self) -> usize {
        self.pos.saturating_sub(self.bits.len())
    }
}

/// Decodes an arbitrary bit pattern. Never fails on corrupted input; errors
/// only come from the model or an invalid configuration.
pub fn decode(
    model: &dyn ProbabilityModel,
    bits: &BitStream,
    context_prefix: &[TokenId],
    cfg: &CodecConfig,
) -> Result<DecodeOutcome, CodecError> {
    cfg.validate()?;
    let vocab = model.vocab();
    vocab.validate_context(context_prefix)?;
    let eot = vocab.eot();
    let reg = Registers::new(cfg.precision);
    let mut src = BitSource {
        bits: bits.as_slice(),
        pos: 0,
    };
    let mut value = 0u64;
    for _ in 0..cfg.precision {
        value = (value << 1) | src.next();
    }
    let (mut low, mut high) = (0u64, reg.max);
    let mut context = context_prefix.to_vec();
    let mut tokens = Vec::new();
    let mut log_likelihood = 0.0;

    let status = loop {
        if tokens.len() >= cfg.max_tokens || src.padding() >= cfg.precision as usize {
            break DecodeStatus::Truncated;
        }
        let table = model.next_frequencies(&context, cfg.f_bits)?;
        let range = high - low + 1;
        debug_assert!(low <= value && value <= high);
        let target = (((value - low + 1) * table.total() - 1) / range).min(table.total() - 1);
        let t = table.find(target);
        narrow(&mut low, &mut high, &table, t);
        log_likelihood += match cfg.likelihood {
            LikelihoodMode::Quantized => table.ln_probability(t),
            LikelihoodMode::Raw => step_log_prob(model, &context, t, cfg.likelihood, cfg.f_bits)?,
        };
        tokens.push(t);
        if t == eot {
            break DecodeStatus::Completed;
        }
        context.push(t);
        loop {
            if high < reg.half {
            } else if low >= reg.half {
                low -= reg.half;
                high -= reg.half;
                value -= reg.half;
            } else if low >= reg.quarter && high < reg.half + reg.quarter {
                low -= reg.quarter;
                high -= reg.quarter;
                value -= reg.quarter;
            } else {
                break;
            }
            low <<= 1;
            high = (high << 1) | 1;
            value = (value << 1) | src.next();
        }
    };

    Ok(DecodeOutcome {
        tokens,
        log_likelihood,
        status,
        padding_bits: src.padding(),
    })
}
