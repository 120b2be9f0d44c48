//! Probability models that drive arithmetic coding and likelihood scoring.
//!
//! A model maps a context (the tokens seen so far) to a distribution over the
//! next token. The arithmetic codec never sees floats: it asks for a
//! [`FrequencyTable`], an integer quantization whose counts sum to
//! `2^f_bits` and are all at least one.

mod ngram;
mod remote;
mod tokenizer;

pub use ngram::BigramModel;
pub use remote::{BridgeRequest, BridgeResponse, RemoteModel, BRIDGE_ENV};
pub use tokenizer::WordTokenizer;

use thiserror::Error;

/// Token identifier, contiguous from zero.
pub type TokenId = u32;

/// Default frequency precision used by the codec.
pub const DEFAULT_F_BITS: u32 = 16;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("token id {id} is outside the vocabulary of size {size}")]
    InvalidToken { id: TokenId, size: usize },
    #[error("end-of-text may only appear as the final token (found at position {position})")]
    MisplacedEot { position: usize },
    #[error("vocabulary of size {size} does not fit in 2^{f_bits} with a floor of one count per token")]
    Capacity { size: usize, f_bits: u32 },
    #[error("frequency precision {0} is outside 2..=31")]
    FBits(u32),
    #[error("invalid probability vector: {0}")]
    Distribution(String),
    #[error("invalid vocabulary: {0}")]
    Vocabulary(String),
    #[error("word {0:?} is not in the tokenizer vocabulary")]
    UnknownWord(String),
    #[error("bridge protocol error: {0}")]
    Bridge(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Vocabulary shape: ids `0..size`, with one reserved end-of-text id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Vocabulary {
    size: usize,
    eot: TokenId,
}

impl Vocabulary {
    pub fn new(size: usize, eot: TokenId) -> Result<Self, ModelError> {
        if size < 2 {
            return Err(ModelError::Vocabulary(format!("size {size} < 2")));
        }
        if eot as usize >= size {
            return Err(ModelError::Vocabulary(format!(
                "eot id {eot} not below size {size}"
            )));
        }
        Ok(Self { size, eot })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn eot(&self) -> TokenId {
        self.eot
    }

    /// Checks ids are in range and that eot, if present, is the last token.
    pub fn validate_sequence(&self, tokens: &[TokenId]) -> Result<(), ModelError> {
        for (i, &t) in tokens.iter().enumerate() {
            if t as usize >= self.size {
                return Err(ModelError::InvalidToken {
                    id: t,
                    size: self.size,
                });
            }
            if t == self.eot && i + 1 != tokens.len() {
                return Err(ModelError::MisplacedEot { position: i });
            }
        }
        Ok(())
    }

    /// Contexts additionally may not contain eot at all.
    pub fn validate_context(&self, context: &[TokenId]) -> Result<(), ModelError> {
        for (i, &t) in context.iter().enumerate() {
            if t as usize >= self.size {
                return Err(ModelError::InvalidToken {
                    id: t,
                    size: self.size,
                });
            }
            if t == self.eot {
                return Err(ModelError::MisplacedEot { position: i });
            }
        }
        Ok(())
    }
}

/// Per-token probabilities, strictly positive and summing to one within 1e-9.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn new(p: Vec<f64>) -> Result<Self, ModelError> {
        if p.len() < 2 {
            return Err(ModelError::Distribution(format!("length {} < 2", p.len())));
        }
        if let Some((i, v)) = p.iter().enumerate().find(|(_, v)| !(**v > 0.0) || !v.is_finite()) {
            return Err(ModelError::Distribution(format!("entry {i} = {v}")));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(ModelError::Distribution(format!("sums to {sum}")));
        }
        Ok(Self(p))
    }

    pub fn uniform(size: usize) -> Self {
        Self(vec![1.0 / size as f64; size])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Integer frequencies with `total == 2^f_bits` and every count ≥ 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyTable {
    counts: Vec<u32>,
    // cumulative[i] = sum of counts[..i]; length counts.len() + 1
    cumulative: Vec<u64>,
    f_bits: u32,
}

impl FrequencyTable {
    /// Validates externally produced counts (e.g. from the bridge).
    pub fn from_counts(counts: Vec<u32>, f_bits: u32) -> Result<Self, ModelError> {
        check_f_bits(f_bits)?;
        if counts.len() < 2 {
            return Err(ModelError::Distribution("fewer than two counts".into()));
        }
        if let Some(i) = counts.iter().position(|&c| c == 0) {
            return Err(ModelError::Distribution(format!("count {i} is zero")));
        }
        let table = Self::build(counts, f_bits);
        if table.total() != 1u64 << f_bits {
            return Err(ModelError::Distribution(format!(
                "counts sum to {} instead of 2^{f_bits}",
                table.total()
            )));
        }
        Ok(table)
    }

    fn build(counts: Vec<u32>, f_bits: u32) -> Self {
        let mut cumulative = Vec::with_capacity(counts.len() + 1);
        let mut acc = 0u64;
        cumulative.push(0);
        for &c in &counts {
            acc += c as u64;
            cumulative.push(acc);
        }
        Self {
            counts,
            cumulative,
            f_bits,
        }
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn f_bits(&self) -> u32 {
        self.f_bits
    }

    pub fn total(&self) -> u64 {
        *self.cumulative.last().expect("cumulative is never empty")
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Half-open cumulative interval `[low, high)` of a token.
    pub fn interval(&self, token: TokenId) -> (u64, u64) {
        let t = token as usize;
        (self.cumulative[t], self.cumulative[t + 1])
    }

    /// Token whose interval contains `target` (`0 <= target < total`).
    pub fn find(&self, target: u64) -> TokenId {
        debug_assert!(target < self.total());
        // first index with cumulative > target, minus one
        let idx = self.cumulative.partition_point(|&c| c <= target);
        (idx - 1) as TokenId
    }

    pub fn probability(&self, token: TokenId) -> f64 {
        self.counts[token as usize] as f64 / self.total() as f64
    }

    pub fn ln_probability(&self, token: TokenId) -> f64 {
        self.probability(token).ln()
    }
}

fn check_f_bits(f_bits: u32) -> Result<(), ModelError> {
    if (2..=31).contains(&f_bits) {
        Ok(())
    } else {
        Err(ModelError::FBits(f_bits))
    }
}

/// Quantizes `p` to integer counts summing to `2^f_bits`.
///
/// Every token first receives one count. The remaining `2^f_bits - τ` counts
/// are apportioned by largest remainder: token `i` gets
/// `floor(q_i · (2^f_bits - τ))` where `q_i = p_i / Σp`, and the leftover
/// units go to the largest fractional parts, lower id first on ties.
pub fn quantize_distribution(
    p: &ProbabilityVector,
    f_bits: u32,
) -> Result<FrequencyTable, ModelError> {
    check_f_bits(f_bits)?;
    let size = p.len();
    let total = 1u64 << f_bits;
    if 2 * size as u64 > total {
        return Err(ModelError::Capacity { size, f_bits });
    }
    let spare = total - size as u64;
    let sum: f64 = p.as_slice().iter().sum();

    let mut counts = vec![1u32; size];
    let mut remainders = Vec::with_capacity(size);
    let mut assigned = 0u64;
    for (i, &pi) in p.as_slice().iter().enumerate() {
        let x = pi / sum * spare as f64;
        let floor = x.floor();
        counts[i] += floor as u32;
        assigned += floor as u64;
        remainders.push(x - floor);
    }

    let mut order: Vec<usize> = (0..size).collect();
    let by_remainder = |a: &usize, b: &usize| {
        remainders[*b]
            .total_cmp(&remainders[*a])
            .then_with(|| a.cmp(b))
    };
    if assigned <= spare {
        let leftover = (spare - assigned) as usize;
        if leftover > 0 {
            if leftover < size {
                order.select_nth_unstable_by(leftover - 1, by_remainder);
            }
            for &i in &order[..leftover.min(size)] {
                counts[i] += 1;
            }
        }
    } else {
        // Floating-point overshoot; take units back from the smallest remainders.
        let mut excess = assigned - spare;
        order.sort_by(|a, b| by_remainder(b, a));
        for &i in order.iter().cycle() {
            if excess == 0 {
                break;
            }
            if counts[i] > 1 {
                counts[i] -= 1;
                excess -= 1;
            }
        }
    }
    Ok(FrequencyTable::build(counts, f_bits))
}

/// Contract shared by every probability model.
///
/// Implementations must be deterministic: the same context always yields the
/// bit-identical distribution.
pub trait ProbabilityModel: Send + Sync {
    fn vocab(&self) -> Vocabulary;

    fn next_distribution(&self, context: &[TokenId]) -> Result<ProbabilityVector, ModelError>;

    /// Quantized distribution used by the codec.
    fn next_frequencies(
        &self,
        context: &[TokenId],
        f_bits: u32,
    ) -> Result<FrequencyTable, ModelError> {
        quantize_distribution(&self.next_distribution(context)?, f_bits)
    }
}

impl<M: ProbabilityModel + ?Sized> ProbabilityModel for &M {
    fn vocab(&self) -> Vocabulary {
        (**self).vocab()
    }
    fn next_distribution(&self, context: &[TokenId]) -> Result<ProbabilityVector, ModelError> {
        (**self).next_distribution(context)
    }
    fn next_frequencies(
        &self,
        context: &[TokenId],
        f_bits: u32,
    ) -> Result<FrequencyTable, ModelError> {
        (**self).next_frequencies(context, f_bits)
    }
}

/// Which probabilities a log-likelihood is accumulated from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LikelihoodMode {
    /// The integer tables the codec uses; matches the decode path exactly.
    #[default]
    Quantized,
    /// The model's unquantized probabilities.
    Raw,
}

/// Natural-log likelihood of one next-token step.
pub(crate) fn step_log_prob(
    model: &dyn ProbabilityModel,
    context: &[TokenId],
    token: TokenId,
    mode: LikelihoodMode,
    f_bits: u32,
) -> Result<f64, ModelError> {
    match mode {
        LikelihoodMode::Quantized => Ok(model
            .next_frequencies(context, f_bits)?
            .ln_probability(token)),
        LikelihoodMode::Raw => Ok(model.next_distribution(context)?.as_slice()[token as usize].ln()),
    }
}

/// `Σ_k ln p(t_k | prefix ∘ t_{<k})`.
pub fn sequence_log_likelihood(
    model: &dyn ProbabilityModel,
    tokens: &[TokenId],
    context_prefix: &[TokenId],
    mode: LikelihoodMode,
    f_bits: u32,
) -> Result<f64, ModelError> {
    let vocab = model.vocab();
    vocab.validate_context(context_prefix)?;
    vocab.validate_sequence(tokens)?;
    let mut context = context_prefix.to_vec();
    let mut total = 0.0;
    for &t in tokens {
        total += step_log_prob(model, &context, t, mode, f_bits)?;
        context.push(t);
    }
    Ok(total)
}

/// Every token equally likely regardless of context.
#[derive(Debug, Clone, Copy)]
pub struct UniformModel {
    vocab: Vocabulary,
}

impl UniformModel {
    pub fn new(vocab: Vocabulary) -> Self {
        Self { vocab }
    }
}

impl ProbabilityModel for UniformModel {
    fn vocab(&self) -> Vocabulary {
        self.vocab
    }

    fn next_distribution(&self, context: &[TokenId]) -> Result<ProbabilityVector, ModelError> {
        self.vocab.validate_context(context)?;
        Ok(ProbabilityVector::uniform(self.vocab.size()))
    }
}

/// A model that always returns the same fixed distribution; handy in tests.
#[derive(Debug, Clone)]
pub struct FixedModel {
    vocab: Vocabulary,
    p: ProbabilityVector,
}

impl FixedModel {
    pub fn new(vocab: Vocabulary, p: ProbabilityVector) -> Result<Self, ModelError> {
        if p.len() != vocab.size() {
            return Err(ModelError::Distribution(format!(
                "length {} does not match vocabulary size {}",
                p.len(),
                vocab.size()
            )));
        }
        Ok(Self { vocab, p })
    }
}

impl ProbabilityModel for FixedModel {
    fn vocab(&self) -> Vocabulary {
        self.vocab
    }

    fn next_distribution(&self, context: &[TokenId]) -> Result<ProbabilityVector, ModelError> {
        self.vocab.validate_context(context)?;
        Ok(self.p.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pv(p: &[f64]) -> ProbabilityVector {
        ProbabilityVector::new(p.to_vec()).unwrap()
    }

    /// Straightforward apportionment: sort everything, hand out leftovers.
    fn apportion_oracle(p: &[f64], f_bits: u32) -> Vec<u32> {
        let total = 1u64 << f_bits;
        let spare = (total - p.len() as u64) as f64;
        let sum: f64 = p.iter().sum();
        let shares: Vec<f64> = p.iter().map(|x| x / sum * spare).collect();
        let mut counts: Vec<u32> = shares.iter().map(|s| 1 + s.floor() as u32).collect();
        let used: u64 = counts.iter().map(|&c| c as u64).sum();
        let mut idx: Vec<usize> = (0..p.len()).collect();
        idx.sort_by(|&a, &b| {
            let ra = shares[a] - shares[a].floor();
            let rb = shares[b] - shares[b].floor();
            rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
        });
        for &i in idx.iter().take((total - used) as usize) {
            counts[i] += 1;
        }
        counts
    }

    #[test]
    fn uniform_model_is_flat() {
        let m = UniformModel::new(Vocabulary::new(5, 4).unwrap());
        let p = m.next_distribution(&[0, 1, 3]).unwrap();
        assert!(p.as_slice().iter().all(|&x| x == 0.2));
    }

    #[test]
    fn rejects_out_of_range_context() {
        let m = UniformModel::new(Vocabulary::new(5, 4).unwrap());
        assert!(matches!(
            m.next_distribution(&[7]),
            Err(ModelError::InvalidToken { id: 7, size: 5 })
        ));
    }

    #[test]
    fn quantize_symmetric() {
        let t = quantize_distribution(&pv(&[0.5, 0.5]), 4).unwrap();
        assert_eq!(t.counts(), &[8, 8]);
    }

    #[test]
    fn quantize_floor_of_one() {
        let t = quantize_distribution(&pv(&[0.999, 0.001]), 4).unwrap();
        assert_eq!(t.counts(), &[15, 1]);
    }

    #[test]
    fn quantize_three_way_matches_oracle() {
        let p = [0.6, 0.3, 0.1];
        let t = quantize_distribution(&pv(&p), 8).unwrap();
        let expected = apportion_oracle(&p, 8);
        // 253 spare: 151.8, 75.9, 25.3 -> floors 151, 75, 25; two leftovers go to ids 1 then 0
        assert_eq!(expected, vec![153, 77, 26]);
        assert_eq!(t.counts(), expected.as_slice());
        assert_eq!(t.total(), 256);
    }

    #[test]
    fn quantize_capacity_error() {
        let p = ProbabilityVector::uniform(3);
        assert!(matches!(
            quantize_distribution(&p, 2),
            Err(ModelError::Capacity { size: 3, f_bits: 2 })
        ));
        assert!(matches!(quantize_distribution(&p, 1), Err(ModelError::FBits(1))));
    }

    #[test]
    fn find_inverts_interval() {
        let t = quantize_distribution(&pv(&[0.6, 0.3, 0.1]), 8).unwrap();
        for tok in 0..3 {
            let (lo, hi) = t.interval(tok);
            for target in lo..hi {
                assert_eq!(t.find(target), tok);
            }
        }
    }

    #[test]
    fn from_counts_validates() {
        assert!(FrequencyTable::from_counts(vec![8, 8], 4).is_ok());
        assert!(FrequencyTable::from_counts(vec![9, 8], 4).is_err());
        assert!(FrequencyTable::from_counts(vec![16, 0], 4).is_err());
    }

    #[test]
    fn uniform_log_likelihood() {
        let m = UniformModel::new(Vocabulary::new(4, 3).unwrap());
        for mode in [LikelihoodMode::Quantized, LikelihoodMode::Raw] {
            let ll = sequence_log_likelihood(&m, &[0, 1, 2], &[], mode, 16).unwrap();
            assert!((ll - 3.0 * (0.25f64).ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_distribution_gives_zero_log_likelihood() {
        let v = Vocabulary::new(2, 1).unwrap();
        let m = FixedModel::new(v, pv(&[1.0 - 1e-15, 1e-15])).unwrap();
        let ll = sequence_log_likelihood(&m, &[0], &[], LikelihoodMode::Raw, 16).unwrap();
        assert!(ll.abs() < 1e-12);
        // quantized: the floor of one count is the only loss
        let ll = sequence_log_likelihood(&m, &[0], &[], LikelihoodMode::Quantized, 30).unwrap();
        assert!(ll.abs() < 1e-8);
    }

    #[test]
    fn misplaced_eot_rejected() {
        let v = Vocabulary::new(4, 3).unwrap();
        assert!(v.validate_sequence(&[0, 3]).is_ok());
        assert!(matches!(
            v.validate_sequence(&[3, 0]),
            Err(ModelError::MisplacedEot { position: 0 })
        ));
        assert!(v.validate_context(&[3]).is_err());
    }

    fn prob_vec() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(1e-6f64..1.0, 2..40).prop_map(|mut v| {
            let s: f64 = v.iter().sum();
            v.iter_mut().for_each(|x| *x /= s);
            v
        })
    }

    proptest! {
        #[test]
        fn quantization_is_sound(p in prob_vec(), f_bits in 8u32..=20) {
            let size = p.len();
            let t = quantize_distribution(&ProbabilityVector::new(p.clone()).unwrap(), f_bits).unwrap();
            prop_assert_eq!(t.total(), 1u64 << f_bits);
            prop_assert!(t.counts().iter().all(|&c| c >= 1));
            let bound = size as f64 / (1u64 << f_bits) as f64;
            for (i, &pi) in p.iter().enumerate() {
                prop_assert!((t.probability(i as TokenId) - pi).abs() < bound);
            }
            let oracle = apportion_oracle(&p, f_bits);
            prop_assert_eq!(t.counts(), oracle.as_slice());
        }
    }
}
