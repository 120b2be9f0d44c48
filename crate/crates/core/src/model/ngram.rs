use super::{ModelError, ProbabilityModel, ProbabilityVector, TokenId, Vocabulary};

/// Back-off bigram model over token ids, frozen after training.
///
/// ```text
/// p(w | h) = (c(h, w) + κ · u(w)) / (c(h) + κ)
/// u(w)     = (c(w) + 1) / (N + τ)
/// ```
///
/// `u` is the add-one smoothed unigram, `κ` the back-off mass and `h` the last
/// context token. An empty context uses the end-of-text id as the
/// start-of-sentence history, so training treats every sentence as
/// `eot t_1 … t_n eot`.
#[derive(Debug, Clone)]
pub struct BigramModel {
    vocab: Vocabulary,
    kappa: f64,
    unigram: Vec<f64>,
    // per history: (next token, count), sorted by token
    successors: Vec<Vec<(TokenId, u32)>>,
    history_totals: Vec<u64>,
}

impl BigramModel {
    pub const DEFAULT_KAPPA: f64 = 1.0;

    /// Counts bigrams over `sentences`; each must be eot-free (eot is appended).
    pub fn train<'a, I>(vocab: Vocabulary, sentences: I, kappa: f64) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = &'a [TokenId]>,
    {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(ModelError::Distribution(format!("back-off mass {kappa} must be positive")));
        }
        let size = vocab.size();
        let eot = vocab.eot();
        let mut unigram_counts = vec![0u64; size];
        let mut dense: Vec<std::collections::BTreeMap<TokenId, u32>> = vec![Default::default(); size];
        let mut tokens_seen = 0u64;
        for sentence in sentences {
            vocab.validate_context(sentence)?;
            let mut history = eot;
            for &t in sentence.iter().chain(std::iter::once(&eot)) {
                *dense[history as usize].entry(t).or_insert(0) += 1;
                unigram_counts[t as usize] += 1;
                tokens_seen += 1;
                history = t;
            }
        }
        let denom = (tokens_seen + size as u64) as f64;
        let unigram = unigram_counts
            .iter()
            .map(|&c| (c + 1) as f64 / denom)
            .collect();
        let history_totals = dense
            .iter()
            .map(|m| m.values().map(|&c| c as u64).sum())
            .collect();
        let successors = dense
            .into_iter()
            .map(|m| m.into_iter().collect())
            .collect();
        Ok(Self {
            vocab,
            kappa,
            unigram,
            successors,
            history_totals,
        })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Raw bigram count `c(h, w)`.
    pub fn count(&self, history: TokenId, next: TokenId) -> u32 {
        let succ = &self.successors[history as usize];
        succ.binary_search_by_key(&next, |&(t, _)| t)
            .map(|i| succ[i].1)
            .unwrap_or(0)
    }
}

impl ProbabilityModel for BigramModel {
    fn vocab(&self) -> Vocabulary {
        self.vocab
    }

    fn next_distribution(&self, context: &[TokenId]) -> Result<ProbabilityVector, ModelError> {
        self.vocab.validate_context(context)?;
        let history = context.last().copied().unwrap_or(self.vocab.eot()) as usize;
        let denom = self.history_totals[history] as f64 + self.kappa;
        let mut p: Vec<f64> = self.unigram.iter().map(|u| self.kappa * u).collect();
        for &(t, c) in &self.successors[history] {
            p[t as usize] += c as f64;
        }
        p.iter_mut().for_each(|x| *x /= denom);
        ProbabilityVector::new(p)
    }
}
