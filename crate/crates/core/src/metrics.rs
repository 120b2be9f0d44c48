//! Text and bit fidelity metrics.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

/// Floor for zero n-gram match counts.
pub const BLEU_EPSILON: f64 = 1e-9;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum MetricError {
    #[error("n-gram order must be in 1..=4, got {0}")]
    Order(usize),
    #[error("length mismatch: {0} vs {1}")]
    Length(usize, usize),
    #[error("histogram needs at least one bin over a range inside [0, 1]")]
    Bins,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BleuScore {
    pub value: f64,
    pub n: usize,
}

fn ngram_counts<T: AsRef<str>>(tokens: &[T], n: usize) -> HashMap<Vec<&str>, usize> {
    let mut counts = HashMap::new();
    for w in tokens.windows(n) {
        *counts.entry(w.iter().map(AsRef::as_ref).collect()).or_insert(0) += 1;
    }
    counts
}

/// Sentence BLEU with uniform weights, brevity penalty and ε-smoothing.
///
/// The order is capped at the shorter sentence length, so a sentence always
/// scores 1 against itself. An empty hypothesis scores 0.
pub fn bleu<T: AsRef<str>>(reference: &[T], hypothesis: &[T], n: usize) -> Result<BleuScore, MetricError> {
    if !(1..=4).contains(&n) {
        return Err(MetricError::Order(n));
    }
    let (r, h) = (reference.len(), hypothesis.len());
    if h == 0 || r == 0 {
        return Ok(BleuScore { value: 0.0, n });
    }
    let order = n.min(r).min(h);
    let mut log_sum = 0.0;
    for k in 1..=order {
        let hyp = ngram_counts(hypothesis, k);
        let refc = ngram_counts(reference, k);
        let matched: usize = hyp
            .iter()
            .map(|(g, &c)| c.min(refc.get(g).copied().unwrap_or(0)))
            .sum();
        let total = h + 1 - k;
        let m = if matched == 0 { BLEU_EPSILON } else { matched as f64 };
        log_sum += (m / total as f64).ln();
    }
    let bp = if h > r { 1.0 } else { (1.0 - r as f64 / h as f64).exp() };
    let value = (bp * (log_sum / order as f64).exp()).clamp(0.0, 1.0);
    Ok(BleuScore { value, n })
}

/// Whitespace-tokenizing convenience wrapper.
pub fn bleu_str(reference: &str, hypothesis: &str, n: usize) -> Result<f64, MetricError> {
    let r: Vec<&str> = reference.split_whitespace().collect();
    let h: Vec<&str> = hypothesis.split_whitespace().collect();
    Ok(bleu(&r, &h, n)?.value)
}

pub fn bit_error_rate(a: &[u8], b: &[u8]) -> Result<f64, MetricError> {
    if a.len() != b.len() {
        return Err(MetricError::Length(a.len(), b.len()));
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    Ok(crate::bits::hamming(a, b) as f64 / a.len() as f64)
}

pub fn edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Word-level edit distance over reference length. An empty reference gives
/// 0 against an empty hypothesis and 1 otherwise.
pub fn word_error_rate<T: PartialEq>(reference: &[T], hypothesis: &[T]) -> f64 {
    if reference.is_empty() {
        return if hypothesis.is_empty() { 0.0 } else { 1.0 };
    }
    edit_distance(reference, hypothesis) as f64 / reference.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceHistogram {
    pub bin_edges: Vec<f64>,
    pub correct_counts: Vec<u64>,
    pub error_counts: Vec<u64>,
}

impl ConfidenceHistogram {
    pub fn new(num_bins: usize) -> Result<Self, MetricError> {
        Self::with_range(0.0, 1.0, num_bins)
    }

    /// Equal-width bins over `[lo, hi]`.
    pub fn with_range(lo: f64, hi: f64, num_bins: usize) -> Result<Self, MetricError> {
        if num_bins == 0 || !(0.0..1.0).contains(&lo) || !(lo < hi && hi <= 1.0) {
            return Err(MetricError::Bins);
        }
        Ok(Self {
            bin_edges: (0..=num_bins)
                .map(|i| lo + (hi - lo) * i as f64 / num_bins as f64)
                .collect(),
            correct_counts: vec![0; num_bins],
            error_counts: vec![0; num_bins],
        })
    }

    pub fn num_bins(&self) -> usize {
        self.correct_counts.len()
    }

    /// Bin of `rho`; the upper edge lands in the last bin, values outside
    /// the range are clamped.
    pub fn bin_of(&self, rho: f64) -> usize {
        let b = self.num_bins();
        let (lo, hi) = (self.bin_edges[0], self.bin_edges[b]);
        let x = (rho.clamp(lo, hi) - lo) / (hi - lo);
        ((x * b as f64) as usize).min(b - 1)
    }

    pub fn add(&mut self, rho: &[f64], m_hat: &[u8], m_true: &[u8]) -> Result<(), MetricError> {
        if rho.len() != m_hat.len() || m_hat.len() != m_true.len() {
            return Err(MetricError::Length(rho.len(), m_true.len()));
        }
        for ((&r, &a), &b) in rho.iter().zip(m_hat).zip(m_true) {
            let bin = self.bin_of(r);
            if a == b {
                self.correct_counts[bin] += 1;
            } else {
                self.error_counts[bin] += 1;
            }
        }
        Ok(())
    }

    pub fn merge(&mut self, other: &ConfidenceHistogram) -> Result<(), MetricError> {
        if other.bin_edges != self.bin_edges {
            return Err(MetricError::Length(self.num_bins(), other.num_bins()));
        }
        for i in 0..self.num_bins() {
            self.correct_counts[i] += other.correct_counts[i];
            self.error_counts[i] += other.error_counts[i];
        }
        Ok(())
    }

    pub fn total(&self) -> u64 {
        self.correct_counts.iter().chain(&self.error_counts).sum()
    }

    pub fn population(&self, bin: usize) -> u64 {
        self.correct_counts[bin] + self.error_counts[bin]
    }

    /// Fraction of correct bits per bin; `None` for empty bins.
    pub fn correct_rate(&self) -> Vec<Option<f64>> {
        (0..self.num_bins())
            .map(|i| {
                let p = self.population(i);
                (p > 0).then(|| self.correct_counts[i] as f64 / p as f64)
            })
            .collect()
    }
}

pub fn confidence_histogram(
    rho: &[f64],
    m_hat: &[u8],
    m_true: &[u8],
    num_bins: usize,
) -> Result<ConfidenceHistogram, MetricError> {
    let mut h = ConfidenceHistogram::new(num_bins)?;
    h.add(rho, m_hat, m_true)?;
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(s: &str) -> Vec<&str> {
        s.split_whitespace().collect()
    }

    #[test]
    fn bleu_identity_and_short_sentences() {
        for s in ["a", "a b", "the cat sat on the mat today"] {
            for n in 1..=4 {
                assert!((bleu(&words(s), &words(s), n).unwrap().value - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bleu_hand_counts() {
        let r = bleu(&words("a b c d"), &words("a b c e"), 1).unwrap();
        assert!((r.value - 0.75).abs() < 1e-12);
        // bigrams: ab, bc match, ce not → 2/3; geometric mean with 3/4
        let r = bleu(&words("a b c d"), &words("a b c e"), 2).unwrap();
        assert!((r.value - (0.75f64 * 2.0 / 3.0).sqrt()).abs() < 1e-12);
        let disjoint = bleu(&words("a b c d"), &words("w x y z"), 4).unwrap();
        assert!(disjoint.value < 1e-8);
        assert_eq!(bleu::<&str>(&words("a"), &[], 4).unwrap().value, 0.0);
        assert!(bleu(&words("a"), &words("a"), 5).is_err());
    }

    #[test]
    fn brevity_penalty() {
        let r = bleu(&words("a b c d"), &words("a b"), 1).unwrap();
        assert!((r.value - (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn error_rates() {
        assert_eq!(bit_error_rate(&[0, 1, 1], &[0, 1, 1]).unwrap(), 0.0);
        assert_eq!(bit_error_rate(&[0, 1, 1], &[1, 0, 0]).unwrap(), 1.0);
        assert!(bit_error_rate(&[0], &[0, 1]).is_err());
        let r = words("a b c d e f g h i j");
        // one substitution, one deletion, one insertion
        let h = words("a x c d e f h i j k");
        assert_eq!(edit_distance(&r, &h), 3);
        assert!((word_error_rate(&r, &h) - 0.3).abs() < 1e-12);
        assert_eq!(word_error_rate(&r, &r), 0.0);
    }

    #[test]
    fn histogram_binning() {
        let h = confidence_histogram(&[0.95; 5], &[0; 5], &[0; 5], 10).unwrap();
        assert_eq!(h.correct_counts[9], 5);
        assert_eq!(h.total(), 5);
        assert!(h.error_counts.iter().all(|&c| c == 0));
        let h = confidence_histogram(&[0.0, 0.5, 1.0, 0.55], &[0, 1, 0, 1], &[0, 0, 0, 1], 2).unwrap();
        assert_eq!(h.correct_counts, vec![1, 2]);
        assert_eq!(h.error_counts, vec![0, 1]);
        assert!(confidence_histogram(&[0.5], &[0, 1], &[0, 1], 2).is_err());
    }

    #[test]
    fn ranged_histogram() {
        let mut h = ConfidenceHistogram::with_range(0.5, 1.0, 10).unwrap();
        assert!((h.bin_edges[1] - 0.55).abs() < 1e-15);
        h.add(&[0.5, 0.549, 0.551, 1.0, 0.2], &[0; 5], &[0; 5]).unwrap();
        assert_eq!(h.correct_counts, vec![3, 1, 0, 0, 0, 0, 0, 0, 0, 1]);
        assert!(ConfidenceHistogram::with_range(0.5, 0.5, 3).is_err());
        assert!(h.merge(&ConfidenceHistogram::new(10).unwrap()).is_err());
    }
}
