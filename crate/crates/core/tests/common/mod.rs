#![allow(dead_code)]

use icd_core::model::{ModelError, ProbabilityVector, Vocabulary};
use icd_core::{ProbabilityModel, TokenId};

/// Context-dependent pseudo-random distributions keyed on the last two tokens.
#[derive(Debug, Clone)]
pub struct HashedModel {
    pub vocab: Vocabulary,
    pub seed: u64,
    /// Larger values give more skewed distributions.
    pub skew: f64,
}

fn mix(mut x: u64) -> u64 {
    x ^= x >> 33;
    x = x.wrapping_mul(0xff51_afd7_ed55_8ccd);
    x ^= x >> 33;
    x = x.wrapping_mul(0xc4ce_b9fe_1a85_ec53);
    x ^ (x >> 33)
}

impl ProbabilityModel for HashedModel {
    fn vocab(&self) -> Vocabulary {
        self.vocab
    }

    fn next_distribution(&self, context: &[TokenId]) -> Result<ProbabilityVector, ModelError> {
        self.vocab.validate_context(context)?;
        let a = context.last().map_or(u64::MAX, |&t| u64::from(t));
        let b = context.len().checked_sub(2).map_or(u64::MAX, |i| u64::from(context[i]));
        let key = mix(self.seed ^ mix(a) ^ mix(b).rotate_left(17));
        let w: Vec<f64> = (0..self.vocab.size() as u64)
            .map(|i| {
                let u = (mix(key ^ i.wrapping_mul(0x9e37_79b9_7f4a_7c15)) >> 11) as f64 / (1u64 << 53) as f64;
                (self.skew * u).exp()
            })
            .collect();
        let s: f64 = w.iter().sum();
        ProbabilityVector::new(w.into_iter().map(|x| x / s).collect())
    }
}
