mod common;

use common::HashedModel;
use icd_core::arith::{decode, encode, CodecConfig};
use icd_core::model::{sequence_log_likelihood, BigramModel, LikelihoodMode, UniformModel, Vocabulary};
use icd_core::{BitStream, DecodeStatus, ProbabilityModel, TokenId};
use proptest::prelude::*;

fn sequence(size: usize, body: &[u32]) -> Vec<TokenId> {
    let eot = (size - 1) as TokenId;
    body.iter()
        .map(|&x| x % eot)
        .chain(std::iter::once(eot))
        .collect()
}

fn check_roundtrip(model: &dyn ProbabilityModel, tokens: &[TokenId], ctx: &[TokenId], cfg: &CodecConfig) -> Result<(), TestCaseError> {
    let bits = encode(model, tokens, ctx, cfg).unwrap();
    let out = decode(model, &bits, ctx, cfg).unwrap();
    prop_assert_eq!(&out.tokens, tokens);
    prop_assert_eq!(out.status, DecodeStatus::Completed);
    let ll = sequence_log_likelihood(model, tokens, ctx, cfg.likelihood, cfg.f_bits).unwrap();
    prop_assert!((out.log_likelihood - ll).abs() <= 1e-9);

    // length against information content Σ −log2 q_k
    let info = -ll / std::f64::consts::LN_2;
    prop_assert!((bits.len() as f64 - info).abs() <= 16.0);
    prop_assert!(bits.len() as f64 <= info.ceil() + 2.0);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn lossless_under_hashed_models(
        size in 2usize..300,
        seed in any::<u64>(),
        skew in 0.0f64..12.0,
        body in proptest::collection::vec(any::<u32>(), 0..60),
        ctx in proptest::collection::vec(any::<u32>(), 0..4),
        f_bits in 10u32..=20,
    ) {
        let vocab = Vocabulary::new(size, (size - 1) as TokenId).unwrap();
        let model = HashedModel { vocab, seed, skew };
        let tokens = sequence(size, &body);
        let ctx: Vec<TokenId> = ctx.iter().map(|&c| c % (size as u32 - 1)).collect();
        let cfg = CodecConfig { f_bits, max_tokens: tokens.len().max(68), ..CodecConfig::default() };
        prop_assume!(2 * size as u64 <= 1 << f_bits);
        check_roundtrip(&model, &tokens, &ctx, &cfg)?;
    }

    #[test]
    fn lossless_under_trained_bigrams(
        size in 3usize..40,
        corpus in proptest::collection::vec(proptest::collection::vec(any::<u32>(), 1..12), 1..20),
        body in proptest::collection::vec(any::<u32>(), 0..30),
    ) {
        let eot = (size - 1) as TokenId;
        let vocab = Vocabulary::new(size, eot).unwrap();
        let sentences: Vec<Vec<TokenId>> = corpus
            .iter()
            .map(|s| s.iter().map(|&x| x % eot).collect())
            .collect();
        let model = BigramModel::train(vocab, sentences.iter().map(Vec::as_slice), 1.0).unwrap();
        let tokens = sequence(size, &body);
        check_roundtrip(&model, &tokens, &[], &CodecConfig::default())?;
    }

    #[test]
    fn raw_likelihood_mode_also_roundtrips(
        body in proptest::collection::vec(any::<u32>(), 0..20),
        seed in any::<u64>(),
    ) {
        let vocab = Vocabulary::new(17, 16).unwrap();
        let model = HashedModel { vocab, seed, skew: 4.0 };
        let cfg = CodecConfig { likelihood: LikelihoodMode::Raw, ..CodecConfig::default() };
        let tokens = sequence(17, &body);
        let bits = encode(&model, &tokens, &[], &cfg).unwrap();
        let out = decode(&model, &bits, &[], &cfg).unwrap();
        prop_assert_eq!(&out.tokens, &tokens);
        let ll = sequence_log_likelihood(&model, &tokens, &[], LikelihoodMode::Raw, cfg.f_bits).unwrap();
        prop_assert!((out.log_likelihood - ll).abs() <= 1e-9);
    }
}

#[test]
fn decode_is_total_on_random_streams() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
    let vocab = Vocabulary::new(50, 49).unwrap();
    let skewed = HashedModel { vocab, seed: 9, skew: 10.0 };
    let uniform = UniformModel::new(Vocabulary::new(2, 1).unwrap());
    let cfg = CodecConfig::default();
    for i in 0..10_000 {
        let len = rng.random_range(0..200);
        let bits = BitStream::from_bits((0..len).map(|_| rng.random_range(0..2u8)));
        let model: &dyn ProbabilityModel = if i % 2 == 0 { &skewed } else { &uniform };
        let out = decode(model, &bits, &[], &cfg).unwrap();
        assert!(out.tokens.len() <= cfg.max_tokens);
        let ends_eot = out.tokens.last() == Some(&model.vocab().eot());
        assert_eq!(out.status == DecodeStatus::Completed, ends_eot);
        assert!(out.log_likelihood <= 0.0 && out.log_likelihood.is_finite());
    }
}

#[test]
fn flipped_first_bit_changes_output() {
    let vocab = Vocabulary::new(20, 19).unwrap();
    let model = HashedModel { vocab, seed: 3, skew: 8.0 };
    let cfg = CodecConfig::default();
    let tokens = sequence(20, &[4, 8, 15, 16, 2, 3, 7]);
    let mut bits = encode(&model, &tokens, &[], &cfg).unwrap();
    bits.flip(0);
    assert_ne!(decode(&model, &bits, &[], &cfg).unwrap().tokens, tokens);
}
