use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Duration, Instant};

use icd_core::arith::{self, CodecConfig, DecodeStatus};
use icd_core::bits::BitStream;
use icd_core::channel::{modulate_bpsk, transmit_with, ChannelKind, Fading};
use icd_core::code::{load_code, segment, LinearBlockCode};
use icd_core::decoder::{extract_info, BpDecoder, ReliabilityDecoder};
use icd_core::icd::{icd_decode, IcdParams};
use icd_core::metrics::{bit_error_rate, bleu, word_error_rate, ConfidenceHistogram};
use icd_core::model::{BigramModel, WordTokenizer};
use icd_core::TokenId;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{is_builtin_code, Ablation, ExperimentConfig};
use crate::HarnessError;

/// Mixes `tags` into `seed` (SplitMix64 finalizer per step).
pub fn derive_seed(seed: u64, tags: &[u64]) -> u64 {
    let mut x = seed;
    for &t in tags {
        x = x.wrapping_add(t.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        x ^= x >> 31;
    }
    x
}

const TAG_NOISE: u64 = 1;
const TAG_SAMPLER: u64 = 2;

/// Everything fixed across trials: vocabulary, trained model, code, split.
pub struct Link {
    pub tokenizer: WordTokenizer,
    pub model: BigramModel,
    pub code: LinearBlockCode,
    pub decoder: BpDecoder,
    pub codec: CodecConfig,
    /// Held-out sentences, as words.
    pub test: Vec<Vec<String>>,
    pub train_size: usize,
    channel: ChannelKind,
    fading: Fading,
    context_words: usize,
}

/// Receiver estimate of the payload.
#[derive(Debug, Clone, PartialEq)]
pub struct Received {
    pub m_hat: Vec<u8>,
    pub rho: Vec<f64>,
}

/// Scores of one decoded sentence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scores {
    pub bleu1: f64,
    pub bleu4: f64,
    pub ber: f64,
    pub wer: f64,
}

fn read_corpus(path: &Path, min: usize, max: usize) -> Result<Vec<Vec<String>>, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io {
        path: path.to_owned(),
        source: e,
    })?;
    Ok(text
        .lines()
        .map(|l| l.split_whitespace().map(str::to_owned).collect::<Vec<_>>())
        .filter(|w| (min..=max).contains(&w.len()) && !w.iter().any(|x| x == WordTokenizer::EOT))
        .collect())
}

fn load_link_code(name: &str) -> Result<LinearBlockCode, HarnessError> {
    match name {
        "ldpc_49_24" => Ok(LinearBlockCode::ldpc_49_24()),
        "hamming_7_4" => Ok(LinearBlockCode::hamming_7_4()),
        path => {
            debug_assert!(!is_builtin_code(path));
            let path = Path::new(path);
            let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io {
                path: path.to_owned(),
                source: e,
            })?;
            load_code(&text).map_err(|e| HarnessError::Code {
                path: path.to_owned(),
                source: e,
            })
        }
    }
}

impl Link {
    pub fn prepare(cfg: &ExperimentConfig) -> Result<Self, HarnessError> {
        cfg.validate()?;
        let mut sentences = read_corpus(&cfg.corpus, cfg.min_words, cfg.max_words)?;
        if sentences.len() <= cfg.test_size {
            return Err(HarnessError::Config(format!(
                "{}: {} usable sentences, need more than test_size = {}",
                cfg.corpus.display(),
                sentences.len(),
                cfg.test_size
            )));
        }
        let tokenizer = WordTokenizer::from_corpus(sentences.iter().flatten().map(String::as_str))?;
        sentences.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.seed));
        let (test, train) = sentences.split_at(cfg.test_size);
        let train_ids = train
            .iter()
            .map(|s| tokenizer.encode(&s.join(" ")))
            .collect::<Result<Vec<_>, _>>()?;
        let model = BigramModel::train(tokenizer.vocab(), train_ids.iter().map(Vec::as_slice), cfg.kappa)?;
        let codec = CodecConfig {
            max_tokens: 2 * cfg.max_words + 8,
            ..CodecConfig::default()
        };
        Ok(Self {
            tokenizer,
            model,
            code: load_link_code(&cfg.code)?,
            decoder: BpDecoder::new(cfg.bp),
            codec,
            test: test.to_vec(),
            train_size: train.len(),
            channel: cfg.channel,
            fading: cfg.fading,
            context_words: cfg.context_words,
        })
    }

    /// Context ids and payload tokens (eot included) of a sentence.
    pub fn split_sentence(&self, words: &[String]) -> Result<(Vec<TokenId>, Vec<TokenId>), HarnessError> {
        let ids = self.tokenizer.encode(&words.join(" "))?;
        let (pre, rest) = ids.split_at(self.context_words);
        let mut payload = rest.to_vec();
        payload.push(self.tokenizer.eot());
        Ok((pre.to_vec(), payload))
    }

    /// Channel-codes `payload`, sends it block by block and soft-decodes
    /// it. The payload length is side information known at the receiver.
    pub fn transmit(&self, payload: &BitStream, snr_db: f64, seed: u64) -> Received {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (blocks, plan) = segment(payload, self.code.k());
        let mut m_hat = Vec::with_capacity(blocks.len() * self.code.k());
        let mut rho = Vec::with_capacity(m_hat.capacity());
        for block in &blocks {
            let x = self.code.encode_block(block).expect("segment yields k-bit blocks");
            let obs = transmit_with(&modulate_bpsk(&x), self.channel, self.fading, snr_db, &mut rng);
            let (m, r) = extract_info(&self.decoder.decode_block(&self.code, &obs), &self.code);
            m_hat.extend_from_slice(&m);
            rho.extend_from_slice(&r);
        }
        m_hat.truncate(plan.payload_len);
        rho.truncate(plan.payload_len);
        Received { m_hat, rho }
    }

    /// Metrics of a decoded token sequence against the payload words.
    pub fn score(&self, reference: &[String], decoded: &[TokenId], truth: &[u8], bits: &[u8]) -> Scores {
        let eot = self.tokenizer.eot();
        let hyp: Vec<&str> = decoded
            .iter()
            .filter(|&&t| t != eot)
            .map(|&t| self.tokenizer.words()[t as usize].as_str())
            .collect();
        let reference: Vec<&str> = reference.iter().map(String::as_str).collect();
        Scores {
            bleu1: bleu(&reference, &hyp, 1).expect("order 1").value,
            bleu4: bleu(&reference, &hyp, 4).expect("order 4").value,
            ber: bit_error_rate(truth, bits).expect("equal lengths"),
            wer: word_error_rate(&reference, &hyp),
        }
    }
}

/// One sentence through one receiver configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub snr_index: usize,
    pub trial: usize,
    pub sentence: usize,
    pub ablation: Ablation,
    /// Configured pool and subset sizes; zero for single-decode ablations.
    pub l_c: usize,
    pub l_s: usize,
    pub payload_bits: usize,
    pub scores: Scores,
    pub codec_invocations: usize,
    pub completed: bool,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stat {
    pub mean: f64,
    /// Sample standard deviation, 0 for a single value.
    pub std: f64,
}

impl Stat {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let v: Vec<f64> = values.into_iter().collect();
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let std = if v.len() > 1 {
            (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub snr_db: f64,
    pub ablation: Ablation,
    pub l_c: usize,
    pub l_s: usize,
    pub trials: usize,
    pub bleu1: Stat,
    pub bleu4: Stat,
    pub ber: Stat,
    pub wer: Stat,
    pub codec_invocations: f64,
    pub wall_ms_per_sentence: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub rows: Vec<ResultRow>,
    /// Ordered by (snr, trial, ablation, grid point).
    pub records: Vec<TrialRecord>,
    /// Channel-decoder reliability histograms per (snr index, ablation).
    pub histograms: BTreeMap<(usize, Ablation), ConfidenceHistogram>,
}

struct TrialOutput {
    records: Vec<TrialRecord>,
    hist: Vec<(Ablation, ConfidenceHistogram)>,
}

fn run_trial(
    link: &Link,
    cfg: &ExperimentConfig,
    snr_index: usize,
    trial: usize,
) -> Result<TrialOutput, HarnessError> {
    let snr = cfg.snr_db[snr_index];
    let sentence = trial % link.test.len();
    let words = &link.test[sentence];
    let reference = &words[cfg.context_words..];
    let (m_pre, payload) = link.split_sentence(words)?;
    let trial_seed = derive_seed(cfg.seed, &[snr_index as u64, trial as u64]);
    let grid = cfg.grid_points();

    let mut records = Vec::new();
    let mut hist = Vec::new();
    // indexed by uses_context: context_only and full_icd share one payload
    // and one noise draw
    let mut transmitted: [Option<(BitStream, Received, Duration)>; 2] = [None, None];
    for &ablation in &cfg.ablations {
        let ctx: &[TokenId] = if ablation.uses_context() { &m_pre } else { &[] };
        let slot = &mut transmitted[usize::from(ablation.uses_context())];
        if slot.is_none() {
            let start = Instant::now();
            let bits = arith::encode(&link.model, &payload, ctx, &link.codec)?;
            let rx = link.transmit(&bits, snr, derive_seed(trial_seed, &[TAG_NOISE]));
            *slot = Some((bits, rx, start.elapsed()));
        }
        let (bits, rx, link_time) = slot.as_ref().expect("set above");
        let mut h = ConfidenceHistogram::new(cfg.hist_bins).expect("validated bin count");
        h.add(&rx.rho, &rx.m_hat, bits.as_slice()).expect("equal lengths");
        hist.push((ablation, h));

        let base = |l_c, l_s, scores, invocations, completed, elapsed| TrialRecord {
            snr_index,
            trial,
            sentence,
            ablation,
            l_c,
            l_s,
            payload_bits: bits.len(),
            scores,
            codec_invocations: invocations,
            completed,
            elapsed,
        };
        match ablation {
            Ablation::Baseline | Ablation::ContextOnly => {
                let start = Instant::now();
                let out = arith::decode(&link.model, &BitStream::from(rx.m_hat.clone()), ctx, &link.codec)?;
                let scores = link.score(reference, &out.tokens, bits.as_slice(), &rx.m_hat);
                let done = out.status == DecodeStatus::Completed;
                records.push(base(0, 0, scores, 1, done, *link_time + start.elapsed()));
            }
            Ablation::FullIcd => {
                for &(l_c, l_s) in &grid {
                    let params = IcdParams {
                        l_c,
                        l_s,
                        seed: derive_seed(trial_seed, &[TAG_SAMPLER]),
                        ..cfg.icd
                    };
                    let start = Instant::now();
                    let res = icd_decode(&rx.m_hat, &rx.rho, &m_pre, &link.model, &link.codec, &params)?;
                    let elapsed = *link_time + start.elapsed();
                    let d = &res.diagnostics;
                    let (_, expect_l_s) = params.effective_sizes(d.k_total);
                    if d.codec_invocations != expect_l_s || d.l_s != expect_l_s {
                        return Err(HarnessError::Budget {
                            used: d.codec_invocations,
                            l_s: expect_l_s,
                        });
                    }
                    let scores = link.score(reference, &res.outcome.tokens, bits.as_slice(), &res.bits);
                    let done = res.outcome.status == DecodeStatus::Completed;
                    records.push(base(l_c, l_s, scores, d.codec_invocations, done, elapsed));
                }
            }
        }
    }
    Ok(TrialOutput { records, hist })
}

fn aggregate(cfg: &ExperimentConfig, records: &[TrialRecord]) -> Vec<ResultRow> {
    let mut groups: BTreeMap<(usize, usize, usize), Vec<&TrialRecord>> = BTreeMap::new();
    let order = |a: Ablation| cfg.ablations.iter().position(|&x| x == a).expect("configured");
    let grid = cfg.grid_points();
    for r in records {
        let g = grid.iter().position(|&p| p == (r.l_c, r.l_s)).unwrap_or(0);
        groups
            .entry((r.snr_index, order(r.ablation), g))
            .or_default()
            .push(r);
    }
    groups
        .into_values()
        .map(|rs| {
            let first = rs[0];
            let n = rs.len() as f64;
            ResultRow {
                snr_db: cfg.snr_db[first.snr_index],
                ablation: first.ablation,
                l_c: first.l_c,
                l_s: first.l_s,
                trials: rs.len(),
                bleu1: Stat::of(rs.iter().map(|r| r.scores.bleu1)),
                bleu4: Stat::of(rs.iter().map(|r| r.scores.bleu4)),
                ber: Stat::of(rs.iter().map(|r| r.scores.ber)),
                wer: Stat::of(rs.iter().map(|r| r.scores.wer)),
                codec_invocations: rs.iter().map(|r| r.codec_invocations as f64).sum::<f64>() / n,
                wall_ms_per_sentence: rs.iter().map(|r| r.elapsed.as_secs_f64() * 1e3).sum::<f64>() / n,
            }
        })
        .collect()
}

/// Runs every (snr, trial) in parallel; results are a pure function of the
/// config, except the wall-time column.
pub fn run_experiment_with(link: &Link, cfg: &ExperimentConfig) -> Result<ExperimentOutput, HarnessError> {
    cfg.validate()?;
    let jobs: Vec<(usize, usize)> = (0..cfg.snr_db.len())
        .flat_map(|s| (0..cfg.trials).map(move |t| (s, t)))
        .collect();
    let outputs = jobs
        .into_par_iter()
        .map(|(s, t)| run_trial(link, cfg, s, t).map(|o| (s, o)))
        .collect::<Result<Vec<_>, _>>()?;

    let mut histograms: BTreeMap<(usize, Ablation), ConfidenceHistogram> = BTreeMap::new();
    let mut records = Vec::with_capacity(outputs.len() * cfg.ablations.len());
    for (s, out) in outputs {
        for (a, h) in out.hist {
            match histograms.get_mut(&(s, a)) {
                Some(acc) => acc.merge(&h).expect("same bin count"),
                None => {
                    histograms.insert((s, a), h);
                }
            }
        }
        records.extend(out.records);
    }
    Ok(ExperimentOutput {
        rows: aggregate(cfg, &records),
        records,
        histograms,
    })
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput, HarnessError> {
    run_experiment_with(&Link::prepare(cfg)?, cfg)
}

/// Lossless encode/decode of every test sentence, with and without context.
pub fn roundtrip_check(link: &Link) -> Result<usize, HarnessError> {
    for (index, words) in link.test.iter().enumerate() {
        let (m_pre, payload) = link.split_sentence(words)?;
        for ctx in [&m_pre[..], &[]] {
            let bits = arith::encode(&link.model, &payload, ctx, &link.codec)?;
            let out = arith::decode(&link.model, &bits, ctx, &link.codec)?;
            if out.tokens != payload || out.status != DecodeStatus::Completed {
                return Err(HarnessError::Roundtrip {
                    index,
                    detail: format!("decoded {:?}, expected {:?}", out.tokens, payload),
                });
            }
        }
    }
    Ok(link.test.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            trials: 6,
            test_size: 20,
            snr_db: vec![60.0],
            grid: crate::GridConfig {
                l_c: vec![8],
                l_s: vec![2, 4],
            },
            ..Default::default()
        }
    }

    #[test]
    fn seeds_differ_by_tag() {
        let a = derive_seed(1, &[0, 0]);
        assert_ne!(a, derive_seed(1, &[0, 1]));
        assert_ne!(a, derive_seed(1, &[1, 0]));
        assert_ne!(a, derive_seed(2, &[0, 0]));
        assert_eq!(a, derive_seed(1, &[0, 0]));
    }

    #[test]
    fn noiseless_link_is_exact_for_every_ablation() {
        let out = run_experiment(&small()).unwrap();
        assert_eq!(out.rows.len(), 4);
        for r in &out.records {
            assert_eq!(r.scores.bleu4, 1.0, "{r:?}");
            assert_eq!(r.scores.ber, 0.0);
            assert_eq!(r.scores.wer, 0.0);
        }
        let icd: Vec<_> = out.rows.iter().filter(|r| r.ablation == Ablation::FullIcd).collect();
        assert_eq!(icd.iter().map(|r| r.codec_invocations).collect::<Vec<_>>(), vec![2.0, 4.0]);
    }

    #[test]
    fn context_shortens_the_payload_on_average() {
        let cfg = ExperimentConfig {
            ablations: vec![Ablation::Baseline, Ablation::ContextOnly],
            trials: 50,
            ..small()
        };
        let out = run_experiment(&cfg).unwrap();
        let mean = |a| {
            let v: Vec<f64> = out.records.iter().filter(|r| r.ablation == a).map(|r| r.payload_bits as f64).collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        assert!(mean(Ablation::ContextOnly) < mean(Ablation::Baseline));
    }

    #[test]
    fn roundtrip_over_test_split() {
        let link = Link::prepare(&small()).unwrap();
        assert_eq!(roundtrip_check(&link).unwrap(), 20);
    }

    #[test]
    fn unreadable_corpus_names_the_path() {
        let cfg = ExperimentConfig {
            corpus: "/nonexistent/corpus.txt".into(),
            ..small()
        };
        let err = Link::prepare(&cfg).err().unwrap().to_string();
        assert!(err.contains("/nonexistent/corpus.txt"), "{err}");
    }

    #[test]
    fn stat_is_sample_std() {
        let s = Stat::of([1.0, 2.0, 3.0]);
        assert_eq!(s.mean, 2.0);
        assert!((s.std - 1.0).abs() < 1e-15);
        assert_eq!(Stat::of([4.0]).std, 0.0);
    }
}
