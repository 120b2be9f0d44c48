use icd_core::channel::{modulate_bpsk, sign_to_bin, snr_to_noise, transmit, ChannelKind, SoftObservation};
use icd_core::code::LinearBlockCode;
use icd_core::decoder::external::{apply_z, ExternalDecoder};
use icd_core::decoder::{extract_info, BpDecoder, ReliabilityDecoder};
use icd_core::metrics::ConfidenceHistogram;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SAMPLES: usize = 1_000_000;

#[test]
fn awgn_noise_variance() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let snr = 3.0;
    let obs = transmit(&vec![1.0; SAMPLES], ChannelKind::Awgn, snr, &mut rng);
    let var = obs.y.iter().map(|y| (y - 1.0).powi(2)).sum::<f64>() / SAMPLES as f64;
    let s2 = snr_to_noise(snr).powi(2);
    assert!((var / s2 - 1.0).abs() < 0.01, "variance {var} vs {s2}");
    assert!(obs.h.iter().all(|&h| h == 1.0));
}

#[test]
fn rayleigh_gain_moments() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let obs = transmit(&vec![1.0; SAMPLES], ChannelKind::Rayleigh, 200.0, &mut rng);
    let n = SAMPLES as f64;
    let ms = obs.h.iter().map(|h| h * h).sum::<f64>() / n;
    let mean = obs.h.iter().sum::<f64>() / n;
    assert!((ms - 1.0).abs() < 0.01, "E[h²] = {ms}");
    // Rayleigh with scale 1/√2 has mean √π / 2
    assert!((mean / (std::f64::consts::PI.sqrt() / 2.0) - 1.0).abs() < 0.01);
    assert!(obs.h.iter().all(|&h| h > 0.0));
}

fn block_ber(code: &LinearBlockCode, snr: f64, blocks: usize, seed: u64) -> f64 {
    let dec = BpDecoder::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut errors = 0usize;
    for _ in 0..blocks {
        let m: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2u8)).collect();
        let x = code.encode_block(&m).unwrap();
        let obs = transmit(&modulate_bpsk(&x), ChannelKind::Awgn, snr, &mut rng);
        let (m_hat, _) = extract_info(&dec.decode_block(code, &obs), code);
        errors += m.iter().zip(&m_hat).filter(|(a, b)| a != b).count();
    }
    errors as f64 / (blocks * code.k()) as f64
}

#[test]
fn bp_beats_hard_decision_and_improves_with_snr() {
    let code = LinearBlockCode::ldpc_49_24();
    let bers: Vec<f64> = [-3.0, 0.0, 3.0].iter().map(|&s| block_ber(&code, s, 2000, 1)).collect();
    assert!(bers[0] > bers[1] && bers[1] > bers[2], "{bers:?}");
    // uncoded BPSK at 3 dB has BER ≈ 0.023
    assert!(bers[2] < 0.023);
}

#[test]
fn reliability_is_calibrated_in_direction() {
    let code = LinearBlockCode::ldpc_49_24();
    let dec = BpDecoder::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut hist = ConfidenceHistogram::new(5).unwrap();
    for _ in 0..3000 {
        let m: Vec<u8> = (0..24).map(|_| rng.random_range(0..2u8)).collect();
        let x = code.encode_block(&m).unwrap();
        let obs = transmit(&modulate_bpsk(&x), ChannelKind::Awgn, 0.0, &mut rng);
        let (m_hat, rho) = extract_info(&dec.decode_block(&code, &obs), &code);
        hist.add(&rho, &m_hat, &m).unwrap();
    }
    assert_eq!(hist.total(), 3000 * 24);
    let rates: Vec<f64> = hist.correct_rate().into_iter().flatten().collect();
    assert!(rates.first() < rates.last(), "{rates:?}");
}

#[test]
fn systematic_positions_follow_codeword_flips() {
    let code = LinearBlockCode::ldpc_49_24();
    let m = vec![0u8; 24];
    let x = code.encode_block(&m).unwrap();
    for j in [0usize, 5, 23] {
        // noiseless observation of a word with bit j flipped, decoded verbatim
        let mut y = modulate_bpsk(&x);
        y[j] = -y[j];
        let obs = SoftObservation { y, h: vec![1.0; 49], sigma_n: 1.0 };
        let r = apply_z(&code, &obs, &[1.0; 49]);
        let (m_hat, rho_m) = extract_info(&r, &code);
        assert_eq!(rho_m.len(), 24);
        for i in 0..24 {
            assert_eq!(m_hat[i], u8::from(i == j));
        }
    }
}

/// Any decoder behind the trait keeps the shape and noiseless contracts.
fn conformance(dec: &dyn Fn(&LinearBlockCode, &SoftObservation) -> icd_core::decoder::BlockDecodeResult) {
    let code = LinearBlockCode::ldpc_49_24();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..50 {
        let m: Vec<u8> = (0..24).map(|_| rng.random_range(0..2u8)).collect();
        let x = code.encode_block(&m).unwrap();
        let obs = SoftObservation { y: modulate_bpsk(&x), h: vec![1.0; 49], sigma_n: 1e-6 };
        let r = dec(&code, &obs);
        assert_eq!(r.x_hat_b.len(), 49);
        assert_eq!(r.rho.len(), 49);
        assert_eq!(r.x_hat_b, x);
        assert!(r.rho.iter().all(|&p| p > 0.99 && p <= 1.0));
        assert_eq!(sign_to_bin(&obs.y), x);
    }
}

#[test]
fn decoders_conform_to_contract() {
    let bp = BpDecoder::default();
    conformance(&|c, o| bp.decode_block(c, o));
    // an ideal external estimator reports a large positive disturbance
    let ext = ExternalDecoder::from_blocks(vec![vec![20.0f32; 49]]);
    conformance(&|c, o| ext.decode_index(0, c, o).unwrap());
}
