//! BPSK over AWGN and Rayleigh-fading channels.
//!
//! SNR convention: unit symbol energy, `SNR = 10·log10(1/σ²)`, so
//! `σ = 10^(−snr_db/20)`.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    Awgn,
    Rayleigh,
}

impl std::str::FromStr for ChannelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "awgn" => Ok(Self::Awgn),
            "rayleigh" => Ok(Self::Rayleigh),
            other => Err(format!("unknown channel kind {other:?}")),
        }
    }
}

/// How often Rayleigh gains are redrawn.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fading {
    #[default]
    PerSymbol,
    PerBlock,
}

/// Received values `y = h·x + z` with the (receiver-known) gains.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftObservation {
    pub y: Vec<f64>,
    pub h: Vec<f64>,
    pub sigma_n: f64,
}

impl SoftObservation {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

/// Bit 0 → +1, bit 1 → −1.
pub fn modulate_bpsk(bits: &[u8]) -> Vec<f64> {
    bits.iter().map(|&b| 1.0 - 2.0 * f64::from(b & 1)).collect()
}

/// Hard decision: negative → 1, otherwise 0 (zero maps to bit 0).
pub fn sign_to_bin(y: &[f64]) -> Vec<u8> {
    y.iter().map(|&v| u8::from(v < 0.0)).collect()
}

pub fn snr_to_noise(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 20.0)
}

/// Per-symbol SNR that keeps the total energy of an `n_um`-symbol reference
/// scheme, for a scheme sending `n` symbols. Float16 payloads spend 16
/// channel uses per value, adding `10·log10(16)` dB.
pub fn unified_snr(snr_unified_db: f64, n_um: f64, n: f64, float16: bool) -> f64 {
    let offset = if float16 { 10.0 * 16f64.log10() } else { 0.0 };
    snr_unified_db + 10.0 * (n_um / n).log10() + offset
}

/// Rayleigh gain with unit mean-square: `sqrt(X² + Y²)`, `X, Y ~ N(0, ½)`.
fn rayleigh_gain<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let x: f64 = StandardNormal.sample(rng);
    let y: f64 = StandardNormal.sample(rng);
    ((x * x + y * y) / 2.0).sqrt()
}

pub fn transmit<R: Rng + ?Sized>(
    symbols: &[f64],
    kind: ChannelKind,
    snr_db: f64,
    rng: &mut R,
) -> SoftObservation {
    transmit_with(symbols, kind, Fading::PerSymbol, snr_db, rng)
}

pub fn transmit_with<R: Rng + ?Sized>(
    symbols: &[f64],
    kind: ChannelKind,
    fading: Fading,
    snr_db: f64,
    rng: &mut R,
) -> SoftObservation {
    let sigma_n = snr_to_noise(snr_db);
    let h: Vec<f64> = match (kind, fading) {
        (ChannelKind::Awgn, _) => vec![1.0; symbols.len()],
        (ChannelKind::Rayleigh, Fading::PerSymbol) => {
            (0..symbols.len()).map(|_| rayleigh_gain(rng)).collect()
        }
        (ChannelKind::Rayleigh, Fading::PerBlock) => vec![rayleigh_gain(rng); symbols.len()],
    };
    let y = symbols
        .iter()
        .zip(&h)
        .map(|(&x, &g)| {
            let z: f64 = StandardNormal.sample(rng);
            g * x + sigma_n * z
        })
        .collect();
    SoftObservation { y, h, sigma_n }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bpsk_and_hard_decision() {
        assert_eq!(modulate_bpsk(&[0, 1, 0]), vec![1.0, -1.0, 1.0]);
        assert_eq!(sign_to_bin(&[2.3, -0.7]), vec![0, 1]);
        assert_eq!(sign_to_bin(&[0.0, -0.0]), vec![0, 0]);
        let bits = vec![1, 0, 0, 1, 1];
        assert_eq!(sign_to_bin(&modulate_bpsk(&bits)), bits);
    }

    #[test]
    fn snr_conversions() {
        assert_eq!(snr_to_noise(0.0), 1.0);
        assert!((snr_to_noise(20.0) - 0.1).abs() < 1e-15);
        assert!((snr_to_noise(-3.0) - 1.412_537_544_622_754).abs() < 1e-12);
    }

    #[test]
    fn unified_snr_offsets() {
        assert_eq!(unified_snr(4.0, 49.0, 49.0, false), 4.0);
        assert!((unified_snr(0.0, 2.0, 1.0, false) - 3.010_299_956_639_812).abs() < 1e-6);
        assert!((unified_snr(0.0, 1.0, 1.0, true) - 12.0412).abs() < 1e-3);
        assert!(unified_snr(0.0, 3.0, 1.0, false) > unified_snr(0.0, 2.0, 1.0, false));
    }

    #[test]
    fn noiseless_limit_and_determinism() {
        let bits: Vec<u8> = (0..200).map(|i| (i * 7 % 3 == 0) as u8).collect();
        let x = modulate_bpsk(&bits);
        for kind in [ChannelKind::Awgn, ChannelKind::Rayleigh] {
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            let obs = transmit(&x, kind, 120.0, &mut rng);
            assert_eq!(sign_to_bin(&obs.y), bits);
            let again = transmit(&x, kind, 120.0, &mut ChaCha8Rng::seed_from_u64(1));
            assert_eq!(obs, again);
        }
    }

    #[test]
    fn per_block_gain_is_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let obs = transmit_with(&[1.0; 10], ChannelKind::Rayleigh, Fading::PerBlock, 10.0, &mut rng);
        assert!(obs.h.iter().all(|&g| g == obs.h[0] && g > 0.0));
    }

    #[test]
    fn parses_kind() {
        assert_eq!("AWGN".parse::<ChannelKind>(), Ok(ChannelKind::Awgn));
        assert!("fast".parse::<ChannelKind>().is_err());
    }
}
