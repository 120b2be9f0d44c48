//! Decoder outputs computed elsewhere.
//!
//! The file holds one disturbance estimate `ẑ` per block, `n` little-endian
//! `f32` values each, blocks back to back. Hard decisions and reliabilities
//! are taken verbatim: `x̂ = sign_to_bin(y ⊙ ẑ)`, `ρ = sigmoid(ẑ)`.

use std::io::Read;
use std::path::Path;

use super::{sigmoid, BlockDecodeResult};
use crate::channel::{sign_to_bin, SoftObservation};
use crate::code::LinearBlockCode;

#[derive(Debug, thiserror::Error)]
pub enum ExternalError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("file holds {bytes} bytes, not a multiple of {block_bytes} ({n} floats per block)")]
    Truncated { bytes: usize, block_bytes: usize, n: usize },
    #[error("block {index} requested, file has {available}")]
    MissingBlock { index: usize, available: usize },
}

pub fn read_z_blocks<R: Read>(mut reader: R, n: usize) -> Result<Vec<Vec<f32>>, ExternalError> {
    assert!(n > 0);
    let mut buf = Vec::new();
    reader.read_to_end(&mut buf)?;
    let block_bytes = 4 * n;
    if buf.len() % block_bytes != 0 {
        return Err(ExternalError::Truncated {
            bytes: buf.len(),
            block_bytes,
            n,
        });
    }
    Ok(buf
        .chunks_exact(block_bytes)
        .map(|block| {
            block
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
                .collect()
        })
        .collect())
}

pub fn write_z_blocks<W: std::io::Write>(mut writer: W, blocks: &[Vec<f32>]) -> std::io::Result<()> {
    for block in blocks {
        for v in block {
            writer.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn apply_z(code: &LinearBlockCode, obs: &SoftObservation, z: &[f32]) -> BlockDecodeResult {
    assert_eq!(z.len(), obs.len(), "ẑ length must equal block length");
    let prod: Vec<f64> = obs.y.iter().zip(z).map(|(&y, &z)| y * f64::from(z)).collect();
    let x_hat_b = sign_to_bin(&prod);
    let converged = code.is_codeword(&x_hat_b).unwrap_or(false);
    BlockDecodeResult {
        x_hat_b,
        rho: z.iter().map(|&v| sigmoid(f64::from(v))).collect(),
        converged,
        iterations: 0,
    }
}

/// Pre-computed estimates served in block order.
#[derive(Debug, Clone)]
pub struct ExternalDecoder {
    blocks: Vec<Vec<f32>>,
}

impl ExternalDecoder {
    pub fn open(path: &Path, n: usize) -> Result<Self, ExternalError> {
        let f = std::fs::File::open(path)?;
        Ok(Self {
            blocks: read_z_blocks(std::io::BufReader::new(f), n)?,
        })
    }

    pub fn from_blocks(blocks: Vec<Vec<f32>>) -> Self {
        Self { blocks }
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn decode_index(
        &self,
        index: usize,
        code: &LinearBlockCode,
        obs: &SoftObservation,
    ) -> Result<BlockDecodeResult, ExternalError> {
        let z = self.blocks.get(index).ok_or(ExternalError::MissingBlock {
            index,
            available: self.blocks.len(),
        })?;
        Ok(apply_z(code, obs, z))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::modulate_bpsk;

    #[test]
    fn file_roundtrip_and_verbatim_rules() {
        let code = LinearBlockCode::hamming_7_4();
        let x = code.encode_block(&[1, 0, 1, 1]).unwrap();
        let y = modulate_bpsk(&x);
        // positive disturbance everywhere: keep the channel sign
        let z = vec![vec![3.0f32; 7], vec![-1.0f32; 7]];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("z.bin");
        write_z_blocks(std::fs::File::create(&path).unwrap(), &z).unwrap();
        let dec = ExternalDecoder::open(&path, 7).unwrap();
        assert_eq!(dec.len(), 2);

        let obs = SoftObservation {
            y,
            h: vec![1.0; 7],
            sigma_n: 1.0,
        };
        let r = dec.decode_index(0, &code, &obs).unwrap();
        assert_eq!(r.x_hat_b, x);
        assert!(r.converged);
        assert!((r.rho[0] - sigmoid(3.0)).abs() < 1e-12);

        let r = dec.decode_index(1, &code, &obs).unwrap();
        let flipped: Vec<u8> = x.iter().map(|b| b ^ 1).collect();
        assert_eq!(r.x_hat_b, flipped);
        assert!(r.rho.iter().all(|&p| p < 0.5));
        assert!(dec.decode_index(2, &code, &obs).is_err());
    }

    #[test]
    fn rejects_partial_block() {
        let bytes = vec![0u8; 4 * 7 + 2];
        assert!(matches!(
            read_z_blocks(bytes.as_slice(), 7),
            Err(ExternalError::Truncated { .. })
        ));
    }
}
