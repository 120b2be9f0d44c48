//! Systematic binary linear block codes, built from a parity-check matrix.

pub mod alist;
mod gf2;

pub use gf2::Gf2Matrix;

use crate::bits::BitStream;

#[derive(Debug, thiserror::Error)]
pub enum CodeError {
    #[error("parity-check parse error: {0}")]
    Parse(String),
    #[error("parity-check matrix has rank {rank}, expected {rows}")]
    RankDeficient { rank: usize, rows: usize },
    #[error("expected {expected} bits, got {got}")]
    Length { expected: usize, got: usize },
    #[error("block plan mismatch: {0}")]
    Plan(String),
    #[error("generator check failed: G·Hᵀ ≠ 0")]
    Inconsistent,
}

const LDPC_49_24: &str = include_str!("../../data/ldpc_49_24.alist");
const HAMMING_7_4: &str = include_str!("../../data/hamming_7_4.alist");

/// An `(n, k)` code in systematic form.
///
/// Construction permutes the columns of the supplied `H` so that the parity
/// part of its reduced echelon form is the identity on the last `n − k`
/// positions. All bit vectors handled by this type use that permuted order:
/// the first `k` codeword bits are the message. [`LinearBlockCode::parity_check`]
/// is the original (sparse) `H` with columns in the same order.
#[derive(Debug, Clone)]
pub struct LinearBlockCode {
    n: usize,
    k: usize,
    g: Gf2Matrix,
    h: Gf2Matrix,
    // parity part P (m × k) of the systematic H = [P | I]
    p: Gf2Matrix,
    column_order: Vec<usize>,
    check_vars: Vec<Vec<usize>>,
    var_checks: Vec<Vec<usize>>,
}

/// Parses an alist parity-check matrix and builds the systematic code.
pub fn load_code(pcm_source: &str) -> Result<LinearBlockCode, CodeError> {
    LinearBlockCode::from_parity_check(&alist::parse(pcm_source)?)
}

impl LinearBlockCode {
    /// The shipped (49, 24) LDPC code: column weight 3, no 4-cycles.
    pub fn ldpc_49_24() -> Self {
        load_code(LDPC_49_24).expect("bundled LDPC matrix is valid")
    }

    pub fn hamming_7_4() -> Self {
        load_code(HAMMING_7_4).expect("bundled Hamming matrix is valid")
    }

    pub fn from_parity_check(h: &Gf2Matrix) -> Result<Self, CodeError> {
        let (m, n) = (h.rows(), h.cols());
        if m == 0 || m >= n {
            return Err(CodeError::Parse(format!("invalid dimensions {m}x{n}")));
        }
        let k = n - m;

        // Gauss–Jordan, pivot columns taken from the right
        let mut a = h.clone();
        let mut pivot_col = Vec::with_capacity(m);
        let mut r = 0;
        for c in (0..n).rev() {
            if r == m {
                break;
            }
            let Some(p) = (r..m).find(|&i| a.get(i, c) == 1) else {
                continue;
            };
            a.swap_rows(r, p);
            for i in 0..m {
                if i != r && a.get(i, c) == 1 {
                    a.xor_row_into(r, i);
                }
            }
            pivot_col.push(c);
            r += 1;
        }
        if r < m {
            return Err(CodeError::RankDeficient { rank: r, rows: m });
        }

        // parity columns in ascending order, each tied to its reduced row
        let mut parity: Vec<(usize, usize)> = pivot_col.iter().enumerate().map(|(row, &c)| (c, row)).collect();
        parity.sort_unstable();
        let mut is_parity = vec![false; n];
        for &(c, _) in &parity {
            is_parity[c] = true;
        }
        let info_cols: Vec<usize> = (0..n).filter(|&c| !is_parity[c]).collect();
        let column_order: Vec<usize> = info_cols.iter().copied().chain(parity.iter().map(|&(c, _)| c)).collect();

        let mut p = Gf2Matrix::zeros(m, k);
        for (j, &(_, row)) in parity.iter().enumerate() {
            for (i, &c) in info_cols.iter().enumerate() {
                p.set(j, i, a.get(row, c));
            }
        }
        let mut g = Gf2Matrix::zeros(k, n);
        for i in 0..k {
            g.set(i, i, 1);
            for j in 0..m {
                g.set(i, k + j, p.get(j, i));
            }
        }
        let h_perm = h.permute_columns(&column_order);
        if !g.mul_transpose(&h_perm).is_zero() {
            return Err(CodeError::Inconsistent);
        }

        let check_vars = (0..m)
            .map(|r| (0..n).filter(|&c| h_perm.get(r, c) == 1).collect())
            .collect();
        let var_checks = (0..n)
            .map(|c| (0..m).filter(|&r| h_perm.get(r, c) == 1).collect())
            .collect();
        Ok(Self {
            n,
            k,
            g,
            h: h_perm,
            p,
            column_order,
            check_vars,
            var_checks,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    pub fn generator(&self) -> &Gf2Matrix {
        &self.g
    }

    pub fn parity_check(&self) -> &Gf2Matrix {
        &self.h
    }

    /// `column_order[j]` is the column of the source matrix now at position `j`.
    pub fn column_order(&self) -> &[usize] {
        &self.column_order
    }

    /// Variable indices touched by each check.
    pub fn check_neighbors(&self) -> &[Vec<usize>] {
        &self.check_vars
    }

    /// Check indices touching each variable.
    pub fn variable_neighbors(&self) -> &[Vec<usize>] {
        &self.var_checks
    }

    /// `x = m·G`; the first `k` bits are `m`.
    pub fn encode_block(&self, m: &[u8]) -> Result<Vec<u8>, CodeError> {
        check_len(m, self.k)?;
        let mut x = Vec::with_capacity(self.n);
        x.extend(m.iter().map(|b| b & 1));
        x.extend(self.p.mul_vec(&x));
        Ok(x)
    }

    /// `H·xᵀ`.
    pub fn syndrome(&self, bits: &[u8]) -> Result<Vec<u8>, CodeError> {
        check_len(bits, self.n)?;
        Ok(self.h.mul_vec(bits))
    }

    pub fn is_codeword(&self, bits: &[u8]) -> Result<bool, CodeError> {
        Ok(self.syndrome(bits)?.iter().all(|&s| s == 0))
    }
}

fn check_len(bits: &[u8], expected: usize) -> Result<(), CodeError> {
    if bits.len() == expected {
        Ok(())
    } else {
        Err(CodeError::Length {
            expected,
            got: bits.len(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockPlan {
    pub num_blocks: usize,
    pub pad_bits: usize,
    pub payload_len: usize,
}

/// Splits `payload` into `k`-bit blocks, zero-padding the last one.
pub fn segment(payload: &BitStream, k: usize) -> (Vec<Vec<u8>>, BlockPlan) {
    assert!(k > 0, "block size must be positive");
    let len = payload.len();
    let num_blocks = len.div_ceil(k);
    let pad_bits = num_blocks * k - len;
    let blocks = payload
        .as_slice()
        .chunks(k)
        .map(|c| {
            let mut b = c.to_vec();
            b.resize(k, 0);
            b
        })
        .collect();
    (
        blocks,
        BlockPlan {
            num_blocks,
            pad_bits,
            payload_len: len,
        },
    )
}

/// Concatenates blocks and drops the padding recorded in `plan`.
pub fn desegment(blocks: &[Vec<u8>], plan: &BlockPlan) -> Result<BitStream, CodeError> {
    if blocks.len() != plan.num_blocks {
        return Err(CodeError::Plan(format!(
            "{} blocks for a plan of {}",
            blocks.len(),
            plan.num_blocks
        )));
    }
    let total: usize = blocks.iter().map(Vec::len).sum();
    if total != plan.payload_len + plan.pad_bits {
        return Err(CodeError::Plan(format!(
            "{total} bits for payload {} + pad {}",
            plan.payload_len, plan.pad_bits
        )));
    }
    let mut out: Vec<u8> = blocks.concat();
    out.truncate(plan.payload_len);
    Ok(BitStream::from(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn hamming_h() -> Gf2Matrix {
        Gf2Matrix::from_rows(&[
            vec![1, 1, 0, 1, 1, 0, 0],
            vec![1, 0, 1, 1, 0, 1, 0],
            vec![0, 1, 1, 1, 0, 0, 1],
        ])
    }

    #[test]
    fn shipped_ldpc_dimensions() {
        let c = LinearBlockCode::ldpc_49_24();
        assert_eq!((c.n(), c.k()), (49, 24));
        assert!((c.rate() - 0.4898).abs() < 1e-4);
        assert!((c.rate() - 0.5).abs() < 0.02);
        assert!(c.generator().mul_transpose(c.parity_check()).is_zero());
    }

    #[test]
    fn identity_extended_h_keeps_order() {
        let code = LinearBlockCode::from_parity_check(&hamming_h()).unwrap();
        assert_eq!(code.column_order(), &[0, 1, 2, 3, 4, 5, 6]);
        // G = [I | Pᵀ]
        let h = hamming_h();
        for i in 0..4 {
            for j in 0..3 {
                assert_eq!(code.generator().get(i, 4 + j), h.get(j, i));
            }
            for j in 0..4 {
                assert_eq!(code.generator().get(i, j), u8::from(i == j));
            }
        }
    }

    #[test]
    fn hamming_exhaustive_truth_table() {
        let code = LinearBlockCode::hamming_7_4();
        for v in 0u8..16 {
            let m: Vec<u8> = (0..4).map(|i| (v >> (3 - i)) & 1).collect();
            let x = code.encode_block(&m).unwrap();
            let expect = [m[0] ^ m[1] ^ m[3], m[0] ^ m[2] ^ m[3], m[1] ^ m[2] ^ m[3]];
            assert_eq!(&x[..4], &m[..]);
            assert_eq!(&x[4..], &expect[..]);
            assert!(code.is_codeword(&x).unwrap());
        }
    }

    #[test]
    fn non_systematic_input_gets_permuted() {
        // identity block on the left, parity on the right after permutation
        let h = Gf2Matrix::from_rows(&[vec![1, 0, 1, 1, 0], vec![0, 1, 1, 0, 1]]);
        let code = LinearBlockCode::from_parity_check(&h).unwrap();
        assert_eq!(code.k(), 3);
        for v in 0u8..8 {
            let m: Vec<u8> = (0..3).map(|i| (v >> i) & 1).collect();
            let x = code.encode_block(&m).unwrap();
            assert_eq!(&x[..3], &m[..]);
            assert!(code.is_codeword(&x).unwrap());
        }
    }

    #[test]
    fn unit_message_is_generator_row() {
        let code = LinearBlockCode::ldpc_49_24();
        let mut m = vec![0u8; 24];
        assert_eq!(code.encode_block(&m).unwrap(), vec![0u8; 49]);
        m[0] = 1;
        assert_eq!(code.encode_block(&m).unwrap(), code.generator().row(0));
    }

    #[test]
    fn single_flip_syndrome_is_column() {
        let code = LinearBlockCode::ldpc_49_24();
        let x = code.encode_block(&[1u8; 24]).unwrap();
        for j in [0, 23, 24, 48] {
            let mut y = x.clone();
            y[j] ^= 1;
            let s = code.syndrome(&y).unwrap();
            let col: Vec<u8> = (0..25).map(|r| code.parity_check().get(r, j)).collect();
            assert_eq!(s, col);
        }
    }

    #[test]
    fn rank_deficient_rejected() {
        let h = Gf2Matrix::from_rows(&[vec![1, 1, 0, 1], vec![1, 1, 0, 1]]);
        assert!(matches!(
            LinearBlockCode::from_parity_check(&h),
            Err(CodeError::RankDeficient { rank: 1, rows: 2 })
        ));
    }

    #[test]
    fn length_checks() {
        let code = LinearBlockCode::hamming_7_4();
        assert!(code.encode_block(&[0, 1]).is_err());
        assert!(code.syndrome(&[0; 6]).is_err());
    }

    #[test]
    fn segment_examples() {
        let (b, p) = segment(&BitStream::zeros(24), 24);
        assert_eq!((b.len(), p.pad_bits), (1, 0));
        let (b, p) = segment(&BitStream::from_bits(vec![1; 25]), 24);
        assert_eq!((b.len(), p.pad_bits), (2, 23));
        assert!(b[1][1..].iter().all(|&x| x == 0));
        let (b, p) = segment(&BitStream::new(), 24);
        assert_eq!((b.len(), p.num_blocks, p.pad_bits), (0, 0, 0));
        assert!(desegment(&b, &p).unwrap().is_empty());
    }

    proptest! {
        #[test]
        fn segment_bijection(bits in proptest::collection::vec(0u8..2, 0..10_000), k in 1usize..64) {
            let payload = BitStream::from(bits);
            let (blocks, plan) = segment(&payload, k);
            prop_assert_eq!(plan.num_blocks * k, plan.payload_len + plan.pad_bits);
            prop_assert!(plan.pad_bits < k);
            prop_assert_eq!(desegment(&blocks, &plan).unwrap(), payload);
        }

        #[test]
        fn systematic_and_zero_syndrome(m in proptest::collection::vec(0u8..2, 24)) {
            let code = LinearBlockCode::ldpc_49_24();
            let x = code.encode_block(&m).unwrap();
            prop_assert_eq!(&x[..24], &m[..]);
            prop_assert!(code.is_codeword(&x).unwrap());
        }
    }
}
