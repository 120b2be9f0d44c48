//! Dense GF(2) matrices stored as packed 64-bit rows.

#[derive(Clone, PartialEq, Eq)]
pub struct Gf2Matrix {
    rows: usize,
    cols: usize,
    words: usize,
    data: Vec<u64>,
}

impl Gf2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words = cols.div_ceil(64).max(1);
        Self {
            rows,
            cols,
            words,
            data: vec![0; rows * words],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// Builds from 0/1 rows; panics on ragged input.
    pub fn from_rows(rows: &[Vec<u8>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged matrix rows");
            for (j, &b) in r.iter().enumerate() {
                m.set(i, j, b);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> u8 {
        debug_assert!(r < self.rows && c < self.cols);
        ((self.data[r * self.words + c / 64] >> (c % 64)) & 1) as u8
    }

    pub fn set(&mut self, r: usize, c: usize, bit: u8) {
        debug_assert!(r < self.rows && c < self.cols);
        let w = &mut self.data[r * self.words + c / 64];
        if bit & 1 == 1 {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.words..(r + 1) * self.words]
    }

    /// `row[dst] ^= row[src]`
    pub fn xor_row_into(&mut self, src: usize, dst: usize) {
        for w in 0..self.words {
            let v = self.data[src * self.words + w];
            self.data[dst * self.words + w] ^= v;
        }
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for w in 0..self.words {
            self.data.swap(a * self.words + w, b * self.words + w);
        }
    }

    pub fn row(&self, r: usize) -> Vec<u8> {
        (0..self.cols).map(|c| self.get(r, c)).collect()
    }

    /// `M · x` over GF(2).
    pub fn mul_vec(&self, x: &[u8]) -> Vec<u8> {
        assert_eq!(x.len(), self.cols, "vector length does not match matrix columns");
        let packed = pack(x, self.words);
        (0..self.rows)
            .map(|r| {
                let parity: u32 = self
                    .row_words(r)
                    .iter()
                    .zip(&packed)
                    .map(|(a, b)| (a & b).count_ones())
                    .sum();
                (parity & 1) as u8
            })
            .collect()
    }

    /// `x · M` over GF(2) (row vector times matrix).
    pub fn vec_mul(&self, x: &[u8]) -> Vec<u8> {
        assert_eq!(x.len(), self.rows, "vector length does not match matrix rows");
        let mut acc = vec![0u64; self.words];
        for (r, &b) in x.iter().enumerate() {
            if b & 1 == 1 {
                for (a, w) in acc.iter_mut().zip(self.row_words(r)) {
                    *a ^= w;
                }
            }
        }
        (0..self.cols)
            .map(|c| ((acc[c / 64] >> (c % 64)) & 1) as u8)
            .collect()
    }

    /// `A · Bᵀ` over GF(2).
    pub fn mul_transpose(&self, other: &Gf2Matrix) -> Gf2Matrix {
        assert_eq!(self.cols, other.cols);
        let mut out = Gf2Matrix::zeros(self.rows, other.rows);
        for i in 0..self.rows {
            for j in 0..other.rows {
                let parity: u32 = self
                    .row_words(i)
                    .iter()
                    .zip(other.row_words(j))
                    .map(|(a, b)| (a & b).count_ones())
                    .sum();
                out.set(i, j, (parity & 1) as u8);
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    /// Copy with columns reordered: column `j` of the result is column
    /// `order[j]` of `self`.
    pub fn permute_columns(&self, order: &[usize]) -> Gf2Matrix {
        assert_eq!(order.len(), self.cols);
        let mut out = Gf2Matrix::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for (j, &c) in order.iter().enumerate() {
                out.set(r, j, self.get(r, c));
            }
        }
        out
    }

    pub fn rank(&self) -> usize {
        let mut a = self.clone();
        let mut rank = 0;
        for c in 0..a.cols {
            if let Some(p) = (rank..a.rows).find(|&r| a.get(r, c) == 1) {
                a.swap_rows(rank, p);
                for r in 0..a.rows {
                    if r != rank && a.get(r, c) == 1 {
                        a.xor_row_into(rank, r);
                    }
                }
                rank += 1;
            }
        }
        rank
    }
}

fn pack(x: &[u8], words: usize) -> Vec<u64> {
    let mut out = vec![0u64; words];
    for (i, &b) in x.iter().enumerate() {
        if b & 1 == 1 {
            out[i / 64] |= 1 << (i % 64);
        }
    }
    out
}

impl std::fmt::Debug for Gf2Matrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Gf2Matrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            let s: String = (0..self.cols)
                .map(|c| if self.get(r, c) == 1 { '1' } else { '0' })
                .collect();
            writeln!(f, "  {s}")?;
        }
        Ok(())
    }
}
