//! Dense vectors and matrices over GF(2).
//!
//! Bits are packed into `u64` words. All public accessors are element-wise and
//! 0-based; row `i` here is row `i + 1` in 1-based matrix notation.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};

const WORD: usize = 64;

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

/// A row vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVector {
    words: Vec<u64>,
    len: usize,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self { words: vec![0; words_for(len)], len }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = Self::zeros(len);
        for i in 0..len {
            v.set(i, true);
        }
        v
    }

    /// Builds a vector from 0/1 values. Any nonzero value is treated as 1.
    pub fn from_bits(bits: &[u8]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b != 0);
        }
        v
    }

    pub fn from_bools<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut v = Self::default();
        for b in bits {
            v.push(b);
        }
        v
    }

    /// Unpacks the low `len` bits of `value`, least significant bit first.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= WORD, "from_u64 supports at most 64 bits");
        let mut v = Self::zeros(len);
        if len > 0 {
            let mask = if len == WORD { u64::MAX } else { (1u64 << len) - 1 };
            v.words[0] = value & mask;
        }
        v
    }

    /// Packs the vector into an integer, element 0 in the least significant bit.
    pub fn to_u64(&self) -> u64 {
        assert!(self.len <= WORD, "to_u64 supports at most 64 bits");
        self.words.first().copied().unwrap_or(0)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        let w = &mut self.words[i / WORD];
        if bit {
            *w |= 1 << (i % WORD);
        } else {
            *w &= !(1 << (i % WORD));
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        self.words[i / WORD] ^= 1 << (i % WORD);
    }

    pub fn push(&mut self, bit: bool) {
        if self.len % WORD == 0 {
            self.words.push(0);
        }
        self.len += 1;
        self.set(self.len - 1, bit);
    }

    pub fn extend_from(&mut self, other: &BitVector) {
        for b in other.iter() {
            self.push(b);
        }
    }

    /// Reads `count` bits starting at `start` into an integer (LSB first).
    pub fn get_bits(&self, start: usize, count: usize) -> u64 {
        assert!(count <= WORD);
        assert!(start + count <= self.len, "range {start}..{} out of bounds", start + count);
        if count == 0 {
            return 0;
        }
        let w = start / WORD;
        let off = start % WORD;
        let mut value = self.words[w] >> off;
        if off + count > WORD {
            value |= self.words[w + 1] << (WORD - off);
        }
        if count == WORD {
            value
        } else {
            value & ((1u64 << count) - 1)
        }
    }

    /// Writes the low `count` bits of `value` starting at `start`.
    pub fn set_bits(&mut self, start: usize, count: usize, value: u64) {
        for j in 0..count {
            self.set(start + j, (value >> j) & 1 == 1);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn to_bits(&self) -> Vec<u8> {
        self.iter().map(u8::from).collect()
    }

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn xor(&self, other: &BitVector) -> Result<BitVector> {
        if self.len != other.len {
            return Err(Error::dimension("vector xor", self.len, other.len));
        }
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a ^ b).collect();
        Ok(BitVector { words, len: self.len })
    }

    pub fn xor_assign(&mut self, other: &BitVector) -> Result<()> {
        if self.len != other.len {
            return Err(Error::dimension("vector xor", self.len, other.len));
        }
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
        Ok(())
    }

    pub fn hamming_distance(&self, other: &BitVector) -> Result<usize> {
        if self.len != other.len {
            return Err(Error::dimension("hamming distance", self.len, other.len));
        }
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum())
    }

    /// GF(2) inner product.
    pub fn dot(&self, other: &BitVector) -> Result<bool> {
        if self.len != other.len {
            return Err(Error::dimension("inner product", self.len, other.len));
        }
        let ones: u32 = self.words.iter().zip(&other.words).map(|(a, b)| (a & b).count_ones()).sum();
        Ok(ones % 2 == 1)
    }

    /// Vector-matrix product `self · m`.
    pub fn mul_mat(&self, m: &BitMatrix) -> Result<BitVector> {
        gf2_vec_mat(self, m)
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut v = BitVector::default();
        for (i, ch) in s.trim().chars().enumerate() {
            match ch {
                '0' => v.push(false),
                '1' => v.push(true),
                other => {
                    return Err(Error::Parse(format!("invalid bit character {other:?} at position {i}")))
                }
            }
        }
        Ok(v)
    }
}

/// A dense `rows × cols` matrix over GF(2), stored row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BitVector>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![BitVector::zeros(cols); rows] }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Self::zeros(size, size);
        for i in 0..size {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix from rows of 0/1 values.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        Self::from_rows_with_cols(rows, cols)
    }

    /// Like [`BitMatrix::from_rows`] but with an explicit column count, so that
    /// matrices with zero rows keep their width.
    pub fn from_rows_with_cols<R: AsRef<[u8]>>(rows: &[R], cols: usize) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len());
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::InvalidInput(format!(
                    "row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            if let Some(bad) = r.iter().find(|&&b| b > 1) {
                return Err(Error::InvalidInput(format!("matrix entry {bad} is not 0 or 1")));
            }
            data.push(BitVector::from_bits(r));
        }
        Ok(Self { rows: rows.len(), cols, data })
    }

    pub fn from_columns(columns: &[BitVector], rows: usize) -> Result<Self> {
        let mut m = Self::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            if c.len() != rows {
                return Err(Error::dimension("matrix column", rows, c.len()));
            }
            for i in 0..rows {
                m.set(i, j, c.get(i));
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        assert!(i < self.rows, "row {i} out of range for {} rows", self.rows);
        self.data[i].get(j)
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, bit: bool) {
        assert!(i < self.rows, "row {i} out of range for {} rows", self.rows);
        self.data[i].set(j, bit);
    }

    pub fn row(&self, i: usize) -> &BitVector {
        &self.data[i]
    }

    pub fn column(&self, j: usize) -> BitVector {
        assert!(j < self.cols, "column {j} out of range for {} columns", self.cols);
        BitVector::from_bools((0..self.rows).map(|i| self.get(i, j)))
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.get(i, j) {
                    t.set(j, i, true);
                }
            }
        }
        t
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(BitVector::is_zero)
    }

    /// Horizontal concatenation `(self | other)`.
    pub fn hconcat(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.rows != other.rows {
            return Err(Error::dimension("horizontal concatenation (rows)", self.rows, other.rows));
        }
        let mut data = self.data.clone();
        for (row, extra) in data.iter_mut().zip(&other.data) {
            row.extend_from(extra);
        }
        Ok(BitMatrix { rows: self.rows, cols: self.cols + other.cols, data })
    }

    pub fn remove_column(&self, j: usize) -> Result<BitMatrix> {
        if j >= self.cols {
            return Err(Error::InvalidInput(format!(
                "column {j} out of range for {} columns",
                self.cols
            )));
        }
        let data = self
            .data
            .iter()
            .map(|r| BitVector::from_bools(r.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, b)| b)))
            .collect();
        Ok(BitMatrix { rows: self.rows, cols: self.cols - 1, data })
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        self.data.iter().map(BitVector::to_bits).collect()
    }

    /// Matrix product `self · other`.
    pub fn mul(&self, other: &BitMatrix) -> Result<BitMatrix> {
        gf2_mat_mul(self, other)
    }

    /// Draws a matrix with i.i.d. uniform entries.
    pub fn random<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> BitMatrix {
        sample_uniform_matrix(rows, cols, rng)
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitMatrix[{}x{}](", self.rows, self.cols)?;
        for (i, r) in self.data.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{r}")?;
        }
        f.write_str(")")
    }
}

/// `v · M`: `result[j] = XOR_i v[i] & M[i][j]`.
pub fn gf2_vec_mat(v: &BitVector, m: &BitMatrix) -> Result<BitVector> {
    if v.len() != m.rows() {
        return Err(Error::DimensionMismatch {
            context: format!("vector-matrix product with a {}x{} matrix", m.rows(), m.cols()),
            expected: m.rows(),
            found: v.len(),
        });
    }
    let mut out = BitVector::zeros(m.cols());
    for i in 0..v.len() {
        if v.get(i) {
            out.xor_assign(m.row(i))?;
        }
    }
    Ok(out)
}

pub fn gf2_mat_mul(a: &BitMatrix, b: &BitMatrix) -> Result<BitMatrix> {
    if a.cols() != b.rows() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "matrix product {}x{} · {}x{}",
                a.rows(),
                a.cols(),
                b.rows(),
                b.cols()
            ),
            expected: a.cols(),
            found: b.rows(),
        });
    }
    let mut data = Vec::with_capacity(a.rows());
    for i in 0..a.rows() {
        data.push(gf2_vec_mat(a.row(i), b)?);
    }
    Ok(BitMatrix { rows: a.rows(), cols: b.cols(), data })
}

/// Uniform draw from `F_2^{rows × cols}`. The result depends only on the
/// generator state, entries are drawn row by row.
pub fn sample_uniform_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> BitMatrix {
    let mut m = BitMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            if rng.gen::<bool>() {
                m.set(i, j, true);
            }
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn mat(rows: &[&[u8]]) -> BitMatrix {
        BitMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn vec_mat_examples() {
        let m = mat(&[&[1, 0], &[1, 1]]);
        assert_eq!(gf2_vec_mat(&BitVector::from_bits(&[0, 0]), &m).unwrap().to_bits(), vec![0, 0]);
        let m = mat(&[&[1, 1], &[0, 1]]);
        assert_eq!(gf2_vec_mat(&BitVector::from_bits(&[1, 0]), &m).unwrap().to_bits(), vec![1, 1]);
        assert_eq!(gf2_vec_mat(&BitVector::from_bits(&[1, 1]), &m).unwrap().to_bits(), vec![1, 0]);
    }

    #[test]
    fn vec_mat_dimension_error_names_shapes() {
        let m = mat(&[&[1, 1], &[0, 1]]);
        let err = gf2_vec_mat(&BitVector::from_bits(&[1, 0, 1]), &m).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("2x2"), "{msg}");
        assert!(msg.contains('3'), "{msg}");
    }

    #[test]
    fn mat_mul_examples() {
        let b = mat(&[&[1, 0], &[1, 1]]);
        assert_eq!(gf2_mat_mul(&BitMatrix::identity(2), &b).unwrap(), b);
        let a = mat(&[&[1, 1]]);
        let c = mat(&[&[1], &[1]]);
        assert_eq!(gf2_mat_mul(&a, &c).unwrap(), mat(&[&[0]]));
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let any = sample_uniform_matrix(2, 3, &mut rng);
        assert_eq!(gf2_mat_mul(&BitMatrix::zeros(1, 2), &any).unwrap(), BitMatrix::zeros(1, 3));
        assert!(gf2_mat_mul(&a, &BitMatrix::zeros(3, 1)).is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_handles_empty_shapes() {
        let a = sample_uniform_matrix(2, 2, &mut ChaCha8Rng::seed_from_u64(11));
        let b = sample_uniform_matrix(2, 2, &mut ChaCha8Rng::seed_from_u64(11));
        assert_eq!(a, b);
        let e = sample_uniform_matrix(0, 3, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!((e.rows(), e.cols()), (0, 3));
    }

    #[test]
    fn sampling_density_is_balanced() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut ones = 0usize;
        let mut total = 0usize;
        while total < 1_000_000 {
            let m = sample_uniform_matrix(64, 64, &mut rng);
            ones += (0..64).map(|i| m.row(i).weight()).sum::<usize>();
            total += 64 * 64;
        }
        let density = ones as f64 / total as f64;
        assert!((0.499..=0.501).contains(&density), "density {density}");
    }

    #[test]
    fn bit_ranges_cross_word_boundaries() {
        let mut v = BitVector::zeros(130);
        v.set_bits(60, 8, 0b1011_0111);
        assert_eq!(v.get_bits(60, 8), 0b1011_0111);
        assert_eq!(v.weight(), 6);
        let s = v.to_string();
        assert_eq!(s.parse::<BitVector>().unwrap(), v);
    }

    fn arb_matrix(rows: usize, cols: usize) -> impl Strategy<Value = BitMatrix> {
        proptest::collection::vec(proptest::collection::vec(0u8..2, cols), rows)
            .prop_map(move |r| BitMatrix::from_rows_with_cols(&r, cols).unwrap())
    }

    proptest! {
        #[test]
        fn mat_mul_is_associative(
            (a, b, c) in (1usize..6, 1usize..6, 1usize..6, 1usize..6)
                .prop_flat_map(|(p, q, r, s)| (arb_matrix(p, q), arb_matrix(q, r), arb_matrix(r, s)))
        ) {
            let left = a.mul(&b).unwrap().mul(&c).unwrap();
            let right = a.mul(&b.mul(&c).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn vec_mat_is_compatible_with_mat_mul(
            (v, a, b) in (1usize..8, 1usize..8, 1usize..8).prop_flat_map(|(p, q, r)| (
                proptest::collection::vec(0u8..2, p).prop_map(|b| BitVector::from_bits(&b)),
                arb_matrix(p, q),
                arb_matrix(q, r),
            ))
        ) {
            let left = v.mul_mat(&a.mul(&b).unwrap()).unwrap();
            let right = v.mul_mat(&a).unwrap().mul_mat(&b).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn transpose_is_involution(m in (0usize..7, 0usize..7).prop_flat_map(|(r, c)| arb_matrix(r, c))) {
            prop_assert_eq!(m.transpose().transpose(), m);
        }
    }
}
