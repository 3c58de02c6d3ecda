//! Bit-packed ±1 matrices.

use std::fmt;
use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};
use crate::memory::tracker;

const WORD: usize = 64;

/// A dense matrix whose entries are all +1 or −1.
///
/// Entries are packed one per bit (1 ↔ +1, 0 ↔ −1) in row-major order, each
/// row starting on a fresh 64-bit word. Unused bits at the end of a row are
/// always zero so that whole-row comparisons and popcounts are exact.
pub struct SignMatrix {
    rows: usize,
    cols: usize,
    words_per_row: usize,
    bits: Vec<u64>,
}

impl SignMatrix {
    fn alloc(rows: usize, cols: usize, fill_plus: bool) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::shape(format!("empty {rows}x{cols} sign matrix")));
        }
        let entries = tracker::check_entries(rows, cols)?;
        let words_per_row = cols.div_ceil(WORD);
        let mut bits = vec![0u64; rows * words_per_row];
        if fill_plus {
            let tail = cols % WORD;
            for row in bits.chunks_exact_mut(words_per_row) {
                row.fill(u64::MAX);
                if tail != 0 {
                    row[words_per_row - 1] = (1u64 << tail) - 1;
                }
            }
        }
        tracker::on_alloc(entries);
        Ok(SignMatrix {
            rows,
            cols,
            words_per_row,
            bits,
        })
    }

    /// The 1×1 matrix `[+1]`; exempt from the size limit.
    pub(crate) fn unit() -> Self {
        tracker::on_alloc(1);
        SignMatrix {
            rows: 1,
            cols: 1,
            words_per_row: 1,
            bits: vec![1],
        }
    }

    /// All entries −1.
    pub fn minus_ones(rows: usize, cols: usize) -> Result<Self> {
        Self::alloc(rows, cols, false)
    }

    /// All entries +1.
    pub fn ones(rows: usize, cols: usize) -> Result<Self> {
        Self::alloc(rows, cols, true)
    }

    /// Builds a matrix from a closure returning `true` for +1.
    pub fn from_fn(rows: usize, cols: usize, mut plus: impl FnMut(usize, usize) -> bool) -> Result<Self> {
        let mut m = Self::minus_ones(rows, cols)?;
        for r in 0..rows {
            for c in 0..cols {
                if plus(r, c) {
                    m.set_plus(r, c, true);
                }
            }
        }
        Ok(m)
    }

    /// Builds a matrix from rows of ±1 integers.
    pub fn from_rows<R: AsRef<[i8]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::shape(format!(
                    "row {} has {} entries, expected {cols}",
                    i + 1,
                    r.len()
                )));
            }
            if let Some(v) = r.iter().find(|v| **v != 1 && **v != -1) {
                return Err(Error::shape(format!("entry {v} is not a sign")));
            }
        }
        Self::from_fn(rows.len(), cols, |r, c| rows[r].as_ref()[c] == 1)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn is_plus(&self, r: usize, c: usize) -> bool {
        debug_assert!(r < self.rows && c < self.cols);
        let w = self.bits[r * self.words_per_row + c / WORD];
        (w >> (c % WORD)) & 1 == 1
    }

    /// Entry as +1 or −1.
    #[inline]
    pub fn get(&self, r: usize, c: usize) -> i8 {
        if self.is_plus(r, c) {
            1
        } else {
            -1
        }
    }

    #[inline]
    pub(crate) fn set_plus(&mut self, r: usize, c: usize, plus: bool) {
        let w = &mut self.bits[r * self.words_per_row + c / WORD];
        let mask = 1u64 << (c % WORD);
        if plus {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    /// Packed words of one row; padding bits are zero.
    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.bits[r * self.words_per_row..(r + 1) * self.words_per_row]
    }

    pub fn row_signs(&self, r: usize) -> Vec<i8> {
        (0..self.cols).map(|c| self.get(r, c)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<i8>> {
        (0..self.rows).map(|r| self.row_signs(r)).collect()
    }

    /// Inner product of row `a` of `self` with row `b` of `other`.
    pub fn row_dot(&self, a: usize, other: &SignMatrix, b: usize) -> i64 {
        assert_eq!(self.cols, other.cols, "row_dot on different widths");
        let diff: u32 = self
            .row_words(a)
            .iter()
            .zip(other.row_words(b))
            .map(|(x, y)| (x ^ y).count_ones())
            .sum();
        self.cols as i64 - 2 * diff as i64
    }

    /// Frobenius inner product Σ a(i,j)·b(i,j).
    pub fn frobenius(&self, other: &SignMatrix) -> Result<i64> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::shape(format!(
                "frobenius product of {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let diff: u64 = self
            .bits
            .iter()
            .zip(&other.bits)
            .map(|(x, y)| (x ^ y).count_ones() as u64)
            .sum();
        Ok(self.len() as i64 - 2 * diff as i64)
    }

    /// Entry-wise negation.
    pub fn negated(&self) -> SignMatrix {
        let mut out = self.clone();
        let tail = self.cols % WORD;
        for row in out.bits.chunks_exact_mut(self.words_per_row) {
            for w in row.iter_mut() {
                *w = !*w;
            }
            if tail != 0 {
                row[self.words_per_row - 1] &= (1u64 << tail) - 1;
            }
        }
        out
    }

    pub fn transpose(&self) -> Result<SignMatrix> {
        SignMatrix::from_fn(self.cols, self.rows, |r, c| self.is_plus(c, r))
    }

    /// True when every entry is +1.
    pub fn is_all_plus(&self) -> bool {
        (0..self.rows).all(|r| (0..self.cols).all(|c| self.is_plus(r, c)))
    }

    /// Entries as a flat row-major vector of ±1.
    pub fn to_signs(&self) -> Vec<i8> {
        let mut v = Vec::with_capacity(self.len());
        for r in 0..self.rows {
            for c in 0..self.cols {
                v.push(self.get(r, c));
            }
        }
        v
    }
}

/// Kronecker product: entry `(i·b.rows + p, j·b.cols + q)` is `a(i,j)·b(p,q)`.
pub fn kron(a: &SignMatrix, b: &SignMatrix) -> Result<SignMatrix> {
    let rows = a
        .rows
        .checked_mul(b.rows)
        .ok_or(Error::Resource { requested: a.rows as u128 * b.rows as u128, limit: tracker::entry_limit() })?;
    let cols = a
        .cols
        .checked_mul(b.cols)
        .ok_or(Error::Resource { requested: a.cols as u128 * b.cols as u128, limit: tracker::entry_limit() })?;
    let mut out = SignMatrix::minus_ones(rows, cols)?;
    for i in 0..a.rows {
        for j in 0..a.cols {
            let s = a.is_plus(i, j);
            for p in 0..b.rows {
                for q in 0..b.cols {
                    if s == b.is_plus(p, q) {
                        out.set_plus(i * b.rows + p, j * b.cols + q, true);
                    }
                }
            }
        }
    }
    Ok(out)
}

impl Clone for SignMatrix {
    fn clone(&self) -> Self {
        tracker::on_alloc(self.len());
        SignMatrix {
            rows: self.rows,
            cols: self.cols,
            words_per_row: self.words_per_row,
            bits: self.bits.clone(),
        }
    }
}

impl Drop for SignMatrix {
    fn drop(&mut self) {
        tracker::on_free(self.len());
    }
}

impl PartialEq for SignMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.bits == other.bits
    }
}

impl Eq for SignMatrix {}

impl Hash for SignMatrix {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.rows.hash(state);
        self.cols.hash(state);
        self.bits.hash(state);
    }
}

impl fmt::Debug for SignMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "SignMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows.min(32) {
            let line: String = (0..self.cols.min(64))
                .map(|c| if self.is_plus(r, c) { '+' } else { '-' })
                .collect();
            writeln!(f, "  {line}")?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h2() -> SignMatrix {
        SignMatrix::from_rows(&[[1, 1], [1, -1]]).unwrap()
    }

    #[test]
    fn kron_with_unit_is_identity() {
        let one = SignMatrix::ones(1, 1).unwrap();
        let b = SignMatrix::from_rows(&[[1, -1, 1], [-1, -1, 1]]).unwrap();
        assert_eq!(kron(&one, &b).unwrap(), b);
    }

    #[test]
    fn kron_h2_h2() {
        let h4 = kron(&h2(), &h2()).unwrap();
        let expected = SignMatrix::from_rows(&[
            [1, 1, 1, 1],
            [1, -1, 1, -1],
            [1, 1, -1, -1],
            [1, -1, -1, 1],
        ])
        .unwrap();
        assert_eq!(h4, expected);
    }

    #[test]
    fn kron_row_vectors() {
        let a = SignMatrix::from_rows(&[[1, -1]]).unwrap();
        let b = SignMatrix::from_rows(&[[1, 1]]).unwrap();
        assert_eq!(kron(&a, &b).unwrap().to_rows(), vec![vec![1, 1, -1, -1]]);
    }

    #[test]
    fn kron_respects_limit() {
        let _g = tracker::set_entry_limit(8);
        let a = SignMatrix::ones(2, 2).unwrap();
        assert!(matches!(kron(&a, &a), Err(Error::Resource { .. })));
    }

    #[test]
    fn rejects_non_sign_entries() {
        assert!(SignMatrix::from_rows(&[[1, 0]]).is_err());
        assert!(SignMatrix::from_rows(&[vec![1, 1], vec![1]]).is_err());
    }

    #[test]
    fn negation_keeps_padding_clear() {
        let m = SignMatrix::from_rows(&[[1, -1, 1]]).unwrap();
        let n = m.negated();
        assert_eq!(n.to_rows(), vec![vec![-1, 1, -1]]);
        assert_eq!(m.frobenius(&n).unwrap(), -3);
        assert_eq!(n.row_words(0), &[0b010]);
    }

    #[test]
    fn wide_rows_span_words() {
        let m = SignMatrix::from_fn(3, 130, |r, c| (r + c) % 3 == 0).unwrap();
        let t = m.transpose().unwrap().transpose().unwrap();
        assert_eq!(m, t);
        assert_eq!(m.row_dot(0, &m, 0), 130);
    }

    #[test]
    fn tracking_counts_clone_and_drop() {
        let (_, c) = tracker::instrument(|| {
            let a = SignMatrix::ones(4, 4).unwrap();
            let b = a.clone();
            drop(a);
            drop(b);
        });
        assert_eq!(c.peak_entries, 32);
        assert_eq!(c.allocated_entries, 32);
        assert_eq!(c.current_entries, 0);
    }
}
