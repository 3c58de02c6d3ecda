//! Sylvester Hadamard matrices and the classical row-reshape construction of
//! two-dimensional patterns.
//!
//! Everything downstream is cross-checked against this module: the pipeline
//! encoder must reproduce exactly the set of reshaped rows built here.

mod matrix;
mod pattern;

pub use matrix::{kron, SignMatrix};
pub use pattern::{Lineage, Pattern, RuleIndex};

use crate::error::{Error, Result};
use crate::memory::tracker;

/// Recursion direction for the Kronecker construction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Convention {
    /// `H_{2^k} = H_2 ⊗ H_{2^{k-1}}`.
    #[default]
    LeftExpand,
    /// `H_{2^k} = H_{2^{k-1}} ⊗ H_2`.
    RightExpand,
}

/// How a length-`p²` row is laid out on a `p × p` grid.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum ReshapeOrder {
    /// Column index `j` goes to `(j / p, j % p)`.
    #[default]
    RowMajor,
    /// Bits of `j` are de-interleaved: bit `2m+1` is bit `m` of the row
    /// coordinate, bit `2m` is bit `m` of the column coordinate. Dropping
    /// low-order bits of `j` then coarsens both axes, which is what makes
    /// column stretching line up with square block resolutions.
    Interleaved,
}

impl ReshapeOrder {
    /// Grid position `(y, x)` of flat index `j` on a `2^half × 2^half` grid.
    #[inline]
    pub fn position(self, j: usize, half: u32) -> (usize, usize) {
        match self {
            ReshapeOrder::RowMajor => (j >> half, j & ((1 << half) - 1)),
            ReshapeOrder::Interleaved => {
                let (mut y, mut x) = (0, 0);
                for m in 0..half {
                    x |= ((j >> (2 * m)) & 1) << m;
                    y |= ((j >> (2 * m + 1)) & 1) << m;
                }
                (y, x)
            }
        }
    }

    /// Flat index of grid position `(y, x)`; inverse of [`position`](Self::position).
    #[inline]
    pub fn flat_index(self, y: usize, x: usize, half: u32) -> usize {
        match self {
            ReshapeOrder::RowMajor => (y << half) | x,
            ReshapeOrder::Interleaved => {
                let mut j = 0;
                for m in 0..half {
                    j |= ((x >> m) & 1) << (2 * m);
                    j |= ((y >> m) & 1) << (2 * m + 1);
                }
                j
            }
        }
    }
}

/// A Sylvester Hadamard matrix of order `2^k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HadamardMatrix {
    exponent: u32,
    body: SignMatrix,
    convention: Convention,
}

impl HadamardMatrix {
    /// Wraps an arbitrary square power-of-two sign matrix without checking
    /// orthogonality; see [`verify_hadamard`].
    pub fn from_body(body: SignMatrix, convention: Convention) -> Result<Self> {
        if !body.is_square() || !body.rows().is_power_of_two() {
            return Err(Error::shape(format!(
                "Hadamard body must be square of power-of-two order, got {}x{}",
                body.rows(),
                body.cols()
            )));
        }
        Ok(HadamardMatrix {
            exponent: body.rows().trailing_zeros(),
            body,
            convention,
        })
    }

    pub fn order(&self) -> usize {
        self.body.rows()
    }

    /// `k` such that the order is `2^k`.
    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn body(&self) -> &SignMatrix {
        &self.body
    }
}

/// Builds `H_{2^k}` by repeated Kronecker expansion with `H_2`.
///
/// The recursion runs in place inside the final buffer, so the only matrix
/// allocated is the result itself.
pub fn build_hadamard(k: u32, convention: Convention) -> Result<HadamardMatrix> {
    if k >= usize::BITS / 2 {
        return Err(Error::Resource {
            requested: 1u128 << (2 * k.min(63)),
            limit: tracker::entry_limit(),
        });
    }
    let n = 1usize << k;
    let mut m = SignMatrix::minus_ones(n, n)?;
    m.set_plus(0, 0, true);
    let mut size = 1;
    while size < n {
        match convention {
            // [[H, H], [H, -H]]
            Convention::LeftExpand => {
                for r in 0..size {
                    for c in 0..size {
                        let v = m.is_plus(r, c);
                        m.set_plus(r, c + size, v);
                        m.set_plus(r + size, c, v);
                        m.set_plus(r + size, c + size, !v);
                    }
                }
            }
            // each entry h becomes [[h, h], [h, -h]]; walk backwards so
            // sources are read before they are overwritten
            Convention::RightExpand => {
                for r in (0..size).rev() {
                    for c in (0..size).rev() {
                        let v = m.is_plus(r, c);
                        m.set_plus(2 * r, 2 * c, v);
                        m.set_plus(2 * r, 2 * c + 1, v);
                        m.set_plus(2 * r + 1, 2 * c, v);
                        m.set_plus(2 * r + 1, 2 * c + 1, !v);
                    }
                }
            }
        }
        size *= 2;
    }
    Ok(HadamardMatrix {
        exponent: k,
        body: m,
        convention,
    })
}

/// True iff `H·Hᵀ = N·I`, evaluated exactly.
pub fn verify_hadamard(h: &HadamardMatrix) -> bool {
    let body = h.body();
    let n = h.order();
    if !body.is_square() {
        return false;
    }
    (0..n).all(|a| {
        (a..n).all(|b| {
            let dot = body.row_dot(a, body, b);
            if a == b {
                dot == n as i64
            } else {
                dot == 0
            }
        })
    })
}

/// Reshapes 1-based row `m` of `h` into a `p × p` pattern, `p² = order`.
pub fn reshape_row(h: &HadamardMatrix, m: usize, order: ReshapeOrder) -> Result<Pattern> {
    let k = h.exponent();
    if !k.is_multiple_of(2) {
        return Err(Error::shape(format!(
            "order 2^{k} is not a perfect square; rows cannot be reshaped"
        )));
    }
    let n = h.order();
    if m == 0 || m > n {
        return Err(Error::Index { index: m, len: n });
    }
    let half = k / 2;
    let p = 1usize << half;
    let body = h.body();
    let row = m - 1;
    let out = SignMatrix::from_fn(p, p, |y, x| body.is_plus(row, order.flat_index(y, x, half)))?;
    Pattern::new(out, half, Lineage::Row(m))
}

/// Repeats every entry `factor` times along its row: `kron(m, 1_{1×factor})`.
pub fn stretch_columns(m: &SignMatrix, factor: usize) -> Result<SignMatrix> {
    if factor == 0 {
        return Err(Error::contract("stretch factor must be positive"));
    }
    let cols = m
        .cols()
        .checked_mul(factor)
        .ok_or_else(|| Error::shape("stretched width overflows"))?;
    SignMatrix::from_fn(m.rows(), cols, |r, c| m.is_plus(r, c / factor))
}

/// Enlarges a pattern to `target_side` by replacing each entry with a
/// constant block: `kron(p, 1_{f×f})`.
pub fn upscale(p: &Pattern, target_side: usize) -> Result<Pattern> {
    let side = p.side();
    if target_side < side || !target_side.is_multiple_of(side) {
        return Err(Error::shape(format!(
            "cannot upscale side {side} to {target_side}"
        )));
    }
    let f = target_side / side;
    let body = p.body();
    let out = SignMatrix::from_fn(target_side, target_side, |y, x| body.is_plus(y / f, x / f))?;
    Pattern::new(out, p.level(), p.lineage().clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn sorted_rows(h: &HadamardMatrix) -> BTreeSet<Vec<i8>> {
        h.body().to_rows().into_iter().collect()
    }

    #[test]
    fn base_cases() {
        for conv in [Convention::LeftExpand, Convention::RightExpand] {
            assert_eq!(build_hadamard(0, conv).unwrap().body().to_rows(), vec![vec![1]]);
            assert_eq!(
                build_hadamard(1, conv).unwrap().body().to_rows(),
                vec![vec![1, 1], vec![1, -1]]
            );
        }
    }

    #[test]
    fn left_expand_matches_explicit_kron() {
        let h2 = build_hadamard(1, Convention::LeftExpand).unwrap();
        let mut acc = build_hadamard(0, Convention::LeftExpand).unwrap().body().clone();
        for k in 1..=6 {
            acc = kron(h2.body(), &acc).unwrap();
            assert_eq!(&acc, build_hadamard(k, Convention::LeftExpand).unwrap().body());
        }
    }

    #[test]
    fn right_expand_matches_explicit_kron() {
        let h2 = build_hadamard(1, Convention::RightExpand).unwrap();
        let mut acc = build_hadamard(0, Convention::RightExpand).unwrap().body().clone();
        for k in 1..=6 {
            acc = kron(&acc, h2.body()).unwrap();
            assert_eq!(&acc, build_hadamard(k, Convention::RightExpand).unwrap().body());
        }
    }

    #[test]
    fn conventions_share_row_set() {
        let l = build_hadamard(3, Convention::LeftExpand).unwrap();
        let r = build_hadamard(3, Convention::RightExpand).unwrap();
        assert_eq!(sorted_rows(&l), sorted_rows(&r));
        // Kronecker associativity makes both recursions the same matrix.
        assert_eq!(l.body(), r.body());
    }

    #[test]
    fn verify_accepts_and_rejects() {
        let h4 = build_hadamard(2, Convention::LeftExpand).unwrap();
        assert!(verify_hadamard(&h4));

        let b = h4.body();
        let flipped = SignMatrix::from_fn(4, 4, |r, c| b.is_plus(r, c) ^ (r == 2 && c == 1)).unwrap();
        let broken = HadamardMatrix::from_body(flipped, Convention::LeftExpand).unwrap();
        assert!(!verify_hadamard(&broken));

        let ones = HadamardMatrix::from_body(SignMatrix::ones(2, 2).unwrap(), Convention::LeftExpand).unwrap();
        assert!(!verify_hadamard(&ones));
    }

    #[test]
    fn build_respects_limit() {
        let _g = tracker::set_entry_limit(1 << 10);
        assert!(build_hadamard(5, Convention::LeftExpand).is_ok());
        assert!(matches!(
            build_hadamard(6, Convention::LeftExpand),
            Err(Error::Resource { .. })
        ));
        assert!(build_hadamard(40, Convention::LeftExpand).is_err());
    }

    #[test]
    fn reshape_examples() {
        let h4 = build_hadamard(2, Convention::LeftExpand).unwrap();
        let p1 = reshape_row(&h4, 1, ReshapeOrder::RowMajor).unwrap();
        assert_eq!(p1.body().to_rows(), vec![vec![1, 1], vec![1, 1]]);
        let p2 = reshape_row(&h4, 2, ReshapeOrder::RowMajor).unwrap();
        assert_eq!(p2.body().to_rows(), vec![vec![1, -1], vec![1, -1]]);
        assert_eq!(p2.lineage(), &Lineage::Row(2));
        assert_eq!(p2.level(), 1);
    }

    #[test]
    fn reshape_errors() {
        let h8 = build_hadamard(3, Convention::LeftExpand).unwrap();
        assert!(matches!(reshape_row(&h8, 1, ReshapeOrder::RowMajor), Err(Error::Shape(_))));
        let h4 = build_hadamard(2, Convention::LeftExpand).unwrap();
        assert!(matches!(
            reshape_row(&h4, 0, ReshapeOrder::RowMajor),
            Err(Error::Index { index: 0, len: 4 })
        ));
        assert!(matches!(reshape_row(&h4, 5, ReshapeOrder::RowMajor), Err(Error::Index { .. })));
    }

    #[test]
    fn reshaped_rows_are_orthogonal() {
        let h16 = build_hadamard(4, Convention::LeftExpand).unwrap();
        for order in [ReshapeOrder::RowMajor, ReshapeOrder::Interleaved] {
            let pats: Vec<_> = (1..=16).map(|m| reshape_row(&h16, m, order).unwrap()).collect();
            for (a, pa) in pats.iter().enumerate() {
                for (b, pb) in pats.iter().enumerate() {
                    let expected = if a == b { 16 } else { 0 };
                    assert_eq!(pa.inner(pb).unwrap(), expected);
                }
            }
        }
    }

    #[test]
    fn reshape_orders_give_same_set() {
        let h = build_hadamard(6, Convention::LeftExpand).unwrap();
        let set = |order| -> std::collections::HashSet<SignMatrix> {
            (1..=64)
                .map(|m| reshape_row(&h, m, order).unwrap().into_body())
                .collect()
        };
        assert_eq!(set(ReshapeOrder::RowMajor), set(ReshapeOrder::Interleaved));
    }

    #[test]
    fn interleaved_position_roundtrip() {
        for half in 0..5 {
            for j in 0..(1usize << (2 * half)) {
                let (y, x) = ReshapeOrder::Interleaved.position(j, half);
                assert_eq!(ReshapeOrder::Interleaved.flat_index(y, x, half), j);
                let (y, x) = ReshapeOrder::RowMajor.position(j, half);
                assert_eq!(ReshapeOrder::RowMajor.flat_index(y, x, half), j);
            }
        }
    }

    #[test]
    fn stretch_examples() {
        let m = SignMatrix::from_rows(&[[1, -1]]).unwrap();
        assert_eq!(stretch_columns(&m, 2).unwrap().to_rows(), vec![vec![1, 1, -1, -1]]);
        assert_eq!(stretch_columns(&m, 1).unwrap(), m);
        let h16 = build_hadamard(4, Convention::LeftExpand).unwrap();
        let s = stretch_columns(h16.body(), 4).unwrap();
        assert_eq!((s.rows(), s.cols()), (16, 64));
        let ones = SignMatrix::ones(1, 4).unwrap();
        assert_eq!(s, kron(h16.body(), &ones).unwrap());
    }

    #[test]
    fn upscale_examples() {
        let p = Pattern::new(
            SignMatrix::from_rows(&[[1, -1], [-1, 1]]).unwrap(),
            1,
            Lineage::Row(4),
        )
        .unwrap();
        let u = upscale(&p, 4).unwrap();
        assert_eq!(
            u.body().to_rows(),
            vec![
                vec![1, 1, -1, -1],
                vec![1, 1, -1, -1],
                vec![-1, -1, 1, 1],
                vec![-1, -1, 1, 1]
            ]
        );
        assert_eq!(u.level(), 1);
        assert_eq!(u.native_side(), 2);
        assert!(upscale(&p, 3).is_err());
        assert!(upscale(&u, 2).is_err());

        let seed = Pattern::new(SignMatrix::ones(1, 1).unwrap(), 0, Lineage::Rules(vec![])).unwrap();
        assert!(upscale(&seed, 8).unwrap().body().is_all_plus());
    }

    #[test]
    fn upscaled_level_one_pattern_is_a_row_of_h16() {
        // [[+1,+1],[-1,-1]]
        let p = Pattern::new(
            SignMatrix::from_rows(&[[1, 1], [-1, -1]]).unwrap(),
            1,
            Lineage::Rules(vec![RuleIndex::new(2).unwrap()]),
        )
        .unwrap();
        let u = upscale(&p, 4).unwrap();
        let h16 = build_hadamard(4, Convention::LeftExpand).unwrap();
        let hits = (1..=16)
            .filter(|&m| reshape_row(&h16, m, ReshapeOrder::RowMajor).unwrap().body() == u.body())
            .count();
        assert_eq!(hits, 1);
    }
}
