//! Optimized pattern orderings.
//!
//! Three independent routes produce the multi-resolution progressive
//! (MPCGI) and Russian-Dolls (RD) orderings:
//!
//! * the pipeline encoder, whose canonical level-major output already has the
//!   nested-resolution property;
//! * the classical search: build the full Hadamard matrix, stretch every
//!   lower-order matrix to full width, locate its rows by exact comparison
//!   and move them to the front;
//! * pure index arithmetic, using the fact that the rows of `H_{2^K}` whose
//!   low `K − k` index bits are zero are the stretched rows of `H_{2^k}`.
//!
//! The search and index routes lay rows out on the grid with
//! [`ReshapeOrder::Interleaved`], under which the stretched lower-order rows
//! are block-constant in two dimensions.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::hadamard::{
    build_hadamard, reshape_row, stretch_columns, upscale, Convention, HadamardMatrix, Pattern,
    ReshapeOrder, SignMatrix,
};
use crate::pipeline::{generate, Traversal};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum OrderingScheme {
    #[default]
    Natural,
    Mpcgi,
    RussianDolls,
}

impl OrderingScheme {
    /// Prefix lengths at which the sequence of level `l` completes a
    /// block-resolution space.
    pub fn milestones(self, l: u32) -> Vec<usize> {
        match self {
            OrderingScheme::Natural => vec![1usize << (2 * l)],
            OrderingScheme::Mpcgi => (0..=l).map(|t| 1usize << (2 * t)).collect(),
            OrderingScheme::RussianDolls => (0..=2 * l).map(|j| 1usize << j).collect(),
        }
    }

    /// Block height and width whose constant images the milestone prefix of
    /// length `prefix` spans, for a sequence of side `2^l`.
    pub fn milestone_blocks(self, l: u32, prefix: usize) -> Option<(usize, usize)> {
        if !prefix.is_power_of_two() {
            return None;
        }
        let j = prefix.trailing_zeros();
        if j > 2 * l {
            return None;
        }
        match self {
            OrderingScheme::Natural => (j == 2 * l).then_some((1, 1)),
            OrderingScheme::Mpcgi => j.is_multiple_of(2).then(|| {
                let b = 1usize << (l - j / 2);
                (b, b)
            }),
            OrderingScheme::RussianDolls => {
                let t = j / 2;
                let w = 1usize << (l - t);
                Some(if j.is_multiple_of(2) { (w, w) } else { (w / 2, w) })
            }
        }
    }
}

/// Which construction produced a sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Provenance {
    /// Rows of a Hadamard matrix reshaped in natural order.
    NaturalReshape,
    Pipeline,
    ThdcSearch,
    IndexExtraction,
    /// Read from a pattern file.
    Loaded,
}

/// An ordered list of patterns sharing one display side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternSequence {
    pub scheme: OrderingScheme,
    pub display_side: usize,
    pub provenance: Provenance,
    /// Set for sequences reshaped from a Hadamard matrix.
    pub convention: Option<Convention>,
    pub items: Vec<Pattern>,
}

impl PatternSequence {
    pub fn new(
        scheme: OrderingScheme,
        display_side: usize,
        provenance: Provenance,
        convention: Option<Convention>,
        items: Vec<Pattern>,
    ) -> Result<Self> {
        if !display_side.is_power_of_two() {
            return Err(Error::shape(format!("display side {display_side} is not a power of two")));
        }
        if let Some(p) = items.iter().find(|p| p.side() != display_side) {
            return Err(Error::shape(format!(
                "pattern of side {} in a sequence of side {display_side}",
                p.side()
            )));
        }
        if items.len() > display_side * display_side {
            return Err(Error::shape("more patterns than pixels"));
        }
        Ok(PatternSequence {
            scheme,
            display_side,
            provenance,
            convention,
            items,
        })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// `l` such that the display side is `2^l`.
    pub fn level(&self) -> u32 {
        self.display_side.trailing_zeros()
    }

    pub fn truncated(&self, len: usize) -> PatternSequence {
        let mut s = self.clone();
        s.items.truncate(len);
        s
    }
}

/// A bijection on `1..=n`, listing which 1-based row comes at each position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowPermutation {
    indices: Vec<usize>,
}

impl RowPermutation {
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        let n = indices.len();
        let mut seen = vec![false; n];
        for &i in &indices {
            if i == 0 || i > n {
                return Err(Error::Index { index: i, len: n });
            }
            if std::mem::replace(&mut seen[i - 1], true) {
                return Err(Error::contract(format!("row {i} appears twice")));
            }
        }
        Ok(RowPermutation { indices })
    }

    pub fn identity(n: usize) -> Self {
        RowPermutation {
            indices: (1..=n).collect(),
        }
    }

    pub fn order_n(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }
}

/// Natural-order sequence: rows `1..=4^l` of `H_{4^l}` reshaped in turn.
pub fn natural_sequence(l: u32, convention: Convention, order: ReshapeOrder) -> Result<PatternSequence> {
    let h = build_hadamard(2 * l, convention)?;
    let items = (1..=h.order())
        .map(|m| reshape_row(&h, m, order))
        .collect::<Result<Vec<_>>>()?;
    PatternSequence::new(
        OrderingScheme::Natural,
        1 << l,
        Provenance::NaturalReshape,
        Some(convention),
        items,
    )
}

fn pipeline_sequence(l: u32, scheme: OrderingScheme) -> Result<PatternSequence> {
    let side = 1usize << l;
    let items = generate(l, Traversal::BreadthFirst)?
        .map(|p| p.and_then(|p| upscale(&p, side)))
        .collect::<Result<Vec<_>>>()?;
    PatternSequence::new(scheme, side, Provenance::Pipeline, None, items)
}

/// Multi-resolution progressive sequence from the pipeline: the prefix of
/// length `4^t` holds every pattern of levels `0..=t`.
pub fn mpcgi_sequence(l: u32) -> Result<PatternSequence> {
    pipeline_sequence(l, OrderingScheme::Mpcgi)
}

/// Russian-Dolls sequence from the pipeline with the fixed rule order.
///
/// Within a level the patterns are ordered by rule path with the first rule
/// most significant, so after the `4^t` patterns of levels `≤ t` come the
/// `4^t` level-`t+1` patterns whose first rule is 2. Those refine rows only,
/// which completes the `2^(t+1) × 2^t` resolution; first rule 3 then supplies
/// the transposed refinement.
pub fn rd_sequence(l: u32) -> Result<PatternSequence> {
    pipeline_sequence(l, OrderingScheme::RussianDolls)
}

/// For each row of `needles`, the 1-based index of the identical row in
/// `haystack`.
pub fn match_rows(haystack: &HadamardMatrix, needles: &SignMatrix) -> Result<Vec<usize>> {
    let body = haystack.body();
    if needles.cols() != body.cols() {
        return Err(Error::shape(format!(
            "needles have {} columns, haystack order is {}",
            needles.cols(),
            body.cols()
        )));
    }
    let mut index: HashMap<&[u64], Option<usize>> = HashMap::with_capacity(body.rows());
    for r in 0..body.rows() {
        index
            .entry(body.row_words(r))
            .and_modify(|slot| *slot = None)
            .or_insert(Some(r + 1));
    }
    (0..needles.rows())
        .map(|r| match index.get(needles.row_words(r)) {
            Some(Some(i)) => Ok(*i),
            Some(None) => Err(Error::inconsistency(format!(
                "needle row {} matches several haystack rows",
                r + 1
            ))),
            None => Err(Error::inconsistency(format!("needle row {} has no match", r + 1))),
        })
        .collect()
}

/// One stage of the classical search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchStage {
    /// Exponent of the lower-order matrix `H_{2^k}` that was stretched.
    pub k: u32,
    pub matched: usize,
}

/// Moves the rows in `front` ahead of the others, preserving relative order.
fn front_rank(order: &mut Vec<usize>, front: &[usize]) {
    let mut mark = vec![false; order.len() + 1];
    for &i in front {
        mark[i] = true;
    }
    let (mut head, tail): (Vec<usize>, Vec<usize>) = order.iter().partition(|&&i| mark[i]);
    head.extend(tail);
    *order = head;
}

fn thdc_search(
    big_k: u32,
    stages: impl Iterator<Item = u32>,
    convention: Convention,
) -> Result<(RowPermutation, Vec<SearchStage>)> {
    let h = build_hadamard(big_k, convention)?;
    let mut order: Vec<usize> = (1..=h.order()).collect();
    let mut log = Vec::new();
    for k in stages {
        let low = build_hadamard(k, convention)?;
        let stretched = stretch_columns(low.body(), 1 << (big_k - k))?;
        drop(low);
        let rows = match_rows(&h, &stretched)?;
        front_rank(&mut order, &rows);
        log.push(SearchStage {
            k,
            matched: rows.len(),
        });
    }
    Ok((RowPermutation::new(order)?, log))
}

/// Classical MPCGI permutation of the rows of `H_{4^l}`: for `t = l−1` down
/// to 0, stretch `H_{4^t}` to full width, find its rows and move them first.
pub fn thdc_mpcgi_permutation(l: u32, convention: Convention) -> Result<(RowPermutation, Vec<SearchStage>)> {
    thdc_search(2 * l, (0..l).rev().map(|t| 2 * t), convention)
}

/// Classical RD permutation of the rows of `H_{2^K}`: every lower order
/// `k = K−1, …, 0` is stretched, matched and front-ranked.
pub fn thdc_rd_permutation(big_k: u32, convention: Convention) -> Result<(RowPermutation, Vec<SearchStage>)> {
    thdc_search(big_k, (0..big_k).rev(), convention)
}

/// Reshapes the rows of `h` in the order given by `perm`.
pub fn sequence_from_permutation(
    h: &HadamardMatrix,
    perm: &RowPermutation,
    scheme: OrderingScheme,
    provenance: Provenance,
) -> Result<PatternSequence> {
    if perm.order_n() != h.order() {
        return Err(Error::shape(format!(
            "permutation of {} rows for a matrix of order {}",
            perm.order_n(),
            h.order()
        )));
    }
    let items = perm
        .indices()
        .iter()
        .map(|&m| reshape_row(h, m, ReshapeOrder::Interleaved))
        .collect::<Result<Vec<_>>>()?;
    let side = 1usize << (h.exponent() / 2);
    PatternSequence::new(scheme, side, provenance, Some(h.convention()), items)
}

pub fn thdc_mpcgi_order(l: u32, convention: Convention) -> Result<(RowPermutation, PatternSequence)> {
    let (perm, _) = thdc_mpcgi_permutation(l, convention)?;
    let h = build_hadamard(2 * l, convention)?;
    let seq = sequence_from_permutation(&h, &perm, OrderingScheme::Mpcgi, Provenance::ThdcSearch)?;
    Ok((perm, seq))
}

pub fn thdc_rd_order(l: u32, convention: Convention) -> Result<(RowPermutation, PatternSequence)> {
    let (perm, _) = thdc_rd_permutation(2 * l, convention)?;
    let h = build_hadamard(2 * l, convention)?;
    let seq = sequence_from_permutation(&h, &perm, OrderingScheme::RussianDolls, Provenance::ThdcSearch)?;
    Ok((perm, seq))
}

/// Inverse of [`stretch_columns`]; fails if a run is not constant.
fn compress_columns(m: &SignMatrix, rows: &[usize], factor: usize) -> Result<SignMatrix> {
    let cols = m.cols() / factor;
    for (i, &r) in rows.iter().enumerate() {
        for c in 0..cols {
            let v = m.is_plus(r, c * factor);
            if (1..factor).any(|d| m.is_plus(r, c * factor + d) != v) {
                return Err(Error::inconsistency(format!(
                    "row {} is not constant on column run {}",
                    i + 1,
                    c + 1
                )));
            }
        }
    }
    SignMatrix::from_fn(rows.len(), cols, |i, c| m.is_plus(rows[i], c * factor))
}

/// Takes rows `1, 1+2^s, 1+2·2^s, …` of a RightExpand matrix and undoes their
/// `2^s`-fold column stretch, giving the Hadamard matrix `2^s` times smaller.
pub fn odd_row_extract(h: &HadamardMatrix, steps: u32) -> Result<HadamardMatrix> {
    if h.convention() != Convention::RightExpand {
        return Err(Error::contract("odd-row extraction needs a RightExpand matrix"));
    }
    if steps == 0 || steps > h.exponent() {
        return Err(Error::contract(format!(
            "cannot take {steps} halving steps of order 2^{}",
            h.exponent()
        )));
    }
    let stride = 1usize << steps;
    let rows: Vec<usize> = (0..h.order()).step_by(stride).collect();
    let body = compress_columns(h.body(), &rows, stride)?;
    HadamardMatrix::from_body(body, Convention::RightExpand)
}

/// The MPCGI or RD permutation of `H_{2^K}` computed from row indices alone.
///
/// A 0-based row index with `K − k` trailing zero bits belongs to the nested
/// copy of `H_{2^k}`; rows are ranked by the smallest such `k` (rounded up to
/// even for MPCGI), ties in index order.
pub fn index_ordering(big_k: u32, scheme: OrderingScheme) -> Result<RowPermutation> {
    if big_k >= usize::BITS {
        return Err(Error::contract(format!("order 2^{big_k} too large")));
    }
    let n = 1usize << big_k;
    let rank: Box<dyn Fn(usize) -> u32> = match scheme {
        OrderingScheme::RussianDolls => Box::new(move |i: usize| big_k - i.trailing_zeros().min(big_k)),
        OrderingScheme::Mpcgi => {
            if !big_k.is_multiple_of(2) {
                return Err(Error::contract(format!("MPCGI needs an even exponent, got {big_k}")));
            }
            Box::new(move |i: usize| {
                let k = big_k - i.trailing_zeros().min(big_k);
                k + k % 2
            })
        }
        OrderingScheme::Natural => return Ok(RowPermutation::identity(n)),
    };
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by_key(|&i| rank(i));
    RowPermutation::new(idx.into_iter().map(|i| i + 1).collect())
}

/// Rows of `H_{4^l}` that the patterns of `seq` correspond to, found by
/// flattening each pattern with [`ReshapeOrder::Interleaved`].
pub fn sequence_permutation(seq: &PatternSequence, convention: Convention) -> Result<RowPermutation> {
    let l = seq.level();
    let h = build_hadamard(2 * l, convention)?;
    let n = h.order();
    let needles = SignMatrix::from_fn(seq.len(), n, |i, j| {
        let (y, x) = ReshapeOrder::Interleaved.position(j, l);
        seq.items[i].body().is_plus(y, x)
    })?;
    RowPermutation::new(match_rows(&h, &needles)?)
}

/// Integer projector arithmetic for checking which image space a prefix
/// of a sequence spans.
pub mod span {
    use super::PatternSequence;

    /// `Σ p pᵀ` over a prefix, as a dense `N × N` integer matrix with
    /// `N = side²`. For orthogonal ±1 patterns this is `N` times the
    /// orthogonal projector onto their span.
    pub struct PrefixProjector {
        n: usize,
        acc: Vec<i64>,
        used: usize,
        scratch: Vec<i64>,
    }

    impl PrefixProjector {
        pub fn new(side: usize) -> Self {
            let n = side * side;
            PrefixProjector {
                n,
                acc: vec![0; n * n],
                used: 0,
                scratch: vec![0; n],
            }
        }

        pub fn used(&self) -> usize {
            self.used
        }

        /// Adds the next pattern of `seq`.
        pub fn push_from(&mut self, seq: &PatternSequence) {
            let p = &seq.items[self.used];
            let side = seq.display_side;
            for (j, v) in self.scratch.iter_mut().enumerate() {
                *v = p.get(j / side, j % side) as i64;
            }
            for a in 0..self.n {
                let va = self.scratch[a];
                let row = &mut self.acc[a * self.n..(a + 1) * self.n];
                for (dst, vb) in row.iter_mut().zip(&self.scratch) {
                    *dst += va * vb;
                }
            }
            self.used += 1;
        }

        pub fn matrix(&self) -> &[i64] {
            &self.acc
        }
    }

    /// `N` times the projector onto images constant on `bh × bw` blocks.
    pub fn block_projector(side: usize, bh: usize, bw: usize) -> Vec<i64> {
        let n = side * side;
        let scale = (n / (bh * bw)) as i64;
        let block = |j: usize| ((j / side) / bh, (j % side) / bw);
        let mut out = vec![0; n * n];
        for a in 0..n {
            for b in 0..n {
                if block(a) == block(b) {
                    out[a * n + b] = scale;
                }
            }
        }
        out
    }

    /// Checks every milestone of `seq`'s scheme with exact projectors.
    /// Returns the first failing prefix length, if any.
    pub fn first_failing_milestone(seq: &PatternSequence) -> Option<usize> {
        let l = seq.level();
        let mut proj = PrefixProjector::new(seq.display_side);
        for m in seq.scheme.milestones(l) {
            if m > seq.len() {
                return Some(m);
            }
            while proj.used() < m {
                proj.push_from(seq);
            }
            let (bh, bw) = seq.scheme.milestone_blocks(l, m)?;
            if proj.matrix() != block_projector(seq.display_side, bh, bw).as_slice() {
                return Some(m);
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hadamard::RuleIndex;

    #[test]
    fn rd_level_one_order() {
        let seq = rd_sequence(1).unwrap();
        let bodies: Vec<_> = seq.items.iter().map(|p| p.body().to_rows()).collect();
        assert_eq!(
            bodies,
            vec![
                vec![vec![1, 1], vec![1, 1]],
                vec![vec![1, 1], vec![-1, -1]],
                vec![vec![1, -1], vec![1, -1]],
                vec![vec![1, -1], vec![-1, 1]],
            ]
        );
    }

    #[test]
    fn rd_within_level_order_is_lexicographic() {
        let seq = rd_sequence(3).unwrap();
        let paths: Vec<Vec<RuleIndex>> = seq
            .items
            .iter()
            .map(|p| p.rule_path().unwrap().to_vec())
            .collect();
        for w in paths.windows(2) {
            assert!((w[0].len(), &w[0]) < (w[1].len(), &w[1]));
        }
    }

    #[test]
    fn mpcgi_zero() {
        let seq = mpcgi_sequence(0).unwrap();
        assert_eq!(seq.len(), 1);
        assert!(seq.items[0].body().is_all_plus());
    }

    #[test]
    fn mpcgi_prefixes_hold_whole_levels() {
        let seq = mpcgi_sequence(3).unwrap();
        assert_eq!(seq.len(), 64);
        for t in 0..=3u32 {
            let prefix = 1usize << (2 * t);
            assert!(seq.items[..prefix].iter().all(|p| p.level() <= t));
            if prefix < 64 {
                assert!(seq.items[prefix].level() == t + 1);
            }
        }
    }

    #[test]
    fn milestone_block_shapes() {
        let rd = OrderingScheme::RussianDolls;
        let got: Vec<_> = rd
            .milestones(3)
            .into_iter()
            .map(|m| rd.milestone_blocks(3, m).unwrap())
            .collect();
        // grids 1×1, 2×1, 2×2, 4×2, 4×4, 8×4, 8×8 on an 8×8 image
        assert_eq!(got, vec![(8, 8), (4, 8), (4, 4), (2, 4), (2, 2), (1, 2), (1, 1)]);
        assert_eq!(OrderingScheme::Mpcgi.milestones(3), vec![1, 4, 16, 64]);
        assert_eq!(OrderingScheme::Mpcgi.milestone_blocks(3, 2), None);
    }

    #[test]
    fn match_rows_examples() {
        let h4 = build_hadamard(2, Convention::LeftExpand).unwrap();
        let h1 = build_hadamard(0, Convention::LeftExpand).unwrap();
        let s = stretch_columns(h1.body(), 4).unwrap();
        assert_eq!(match_rows(&h4, &s).unwrap(), vec![1]);

        let h64 = build_hadamard(6, Convention::RightExpand).unwrap();
        let h16 = build_hadamard(4, Convention::RightExpand).unwrap();
        let got = match_rows(&h64, &stretch_columns(h16.body(), 4).unwrap()).unwrap();
        assert_eq!(got, (1..=61).step_by(4).collect::<Vec<_>>());
        let h32 = build_hadamard(5, Convention::RightExpand).unwrap();
        let got = match_rows(&h64, &stretch_columns(h32.body(), 2).unwrap()).unwrap();
        assert_eq!(got, (1..=63).step_by(2).collect::<Vec<_>>());
    }

    #[test]
    fn match_rows_failures() {
        let h4 = build_hadamard(2, Convention::LeftExpand).unwrap();
        let bad = SignMatrix::from_rows(&[[1, 1, 1, -1]]).unwrap();
        assert!(matches!(match_rows(&h4, &bad), Err(Error::Inconsistency(_))));
        let dup = HadamardMatrix::from_body(SignMatrix::ones(4, 4).unwrap(), Convention::LeftExpand).unwrap();
        let needle = SignMatrix::ones(1, 4).unwrap();
        assert!(matches!(match_rows(&dup, &needle), Err(Error::Inconsistency(_))));
        let narrow = SignMatrix::ones(1, 2).unwrap();
        assert!(matches!(match_rows(&h4, &narrow), Err(Error::Shape(_))));
    }

    #[test]
    fn thdc_mpcgi_stage_counts() {
        let (perm, stages) = thdc_mpcgi_permutation(3, Convention::LeftExpand).unwrap();
        let counts: Vec<_> = stages.iter().map(|s| (s.k, s.matched)).collect();
        assert_eq!(counts, vec![(4, 16), (2, 4), (0, 1)]);
        assert_eq!(perm.indices()[0], 1);

        let (perm, _) = thdc_mpcgi_permutation(1, Convention::LeftExpand).unwrap();
        assert_eq!(perm.indices(), &[1, 2, 3, 4]);
    }

    #[test]
    fn thdc_rd_stage_widths() {
        let (_, stages) = thdc_rd_permutation(6, Convention::RightExpand).unwrap();
        let got: Vec<_> = stages.iter().map(|s| s.matched).collect();
        assert_eq!(got, vec![32, 16, 8, 4, 2, 1]);
    }

    #[test]
    fn thdc_rd_l1_prefix_two() {
        let (perm, seq) = thdc_rd_order(1, Convention::LeftExpand).unwrap();
        assert_eq!(&perm.indices()[..2], &[1, 3]);
        assert!(seq.items[0].body().is_all_plus());
        assert_eq!(seq.items[1].body().to_rows(), vec![vec![1, 1], vec![-1, -1]]);
    }

    #[test]
    fn odd_row_extract_examples() {
        let h8 = build_hadamard(3, Convention::RightExpand).unwrap();
        let h4 = build_hadamard(2, Convention::RightExpand).unwrap();
        assert_eq!(odd_row_extract(&h8, 1).unwrap(), h4);
        let h64 = build_hadamard(6, Convention::RightExpand).unwrap();
        let h16 = build_hadamard(4, Convention::RightExpand).unwrap();
        assert_eq!(odd_row_extract(&h64, 2).unwrap(), h16);
        let h2 = build_hadamard(1, Convention::RightExpand).unwrap();
        assert_eq!(odd_row_extract(&h2, 1).unwrap().body().to_rows(), vec![vec![1]]);
    }

    #[test]
    fn odd_row_extract_errors() {
        let left = build_hadamard(3, Convention::LeftExpand).unwrap();
        assert!(matches!(odd_row_extract(&left, 1), Err(Error::Contract(_))));
        let h2 = build_hadamard(1, Convention::RightExpand).unwrap();
        assert!(matches!(odd_row_extract(&h2, 2), Err(Error::Contract(_))));
        let junk = SignMatrix::from_fn(4, 4, |r, c| (r * 3 + c) % 2 == 0).unwrap();
        let junk = HadamardMatrix::from_body(junk, Convention::RightExpand).unwrap();
        assert!(matches!(odd_row_extract(&junk, 1), Err(Error::Inconsistency(_))));
    }

    #[test]
    fn index_ordering_examples() {
        assert_eq!(index_ordering(2, OrderingScheme::Mpcgi).unwrap().indices(), &[1, 2, 3, 4]);
        assert_eq!(&index_ordering(6, OrderingScheme::RussianDolls).unwrap().indices()[..2], &[1, 33]);
        assert!(matches!(index_ordering(3, OrderingScheme::Mpcgi), Err(Error::Contract(_))));
    }

    #[test]
    fn row_33_is_stretched_h2() {
        let h64 = build_hadamard(6, Convention::RightExpand).unwrap();
        let h2 = build_hadamard(1, Convention::RightExpand).unwrap();
        let rows = match_rows(&h64, &stretch_columns(h2.body(), 32).unwrap()).unwrap();
        assert_eq!(rows, vec![1, 33]);
    }

    #[test]
    fn index_equals_search() {
        for l in 0..=3 {
            let (search, _) = thdc_mpcgi_permutation(l, Convention::RightExpand).unwrap();
            assert_eq!(index_ordering(2 * l, OrderingScheme::Mpcgi).unwrap(), search);
        }
        for k in 0..=7 {
            let (search, _) = thdc_rd_permutation(k, Convention::RightExpand).unwrap();
            assert_eq!(index_ordering(k, OrderingScheme::RussianDolls).unwrap(), search);
        }
    }

    #[test]
    fn row_permutation_validation() {
        assert!(RowPermutation::new(vec![2, 1, 3]).is_ok());
        assert!(RowPermutation::new(vec![1, 1, 3]).is_err());
        assert!(RowPermutation::new(vec![0, 1]).is_err());
        assert!(RowPermutation::new(vec![1, 4]).is_err());
    }

    #[test]
    fn pipeline_sequence_maps_to_rows() {
        let seq = rd_sequence(2).unwrap();
        let perm = sequence_permutation(&seq, Convention::LeftExpand).unwrap();
        assert_eq!(perm.order_n(), 16);
        assert_eq!(perm.indices()[0], 1);
        // the second RD pattern splits top from bottom: the stretched H_2 row
        assert_eq!(perm.indices()[1], index_ordering(4, OrderingScheme::RussianDolls).unwrap().indices()[1]);
    }

    #[test]
    fn span_checks_pass_for_all_routes() {
        for l in 0..=3 {
            assert_eq!(span::first_failing_milestone(&mpcgi_sequence(l).unwrap()), None);
            assert_eq!(span::first_failing_milestone(&rd_sequence(l).unwrap()), None);
            let (_, s) = thdc_mpcgi_order(l, Convention::RightExpand).unwrap();
            assert_eq!(span::first_failing_milestone(&s), None);
            let (_, s) = thdc_rd_order(l, Convention::LeftExpand).unwrap();
            assert_eq!(span::first_failing_milestone(&s), None);
        }
    }

    #[test]
    fn row_major_search_does_not_give_square_blocks() {
        // Reshaping the searched rows row-major yields strips instead of
        // square blocks, which is why the search uses the interleaved layout.
        let (perm, _) = thdc_mpcgi_permutation(2, Convention::LeftExpand).unwrap();
        let h = build_hadamard(4, Convention::LeftExpand).unwrap();
        let items = perm
            .indices()
            .iter()
            .map(|&m| reshape_row(&h, m, ReshapeOrder::RowMajor).unwrap())
            .collect();
        let seq = PatternSequence::new(OrderingScheme::Mpcgi, 4, Provenance::ThdcSearch, None, items).unwrap();
        assert_eq!(span::first_failing_milestone(&seq), Some(4));
    }
}
