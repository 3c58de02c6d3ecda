//! The one-input-four-output pipeline encoder and the level-by-level
//! generator built on it.
//!
//! Starting from the 1×1 all-ones seed, each rule doubles the side of a
//! pattern `P` by laying out four signed copies:
//!
//! | rule | layout |
//! |------|--------|
//! | 1 | `[[+P, +P], [+P, +P]]` |
//! | 2 | `[[+P, +P], [−P, −P]]` |
//! | 3 | `[[+P, −P], [+P, −P]]` |
//! | 4 | `[[+P, −P], [−P, +P]]` |
//!
//! Level `t` holds `3·4^(t−1)` patterns of side `2^t`; together with the seed,
//! levels `0..=l` give `4^l` patterns which, once upscaled to a common side,
//! are exactly the reshaped rows of the Hadamard matrix of order `4^l`. Rule 1
//! leaves the constant pattern unchanged up to size, so its rule-1 child is
//! not emitted.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hadamard::{Lineage, Pattern, RuleIndex, SignMatrix};
use crate::memory::tracker;

pub use crate::hadamard::RuleIndex as Rule;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Traversal {
    /// Whole levels in order; defines the canonical sequence order.
    #[default]
    BreadthFirst,
    /// Pre-order over the rule tree, holding one pattern per level.
    DepthFirst,
}

/// The 1×1 pattern `[+1]` at level 0 with an empty rule path.
pub fn seed() -> Pattern {
    Pattern::new(SignMatrix::unit(), 0, Lineage::Rules(Vec::new()))
        .expect("1x1 seed is a valid pattern")
}

/// Applies one encoder rule, doubling the side.
///
/// The input must be a pipeline pattern at its native side.
pub fn apply_rule(p: &Pattern, rule: RuleIndex) -> Result<Pattern> {
    let path = p
        .rule_path()
        .ok_or_else(|| Error::contract("apply_rule needs a pattern with a rule path"))?;
    let side = p.side();
    if side != p.native_side() {
        return Err(Error::contract("apply_rule needs a pattern at its native side"));
    }
    let signs = rule.block_signs();
    let body = p.body();
    let out = SignMatrix::from_fn(2 * side, 2 * side, |y, x| {
        let keep = signs[y / side][x / side];
        body.is_plus(y % side, x % side) == keep
    })?;
    let mut child_path = path.to_vec();
    child_path.push(rule);
    Pattern::new(out, p.level() + 1, Lineage::Rules(child_path))
}

/// Rules that are expanded below `p`; the constant pattern skips rule 1.
fn child_rules(p: &Pattern) -> &'static [RuleIndex] {
    rules_below(p.body().is_all_plus())
}

fn rules_below(constant: bool) -> &'static [RuleIndex] {
    if constant {
        &RuleIndex::ALL[1..]
    } else {
        &RuleIndex::ALL
    }
}

/// Per-level emission counts for levels `0..=l`, found by walking the rule
/// tree without building any pattern.
pub fn emission_counts(l: u32) -> Vec<u128> {
    // (level, constant) for the nodes still to expand
    let mut counts = vec![0u128; l as usize + 1];
    let mut stack = vec![(0u32, true)];
    while let Some((level, constant)) = stack.pop() {
        counts[level as usize] += 1;
        if level == l {
            continue;
        }
        for rule in rules_below(constant) {
            stack.push((level + 1, constant && rule.get() == 1));
        }
    }
    counts
}

/// Number of patterns emitted at level `t`.
pub fn count_level(t: u32) -> u128 {
    if t == 0 {
        1
    } else {
        3 * (1u128 << (2 * (t - 1)))
    }
}

/// Number of patterns emitted for levels `0..=l`, equal to `4^l`.
pub fn count_total(l: u32) -> u128 {
    (0..=l).map(count_level).sum()
}

/// All patterns of one level, in canonical order.
#[derive(Clone, Debug)]
pub struct LevelBatch {
    level: u32,
    patterns: Vec<Arc<Pattern>>,
}

impl LevelBatch {
    /// The level-0 batch holding only the seed.
    pub fn seed() -> Self {
        LevelBatch {
            level: 0,
            patterns: vec![Arc::new(seed())],
        }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn patterns(&self) -> &[Arc<Pattern>] {
        &self.patterns
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }
}

/// Expands every pattern of `batch` with its rules, parents in order and
/// rules 1, 2, 3, 4 within each parent.
pub fn expand_level(batch: &LevelBatch) -> Result<LevelBatch> {
    let mut patterns = Vec::with_capacity(count_level(batch.level + 1) as usize);
    for parent in &batch.patterns {
        for &rule in child_rules(parent) {
            patterns.push(Arc::new(apply_rule(parent, rule)?));
        }
    }
    Ok(LevelBatch {
        level: batch.level + 1,
        patterns,
    })
}

fn check_pattern_size(l: u32) -> Result<()> {
    if l > 31 {
        return Err(Error::Resource {
            requested: u128::MAX,
            limit: tracker::entry_limit(),
        });
    }
    tracker::check_count(1u128 << (2 * l)).map(|_| ())
}

/// Streams the patterns of levels `0..=l`.
///
/// Breadth-first checks up front that every whole level fits the entry
/// limit; depth-first only needs the largest single pattern to fit.
pub fn generate(l: u32, traversal: Traversal) -> Result<PatternStream> {
    check_pattern_size(l)?;
    let inner = match traversal {
        Traversal::BreadthFirst => {
            for t in 0..=l {
                tracker::check_count(count_level(t) << (2 * t))?;
            }
            StreamInner::Breadth {
                batch: None,
                pos: 0,
                target: l,
            }
        }
        Traversal::DepthFirst => StreamInner::Depth(DepthWalk::new(l, None)),
    };
    Ok(PatternStream { inner })
}

/// Streams levels `0..=l` in canonical order while holding at most one
/// pattern per level: each level is produced by its own depth-first walk.
pub fn generate_levelwise(l: u32) -> Result<impl Iterator<Item = Result<Arc<Pattern>>>> {
    check_pattern_size(l)?;
    Ok((0..=l).flat_map(|t| DepthWalk::new(t, Some(t))))
}

/// Iterator returned by [`generate`].
pub struct PatternStream {
    inner: StreamInner,
}

enum StreamInner {
    Breadth {
        batch: Option<LevelBatch>,
        pos: usize,
        target: u32,
    },
    Depth(DepthWalk),
}

impl Iterator for PatternStream {
    type Item = Result<Arc<Pattern>>;

    fn next(&mut self) -> Option<Self::Item> {
        match &mut self.inner {
            StreamInner::Breadth { batch, pos, target } => {
                let current = match batch {
                    None => batch.insert(LevelBatch::seed()),
                    Some(b) => b,
                };
                if *pos == current.len() {
                    if current.level >= *target {
                        return None;
                    }
                    // the previous level stays alive until the next is complete
                    match expand_level(current) {
                        Ok(next) => *batch = Some(next),
                        Err(e) => {
                            *target = 0;
                            *pos = usize::MAX;
                            return Some(Err(e));
                        }
                    }
                    *pos = 0;
                }
                let b = batch.as_ref()?;
                let item = b.patterns.get(*pos)?.clone();
                *pos += 1;
                Some(Ok(item))
            }
            StreamInner::Depth(walk) => walk.next(),
        }
    }
}

/// Pre-order walk of the rule tree down to `max_depth`, optionally emitting
/// only one level.
struct DepthWalk {
    stack: Vec<(Arc<Pattern>, usize)>,
    max_depth: u32,
    emit_only: Option<u32>,
    started: bool,
    failed: bool,
}

impl DepthWalk {
    fn new(max_depth: u32, emit_only: Option<u32>) -> Self {
        DepthWalk {
            stack: Vec::with_capacity(max_depth as usize + 1),
            max_depth,
            emit_only,
            started: false,
            failed: false,
        }
    }

    fn wants(&self, level: u32) -> bool {
        self.emit_only.is_none_or(|t| t == level)
    }
}

impl Iterator for DepthWalk {
    type Item = Result<Arc<Pattern>>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        if !self.started {
            self.started = true;
            let s = Arc::new(seed());
            self.stack.push((s.clone(), 0));
            if self.wants(0) {
                return Some(Ok(s));
            }
        }
        loop {
            let (parent, next_rule) = self.stack.last_mut()?;
            let rules = child_rules(parent);
            if parent.level() >= self.max_depth || *next_rule >= rules.len() {
                self.stack.pop();
                continue;
            }
            let rule = rules[*next_rule];
            *next_rule += 1;
            let child = match apply_rule(parent, rule) {
                Ok(c) => Arc::new(c),
                Err(e) => {
                    self.failed = true;
                    return Some(Err(e));
                }
            };
            let level = child.level();
            self.stack.push((child.clone(), 0));
            if self.wants(level) {
                return Some(Ok(child));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::memory::tracker::instrument;
    use std::collections::HashSet;

    fn rule(v: u8) -> RuleIndex {
        RuleIndex::new(v).unwrap()
    }

    fn collect(l: u32, t: Traversal) -> Vec<Arc<Pattern>> {
        generate(l, t).unwrap().collect::<Result<_>>().unwrap()
    }

    #[test]
    fn seed_is_unit() {
        let s = seed();
        assert_eq!(s.body().to_rows(), vec![vec![1]]);
        assert_eq!(s.level(), 0);
        assert_eq!(s.rule_path(), Some(&[][..]));
    }

    #[test]
    fn rule_one_on_constant() {
        let ones = apply_rule(&seed(), rule(1)).unwrap();
        let four = apply_rule(&ones, rule(1)).unwrap();
        assert!(four.body().is_all_plus());
        assert_eq!(four.side(), 4);
    }

    #[test]
    fn rule_requires_native_pipeline_pattern() {
        let up = crate::upscale(&seed(), 2).unwrap();
        assert!(matches!(apply_rule(&up, rule(2)), Err(Error::Contract(_))));
    }

    #[test]
    fn expand_counts_and_paths() {
        let l1 = expand_level(&LevelBatch::seed()).unwrap();
        assert_eq!(l1.len(), 3);
        let l2 = expand_level(&l1).unwrap();
        assert_eq!(l2.len(), 12);
        assert!(l2.patterns().iter().all(|p| p.side() == 4));
        let l3 = expand_level(&l2).unwrap();
        assert_eq!(l3.len(), 48);
        for (i, child) in l2.patterns().iter().enumerate() {
            let parent = l1.patterns()[i / 4].rule_path().unwrap();
            let path = child.rule_path().unwrap();
            assert_eq!(&path[..1], parent);
            assert_eq!(path[1], rule((i % 4) as u8 + 1));
        }
    }

    #[test]
    fn counts() {
        assert_eq!(count_level(0), 1);
        assert_eq!(count_level(3), 48);
        assert_eq!(count_total(0), 1);
        assert_eq!(count_total(3), 64);
        for l in 0..=20 {
            assert_eq!(count_total(l), 1u128 << (2 * l));
        }
    }

    #[test]
    fn emission_counts_without_patterns() {
        assert_eq!(emission_counts(0), vec![1]);
        assert_eq!(emission_counts(3), vec![1, 3, 12, 48]);
    }

    #[test]
    fn generate_zero_is_seed() {
        let v = collect(0, Traversal::BreadthFirst);
        assert_eq!(v.len(), 1);
        assert_eq!(*v[0], seed());
        assert_eq!(collect(0, Traversal::DepthFirst).len(), 1);
    }

    #[test]
    fn traversals_agree_as_sets() {
        for l in 0..=4 {
            let bf: HashSet<_> = collect(l, Traversal::BreadthFirst)
                .into_iter()
                .map(|p| p.rule_path().unwrap().to_vec())
                .collect();
            let df: HashSet<_> = collect(l, Traversal::DepthFirst)
                .into_iter()
                .map(|p| p.rule_path().unwrap().to_vec())
                .collect();
            assert_eq!(bf.len() as u128, count_total(l));
            assert_eq!(bf, df);
        }
    }

    #[test]
    fn levelwise_matches_breadth_first_order() {
        let bf = collect(4, Traversal::BreadthFirst);
        let lw: Vec<_> = generate_levelwise(4).unwrap().collect::<Result<_>>().unwrap();
        assert_eq!(bf.len(), lw.len());
        for (a, b) in bf.iter().zip(&lw) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn lineage_replays() {
        for p in collect(3, Traversal::DepthFirst) {
            let mut q = seed();
            for &r in p.rule_path().unwrap() {
                q = apply_rule(&q, r).unwrap();
            }
            assert_eq!(*p, q);
        }
    }

    #[test]
    fn depth_first_peak() {
        let (n, c) = instrument(|| generate(3, Traversal::DepthFirst).unwrap().count());
        assert_eq!(n, 64);
        assert_eq!(c.peak_entries, 85);
        assert_eq!(c.current_entries, 0);
    }

    #[test]
    fn breadth_first_peak() {
        let (n, c) = instrument(|| generate(3, Traversal::BreadthFirst).unwrap().count());
        assert_eq!(n, 64);
        assert_eq!(c.peak_entries, 3 * 16 * 64 + 3 * 4 * 16);
    }

    #[test]
    fn breadth_first_budget() {
        let _g = tracker::set_entry_limit(1000);
        // level 3 alone needs 48·64 = 3072 entries
        assert!(matches!(generate(3, Traversal::BreadthFirst), Err(Error::Resource { .. })));
        assert!(generate(3, Traversal::DepthFirst).is_ok());
    }
}
