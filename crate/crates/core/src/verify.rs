//! Self-check suite run by the `verify` command.
//!
//! Each check rebuilds what it needs at level `l` and compares two
//! independent constructions exactly.

use std::collections::HashSet;

use crate::hadamard::{build_hadamard, reshape_row, upscale, verify_hadamard, Convention, ReshapeOrder, SignMatrix};
use crate::memory::{instrument, nhpc_cost, run_generator, thdc_cost};
use crate::ordering::{
    index_ordering, mpcgi_sequence, odd_row_extract, rd_sequence, sequence_from_permutation, span,
    thdc_mpcgi_order, thdc_mpcgi_permutation, thdc_rd_order, thdc_rd_permutation, OrderingScheme,
    PatternSequence, Provenance,
};
use crate::pipeline::{apply_rule, count_level, generate, seed, Traversal};
use crate::sim::{acquire, acquire_binary, correlation_sum_exact, exact_buckets, reconstruct, NoiseModel, ObjectImage};
use crate::{Error, RuleIndex};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Check = fn(u32) -> Result<(), String>;

const CHECKS: &[(&str, Check)] = &[
    ("hadamard orthogonality", check_hadamard),
    ("pipeline level counts", check_counts),
    ("encoder base cases", check_base_cases),
    ("pipeline equals reshaped rows", check_pipeline_set),
    ("pipeline patterns orthogonal", check_orthogonal),
    ("milestone spans", check_milestones),
    ("index ordering equals search", check_index_vs_search),
    ("odd-row extraction", check_odd_rows),
    ("reconstruction completeness", check_completeness),
    ("progressive projection", check_progressive),
    ("binary equals differential", check_binary),
    ("memory model", check_memory),
    ("HPC1 round trip", check_hpc1),
];

/// Runs every check at level `l`.
pub fn run(l: u32) -> Vec<CheckOutcome> {
    CHECKS
        .iter()
        .map(|(name, f)| {
            let r = f(l);
            CheckOutcome {
                name,
                passed: r.is_ok(),
                detail: r.err().unwrap_or_default(),
            }
        })
        .collect()
}

fn err(e: Error) -> String {
    e.to_string()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn check_hadamard(l: u32) -> Result<(), String> {
    for k in 0..=2 * l {
        let left = build_hadamard(k, Convention::LeftExpand).map_err(err)?;
        let right = build_hadamard(k, Convention::RightExpand).map_err(err)?;
        ensure(verify_hadamard(&left) && verify_hadamard(&right), || format!("H_2^{k} not orthogonal"))?;
        let rows = |h: &crate::HadamardMatrix| -> HashSet<Vec<i8>> { h.body().to_rows().into_iter().collect() };
        ensure(rows(&left) == rows(&right), || format!("row sets differ at k={k}"))?;
    }
    Ok(())
}

fn check_counts(l: u32) -> Result<(), String> {
    let mut per_level = vec![0u128; l as usize + 1];
    for p in generate(l, Traversal::BreadthFirst).map_err(err)? {
        per_level[p.map_err(err)?.level() as usize] += 1;
    }
    for (t, &n) in per_level.iter().enumerate() {
        ensure(n == count_level(t as u32), || format!("level {t}: {n} patterns"))?;
    }
    ensure(per_level.iter().sum::<u128>() == 1u128 << (2 * l), || "total is not 4^l".into())
}

fn check_base_cases(_: u32) -> Result<(), String> {
    let expected: [[[i8; 2]; 2]; 4] = [
        [[1, 1], [1, 1]],
        [[1, 1], [-1, -1]],
        [[1, -1], [1, -1]],
        [[1, -1], [-1, 1]],
    ];
    for (r, e) in RuleIndex::ALL.iter().zip(expected) {
        let got = apply_rule(&seed(), *r).map_err(err)?;
        let want = SignMatrix::from_rows(&e).map_err(err)?;
        ensure(got.body() == &want, || format!("rule {r} on the seed"))?;
    }
    Ok(())
}

fn check_pipeline_set(l: u32) -> Result<(), String> {
    let side = 1usize << l;
    let mut pipeline = HashSet::new();
    for p in generate(l, Traversal::BreadthFirst).map_err(err)? {
        let p = p.map_err(err)?;
        pipeline.insert(upscale(&p, side).map_err(err)?.into_body());
    }
    let h = build_hadamard(2 * l, Convention::LeftExpand).map_err(err)?;
    for order in [ReshapeOrder::RowMajor, ReshapeOrder::Interleaved] {
        let natural: HashSet<_> = (1..=h.order())
            .map(|m| reshape_row(&h, m, order).map(|p| p.into_body()))
            .collect::<Result<_, _>>()
            .map_err(err)?;
        ensure(natural == pipeline, || format!("sets differ under {order:?} reshape"))?;
    }
    Ok(())
}

fn check_orthogonal(l: u32) -> Result<(), String> {
    let seq = mpcgi_sequence(l).map_err(err)?;
    let n = seq.len() as i64;
    for (a, pa) in seq.items.iter().enumerate() {
        for (b, pb) in seq.items.iter().enumerate().skip(a) {
            let ip = pa.inner(pb).map_err(err)?;
            ensure(ip == if a == b { n } else { 0 }, || format!("patterns {} and {}", a + 1, b + 1))?;
        }
    }
    Ok(())
}

fn check_milestones(l: u32) -> Result<(), String> {
    let conv = Convention::RightExpand;
    let h = build_hadamard(2 * l, conv).map_err(err)?;
    let mut seqs: Vec<(&str, PatternSequence)> = vec![
        ("pipeline mpcgi", mpcgi_sequence(l).map_err(err)?),
        ("pipeline rd", rd_sequence(l).map_err(err)?),
        ("search mpcgi", thdc_mpcgi_order(l, conv).map_err(err)?.1),
        ("search rd", thdc_rd_order(l, conv).map_err(err)?.1),
    ];
    for (name, scheme) in [("index mpcgi", OrderingScheme::Mpcgi), ("index rd", OrderingScheme::RussianDolls)] {
        let perm = index_ordering(2 * l, scheme).map_err(err)?;
        seqs.push((name, sequence_from_permutation(&h, &perm, scheme, Provenance::IndexExtraction).map_err(err)?));
    }
    for (name, seq) in &seqs {
        if let Some(m) = span::first_failing_milestone(seq) {
            return Err(format!("{name}: prefix {m} spans the wrong space"));
        }
    }
    Ok(())
}

fn check_index_vs_search(l: u32) -> Result<(), String> {
    let conv = Convention::RightExpand;
    let (search, _) = thdc_mpcgi_permutation(l, conv).map_err(err)?;
    ensure(index_ordering(2 * l, OrderingScheme::Mpcgi).map_err(err)? == search, || "mpcgi".into())?;
    let (search, _) = thdc_rd_permutation(2 * l, conv).map_err(err)?;
    ensure(index_ordering(2 * l, OrderingScheme::RussianDolls).map_err(err)? == search, || "rd".into())
}

fn check_odd_rows(l: u32) -> Result<(), String> {
    for k in 1..=2 * l {
        let h = build_hadamard(k, Convention::RightExpand).map_err(err)?;
        let lower = build_hadamard(k - 1, Convention::RightExpand).map_err(err)?;
        ensure(odd_row_extract(&h, 1).map_err(err)? == lower, || format!("k={k}"))?;
    }
    Ok(())
}

fn test_object(l: u32) -> Result<ObjectImage, String> {
    ObjectImage::random(1 << l, 65535, 0x5eed + l as u64).map_err(err)
}

fn check_completeness(l: u32) -> Result<(), String> {
    let o = test_object(l)?;
    let n = 1i64 << (2 * l);
    for seq in [mpcgi_sequence(l).map_err(err)?, rd_sequence(l).map_err(err)?] {
        let b = exact_buckets(&seq, &o).map_err(err)?;
        let sum = correlation_sum_exact(&b, &seq, seq.len()).map_err(err)?;
        let ok = sum.iter().zip(o.pixels()).all(|(s, &v)| *s == n * v as i64);
        ensure(ok, || format!("{:?} sequence does not reproduce the object", seq.scheme))?;
    }
    Ok(())
}

/// Over a milestone prefix of length `M` with blocks of area `N / M`,
/// `Σ B·P = M · (block sum)` at every pixel.
fn check_progressive(l: u32) -> Result<(), String> {
    let o = test_object(l)?;
    let side = o.side();
    for seq in [mpcgi_sequence(l).map_err(err)?, rd_sequence(l).map_err(err)?] {
        let b = exact_buckets(&seq, &o).map_err(err)?;
        for m in seq.scheme.milestones(l) {
            let (bh, bw) = seq.scheme.milestone_blocks(l, m).ok_or("no block shape")?;
            let sum = correlation_sum_exact(&b, &seq, m).map_err(err)?;
            for y in 0..side {
                for x in 0..side {
                    let (by, bx) = (y / bh * bh, x / bw * bw);
                    let block: i64 = (by..by + bh)
                        .flat_map(|yy| (bx..bx + bw).map(move |xx| (yy, xx)))
                        .map(|(yy, xx)| o.get(yy, xx) as i64)
                        .sum();
                    ensure(sum[y * side + x] == m as i64 * block, || {
                        format!("{:?} prefix {m} at ({y},{x})", seq.scheme)
                    })?;
                }
            }
        }
    }
    Ok(())
}

fn check_binary(l: u32) -> Result<(), String> {
    let o = test_object(l)?;
    let seq = rd_sequence(l).map_err(err)?;
    let a = acquire(&seq, &o, NoiseModel::None).map_err(err)?;
    let b = acquire_binary(&seq, &o, NoiseModel::None).map_err(err)?;
    let ra = reconstruct(&a, &seq, seq.len()).map_err(err)?;
    let rb = reconstruct(&b, &seq, seq.len()).map_err(err)?;
    let same = ra.values.iter().zip(&rb.values).all(|(x, y)| x.to_bits() == y.to_bits());
    ensure(same, || "reconstructions differ".into())
}

fn check_memory(l: u32) -> Result<(), String> {
    for tr in [Traversal::BreadthFirst, Traversal::DepthFirst] {
        let (n, c) = instrument(|| run_generator(l, tr));
        n.map_err(err)?;
        let want = nhpc_cost(2 * l, tr).map_err(err)?.total_entries;
        ensure(c.peak_entries as u128 == want, || {
            format!("{tr:?} peak {} vs model {want}", c.peak_entries)
        })?;
    }
    if l >= 1 {
        let (perm, c) = instrument(|| thdc_rd_permutation(2 * l, Convention::RightExpand));
        perm.map_err(err)?;
        let want = thdc_cost(2 * l).map_err(err)?.total_entries;
        ensure(c.allocated_entries as u128 == want, || {
            format!("search built {} entries vs model {want}", c.allocated_entries)
        })?;
    }
    Ok(())
}

fn check_hpc1(l: u32) -> Result<(), String> {
    let seq = rd_sequence(l).map_err(err)?;
    let mut buf = Vec::new();
    crate::io::write_patterns(&seq, &mut buf).map_err(err)?;
    let back = crate::io::read_patterns(&buf[..]).map_err(err)?;
    let same = back.len() == seq.len() && seq.items.iter().zip(&back.items).all(|(a, b)| a.body() == b.body());
    ensure(same, || "patterns changed".into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass_small_levels() {
        for l in 0..=2 {
            for c in run(l) {
                assert!(c.passed, "level {l}: {} failed: {}", c.name, c.detail);
            }
        }
    }
}
