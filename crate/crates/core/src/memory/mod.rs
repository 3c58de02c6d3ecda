//! Memory cost of the classical search route versus the pipeline.
//!
//! Costs are counted in stored sign entries. [`CostBreakdown::bytes`] converts
//! at one byte per entry (an unpacked `i8` matrix) or one bit per entry (the
//! packing used by [`SignMatrix`](crate::SignMatrix)).

pub mod tracker;

pub use tracker::{instrument, AllocationCounter};

use crate::error::{Error, Result};
use crate::pipeline::{count_level, Traversal};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Packing {
    Byte,
    Bit,
}

/// Entry counts split the same way as the classical cost table: the full
/// matrix, the lower-order matrices, and their stretched copies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CostBreakdown {
    pub high_order_entries: u128,
    pub low_order_entries: u128,
    pub extended_entries: u128,
    pub total_entries: u128,
}

impl CostBreakdown {
    fn from_parts(high: u128, low: u128, extended: u128) -> Self {
        CostBreakdown {
            high_order_entries: high,
            low_order_entries: low,
            extended_entries: extended,
            total_entries: high + low + extended,
        }
    }

    pub fn bytes(&self, packing: Packing) -> u128 {
        match packing {
            Packing::Byte => self.total_entries,
            Packing::Bit => self.total_entries.div_ceil(8),
        }
    }

    /// The classical cost as tabulated in the literature: lower orders
    /// `2^0 … 2^(K−2)` only, i.e. `Σ_{k=1}^{K−1} 4^(k−1)` low-order entries and
    /// `2^K·(2^(K−1) − 1)` stretched entries. It omits the `H_{2^(K−1)}` stage
    /// that the search actually performs; see [`thdc_cost`].
    pub fn tabulated(big_k: u32) -> Result<Self> {
        check_k(big_k)?;
        let high = 1u128 << (2 * big_k);
        let low: u128 = (1..big_k).map(|k| 1u128 << (2 * (k - 1))).sum();
        let extended = (1u128 << big_k) * ((1u128 << (big_k - 1)) - 1);
        Ok(Self::from_parts(high, low, extended))
    }
}

fn check_k(big_k: u32) -> Result<()> {
    if big_k == 0 || big_k > 60 {
        return Err(Error::contract(format!("K = {big_k} outside 1..=60")));
    }
    Ok(())
}

/// Entries built by the classical RD search on `H_{2^K}`: the full matrix,
/// every `H_{2^k}` for `k < K`, and each of those stretched to width `2^K`.
pub fn thdc_cost(big_k: u32) -> Result<CostBreakdown> {
    check_k(big_k)?;
    let n = 1u128 << big_k;
    let high = n * n;
    let low = (high - 1) / 3;
    let extended = n * (n - 1);
    Ok(CostBreakdown::from_parts(high, low, extended))
}

/// Peak working set of the pipeline generating `H_{2^K}`-equivalent patterns,
/// `K = 2l`. Breadth-first holds the last two levels; depth-first holds one
/// pattern per level.
pub fn nhpc_cost(big_k: u32, traversal: Traversal) -> Result<CostBreakdown> {
    if !big_k.is_multiple_of(2) || big_k > 60 {
        return Err(Error::contract(format!("pipeline cost needs an even K ≤ 60, got {big_k}")));
    }
    let l = big_k / 2;
    let level_entries = |t: u32| count_level(t) << (2 * t);
    let peak = match traversal {
        Traversal::BreadthFirst if l == 0 => 1,
        Traversal::BreadthFirst => level_entries(l) + level_entries(l - 1),
        Traversal::DepthFirst => (0..=l).map(|t| 1u128 << (2 * t)).sum(),
    };
    Ok(CostBreakdown::from_parts(peak, 0, 0))
}

/// Table entries with the exponents exactly as printed (`2^(K²)` bytes for the
/// full matrix and `Σ 2^((k−1)²)` for the lower orders). These do not count
/// matrix entries and are kept for reference only.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LiteralExponents {
    pub high_bytes: f64,
    pub low_bytes: f64,
    pub extended_bytes: f64,
    pub total_bytes: f64,
}

pub fn literal_exponent_bytes(big_k: u32) -> LiteralExponents {
    let k = big_k as f64;
    let high = (k * k).exp2();
    let low: f64 = (1..big_k).map(|j| ((j as f64 - 1.0).powi(2)).exp2()).sum();
    let extended = (2.0 * k - 1.0).exp2();
    LiteralExponents {
        high_bytes: high,
        low_bytes: low,
        extended_bytes: extended,
        total_bytes: high + low + extended,
    }
}

/// One line of the memory comparison table, for even `K`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct BenchRow {
    pub k: u32,
    pub thdc_total: u64,
    pub thdc_table_total: u64,
    pub nhpc_breadth_peak: u64,
    pub nhpc_depth_peak: u64,
    pub measured_thdc_total: Option<u64>,
    pub measured_breadth_peak: Option<u64>,
    pub measured_depth_peak: Option<u64>,
}

/// Analytic costs for every even `K` in `2..=max_k`, with instrumented
/// measurements for `K ≤ measure_max_k`.
pub fn bench_table(max_k: u32, measure_max_k: u32) -> Result<Vec<BenchRow>> {
    if max_k > 30 {
        return Err(Error::contract(format!("max K {max_k} above 30")));
    }
    (2..=max_k)
        .step_by(2)
        .map(|k| {
            let to64 = |v: u128| v as u64;
            let measured = if k <= measure_max_k {
                let (thdc, c) = instrument(|| crate::ordering::thdc_rd_permutation(k, Default::default()));
                thdc?;
                let l = k / 2;
                let (bf, b) = instrument(|| run_generator(l, Traversal::BreadthFirst));
                bf?;
                let (df, d) = instrument(|| run_generator(l, Traversal::DepthFirst));
                df?;
                Some((c.allocated_entries, b.peak_entries, d.peak_entries))
            } else {
                None
            };
            Ok(BenchRow {
                k,
                thdc_total: to64(thdc_cost(k)?.total_entries),
                thdc_table_total: to64(CostBreakdown::tabulated(k)?.total_entries),
                nhpc_breadth_peak: to64(nhpc_cost(k, Traversal::BreadthFirst)?.total_entries),
                nhpc_depth_peak: to64(nhpc_cost(k, Traversal::DepthFirst)?.total_entries),
                measured_thdc_total: measured.map(|m| m.0),
                measured_breadth_peak: measured.map(|m| m.1),
                measured_depth_peak: measured.map(|m| m.2),
            })
        })
        .collect()
}

/// Drains the generator, dropping each pattern as soon as it is seen.
pub fn run_generator(l: u32, traversal: Traversal) -> Result<usize> {
    let mut n = 0;
    for p in crate::pipeline::generate(l, traversal)? {
        p?;
        n += 1;
    }
    Ok(n)
}
