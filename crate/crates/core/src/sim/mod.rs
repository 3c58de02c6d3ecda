//! Computational ghost imaging: bucket acquisition with a pattern sequence
//! and correlation reconstruction
//!
//! ```text
//! O(x,y) = ⟨B·I(x,y)⟩ − ⟨B⟩⟨I(x,y)⟩,   ⟨·⟩ = (1/M) Σ_{m=1..M}
//! ```
//!
//! Patterns are used as ±1 (differential) illumination. Binary hardware can
//! realize each pattern as two complementary masks; see
//! [`bucket_binary_pair`].

mod metrics;

pub use metrics::{metrics, Metrics};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::hadamard::Pattern;
use crate::ordering::PatternSequence;

/// A square grayscale object with power-of-two side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObjectImage {
    side: usize,
    pixels: Vec<u16>,
}

impl ObjectImage {
    pub fn new(side: usize, pixels: Vec<u16>) -> Result<Self> {
        if !side.is_power_of_two() {
            return Err(Error::shape(format!("object side {side} is not a power of two")));
        }
        if pixels.len() != side * side {
            return Err(Error::shape(format!(
                "{} pixels for a {side}x{side} object",
                pixels.len()
            )));
        }
        Ok(ObjectImage { side, pixels })
    }

    pub fn from_rows<R: AsRef<[u16]>>(rows: &[R]) -> Result<Self> {
        let side = rows.len();
        let mut pixels = Vec::with_capacity(side * side);
        for r in rows {
            let r = r.as_ref();
            if r.len() != side {
                return Err(Error::shape("object rows must form a square"));
            }
            pixels.extend_from_slice(r);
        }
        Self::new(side, pixels)
    }

    /// Uniform random pixels in `0..=max`, reproducible from `seed`.
    pub fn random(side: usize, max: u16, seed: u64) -> Result<Self> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let pixels = (0..side * side).map(|_| rng.random_range(0..=max)).collect();
        Self::new(side, pixels)
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn pixels(&self) -> &[u16] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> u16 {
        self.pixels[y * self.side + x]
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum NoiseModel {
    #[default]
    None,
    /// Zero-mean Gaussian noise added to every bucket value. Draws come from
    /// `ChaCha20Rng::seed_from_u64(seed)` through the standard normal
    /// ziggurat sampler, one draw per record in sequence order.
    AdditiveGaussian { sigma: f64, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasurementRecord {
    /// 1-based measurement index.
    pub m: usize,
    pub bucket: f64,
}

/// A reconstructed image, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Reconstruction {
    pub side: usize,
    pub values: Vec<f64>,
    pub used_m: usize,
}

impl Reconstruction {
    pub fn get(&self, y: usize, x: usize) -> f64 {
        self.values[y * self.side + x]
    }
}

fn check_sides(p: &Pattern, o: &ObjectImage) -> Result<()> {
    if p.side() != o.side() {
        return Err(Error::shape(format!(
            "pattern side {} does not match object side {}",
            p.side(),
            o.side()
        )));
    }
    Ok(())
}

/// Total signal `Σ p(x,y)·o(x,y)` under ±1 illumination.
pub fn bucket(p: &Pattern, o: &ObjectImage) -> Result<i64> {
    let (plus, minus) = bucket_binary_pair(p, o)?;
    Ok(plus - minus)
}

/// Signals under the two complementary binary masks `{p = +1}` and
/// `{p = −1}`; their difference is [`bucket`].
pub fn bucket_binary_pair(p: &Pattern, o: &ObjectImage) -> Result<(i64, i64)> {
    check_sides(p, o)?;
    let side = o.side();
    let (mut plus, mut minus) = (0i64, 0i64);
    for y in 0..side {
        for x in 0..side {
            let v = o.get(y, x) as i64;
            if p.body().is_plus(y, x) {
                plus += v;
            } else {
                minus += v;
            }
        }
    }
    Ok((plus, minus))
}

fn check_sequence(seq: &PatternSequence, o: &ObjectImage) -> Result<()> {
    if seq.display_side != o.side() {
        return Err(Error::shape(format!(
            "sequence side {} does not match object side {}",
            seq.display_side,
            o.side()
        )));
    }
    Ok(())
}

fn add_noise(records: &mut [MeasurementRecord], noise: NoiseModel) -> Result<()> {
    if let NoiseModel::AdditiveGaussian { sigma, seed } = noise {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::contract(format!("noise sigma {sigma} must be finite and ≥ 0")));
        }
        if sigma > 0.0 {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            for r in records {
                let z: f64 = rng.sample(StandardNormal);
                r.bucket += sigma * z;
            }
        }
    }
    Ok(())
}

/// One bucket measurement per pattern, in sequence order.
pub fn acquire(seq: &PatternSequence, o: &ObjectImage, noise: NoiseModel) -> Result<Vec<MeasurementRecord>> {
    check_sequence(seq, o)?;
    let mut records = seq
        .items
        .iter()
        .enumerate()
        .map(|(i, p)| {
            Ok(MeasurementRecord {
                m: i + 1,
                bucket: bucket(p, o)? as f64,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    add_noise(&mut records, noise)?;
    Ok(records)
}

/// Like [`acquire`] but measuring each pattern as two binary masks and
/// recording the difference.
pub fn acquire_binary(seq: &PatternSequence, o: &ObjectImage, noise: NoiseModel) -> Result<Vec<MeasurementRecord>> {
    check_sequence(seq, o)?;
    let mut records = seq
        .items
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let (plus, minus) = bucket_binary_pair(p, o)?;
            Ok(MeasurementRecord {
                m: i + 1,
                bucket: plus as f64 - minus as f64,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    add_noise(&mut records, noise)?;
    Ok(records)
}

fn check_prefix(records: &[MeasurementRecord], seq: &PatternSequence, use_m: usize) -> Result<()> {
    if use_m == 0 {
        return Err(Error::contract("reconstruction needs at least one measurement"));
    }
    if use_m > records.len() || use_m > seq.len() {
        return Err(Error::contract(format!(
            "prefix {use_m} exceeds {} records / {} patterns",
            records.len(),
            seq.len()
        )));
    }
    Ok(())
}

/// Correlation reconstruction from the first `use_m` records.
pub fn reconstruct(records: &[MeasurementRecord], seq: &PatternSequence, use_m: usize) -> Result<Reconstruction> {
    check_prefix(records, seq, use_m)?;
    let side = seq.display_side;
    let n = side * side;
    let mut sum_bi = vec![0.0f64; n];
    let mut sum_i = vec![0.0f64; n];
    let mut sum_b = 0.0f64;
    for (rec, p) in records.iter().zip(&seq.items).take(use_m) {
        let b = rec.bucket;
        sum_b += b;
        for y in 0..side {
            for x in 0..side {
                let i = p.get(y, x) as f64;
                sum_bi[y * side + x] += b * i;
                sum_i[y * side + x] += i;
            }
        }
    }
    let m = use_m as f64;
    let mean_b = sum_b / m;
    let values = sum_bi
        .iter()
        .zip(&sum_i)
        .map(|(bi, i)| bi / m - mean_b * (i / m))
        .collect();
    Ok(Reconstruction {
        side,
        values,
        used_m: use_m,
    })
}

/// Only the first correlation term, `⟨B·I(x,y)⟩`.
///
/// Over a complete sequence this is the object itself; the full estimate
/// from [`reconstruct`] additionally subtracts `⟨B⟩` at the one pixel where
/// every pattern is +1.
pub fn reconstruct_first_term(
    records: &[MeasurementRecord],
    seq: &PatternSequence,
    use_m: usize,
) -> Result<Reconstruction> {
    check_prefix(records, seq, use_m)?;
    let side = seq.display_side;
    let mut sum_bi = vec![0.0f64; side * side];
    for (rec, p) in records.iter().zip(&seq.items).take(use_m) {
        for y in 0..side {
            for x in 0..side {
                sum_bi[y * side + x] += rec.bucket * p.get(y, x) as f64;
            }
        }
    }
    let m = use_m as f64;
    Ok(Reconstruction {
        side,
        values: sum_bi.into_iter().map(|v| v / m).collect(),
        used_m: use_m,
    })
}

/// `Σ_{m ≤ use_m} B^(m)·I^(m)(x,y)` in exact integer arithmetic, from
/// noiseless integer buckets. Over a complete sequence of side `s` this is
/// `s²·o(x,y)`.
pub fn correlation_sum_exact(buckets: &[i64], seq: &PatternSequence, use_m: usize) -> Result<Vec<i64>> {
    if use_m == 0 || use_m > buckets.len() || use_m > seq.len() {
        return Err(Error::contract(format!("invalid prefix {use_m}")));
    }
    let side = seq.display_side;
    let mut acc = vec![0i64; side * side];
    for (b, p) in buckets.iter().zip(&seq.items).take(use_m) {
        for y in 0..side {
            for x in 0..side {
                acc[y * side + x] += b * p.get(y, x) as i64;
            }
        }
    }
    Ok(acc)
}

/// Exact integer buckets for every pattern of `seq`.
pub fn exact_buckets(seq: &PatternSequence, o: &ObjectImage) -> Result<Vec<i64>> {
    check_sequence(seq, o)?;
    seq.items.iter().map(|p| bucket(p, o)).collect()
}

/// Replaces each pixel by the mean of its `bh × bw` block.
pub fn block_average(o: &ObjectImage, bh: usize, bw: usize) -> Result<Vec<f64>> {
    let side = o.side();
    if bh == 0 || bw == 0 || !side.is_multiple_of(bh) || !side.is_multiple_of(bw) {
        return Err(Error::shape(format!("{bh}x{bw} blocks do not tile side {side}")));
    }
    let mut out = vec![0.0; side * side];
    let area = (bh * bw) as f64;
    for by in (0..side).step_by(bh) {
        for bx in (0..side).step_by(bw) {
            let sum: u64 = (by..by + bh)
                .flat_map(|y| (bx..bx + bw).map(move |x| (y, x)))
                .map(|(y, x)| o.get(y, x) as u64)
                .sum();
            let mean = sum as f64 / area;
            for y in by..by + bh {
                for x in bx..bx + bw {
                    out[y * side + x] = mean;
                }
            }
        }
    }
    Ok(out)
}

/// Reconstructions at each milestone from a single acquisition.
pub fn progressive(
    seq: &PatternSequence,
    o: &ObjectImage,
    milestones: &[usize],
    noise: NoiseModel,
) -> Result<Vec<Reconstruction>> {
    if milestones.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::contract("milestones must be strictly ascending"));
    }
    let records = acquire(seq, o, noise)?;
    milestones
        .iter()
        .map(|&m| reconstruct(&records, seq, m))
        .collect()
}
