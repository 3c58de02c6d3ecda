//! HPC1 pattern container.
//!
//! ```text
//! offset  size  field
//!      0     4  magic "HPC1"
//!      4     1  version = 1
//!      5     1  convention: 0 LeftExpand, 1 RightExpand, 2 not applicable
//!      6     1  scheme: 0 natural, 1 mpcgi, 2 rd
//!      7     1  reserved = 0
//!      8     4  side, u32 little-endian, power of two
//!     12     4  count, u32 little-endian, ≤ side²
//!     16     …  count patterns, each side² bits row-major, MSB first,
//!               1 ↔ +1, padded to a whole byte
//! ```

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::hadamard::{Convention, Lineage, Pattern, SignMatrix};
use crate::ordering::{OrderingScheme, PatternSequence, Provenance};

pub const MAGIC: &[u8; 4] = b"HPC1";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 16;

fn pattern_bytes(side: usize) -> usize {
    (side * side).div_ceil(8)
}

pub fn write_patterns(seq: &PatternSequence, mut sink: impl Write) -> Result<()> {
    let side = seq.display_side;
    let side32 = u32::try_from(side).map_err(|_| Error::shape("side does not fit in 32 bits"))?;
    let count = u32::try_from(seq.len()).map_err(|_| Error::shape("count does not fit in 32 bits"))?;
    let mut header = [0u8; HEADER_LEN];
    header[..4].copy_from_slice(MAGIC);
    header[4] = VERSION;
    header[5] = match seq.convention {
        Some(Convention::LeftExpand) => 0,
        Some(Convention::RightExpand) => 1,
        None => 2,
    };
    header[6] = match seq.scheme {
        OrderingScheme::Natural => 0,
        OrderingScheme::Mpcgi => 1,
        OrderingScheme::RussianDolls => 2,
    };
    header[8..12].copy_from_slice(&side32.to_le_bytes());
    header[12..16].copy_from_slice(&count.to_le_bytes());
    sink.write_all(&header)?;

    let mut buf = vec![0u8; pattern_bytes(side)];
    for p in &seq.items {
        buf.fill(0);
        for y in 0..side {
            for x in 0..side {
                if p.body().is_plus(y, x) {
                    let bit = y * side + x;
                    buf[bit / 8] |= 0x80 >> (bit % 8);
                }
            }
        }
        sink.write_all(&buf)?;
    }
    sink.flush()?;
    Ok(())
}

/// Reads a whole HPC1 stream. Patterns come back with [`Lineage::Opaque`].
pub fn read_patterns(mut source: impl Read) -> Result<PatternSequence> {
    let mut data = Vec::new();
    source.read_to_end(&mut data)?;
    if data.len() < HEADER_LEN {
        return Err(Error::format(data.len() as u64, "truncated header"));
    }
    if &data[..4] != MAGIC {
        return Err(Error::format(0, "bad magic, expected HPC1"));
    }
    if data[4] != VERSION {
        return Err(Error::format(4, format!("unsupported version {}", data[4])));
    }
    let convention = match data[5] {
        0 => Some(Convention::LeftExpand),
        1 => Some(Convention::RightExpand),
        2 => None,
        v => return Err(Error::format(5, format!("unknown convention {v}"))),
    };
    let scheme = match data[6] {
        0 => OrderingScheme::Natural,
        1 => OrderingScheme::Mpcgi,
        2 => OrderingScheme::RussianDolls,
        v => return Err(Error::format(6, format!("unknown scheme {v}"))),
    };
    if data[7] != 0 {
        return Err(Error::format(7, "reserved byte is not zero"));
    }
    let side = u32::from_le_bytes(data[8..12].try_into().expect("4 bytes")) as usize;
    let count = u32::from_le_bytes(data[12..16].try_into().expect("4 bytes")) as usize;
    if !side.is_power_of_two() || side > 1 << 15 {
        return Err(Error::format(8, format!("side {side} is not a supported power of two")));
    }
    if count > side * side {
        return Err(Error::format(12, format!("count {count} exceeds side² = {}", side * side)));
    }
    let per = pattern_bytes(side);
    let expected = HEADER_LEN + count * per;
    if data.len() < expected {
        let whole = (data.len() - HEADER_LEN) / per;
        return Err(Error::format(
            (HEADER_LEN + whole * per) as u64,
            format!("truncated: pattern {} of {count} incomplete", whole + 1),
        ));
    }
    if data.len() > expected {
        return Err(Error::format(expected as u64, "trailing bytes after last pattern"));
    }
    let level = side.trailing_zeros();
    let mut items = Vec::with_capacity(count);
    for i in 0..count {
        let start = HEADER_LEN + i * per;
        let chunk = &data[start..start + per];
        let tail_bits = per * 8 - side * side;
        if tail_bits > 0 && chunk[per - 1] & ((1u8 << tail_bits) - 1) != 0 {
            return Err(Error::format((start + per - 1) as u64, "nonzero padding bits"));
        }
        let body = SignMatrix::from_fn(side, side, |y, x| {
            let bit = y * side + x;
            chunk[bit / 8] & (0x80 >> (bit % 8)) != 0
        })?;
        items.push(Pattern::new(body, level, Lineage::Opaque)?);
    }
    let provenance = Provenance::Loaded;
    PatternSequence::new(scheme, side, provenance, convention, items)
        .map_err(|e| Error::format(HEADER_LEN as u64, e.to_string()))
}
