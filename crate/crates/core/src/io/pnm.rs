//! Binary Netpbm: PGM (`P5`) for objects and reconstructions, PBM (`P4`) for
//! exporting individual patterns.

use std::io::Write;

use crate::error::{Error, Result};
use crate::hadamard::Pattern;
use crate::sim::{ObjectImage, Reconstruction};

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_space(&mut self) {
        while self.pos < self.data.len() {
            match self.data[self.pos] {
                b' ' | b'\t' | b'\n' | b'\r' | 0x0b | 0x0c => self.pos += 1,
                b'#' => {
                    while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space();
        let start = self.pos;
        while self.pos < self.data.len() && self.data[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::format(start as u64, format!("expected {what}")));
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::format(start as u64, format!("{what} out of range")))
    }
}

/// Parses a binary PGM into an object. The image must be square with a
/// power-of-two side; maxval may be up to 65535 (two-byte big-endian samples
/// above 255).
pub fn read_pgm(data: &[u8]) -> Result<ObjectImage> {
    match data.get(..2) {
        Some(b"P5") => {}
        Some(b"P2") => {
            return Err(Error::format(0, "ASCII PGM (P2) is not supported; convert to binary P5"));
        }
        _ => return Err(Error::format(0, "not a binary PGM (missing P5 magic)")),
    }
    let mut cur = Cursor { data, pos: 2 };
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::format(cur.pos as u64, format!("maxval {maxval} outside 1..=65535")));
    }
    if width != height || !width.is_power_of_two() {
        return Err(Error::format(
            3,
            format!("{width}x{height} image; objects must be square with a power-of-two side"),
        ));
    }
    match data.get(cur.pos) {
        Some(c) if c.is_ascii_whitespace() => cur.pos += 1,
        _ => return Err(Error::format(cur.pos as u64, "missing whitespace after header")),
    }
    let wide = maxval > 255;
    let bytes = width * height * if wide { 2 } else { 1 };
    let body = &data[cur.pos..];
    if body.len() < bytes {
        return Err(Error::format(data.len() as u64, "truncated pixel data"));
    }
    let pixels: Vec<u16> = if wide {
        body[..bytes].chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect()
    } else {
        body[..bytes].iter().map(|&v| v as u16).collect()
    };
    if let Some(i) = pixels.iter().position(|&v| v as usize > maxval) {
        return Err(Error::format(
            (cur.pos + i * if wide { 2 } else { 1 }) as u64,
            "sample exceeds maxval",
        ));
    }
    ObjectImage::new(width, pixels)
}

/// Writes a binary PGM. `maxval` selects one- or two-byte samples.
pub fn write_pgm(mut w: impl Write, side: usize, pixels: &[u16], maxval: u16) -> Result<()> {
    if maxval == 0 || pixels.len() != side * side {
        return Err(Error::shape("PGM dimensions do not match pixel count"));
    }
    if pixels.iter().any(|&v| v > maxval) {
        return Err(Error::contract("pixel value above maxval"));
    }
    write!(w, "P5\n{side} {side}\n{maxval}\n")?;
    if maxval > 255 {
        let buf: Vec<u8> = pixels.iter().flat_map(|v| v.to_be_bytes()).collect();
        w.write_all(&buf)?;
    } else {
        let buf: Vec<u8> = pixels.iter().map(|&v| v as u8).collect();
        w.write_all(&buf)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes an object losslessly, using maxval 255 when every pixel fits.
pub fn write_object_pgm(w: impl Write, o: &ObjectImage) -> Result<()> {
    let maxval = if o.pixels().iter().all(|&v| v <= 255) { 255 } else { 65535 };
    write_pgm(w, o.side(), o.pixels(), maxval)
}

/// Maps stored 8-bit values back to reconstruction values:
/// `value ≈ scale·stored + offset`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineMap {
    pub scale: f64,
    pub offset: f64,
}

/// Rescales a reconstruction onto `0..=255` and writes it as PGM.
pub fn write_reconstruction_pgm(w: impl Write, r: &Reconstruction) -> Result<AffineMap> {
    let lo = r.values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = r.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() || !hi.is_finite() {
        return Err(Error::contract("reconstruction has non-finite values"));
    }
    let span = hi - lo;
    let pixels: Vec<u16> = r
        .values
        .iter()
        .map(|v| if span > 0.0 { ((v - lo) / span * 255.0).round() as u16 } else { 0 })
        .collect();
    write_pgm(w, r.side, &pixels, 255)?;
    Ok(AffineMap {
        scale: span / 255.0,
        offset: lo,
    })
}

/// Writes one pattern as a binary PBM; −1 is black (bit 1), +1 white.
pub fn write_pbm(mut w: impl Write, p: &Pattern) -> Result<()> {
    let side = p.side();
    write!(w, "P4\n{side} {side}\n")?;
    let row_bytes = side.div_ceil(8);
    let mut row = vec![0u8; row_bytes];
    for y in 0..side {
        row.fill(0);
        for x in 0..side {
            if !p.body().is_plus(y, x) {
                row[x / 8] |= 0x80 >> (x % 8);
            }
        }
        w.write_all(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{apply_rule, seed};
    use crate::hadamard::RuleIndex;

    #[test]
    fn object_roundtrip_8bit_and_16bit() {
        for max in [255u16, 60000] {
            let o = ObjectImage::random(8, max, 7).unwrap();
            let mut buf = Vec::new();
            write_object_pgm(&mut buf, &o).unwrap();
            assert_eq!(read_pgm(&buf).unwrap(), o);
        }
    }

    #[test]
    fn comments_in_header() {
        let mut data = b"P5\n# made by hand\n2 2\n# max\n255\n".to_vec();
        data.extend_from_slice(&[1, 2, 3, 4]);
        let o = read_pgm(&data).unwrap();
        assert_eq!(o.pixels(), &[1, 2, 3, 4]);
    }

    #[test]
    fn rejects_ascii_pgm() {
        let err = read_pgm(b"P2\n2 2\n255\n1 2 3 4\n").unwrap_err();
        assert!(err.to_string().contains("ASCII"));
    }

    #[test]
    fn rejects_non_power_of_two() {
        let mut data = b"P5\n3 5\n255\n".to_vec();
        data.extend_from_slice(&[0; 15]);
        assert!(matches!(read_pgm(&data), Err(Error::Format { .. })));
    }

    #[test]
    fn rejects_truncation_and_overflow() {
        let data = b"P5\n2 2\n255\n\x01\x02".to_vec();
        assert!(read_pgm(&data).is_err());
        let data = b"P5\n2 2\n3\n\x01\x02\x03\x09".to_vec();
        assert!(read_pgm(&data).is_err());
    }

    #[test]
    fn reconstruction_rescale() {
        let r = Reconstruction {
            side: 2,
            values: vec![-1.0, 0.0, 1.0, 3.0],
            used_m: 4,
        };
        let mut buf = Vec::new();
        let map = write_reconstruction_pgm(&mut buf, &r).unwrap();
        let img = read_pgm(&buf).unwrap();
        assert_eq!(img.pixels()[0], 0);
        assert_eq!(img.pixels()[3], 255);
        let back = map.scale * img.pixels()[2] as f64 + map.offset;
        assert!((back - 1.0).abs() < map.scale);
    }

    #[test]
    fn pbm_layout() {
        let p = apply_rule(&seed(), RuleIndex::new(3).unwrap()).unwrap();
        let mut buf = Vec::new();
        write_pbm(&mut buf, &p).unwrap();
        assert_eq!(buf, b"P4\n2 2\n\x40\x40");
    }
}
