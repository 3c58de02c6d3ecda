use std::fmt;

use crate::error::{Error, Result};
use crate::hadamard::SignMatrix;

/// One of the four quadruple-extension rules of the pipeline encoder.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RuleIndex(u8);

impl RuleIndex {
    pub const ALL: [RuleIndex; 4] = [RuleIndex(1), RuleIndex(2), RuleIndex(3), RuleIndex(4)];

    pub fn new(value: u8) -> Result<Self> {
        match value {
            1..=4 => Ok(RuleIndex(value)),
            _ => Err(Error::contract(format!("rule index {value} not in 1..=4"))),
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    /// Sign pattern of the 2×2 block layout, row-major, as `+P` = true.
    ///
    /// Rule 1 `[[+,+],[+,+]]`, rule 2 `[[+,+],[−,−]]`, rule 3 `[[+,−],[+,−]]`,
    /// rule 4 `[[+,−],[−,+]]`.
    pub fn block_signs(self) -> [[bool; 2]; 2] {
        let row_flip = matches!(self.0, 2 | 4);
        let col_flip = matches!(self.0, 3 | 4);
        [[true, !col_flip], [!row_flip, row_flip == col_flip]]
    }
}

impl TryFrom<u8> for RuleIndex {
    type Error = Error;

    fn try_from(value: u8) -> Result<Self> {
        RuleIndex::new(value)
    }
}

impl fmt::Display for RuleIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Where a pattern came from.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Lineage {
    /// Produced by the pipeline encoder from the all-ones seed; empty for the
    /// seed itself.
    Rules(Vec<RuleIndex>),
    /// Reshaped from the given 1-based row of a Hadamard matrix.
    Row(usize),
    /// Read back from a file; only the body is known.
    Opaque,
}

/// A square ±1 pattern together with its generation level and lineage.
///
/// `level` is the resolution level the pattern was generated at (native side
/// `2^level`); the body may be larger after [`upscale`](crate::upscale).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Pattern {
    body: SignMatrix,
    level: u32,
    lineage: Lineage,
}

impl Pattern {
    pub fn new(body: SignMatrix, level: u32, lineage: Lineage) -> Result<Self> {
        if !body.is_square() || !body.rows().is_power_of_two() {
            return Err(Error::shape(format!(
                "pattern body must be square with power-of-two side, got {}x{}",
                body.rows(),
                body.cols()
            )));
        }
        if body.rows() < 1usize << level {
            return Err(Error::shape(format!(
                "side {} smaller than native side of level {level}",
                body.rows()
            )));
        }
        if let Lineage::Rules(path) = &lineage {
            if path.len() != level as usize {
                return Err(Error::shape(format!(
                    "rule path of length {} at level {level}",
                    path.len()
                )));
            }
        }
        Ok(Pattern {
            body,
            level,
            lineage,
        })
    }

    pub fn side(&self) -> usize {
        self.body.rows()
    }

    pub fn native_side(&self) -> usize {
        1 << self.level
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn body(&self) -> &SignMatrix {
        &self.body
    }

    pub fn into_body(self) -> SignMatrix {
        self.body
    }

    pub fn lineage(&self) -> &Lineage {
        &self.lineage
    }

    pub fn rule_path(&self) -> Option<&[RuleIndex]> {
        match &self.lineage {
            Lineage::Rules(p) => Some(p),
            Lineage::Row(_) | Lineage::Opaque => None,
        }
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> i8 {
        self.body.get(y, x)
    }

    /// Frobenius inner product with another pattern of the same side.
    pub fn inner(&self, other: &Pattern) -> Result<i64> {
        self.body.frobenius(&other.body)
    }
}

impl fmt::Debug for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Pattern")
            .field("level", &self.level)
            .field("lineage", &self.lineage)
            .field("body", &self.body)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_index_range() {
        assert!(RuleIndex::new(0).is_err());
        assert!(RuleIndex::new(5).is_err());
        assert_eq!(RuleIndex::try_from(3).unwrap().get(), 3);
    }

    #[test]
    fn block_signs_match_layouts() {
        let signs: Vec<_> = RuleIndex::ALL.iter().map(|r| r.block_signs()).collect();
        assert_eq!(signs[0], [[true, true], [true, true]]);
        assert_eq!(signs[1], [[true, true], [false, false]]);
        assert_eq!(signs[2], [[true, false], [true, false]]);
        assert_eq!(signs[3], [[true, false], [false, true]]);
    }

    #[test]
    fn pattern_rejects_bad_shapes() {
        let body = SignMatrix::ones(2, 4).unwrap();
        assert!(Pattern::new(body, 1, Lineage::Row(1)).is_err());
        let body = SignMatrix::ones(2, 2).unwrap();
        assert!(Pattern::new(body.clone(), 2, Lineage::Row(1)).is_err());
        assert!(Pattern::new(body, 1, Lineage::Rules(vec![])).is_err());
    }
}
