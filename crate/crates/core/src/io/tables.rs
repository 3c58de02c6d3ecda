use std::io::{Read, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::AffineMap;
use crate::memory::BenchRow;
use crate::ordering::RowPermutation;
use crate::sim::Reconstruction;

/// One line of the per-milestone quality table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MetricsRow {
    pub prefix_length: usize,
    pub sampling_ratio: f64,
    pub mse: f64,
    pub psnr_db: f64,
    pub pearson: Option<f64>,
}

/// Header `row`, then one 1-based index per line.
pub fn write_permutation_csv(w: impl Write, perm: &RowPermutation) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["row"])?;
    for i in perm.indices() {
        out.write_record([i.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_permutation_csv(r: impl Read) -> Result<RowPermutation> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut indices = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let v = rec
            .get(0)
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::format(line as u64 + 2, "expected a row index"))?;
        indices.push(v);
    }
    RowPermutation::new(indices)
}

pub fn write_metrics_csv(w: impl Write, rows: &[MetricsRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_bench_csv(w: impl Write, rows: &[BenchRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

/// Sidecar describing how stored 8-bit pixels map back to values.
pub fn write_affine_csv(w: impl Write, map: &AffineMap) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["scale", "offset"])?;
    out.write_record([format!("{:e}", map.scale), format!("{:e}", map.offset)])?;
    out.flush()?;
    Ok(())
}

/// Raw reconstruction values, one `y,x,value` line per pixel, row-major.
pub fn write_values_csv(w: impl Write, r: &Reconstruction) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["y", "x", "value"])?;
    for y in 0..r.side {
        for x in 0..r.side {
            out.write_record([y.to_string(), x.to_string(), format!("{:e}", r.get(y, x))])?;
        }
    }
    out.flush()?;
    Ok(())
}
