use crate::error::{Error, Result};
use crate::sim::{ObjectImage, Reconstruction};

/// Reconstruction quality against a reference object.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Metrics {
    /// Mean squared error after the best affine map `a·r + b` onto the
    /// reference.
    pub mse: f64,
    /// `10·log10(peak² / mse)` with `peak = max(reference)`; infinite when
    /// `mse` is zero.
    pub psnr_db: f64,
    /// Pearson correlation of the raw values; `None` when either image has
    /// zero variance.
    pub pearson: Option<f64>,
}

pub fn metrics(r: &Reconstruction, reference: &ObjectImage) -> Result<Metrics> {
    if r.side != reference.side() {
        return Err(Error::shape(format!(
            "reconstruction side {} vs reference side {}",
            r.side,
            reference.side()
        )));
    }
    let n = r.values.len() as f64;
    let refs: Vec<f64> = reference.pixels().iter().map(|&v| v as f64).collect();
    let mean_r = r.values.iter().sum::<f64>() / n;
    let mean_o = refs.iter().sum::<f64>() / n;
    let (mut srr, mut soo, mut sro) = (0.0, 0.0, 0.0);
    for (a, b) in r.values.iter().zip(&refs) {
        let (da, db) = (a - mean_r, b - mean_o);
        srr += da * da;
        soo += db * db;
        sro += da * db;
    }
    let (slope, intercept) = if srr > 0.0 {
        let s = sro / srr;
        (s, mean_o - s * mean_r)
    } else {
        (0.0, mean_o)
    };
    let mse = r
        .values
        .iter()
        .zip(&refs)
        .map(|(a, b)| {
            let e = slope * a + intercept - b;
            e * e
        })
        .sum::<f64>()
        / n;
    let peak = refs.iter().copied().fold(0.0, f64::max);
    let psnr_db = if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (peak * peak / mse).log10()
    };
    let pearson = (srr > 0.0 && soo > 0.0).then(|| sro / (srr.sqrt() * soo.sqrt()));
    Ok(Metrics {
        mse,
        psnr_db,
        pearson,
    })
}
