//! Image quality figures used to compare reconstructions with the scene.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{inner, norm, ComplexGrid};
use crate::operator::{DenseMatrix, LinearOperator};

/// PSNR of the magnitude images in dB, with the reference peak magnitude as
/// the peak. Identical magnitude images give `f64::INFINITY`.
pub fn psnr(reference: &ComplexGrid, test: &ComplexGrid) -> Result<f64> {
    reference.ensure_same_shape(test)?;
    let peak = reference.max_abs();
    if peak == 0.0 {
        return Err(Error::ZeroReference);
    }
    let mse = reference
        .as_slice()
        .iter()
        .zip(test.as_slice())
        .map(|(a, b)| (a.norm() - b.norm()).powi(2))
        .sum::<f64>()
        / reference.len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (peak * peak / mse).log10())
}

/// `||ref - test||_F^2 / ||ref||_F^2`.
pub fn nmse(reference: &ComplexGrid, test: &ComplexGrid) -> Result<f64> {
    reference.ensure_same_shape(test)?;
    let den: f64 = reference.as_slice().iter().map(|v| v.norm_sqr()).sum();
    if den == 0.0 {
        return Err(Error::ZeroReference);
    }
    let num: f64 = reference
        .as_slice()
        .iter()
        .zip(test.as_slice())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    Ok(num / den)
}

/// Largest normalised inner product between distinct columns of `op`,
/// computed by materialising it. Zero columns are skipped.
pub fn mutual_coherence(op: &dyn LinearOperator) -> f64 {
    let dense = DenseMatrix::from_operator(op).conj_transpose();
    let cols: Vec<(&[Complex64], f64)> = (0..dense.rows())
        .map(|c| {
            let col = dense.row(c);
            (col, norm(col))
        })
        .filter(|(_, n)| *n > 0.0)
        .collect();
    let mut best: f64 = 0.0;
    for i in 0..cols.len() {
        for j in i + 1..cols.len() {
            let (a, na) = cols[i];
            let (b, nb) = cols[j];
            best = best.max(inner(a, b).norm() / (na * nb));
        }
    }
    best
}
