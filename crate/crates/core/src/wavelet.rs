//! Orthonormal 2-D Daubechies-4 basis with periodic extension.
//!
//! The coefficient vector is the column-major vectorisation of the usual
//! in-place pyramid layout: after each level the approximation band occupies
//! the top-left `rows/2^k x cols/2^k` block. Columns (range) are transformed
//! before rows (azimuth) at each level. The filters are real, so complex
//! inputs are handled exactly as two independent real transforms.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec;
use crate::grid::ComplexGrid;
use crate::operator::LinearOperator;

const SQRT3: f64 = 1.732_050_807_568_877_2;
const NORM: f64 = 4.0 * std::f64::consts::SQRT_2;

/// Daubechies-4 scaling filter.
pub const DB4_LOW: [f64; 4] = [
    (1.0 + SQRT3) / NORM,
    (3.0 + SQRT3) / NORM,
    (3.0 - SQRT3) / NORM,
    (1.0 - SQRT3) / NORM,
];

/// Quadrature mirror of [`DB4_LOW`]: `g[k] = (-1)^k h[3 - k]`.
pub const DB4_HIGH: [f64; 4] = [DB4_LOW[3], -DB4_LOW[2], DB4_LOW[1], -DB4_LOW[0]];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WaveletConfig {
    pub levels: usize,
}

impl Default for WaveletConfig {
    fn default() -> Self {
        Self { levels: 3 }
    }
}

impl WaveletConfig {
    pub fn check(&self, rows: usize, cols: usize) -> Result<()> {
        if self.levels == 0 {
            return Err(Error::InvalidWavelet("levels must be at least 1".into()));
        }
        let block = 1usize
            .checked_shl(self.levels as u32)
            .ok_or_else(|| Error::InvalidWavelet(format!("{} levels is too deep", self.levels)))?;
        if rows == 0 || cols == 0 || rows % block != 0 || cols % block != 0 {
            return Err(Error::InvalidWavelet(format!(
                "{rows} x {cols} grid is not divisible by 2^{} = {block}",
                self.levels
            )));
        }
        Ok(())
    }
}

/// One analysis step on `x`: writes `[approx | detail]` into `out`.
fn analyze_1d(x: &[Complex64], out: &mut [Complex64]) {
    let n = x.len();
    let half = n / 2;
    for i in 0..half {
        let mut a = Complex64::new(0.0, 0.0);
        let mut d = Complex64::new(0.0, 0.0);
        for k in 0..4 {
            let v = x[(2 * i + k) % n];
            a += v * DB4_LOW[k];
            d += v * DB4_HIGH[k];
        }
        out[i] = a;
        out[half + i] = d;
    }
}

/// Transpose of [`analyze_1d`].
fn synthesize_1d(coef: &[Complex64], out: &mut [Complex64]) {
    let n = coef.len();
    let half = n / 2;
    out.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
    for i in 0..half {
        let (a, d) = (coef[i], coef[half + i]);
        for k in 0..4 {
            out[(2 * i + k) % n] += a * DB4_LOW[k] + d * DB4_HIGH[k];
        }
    }
}

/// Applies `step` to the leading `len` entries of the first `count` columns.
fn columns(grid: &mut ComplexGrid, count: usize, len: usize, step: fn(&[Complex64], &mut [Complex64])) {
    let rows = grid.rows();
    exec::for_each_chunk(grid.as_mut_slice(), rows, |j, col| {
        if j < count {
            let src = col[..len].to_vec();
            step(&src, &mut col[..len]);
        }
    });
}

fn rows(grid: &mut ComplexGrid, count: usize, len: usize, step: fn(&[Complex64], &mut [Complex64])) {
    let mut t = grid.transpose();
    columns(&mut t, count, len, step);
    *grid = t.transpose();
}

/// `Ψ^H`: image to wavelet coefficients.
pub fn analyze(image: &ComplexGrid, cfg: &WaveletConfig) -> Result<Vec<Complex64>> {
    let (r, c) = image.shape();
    cfg.check(r, c)?;
    let mut g = image.clone();
    for level in 0..cfg.levels {
        let (lr, lc) = (r >> level, c >> level);
        columns(&mut g, lc, lr, analyze_1d);
        rows(&mut g, lr, lc, analyze_1d);
    }
    Ok(g.into_vec())
}

/// `Ψ`: wavelet coefficients to image.
pub fn synthesize(coef: &[Complex64], rows_: usize, cols: usize, cfg: &WaveletConfig) -> Result<ComplexGrid> {
    cfg.check(rows_, cols)?;
    let mut g = ComplexGrid::from_vec(rows_, cols, coef.to_vec())?;
    for level in (0..cfg.levels).rev() {
        let (lr, lc) = (rows_ >> level, cols >> level);
        rows(&mut g, lr, lc, synthesize_1d);
        columns(&mut g, lc, lr, synthesize_1d);
    }
    Ok(g)
}

/// `Ψ` as an operator: forward synthesises, adjoint analyses.
#[derive(Debug, Clone, Copy)]
pub struct WaveletBasis {
    rows: usize,
    cols: usize,
    cfg: WaveletConfig,
}

impl WaveletBasis {
    pub fn new(rows: usize, cols: usize, cfg: WaveletConfig) -> Result<Self> {
        cfg.check(rows, cols)?;
        Ok(Self { rows, cols, cfg })
    }

    pub fn config(&self) -> WaveletConfig {
        self.cfg
    }
}

impl LinearOperator for WaveletBasis {
    fn in_dim(&self) -> usize {
        self.rows * self.cols
    }

    fn out_dim(&self) -> usize {
        self.rows * self.cols
    }

    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        synthesize(x, self.rows, self.cols, &self.cfg)
            .expect("coefficient vector has length rows * cols")
            .into_vec()
    }

    fn apply_adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        let g = ComplexGrid::from_vec(self.rows, self.cols, y.to_vec()).expect("image has length rows * cols");
        analyze(&g, &self.cfg).expect("shape checked at construction")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{norm, rel_l2_diff};
    use crate::operator::adjoint_residual;
    use crate::random::complex_gaussian;

    #[test]
    fn filters_are_orthonormal() {
        let h = DB4_LOW;
        let g = DB4_HIGH;
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        assert!((dot(&h, &h) - 1.0).abs() < 1e-15);
        assert!((h[0] * h[2] + h[1] * h[3]).abs() < 1e-15);
        assert!(dot(&h, &g).abs() < 1e-15);
        assert!((h.iter().sum::<f64>() - std::f64::consts::SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn perfect_reconstruction() {
        let cfg = WaveletConfig { levels: 3 };
        let z = ComplexGrid::from_vec(64, 64, complex_gaussian(64 * 64, 1, 0)).unwrap();
        let x = analyze(&z, &cfg).unwrap();
        assert!((norm(&x) / z.frobenius_norm() - 1.0).abs() < 1e-11);
        let back = synthesize(&x, 64, 64, &cfg).unwrap();
        assert!(rel_l2_diff(back.as_slice(), z.as_slice()) < 1e-11);
    }

    #[test]
    fn rectangular_and_deep() {
        let cfg = WaveletConfig { levels: 4 };
        let z = ComplexGrid::from_vec(16, 32, complex_gaussian(16 * 32, 2, 0)).unwrap();
        let back = synthesize(&analyze(&z, &cfg).unwrap(), 16, 32, &cfg).unwrap();
        assert!(rel_l2_diff(back.as_slice(), z.as_slice()) < 1e-12);
    }

    #[test]
    fn constant_image_has_no_detail() {
        let cfg = WaveletConfig { levels: 3 };
        let z = ComplexGrid::from_fn(32, 32, |_, _| Complex64::new(2.0, -1.0));
        let x = analyze(&z, &cfg).unwrap();
        let g = ComplexGrid::from_vec(32, 32, x).unwrap();
        for c in 0..32 {
            for r in 0..32 {
                if r >= 4 || c >= 4 {
                    assert!(g.get(r, c).norm() < 1e-12, "({r}, {c}) = {}", g.get(r, c));
                }
            }
        }
    }

    #[test]
    fn divisibility_enforced() {
        let cfg = WaveletConfig { levels: 3 };
        assert!(analyze(&ComplexGrid::zeros(12, 16), &cfg).is_err());
        assert!(WaveletBasis::new(16, 16, WaveletConfig { levels: 0 }).is_err());
    }

    #[test]
    fn basis_operator_dot_test() {
        let psi = WaveletBasis::new(32, 16, WaveletConfig::default()).unwrap();
        assert!(adjoint_residual(&psi, 20, 4).unwrap() <= 1e-10);
    }
}
