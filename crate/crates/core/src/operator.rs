//! Matrix-free linear operators on complex vectors.
//!
//! Every operator in the crate (the CSA operator, the measurement operator,
//! the wavelet basis and their compositions) implements [`LinearOperator`],
//! and [`adjoint_residual`] is the dot test they are all checked with.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{inner, norm};
use crate::random::complex_gaussian;

/// A linear map `C^in_dim -> C^out_dim` together with its adjoint.
///
/// `apply` and `apply_adjoint` panic when handed a vector of the wrong length.
pub trait LinearOperator: Send + Sync {
    fn in_dim(&self) -> usize;
    fn out_dim(&self) -> usize;
    fn apply(&self, x: &[Complex64]) -> Vec<Complex64>;
    fn apply_adjoint(&self, y: &[Complex64]) -> Vec<Complex64>;
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn in_dim(&self) -> usize {
        (**self).in_dim()
    }
    fn out_dim(&self) -> usize {
        (**self).out_dim()
    }
    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        (**self).apply(x)
    }
    fn apply_adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        (**self).apply_adjoint(y)
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for Box<T> {
    fn in_dim(&self) -> usize {
        (**self).in_dim()
    }
    fn out_dim(&self) -> usize {
        (**self).out_dim()
    }
    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        (**self).apply(x)
    }
    fn apply_adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        (**self).apply_adjoint(y)
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for std::sync::Arc<T> {
    fn in_dim(&self) -> usize {
        (**self).in_dim()
    }
    fn out_dim(&self) -> usize {
        (**self).out_dim()
    }
    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        (**self).apply(x)
    }
    fn apply_adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        (**self).apply_adjoint(y)
    }
}

type VecMap = Box<dyn Fn(&[Complex64]) -> Vec<Complex64> + Send + Sync>;

/// Operator assembled from a pair of closures.
pub struct FnOperator {
    in_dim: usize,
    out_dim: usize,
    forward: VecMap,
    adjoint: VecMap,
}

impl FnOperator {
    pub fn new<F, G>(in_dim: usize, out_dim: usize, forward: F, adjoint: G) -> Self
    where
        F: Fn(&[Complex64]) -> Vec<Complex64> + Send + Sync + 'static,
        G: Fn(&[Complex64]) -> Vec<Complex64> + Send + Sync + 'static,
    {
        Self {
            in_dim,
            out_dim,
            forward: Box::new(forward),
            adjoint: Box::new(adjoint),
        }
    }
}

impl LinearOperator for FnOperator {
    fn in_dim(&self) -> usize {
        self.in_dim
    }
    fn out_dim(&self) -> usize {
        self.out_dim
    }
    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        (self.forward)(x)
    }
    fn apply_adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        (self.adjoint)(y)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Identity(pub usize);

impl LinearOperator for Identity {
    fn in_dim(&self) -> usize {
        self.0
    }
    fn out_dim(&self) -> usize {
        self.0
    }
    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.0);
        x.to_vec()
    }
    fn apply_adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(y.len(), self.0);
        y.to_vec()
    }
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn from_rows(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let data = (0..rows)
            .flat_map(|r| (0..cols).map(move |c| (r, c)))
            .map(|(r, c)| f(r, c))
            .collect();
        Self { rows, cols, data }
    }

    /// Materialises `op` column by column from the unit basis.
    pub fn from_operator(op: &dyn LinearOperator) -> Self {
        let (rows, cols) = (op.out_dim(), op.in_dim());
        let mut m = Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        };
        let mut e = vec![Complex64::new(0.0, 0.0); cols];
        for c in 0..cols {
            e[c] = Complex64::new(1.0, 0.0);
            let col = op.apply(&e);
            e[c] = Complex64::new(0.0, 0.0);
            for (r, v) in col.into_iter().enumerate() {
                m.data[r * cols + c] = v;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl LinearOperator for DenseMatrix {
    fn in_dim(&self) -> usize {
        self.cols
    }
    fn out_dim(&self) -> usize {
        self.rows
    }
    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }
    fn apply_adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(y.len(), self.rows);
        let mut out = vec![Complex64::new(0.0, 0.0); self.cols];
        for (r, yr) in y.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(r)) {
                *o += a.conj() * yr;
            }
        }
        out
    }
}

/// `outer ∘ inner`: applies `inner` first.
pub struct Compose<A, B> {
    outer: A,
    inner: B,
}

impl<A: LinearOperator, B: LinearOperator> Compose<A, B> {
    pub fn new(outer: A, inner: B) -> Result<Self> {
        if outer.in_dim() != inner.out_dim() {
            return Err(Error::DimensionMismatch {
                expected: outer.in_dim(),
                got: inner.out_dim(),
            });
        }
        Ok(Self { outer, inner })
    }

    pub fn outer(&self) -> &A {
        &self.outer
    }

    pub fn inner(&self) -> &B {
        &self.inner
    }
}

impl<A: LinearOperator, B: LinearOperator> LinearOperator for Compose<A, B> {
    fn in_dim(&self) -> usize {
        self.inner.in_dim()
    }
    fn out_dim(&self) -> usize {
        self.outer.out_dim()
    }
    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.outer.apply(&self.inner.apply(x))
    }
    fn apply_adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        self.inner.apply_adjoint(&self.outer.apply_adjoint(y))
    }
}

/// Stochastic dot test.
///
/// Returns the largest `|<A x, y> - <x, A^H y>| / (||x|| ||y|| ||A||_est)`
/// over `trials` seeded Gaussian pairs, where `||A||_est` is the largest
/// gain `||A x|| / ||x||` or `||A^H y|| / ||y||` seen in those trials.
pub fn adjoint_residual(op: &dyn LinearOperator, trials: usize, seed: u64) -> Result<f64> {
    if trials == 0 {
        return Err(Error::Empty);
    }
    let (n, m) = (op.in_dim(), op.out_dim());
    let mut gaps = Vec::with_capacity(trials);
    let mut gain: f64 = 0.0;
    for t in 0..trials as u64 {
        let x = complex_gaussian(n, seed, 2 * t);
        let y = complex_gaussian(m, seed, 2 * t + 1);
        let ax = op.apply(&x);
        if ax.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: ax.len(),
            });
        }
        let ahy = op.apply_adjoint(&y);
        if ahy.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: ahy.len(),
            });
        }
        let (nx, ny) = (norm(&x), norm(&y));
        gain = gain.max(norm(&ax) / nx).max(norm(&ahy) / ny);
        let gap = (inner(&ax, &y) - inner(&x, &ahy)).norm();
        gaps.push(gap / (nx * ny));
    }
    let worst = gaps.into_iter().fold(0.0, f64::max);
    Ok(if gain > 0.0 { worst / gain } else { worst })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dft::UnitaryDft;

    #[test]
    fn identity_residual_is_exactly_zero() {
        assert_eq!(adjoint_residual(&Identity(17), 5, 3).unwrap(), 0.0);
    }

    #[test]
    fn unitary_dft_adjoint_is_inverse() {
        let dft = UnitaryDft::new(64).unwrap();
        let (f, g) = (dft.clone(), dft);
        let op = FnOperator::new(
            64,
            64,
            move |x| {
                let mut v = x.to_vec();
                f.forward(&mut v);
                v
            },
            move |y| {
                let mut v = y.to_vec();
                g.inverse(&mut v);
                v
            },
        );
        assert!(adjoint_residual(&op, 10, 1).unwrap() <= 1e-12);
    }

    #[test]
    fn wrong_adjoint_is_detected() {
        let m = DenseMatrix::from_fn(3, 3, |r, c| {
            Complex64::new((r * 3 + c) as f64 + 1.0, if r > c { 2.0 } else { 0.0 })
        });
        let (a, b) = (m.clone(), m);
        let op = FnOperator::new(3, 3, move |x| a.apply(x), move |y| b.apply(y));
        let res = adjoint_residual(&op, 10, 7).unwrap();
        assert!(res > 1e-3, "residual {res}");
    }

    #[test]
    fn dimension_mismatch_reported() {
        let op = FnOperator::new(4, 3, |_| vec![Complex64::new(0.0, 0.0); 3], |_| {
            vec![Complex64::new(0.0, 0.0); 5]
        });
        assert_eq!(
            adjoint_residual(&op, 1, 0).unwrap_err(),
            Error::DimensionMismatch { expected: 4, got: 5 }
        );
    }

    #[test]
    fn dense_assembly_round_trips() {
        let m = DenseMatrix::from_fn(4, 6, |r, c| Complex64::new(r as f64, c as f64 * 0.5));
        assert_eq!(DenseMatrix::from_operator(&m), m);
        assert!(adjoint_residual(&m, 5, 2).unwrap() < 1e-14);
    }

    #[test]
    fn compose_checks_dims() {
        assert!(Compose::new(Identity(3), Identity(4)).is_err());
        let c = Compose::new(Identity(3), Identity(3)).unwrap();
        assert_eq!(c.in_dim(), 3);
    }
}
