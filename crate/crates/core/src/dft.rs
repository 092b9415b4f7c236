//! Unitary DFTs.
//!
//! Forward transforms use the `exp(-j 2 pi k n / N)` kernel and every
//! transform here is scaled by `1/sqrt(N)`, so forward and inverse are
//! mutual adjoints.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Planned unitary DFT of a fixed length. Cheap to clone; plans are shared.
#[derive(Clone)]
pub struct UnitaryDft {
    len: usize,
    scale: f64,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for UnitaryDft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("UnitaryDft").field("len", &self.len).finish()
    }
}

impl UnitaryDft {
    pub fn new(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::Empty);
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            len,
            scale: 1.0 / (len as f64).sqrt(),
            fwd: planner.plan_fft_forward(len),
            inv: planner.plan_fft_inverse(len),
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn scratch_len(&self) -> usize {
        self.fwd
            .get_inplace_scratch_len()
            .max(self.inv.get_inplace_scratch_len())
    }

    pub fn make_scratch(&self) -> Vec<Complex64> {
        vec![Complex64::new(0.0, 0.0); self.scratch_len()]
    }

    /// Unscaled forward transform of every `len`-sized chunk of `buf`.
    pub fn forward_raw(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.fwd.process_with_scratch(buf, scratch);
    }

    /// Unscaled inverse transform of every `len`-sized chunk of `buf`.
    pub fn inverse_raw(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.inv.process_with_scratch(buf, scratch);
    }

    pub fn forward_with_scratch(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.fwd.process_with_scratch(buf, scratch);
        buf.iter_mut().for_each(|v| *v *= self.scale);
    }

    pub fn inverse_with_scratch(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.inv.process_with_scratch(buf, scratch);
        buf.iter_mut().for_each(|v| *v *= self.scale);
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        let mut scratch = self.make_scratch();
        self.forward_with_scratch(buf, &mut scratch);
    }

    pub fn inverse(&self, buf: &mut [Complex64]) {
        let mut scratch = self.make_scratch();
        self.inverse_with_scratch(buf, &mut scratch);
    }
}

/// Unitary DFT (or its inverse) of `v`.
pub fn unitary_dft(v: &[Complex64], inverse: bool) -> Result<Vec<Complex64>> {
    let dft = UnitaryDft::new(v.len())?;
    let mut out = v.to_vec();
    if inverse {
        dft.inverse(&mut out);
    } else {
        dft.forward(&mut out);
    }
    Ok(out)
}

/// The frequency-centred DFT
/// `W[k, n] = N^{-1/2} exp(-j 2 pi n (k - N/2) / N)`, zero-based indices.
///
/// `exp(j pi n) = (-1)^n`, so `W v` is the unitary DFT of `v` with every odd
/// sample negated. `N` must be even.
#[derive(Debug, Clone)]
pub struct CenteredDft {
    dft: UnitaryDft,
}

impl CenteredDft {
    pub fn new(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::Empty);
        }
        if len % 2 != 0 {
            return Err(Error::OddLength(len));
        }
        Ok(Self {
            dft: UnitaryDft::new(len)?,
        })
    }

    pub fn len(&self) -> usize {
        self.dft.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn make_scratch(&self) -> Vec<Complex64> {
        self.dft.make_scratch()
    }

    pub fn apply_with_scratch(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        buf.iter_mut().skip(1).step_by(2).for_each(|v| *v = -*v);
        self.dft.forward_with_scratch(buf, scratch);
    }

    /// `W^H`, which is also `W^{-1}`.
    pub fn apply_adjoint_with_scratch(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.dft.inverse_with_scratch(buf, scratch);
        buf.iter_mut().skip(1).step_by(2).for_each(|v| *v = -*v);
    }
}

/// `W v` for the frequency-centred DFT; rejects odd lengths.
pub fn centered_dft_apply(v: &[Complex64]) -> Result<Vec<Complex64>> {
    let w = CenteredDft::new(v.len())?;
    let mut out = v.to_vec();
    let mut scratch = w.make_scratch();
    w.apply_with_scratch(&mut out, &mut scratch);
    Ok(out)
}
