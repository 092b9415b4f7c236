//! Compressive range acquisition with per-pulse spreading.
//!
//! Pulse `l` is measured as `ỹ_l = T_l W y_l`, where `W` is the centred DFT
//! and `T_l` is the `M_r x N_r` Toeplitz matrix built from the pulse's
//! spreading coefficients `ρ_{-L0..=L0, l}`, `L0 = (N_r + M_r)/2 - 1`:
//!
//! ```text
//! T_l[r, c] = ρ_{-L0 + N_r - 1 + r - c, l} / sqrt(M_r)      (zero-based r, c)
//! ```
//!
//! Coefficients are stored zero-based, so `coeffs[i]` holds `ρ_{i - L0}`.
//!
//! When the coefficients wrap with period `N_r`
//! (`ρ_{-L0+N_r+k} = ρ_{-L0+k}` for `k < M_r - 1`), `T_l` is the first `M_r`
//! rows of a circulant matrix `C_l / sqrt(M_r)`. The fast path exploits this:
//! `T_l x` becomes a circular convolution evaluated with two FFTs and a
//! truncation, `O(N_r log N_r)` per pulse instead of `O(N_r M_r)`.

use std::sync::Arc;

use num_complex::Complex64;

use crate::csa::{CsaOperator, PhaseMaskSet};
use crate::dft::{CenteredDft, UnitaryDft};
use crate::error::{Error, Result};
use crate::exec;
use crate::grid::ComplexGrid;
use crate::operator::{DenseMatrix, LinearOperator};
use crate::random::{stream_rng, unit_phase};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpreadingMode {
    /// Every pulse draws its own spreading coefficients.
    Independent,
    /// Pulse 0's coefficients are reused for every pulse.
    Fixed,
}

/// Distribution of the spreading coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpreadingLaw {
    /// i.i.d. unit-modulus coefficients with uniform phase.
    #[default]
    UniformPhase,
    /// Coefficients whose circulant has unit-modulus eigenvalues (scaled by
    /// `sqrt(N_r)`), so `T_l` is unitary when `M_r = N_r`. Implies periodic.
    FlatSpectrum,
}

/// Analog front-end parameters. Only used for consistency checks.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontEnd {
    /// Pulse repetition interval `T`, s.
    pub pulse_interval: f64,
    /// Bandpass width after spreading, Hz.
    pub cs_bandwidth: f64,
    /// Spreading-signal bandwidth, Hz.
    pub spreading_bandwidth: f64,
    /// Echo bandwidth, Hz.
    pub echo_bandwidth: f64,
    /// IF centre frequency, Hz.
    pub if_frequency: f64,
    /// Low-rate ADC sampling rate, Hz.
    pub adc_rate: f64,
    /// Fourier-series order of the spreading signal.
    pub series_order: usize,
}

impl FrontEnd {
    pub fn fundamental(&self) -> f64 {
        1.0 / self.pulse_interval
    }

    pub fn compressive_samples(&self) -> usize {
        (self.cs_bandwidth * self.pulse_interval).floor() as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub range_bins: usize,
    pub compressive_samples: usize,
    pub azimuth_pulses: usize,
    pub mode: SpreadingMode,
    pub law: SpreadingLaw,
    pub periodic: bool,
    pub seed: u64,
    pub front_end: Option<FrontEnd>,
}

impl SamplerConfig {
    pub fn new(range_bins: usize, compressive_samples: usize, azimuth_pulses: usize) -> Self {
        Self {
            range_bins,
            compressive_samples,
            azimuth_pulses,
            mode: SpreadingMode::Independent,
            law: SpreadingLaw::UniformPhase,
            periodic: true,
            seed: 0,
            front_end: None,
        }
    }

    /// `M_r = gamma N_r`; fails unless that is an integer.
    pub fn with_ratio(range_bins: usize, azimuth_pulses: usize, gamma: f64) -> Result<Self> {
        let m = gamma * range_bins as f64;
        if !(m.is_finite() && m >= 1.0 && m.fract() == 0.0) {
            return Err(Error::InvalidSampler(format!(
                "gamma {gamma} gives non-integer M_r = {m} for N_r = {range_bins}"
            )));
        }
        let cfg = Self::new(range_bins, m as usize, azimuth_pulses);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn mode(mut self, mode: SpreadingMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn law(mut self, law: SpreadingLaw) -> Self {
        self.law = law;
        self
    }

    pub fn periodic(mut self, periodic: bool) -> Self {
        self.periodic = periodic;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn gamma(&self) -> f64 {
        self.compressive_samples as f64 / self.range_bins as f64
    }

    /// `L0 = (N_r + M_r)/2 - 1`.
    pub fn half_order(&self) -> usize {
        (self.range_bins + self.compressive_samples) / 2 - 1
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSampler(m));
        let (n, m) = (self.range_bins, self.compressive_samples);
        if n == 0 || n % 2 != 0 {
            return bad(format!("N_r must be positive and even, got {n}"));
        }
        if m == 0 || m > n {
            return bad(format!("need 1 <= M_r <= N_r, got M_r = {m}, N_r = {n}"));
        }
        if (n + m) % 2 != 0 {
            return bad(format!("N_r + M_r must be even, got {}", n + m));
        }
        if self.azimuth_pulses == 0 {
            return bad("N_a must be positive".into());
        }
        if self.law == SpreadingLaw::FlatSpectrum && !self.periodic {
            return bad("flat-spectrum spreading is periodic by construction".into());
        }
        if let Some(fe) = &self.front_end {
            if fe.compressive_samples() != m {
                return bad(format!(
                    "floor(B_cs T) = {} does not match M_r = {m}",
                    fe.compressive_samples()
                ));
            }
            if !(fe.spreading_bandwidth >= fe.echo_bandwidth && fe.echo_bandwidth >= fe.cs_bandwidth) {
                return bad("need B_p >= B >= B_cs".into());
            }
        }
        Ok(())
    }
}

/// Per-pulse spreading coefficients, each of length `N_r + M_r - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpreadingSpectrum {
    range_bins: usize,
    compressive_samples: usize,
    periodic: bool,
    coeffs: Vec<Vec<Complex64>>,
}

impl SpreadingSpectrum {
    /// Wraps explicit coefficients. Periodicity is detected exactly.
    pub fn from_coefficients(
        range_bins: usize,
        compressive_samples: usize,
        coeffs: Vec<Vec<Complex64>>,
    ) -> Result<Self> {
        SamplerConfig::new(range_bins, compressive_samples, coeffs.len().max(1)).validate()?;
        if coeffs.is_empty() {
            return Err(Error::Empty);
        }
        let len = range_bins + compressive_samples - 1;
        if let Some(bad) = coeffs.iter().find(|c| c.len() != len) {
            return Err(Error::DimensionMismatch {
                expected: len,
                got: bad.len(),
            });
        }
        let periodic = coeffs
            .iter()
            .all(|c| (0..compressive_samples - 1).all(|k| c[range_bins + k] == c[k]));
        Ok(Self {
            range_bins,
            compressive_samples,
            periodic,
            coeffs,
        })
    }

    /// Coefficients laid out as a `(N_r + M_r - 1) x N_a` grid.
    pub fn to_grid(&self) -> ComplexGrid {
        let rows = self.coefficient_len();
        ComplexGrid::from_vec(rows, self.pulses(), self.coeffs.concat()).expect("consistent sizes")
    }

    pub fn from_grid(range_bins: usize, compressive_samples: usize, grid: &ComplexGrid) -> Result<Self> {
        let coeffs = (0..grid.cols()).map(|c| grid.column(c).to_vec()).collect();
        Self::from_coefficients(range_bins, compressive_samples, coeffs)
    }

    pub fn range_bins(&self) -> usize {
        self.range_bins
    }

    pub fn compressive_samples(&self) -> usize {
        self.compressive_samples
    }

    pub fn pulses(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn half_order(&self) -> usize {
        (self.range_bins + self.compressive_samples) / 2 - 1
    }

    pub fn coefficient_len(&self) -> usize {
        self.range_bins + self.compressive_samples - 1
    }

    /// Zero-based coefficients of pulse `l`: `pulse(l)[i] = ρ_{i - L0, l}`.
    pub fn pulse(&self, l: usize) -> Result<&[Complex64]> {
        self.coeffs.get(l).map(Vec::as_slice).ok_or(Error::PulseOutOfRange {
            index: l,
            pulses: self.pulses(),
        })
    }

    /// `ρ_{i, l}` for `i` in `-L0..=L0`.
    pub fn rho(&self, i: isize, l: usize) -> Option<Complex64> {
        let idx = i + self.half_order() as isize;
        let p = self.coeffs.get(l)?;
        usize::try_from(idx).ok().and_then(|k| p.get(k).copied())
    }

    /// First column of the circulant `C_l`:
    /// `[ρ_{-L0+N_r-1}, ρ_{-L0}, ρ_{-L0+1}, ..., ρ_{-L0+N_r-2}]`.
    pub fn circulant_column(&self, l: usize) -> Result<Vec<Complex64>> {
        let s = self.pulse(l)?;
        let n = self.range_bins;
        Ok((0..n).map(|r| s[(n - 1 + r) % n]).collect())
    }

    fn scale(&self) -> f64 {
        1.0 / (self.compressive_samples as f64).sqrt()
    }
}

/// Draws the spreading coefficients described by `config`.
///
/// Pulse `l` uses the random stream `(seed, l)` (stream 0 for every pulse in
/// fixed mode), so the result does not depend on evaluation order.
pub fn gen_spreading(config: &SamplerConfig) -> Result<SpreadingSpectrum> {
    config.validate()?;
    let n = config.range_bins;
    let m = config.compressive_samples;
    let len = n + m - 1;
    let flat = UnitaryDft::new(n)?;
    let draw = |l: usize| -> Vec<Complex64> {
        let mut rng = stream_rng(config.seed, l as u64);
        let mut s = match config.law {
            SpreadingLaw::UniformPhase => unit_phase(&mut rng, len),
            SpreadingLaw::FlatSpectrum => {
                // q = F^H e^{jθ}, so the raw DFT of q is sqrt(N) e^{jθ}.
                let mut q = unit_phase(&mut rng, n);
                flat.inverse(&mut q);
                let mut s = vec![ZERO; len];
                for (r, v) in q.into_iter().enumerate() {
                    s[(n - 1 + r) % n] = v;
                }
                s
            }
        };
        if config.periodic {
            for k in 0..m - 1 {
                s[n + k] = s[k];
            }
        }
        s
    };
    let coeffs = match config.mode {
        SpreadingMode::Independent => exec::map_indices(config.azimuth_pulses, draw),
        SpreadingMode::Fixed => vec![draw(0); config.azimuth_pulses],
    };
    Ok(SpreadingSpectrum {
        range_bins: n,
        compressive_samples: m,
        periodic: config.periodic,
        coeffs,
    })
}

/// Dense `T_l` (`M_r x N_r`).
pub fn build_toeplitz(spectrum: &SpreadingSpectrum, l: usize) -> Result<DenseMatrix> {
    let s = spectrum.pulse(l)?;
    let n = spectrum.range_bins;
    let scale = spectrum.scale();
    Ok(DenseMatrix::from_fn(spectrum.compressive_samples, n, |r, c| {
        s[n - 1 + r - c] * scale
    }))
}

/// Dense `C_l` (`N_r x N_r`), built from the first `N_r` coefficients.
pub fn build_circulant(spectrum: &SpreadingSpectrum, l: usize) -> Result<DenseMatrix> {
    let s = spectrum.pulse(l)?;
    let n = spectrum.range_bins;
    Ok(DenseMatrix::from_fn(n, n, |r, c| s[(n - 1 + r - c) % n]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatvecPath {
    /// Direct row-by-row product, `O(N_r M_r)` per pulse.
    Dense,
    /// Circulant embedding evaluated by FFT, `O(N_r log N_r)` per pulse.
    Fast,
}

#[derive(Debug, Clone)]
enum Blocks {
    /// Reversed, pre-scaled coefficients per pulse. Row `r` of `T_l` is the
    /// window `[M_r - 1 - r, M_r - 1 - r + N_r)`, so the matrix is never
    /// materialised.
    Dense(Vec<Vec<Complex64>>),
    Fast {
        dft: UnitaryDft,
        /// Raw-DFT eigenvalues of each `C_l`, pre-scaled by `1/(N_r sqrt(M_r))`.
        eig: Vec<Vec<Complex64>>,
        conjugate_adjoint: bool,
    },
}

/// The block-diagonal `diag(T_1, ..., T_Na)` acting on stacked pulses.
#[derive(Debug, Clone)]
pub struct BlockToeplitz {
    range_bins: usize,
    compressive_samples: usize,
    pulses: usize,
    blocks: Blocks,
}

impl BlockToeplitz {
    pub fn new(spectrum: &SpreadingSpectrum, path: MatvecPath) -> Result<Self> {
        let (n, m) = (spectrum.range_bins, spectrum.compressive_samples);
        let blocks = match path {
            MatvecPath::Dense => {
                let scale = spectrum.scale();
                Blocks::Dense(
                    spectrum
                        .coeffs
                        .iter()
                        .map(|s| s.iter().rev().map(|v| v * scale).collect())
                        .collect(),
                )
            }
            MatvecPath::Fast => {
                if !spectrum.periodic {
                    return Err(Error::NotPeriodic);
                }
                let dft = UnitaryDft::new(n)?;
                let scale = 1.0 / (n as f64 * (m as f64).sqrt());
                let eig = (0..spectrum.pulses())
                    .map(|l| {
                        let mut q = spectrum.circulant_column(l)?;
                        dft.forward_raw(&mut q, &mut dft.make_scratch());
                        q.iter_mut().for_each(|v| *v *= scale);
                        Ok(q)
                    })
                    .collect::<Result<_>>()?;
                Blocks::Fast {
                    dft,
                    eig,
                    conjugate_adjoint: true,
                }
            }
        };
        Ok(Self {
            range_bins: n,
            compressive_samples: m,
            pulses: spectrum.pulses(),
            blocks,
        })
    }

    pub fn path(&self) -> MatvecPath {
        match self.blocks {
            Blocks::Dense(_) => MatvecPath::Dense,
            Blocks::Fast { .. } => MatvecPath::Fast,
        }
    }

    /// Drops the conjugation of the fast-path eigenvalues in the adjoint.
    /// Only exists so the self-test can prove the dot test catches it.
    #[doc(hidden)]
    pub fn corrupt_adjoint_conjugation(mut self) -> Self {
        if let Blocks::Fast {
            conjugate_adjoint, ..
        } = &mut self.blocks
        {
            *conjugate_adjoint = false;
        }
        self
    }

    pub fn make_scratch(&self) -> Vec<Complex64> {
        match &self.blocks {
            Blocks::Dense(_) => Vec::new(),
            Blocks::Fast { dft, .. } => dft.make_scratch(),
        }
    }

    /// `out = T_l x`. `x` (length `N_r`) is clobbered on the fast path.
    pub fn apply_pulse(&self, l: usize, x: &mut [Complex64], out: &mut [Complex64], scratch: &mut [Complex64]) {
        match &self.blocks {
            Blocks::Dense(rev) => {
                let (n, m) = (self.range_bins, self.compressive_samples);
                for (r, o) in out.iter_mut().enumerate() {
                    let row = &rev[l][m - 1 - r..m - 1 - r + n];
                    *o = row.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
                }
            }
            Blocks::Fast { dft, eig, .. } => {
                dft.forward_raw(x, scratch);
                x.iter_mut().zip(&eig[l]).for_each(|(v, e)| *v *= e);
                dft.inverse_raw(x, scratch);
                out.copy_from_slice(&x[..self.compressive_samples]);
            }
        }
    }

    /// `out = T_l^H v`, `out` of length `N_r`.
    pub fn apply_pulse_adjoint(&self, l: usize, v: &[Complex64], out: &mut [Complex64], scratch: &mut [Complex64]) {
        match &self.blocks {
            Blocks::Dense(rev) => {
                let (n, m) = (self.range_bins, self.compressive_samples);
                out.iter_mut().for_each(|o| *o = ZERO);
                for (r, vr) in v.iter().enumerate() {
                    for (o, a) in out.iter_mut().zip(&rev[l][m - 1 - r..m - 1 - r + n]) {
                        *o += a.conj() * vr;
                    }
                }
            }
            Blocks::Fast {
                dft,
                eig,
                conjugate_adjoint,
            } => {
                let m = self.compressive_samples;
                out[..m].copy_from_slice(v);
                out[m..].iter_mut().for_each(|o| *o = ZERO);
                dft.forward_raw(out, scratch);
                if *conjugate_adjoint {
                    out.iter_mut().zip(&eig[l]).for_each(|(o, e)| *o *= e.conj());
                } else {
                    out.iter_mut().zip(&eig[l]).for_each(|(o, e)| *o *= e);
                }
                dft.inverse_raw(out, scratch);
            }
        }
    }
}

impl LinearOperator for BlockToeplitz {
    fn in_dim(&self) -> usize {
        self.range_bins * self.pulses
    }

    fn out_dim(&self) -> usize {
        self.compressive_samples * self.pulses
    }

    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.in_dim());
        let mut out = vec![ZERO; self.out_dim()];
        exec::for_each_chunk_pair(x, self.range_bins, &mut out, self.compressive_samples, |l, xl, ol| {
            let mut buf = xl.to_vec();
            let mut scratch = self.make_scratch();
            self.apply_pulse(l, &mut buf, ol, &mut scratch);
        });
        out
    }

    fn apply_adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(y.len(), self.out_dim());
        let mut out = vec![ZERO; self.in_dim()];
        exec::for_each_chunk_pair(y, self.compressive_samples, &mut out, self.range_bins, |l, yl, ol| {
            let mut scratch = self.make_scratch();
            self.apply_pulse_adjoint(l, yl, ol, &mut scratch);
        });
        out
    }
}

/// The measurement operator `Φ = diag(T_1..T_Na) (I ⊗ W) D`.
#[derive(Debug, Clone)]
pub struct MeasurementOperator {
    echo: CsaOperator,
    centered: CenteredDft,
    blocks: BlockToeplitz,
}

impl MeasurementOperator {
    pub fn new(spectrum: &SpreadingSpectrum, masks: Arc<PhaseMaskSet>, path: MatvecPath) -> Result<Self> {
        let blocks = BlockToeplitz::new(spectrum, path)?;
        Self::from_parts(CsaOperator::new(masks)?, blocks)
    }

    pub fn from_parts(echo: CsaOperator, blocks: BlockToeplitz) -> Result<Self> {
        let (nr, na) = echo.shape();
        if (blocks.range_bins, blocks.pulses) != (nr, na) {
            return Err(Error::ShapeMismatch {
                left: (nr, na),
                right: (blocks.range_bins, blocks.pulses),
            });
        }
        Ok(Self {
            centered: CenteredDft::new(nr)?,
            echo,
            blocks,
        })
    }

    pub fn blocks(&self) -> &BlockToeplitz {
        &self.blocks
    }

    pub fn echo(&self) -> &CsaOperator {
        &self.echo
    }

    pub fn measurement_shape(&self) -> (usize, usize) {
        (self.blocks.compressive_samples, self.blocks.pulses)
    }

    /// The acquisition front-end `diag(T_l) (I ⊗ W)` applied to echoes.
    pub fn acquire(&self, echoes: &[Complex64]) -> Vec<Complex64> {
        let (n, m) = (self.blocks.range_bins, self.blocks.compressive_samples);
        let mut out = vec![ZERO; m * self.blocks.pulses];
        exec::for_each_chunk_pair(echoes, n, &mut out, m, |l, yl, ol| {
            let mut buf = yl.to_vec();
            let mut scratch = self.centered.make_scratch();
            self.centered.apply_with_scratch(&mut buf, &mut scratch);
            let mut scratch = self.blocks.make_scratch();
            self.blocks.apply_pulse(l, &mut buf, ol, &mut scratch);
        });
        out
    }

    /// Adjoint of [`Self::acquire`].
    pub fn acquire_adjoint(&self, meas: &[Complex64]) -> Vec<Complex64> {
        let (n, m) = (self.blocks.range_bins, self.blocks.compressive_samples);
        let mut out = vec![ZERO; n * self.blocks.pulses];
        exec::for_each_chunk_pair(meas, m, &mut out, n, |l, vl, ol| {
            let mut scratch = self.blocks.make_scratch();
            self.blocks.apply_pulse_adjoint(l, vl, ol, &mut scratch);
            let mut scratch = self.centered.make_scratch();
            self.centered.apply_adjoint_with_scratch(ol, &mut scratch);
        });
        out
    }
}

impl LinearOperator for MeasurementOperator {
    fn in_dim(&self) -> usize {
        self.echo.in_dim()
    }

    fn out_dim(&self) -> usize {
        self.blocks.out_dim()
    }

    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.acquire(&self.echo.apply(x))
    }

    fn apply_adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        self.echo.apply_adjoint(&self.acquire_adjoint(y))
    }
}

pub fn operator_phi(
    spectrum: &SpreadingSpectrum,
    masks: Arc<PhaseMaskSet>,
    path: MatvecPath,
) -> Result<MeasurementOperator> {
    MeasurementOperator::new(spectrum, masks, path)
}

/// Stacked compressive measurements, one column per pulse.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    pub data: ComplexGrid,
}

impl MeasurementSet {
    /// `ỹ`, the column-major stack of length `M_r N_a`.
    pub fn stacked(&self) -> &[Complex64] {
        self.data.as_slice()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
}

/// Applies `T_l W` to every echo column directly from the coefficients,
/// without going through [`BlockToeplitz`].
pub fn measure(echoes: &ComplexGrid, spectrum: &SpreadingSpectrum) -> Result<MeasurementSet> {
    let (n, na) = echoes.shape();
    if (n, na) != (spectrum.range_bins, spectrum.pulses()) {
        return Err(Error::ShapeMismatch {
            left: (n, na),
            right: (spectrum.range_bins, spectrum.pulses()),
        });
    }
    let m = spectrum.compressive_samples;
    let w = CenteredDft::new(n)?;
    let scale = spectrum.scale();
    let mut out = vec![ZERO; m * na];
    exec::for_each_chunk_pair(echoes.as_slice(), n, &mut out, m, |l, yl, ol| {
        let s = &spectrum.coeffs[l];
        let mut u = yl.to_vec();
        w.apply_with_scratch(&mut u, &mut w.make_scratch());
        for (r, o) in ol.iter_mut().enumerate() {
            let acc: Complex64 = u.iter().enumerate().map(|(c, v)| s[n - 1 + r - c] * v).sum();
            *o = acc * scale;
        }
    });
    Ok(MeasurementSet {
        data: ComplexGrid::from_vec(m, na, out)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::max_rel_diff;
    use crate::operator::adjoint_residual;
    use crate::random::complex_gaussian;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    /// Coefficients ρ_i = i + 10 (plus a pulse offset) so entries are readable.
    fn labelled(n: usize, m: usize, pulses: usize) -> SpreadingSpectrum {
        let l0 = ((n + m) / 2 - 1) as isize;
        let coeffs = (0..pulses)
            .map(|l| (-l0..=l0).map(|i| c(i as f64 + 10.0 + 100.0 * l as f64)).collect())
            .collect();
        SpreadingSpectrum::from_coefficients(n, m, coeffs).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(SamplerConfig::new(4, 2, 1).validate().is_ok());
        assert!(SamplerConfig::new(4, 1, 1).validate().is_err()); // N_r + M_r odd
        assert!(SamplerConfig::new(5, 1, 1).validate().is_err());
        assert!(SamplerConfig::new(4, 6, 1).validate().is_err());
        assert!(SamplerConfig::new(4, 0, 1).validate().is_err());
        assert_eq!(SamplerConfig::with_ratio(64, 8, 0.25).unwrap().compressive_samples, 16);
        assert!(SamplerConfig::with_ratio(64, 8, 0.3).is_err());
        assert_eq!(SamplerConfig::new(4, 2, 1).half_order(), 2);
    }

    #[test]
    fn front_end_consistency() {
        let fe = FrontEnd {
            pulse_interval: 1e-4,
            cs_bandwidth: 0.16e6,
            spreading_bandwidth: 2e6,
            echo_bandwidth: 1e6,
            if_frequency: 10e6,
            adc_rate: 1e6,
            series_order: 100,
        };
        assert_eq!(fe.compressive_samples(), 16);
        assert!((fe.fundamental() - 1e4).abs() < 1e-9);
        let mut cfg = SamplerConfig::new(64, 16, 4);
        cfg.front_end = Some(fe.clone());
        assert!(cfg.validate().is_ok());
        cfg.compressive_samples = 32;
        assert!(cfg.validate().is_err());
        let mut cfg = SamplerConfig::new(64, 16, 4);
        cfg.front_end = Some(FrontEnd {
            echo_bandwidth: 5e6,
            ..fe
        });
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn fixed_mode_replicates_pulse_zero() {
        let s = gen_spreading(&SamplerConfig::new(16, 4, 6).mode(SpreadingMode::Fixed).seed(3)).unwrap();
        for l in 1..6 {
            assert_eq!(s.pulse(l).unwrap(), s.pulse(0).unwrap());
        }
    }

    #[test]
    fn periodic_small_case() {
        let s = gen_spreading(&SamplerConfig::new(4, 2, 3).seed(1)).unwrap();
        assert!(s.is_periodic());
        for l in 0..3 {
            assert_eq!(s.rho(2, l), s.rho(-2, l));
            assert_ne!(s.rho(1, l), s.rho(-1, l));
        }
        assert_eq!(s.coefficient_len(), 5);
    }

    #[test]
    fn aperiodic_draw_is_detected() {
        let s = gen_spreading(&SamplerConfig::new(8, 4, 2).periodic(false).seed(1)).unwrap();
        assert!(!s.is_periodic());
        let back = SpreadingSpectrum::from_grid(8, 4, &s.to_grid()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn seeds_are_deterministic() {
        let cfg = SamplerConfig::new(32, 8, 4).seed(42);
        assert_eq!(gen_spreading(&cfg).unwrap(), gen_spreading(&cfg).unwrap());
        assert_ne!(gen_spreading(&cfg).unwrap(), gen_spreading(&cfg.clone().seed(43)).unwrap());
        // unit modulus
        let s = gen_spreading(&cfg).unwrap();
        assert!(s.pulse(3).unwrap().iter().all(|v| (v.norm() - 1.0).abs() < 1e-14));
    }

    #[test]
    fn toeplitz_small_case() {
        let s = labelled(4, 2, 1);
        let t = build_toeplitz(&s, 0).unwrap();
        let h = 1.0 / 2f64.sqrt();
        let rho = |i: isize| s.rho(i, 0).unwrap() * h;
        let expect = [[rho(1), rho(0), rho(-1), rho(-2)], [rho(2), rho(1), rho(0), rho(-1)]];
        for r in 0..2 {
            for col in 0..4 {
                assert_eq!(t.get(r, col), expect[r][col]);
            }
        }
    }

    #[test]
    fn toeplitz_all_ones_and_diagonals() {
        let ones = SpreadingSpectrum::from_coefficients(8, 4, vec![vec![c(1.0); 11]]).unwrap();
        let t = build_toeplitz(&ones, 0).unwrap();
        assert!((0..4).all(|r| (0..8).all(|col| t.get(r, col) == c(0.5))));

        let s = labelled(8, 4, 1);
        let t = build_toeplitz(&s, 0).unwrap();
        for r in 0..4 {
            for col in 0..8 {
                // each coefficient lives on the diagonal r - col = const
                assert_eq!(t.get(r, col), s.pulse(0).unwrap()[7 + r - col] * 0.5);
            }
        }
        assert!(build_toeplitz(&s, 1).is_err());
    }

    #[test]
    fn circulant_small_case() {
        let s = labelled(4, 2, 1);
        let cm = build_circulant(&s, 0).unwrap();
        let rho = |i: isize| s.rho(i, 0).unwrap();
        let expect = [
            [rho(1), rho(0), rho(-1), rho(-2)],
            [rho(-2), rho(1), rho(0), rho(-1)],
            [rho(-1), rho(-2), rho(1), rho(0)],
            [rho(0), rho(-1), rho(-2), rho(1)],
        ];
        for r in 0..4 {
            for col in 0..4 {
                assert_eq!(cm.get(r, col), expect[r][col]);
            }
        }
        let q = s.circulant_column(0).unwrap();
        assert_eq!(q, vec![rho(1), rho(-2), rho(-1), rho(0)]);
    }

    #[test]
    fn circulant_row_sums_are_constant() {
        let s = gen_spreading(&SamplerConfig::new(16, 4, 1).seed(2)).unwrap();
        let cm = build_circulant(&s, 0).unwrap();
        let total: Complex64 = s.pulse(0).unwrap()[..16].iter().sum();
        let rs = cm.apply(&vec![c(1.0); 16]);
        assert!(rs.iter().all(|v| (v - total).norm() < 1e-12));
    }

    #[test]
    fn truncated_circulant_equals_toeplitz_when_periodic() {
        for (n, m) in [(4, 2), (16, 4), (64, 16)] {
            let s = gen_spreading(&SamplerConfig::new(n, m, 3).seed(5)).unwrap();
            let scale = 1.0 / (m as f64).sqrt();
            for l in 0..3 {
                let t = build_toeplitz(&s, l).unwrap();
                let cm = build_circulant(&s, l).unwrap();
                for r in 0..m {
                    for col in 0..n {
                        assert_eq!(t.get(r, col), cm.get(r, col) * scale);
                    }
                }
            }
        }
    }

    #[test]
    fn fast_path_requires_periodicity() {
        let s = gen_spreading(&SamplerConfig::new(8, 4, 2).periodic(false)).unwrap();
        assert_eq!(BlockToeplitz::new(&s, MatvecPath::Fast).unwrap_err(), Error::NotPeriodic);
        assert!(BlockToeplitz::new(&s, MatvecPath::Dense).is_ok());
    }

    #[test]
    fn block_paths_agree_and_pass_dot_test() {
        let s = gen_spreading(&SamplerConfig::new(32, 8, 6).seed(8)).unwrap();
        let dense = BlockToeplitz::new(&s, MatvecPath::Dense).unwrap();
        let fast = BlockToeplitz::new(&s, MatvecPath::Fast).unwrap();
        let x = complex_gaussian(32 * 6, 1, 0);
        assert!(max_rel_diff(&fast.apply(&x), &dense.apply(&x)) < 1e-12);
        let y = complex_gaussian(8 * 6, 1, 1);
        assert!(max_rel_diff(&fast.apply_adjoint(&y), &dense.apply_adjoint(&y)) < 1e-12);
        assert!(adjoint_residual(&fast, 10, 2).unwrap() < 1e-12);
        let broken = fast.corrupt_adjoint_conjugation();
        assert!(adjoint_residual(&broken, 10, 2).unwrap() > 1e-3);
    }

    #[test]
    fn flat_spectrum_full_rate_is_unitary() {
        let cfg = SamplerConfig::new(16, 16, 2).law(SpreadingLaw::FlatSpectrum).seed(1);
        let s = gen_spreading(&cfg).unwrap();
        let t = build_toeplitz(&s, 1).unwrap();
        let x = complex_gaussian(16, 3, 0);
        let y = t.apply(&x);
        assert!((crate::grid::norm(&y) / crate::grid::norm(&x) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_pulse_identity_masks_hand_assembled() {
        // N_r = 4, M_r = 2, N_a = 1, all coefficients 1: T = ones(2, 4) / sqrt(2)
        let ones = SpreadingSpectrum::from_coefficients(4, 2, vec![vec![c(1.0); 5]]).unwrap();
        let masks = Arc::new(PhaseMaskSet::identity(4, 1));
        let phi = operator_phi(&ones, masks, MatvecPath::Fast).unwrap();
        let z = complex_gaussian(4, 4, 0);
        // (1/sqrt(2)) Δ C W z with C = all ones
        let wz = crate::dft::centered_dft_apply(&z).unwrap();
        let total: Complex64 = wz.iter().sum();
        let expect = vec![total / 2f64.sqrt(); 2];
        assert!(max_rel_diff(&phi.apply(&z), &expect) < 1e-12);
    }

    #[test]
    fn measure_matches_phi_and_is_linear() {
        let s = gen_spreading(&SamplerConfig::new(16, 4, 8).seed(4)).unwrap();
        let masks = Arc::new(PhaseMaskSet::random(16, 8, 2));
        let phi = operator_phi(&s, masks.clone(), MatvecPath::Fast).unwrap();
        let d = CsaOperator::new(masks).unwrap();
        let z = complex_gaussian(128, 9, 0);
        let y = ComplexGrid::from_vec(16, 8, d.apply(&z)).unwrap();
        let via_measure = measure(&y, &s).unwrap();
        assert!(max_rel_diff(via_measure.stacked(), &phi.apply(&z)) < 1e-12);

        let zero = measure(&ComplexGrid::zeros(16, 8), &s).unwrap();
        assert!(zero.stacked().iter().all(|v| *v == ZERO));

        let y2 = ComplexGrid::from_vec(16, 8, complex_gaussian(128, 9, 1)).unwrap();
        let sum = ComplexGrid::from_vec(
            16,
            8,
            y.as_slice().iter().zip(y2.as_slice()).map(|(a, b)| a * 2.0 - b).collect(),
        )
        .unwrap();
        let lhs = measure(&sum, &s).unwrap();
        let m1 = measure(&y2, &s).unwrap();
        let rhs: Vec<_> = via_measure.stacked().iter().zip(m1.stacked()).map(|(a, b)| a * 2.0 - b).collect();
        assert!(max_rel_diff(lhs.stacked(), &rhs) < 1e-12);

        assert!(measure(&ComplexGrid::zeros(16, 4), &s).is_err());
    }

    #[test]
    fn independent_pulses_differ() {
        let s = gen_spreading(&SamplerConfig::new(16, 4, 4).seed(6)).unwrap();
        let t0 = build_toeplitz(&s, 0).unwrap();
        let t1 = build_toeplitz(&s, 1).unwrap();
        assert!(t0.max_abs_diff(&t1) > 0.1);
    }
}
