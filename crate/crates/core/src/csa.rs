//! Chirp-scaling image formation and its reversal.
//!
//! With `F_r` the unitary range DFT (down columns) and `F_a` the unitary
//! azimuth DFT (along rows), image formation is
//!
//! ```text
//! Z = (H3 ⊙ F_r^H (H2 ⊙ F_r (H1 ⊙ Y F_a))) F_a^H
//! ```
//!
//! and the echo model runs the same pipeline backwards with conjugated masks:
//!
//! ```text
//! Y = (H1* ⊙ F_r^H (H2* ⊙ F_r (H3* ⊙ Z F_a))) F_a^H
//! ```
//!
//! Both are exact inverses of each other as long as every mask entry has unit
//! modulus. [`CsaOperator`] wraps the echo model as the linear operator
//! `y = D z` on column-major vectorised grids; its adjoint is image formation.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::dft::UnitaryDft;
use crate::error::{Error, Result};
use crate::exec;
use crate::grid::ComplexGrid;
use crate::operator::LinearOperator;
use crate::random::{stream_rng, unit_phase};

const SPEED_OF_LIGHT: f64 = 299_792_458.0;
const UNIT_MODULUS_TOL: f64 = 1e-12;

/// Stripmap acquisition parameters. The range sampling rate equals
/// `bandwidth` (complex Nyquist sampling) and the Doppler centroid is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CsaGeometry {
    pub range_bins: usize,
    pub azimuth_pulses: usize,
    /// Hz/s
    pub chirp_rate: f64,
    /// s
    pub pulse_duration: f64,
    /// Hz
    pub carrier_frequency: f64,
    /// m/s
    pub platform_velocity: f64,
    /// Closest-approach range of the scene centre, m.
    pub closest_range: f64,
    /// Hz
    pub prf: f64,
    /// Hz
    pub bandwidth: f64,
}

impl CsaGeometry {
    /// X-band airborne geometry sized for a `range_bins x azimuth_pulses` grid.
    pub fn desk(range_bins: usize, azimuth_pulses: usize) -> Self {
        let bandwidth = 30e6;
        let pulse_duration = 2e-6;
        Self {
            range_bins,
            azimuth_pulses,
            chirp_rate: bandwidth / pulse_duration,
            pulse_duration,
            carrier_frequency: 9.6e9,
            platform_velocity: 150.0,
            closest_range: 5_000.0,
            prf: 600.0,
            bandwidth,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidGeometry(m));
        for (n, name) in [
            (self.range_bins, "range_bins"),
            (self.azimuth_pulses, "azimuth_pulses"),
        ] {
            if n == 0 || n % 2 != 0 {
                return bad(format!("{name} must be positive and even, got {n}"));
            }
        }
        for (v, name) in [
            (self.chirp_rate, "chirp_rate"),
            (self.pulse_duration, "pulse_duration"),
            (self.carrier_frequency, "carrier_frequency"),
            (self.platform_velocity, "platform_velocity"),
            (self.closest_range, "closest_range"),
            (self.prf, "prf"),
            (self.bandwidth, "bandwidth"),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be finite and positive, got {v}"));
            }
        }
        // The migration factor is real only while |f_eta| < 2 V f0 / c.
        let doppler_limit = 2.0 * self.platform_velocity * self.carrier_frequency / SPEED_OF_LIGHT;
        if self.prf / 2.0 >= doppler_limit {
            return bad(format!(
                "prf/2 = {} Hz exceeds the Doppler limit {doppler_limit} Hz",
                self.prf / 2.0
            ));
        }
        Ok(())
    }
}

fn signed_bin(k: usize, n: usize) -> f64 {
    if k < n / 2 {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

/// The three unit-modulus masks of the chirp-scaling pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMaskSet {
    h1: ComplexGrid,
    h2: ComplexGrid,
    h3: ComplexGrid,
}

impl PhaseMaskSet {
    /// Validates shapes and unit modulus.
    pub fn new(h1: ComplexGrid, h2: ComplexGrid, h3: ComplexGrid) -> Result<Self> {
        h1.ensure_same_shape(&h2)?;
        h1.ensure_same_shape(&h3)?;
        for (name, h) in [("H1", &h1), ("H2", &h2), ("H3", &h3)] {
            if let Some(v) = h
                .as_slice()
                .iter()
                .find(|v| !((v.norm() - 1.0).abs() <= UNIT_MODULUS_TOL))
            {
                return Err(Error::InvalidGeometry(format!(
                    "{name} has an entry of modulus {}",
                    v.norm()
                )));
            }
        }
        Ok(Self { h1, h2, h3 })
    }

    /// All-ones masks: the pipeline collapses to the identity.
    pub fn identity(rows: usize, cols: usize) -> Self {
        let one = ComplexGrid::from_fn(rows, cols, |_, _| Complex64::new(1.0, 0.0));
        Self {
            h1: one.clone(),
            h2: one.clone(),
            h3: one,
        }
    }

    /// Independent uniform-phase masks.
    pub fn random(rows: usize, cols: usize, seed: u64) -> Self {
        let mk = |stream| {
            let mut rng = stream_rng(seed, stream);
            ComplexGrid::from_vec(rows, cols, unit_phase(&mut rng, rows * cols))
                .expect("sized by construction")
        };
        Self {
            h1: mk(0),
            h2: mk(1),
            h3: mk(2),
        }
    }

    pub fn h1(&self) -> &ComplexGrid {
        &self.h1
    }
    pub fn h2(&self) -> &ComplexGrid {
        &self.h2
    }
    pub fn h3(&self) -> &ComplexGrid {
        &self.h3
    }

    pub fn shape(&self) -> (usize, usize) {
        self.h1.shape()
    }
}

/// Builds the chirp-scaling masks for `geometry`.
///
/// `H1` is the chirp-scaling phase in the range-Doppler domain, `H2` the
/// range compression and bulk RCMC phase in the 2-D frequency domain and
/// `H3` the azimuth compression plus residual phase correction, again in the
/// range-Doppler domain. The reference range is `closest_range` and the
/// reference Doppler is zero.
pub fn build_csa_masks(geometry: &CsaGeometry) -> Result<PhaseMaskSet> {
    geometry.validate()?;
    let g = geometry;
    let (nr, na) = (g.range_bins, g.azimuth_pulses);
    let c = SPEED_OF_LIGHT;
    let fs = g.bandwidth;
    let f0 = g.carrier_frequency;
    let v = g.platform_velocity;
    let r_ref = g.closest_range;
    let kr = g.chirp_rate;

    let doppler: Vec<f64> = (0..na)
        .map(|n| signed_bin(n, na) * g.prf / na as f64)
        .collect();
    let migration: Vec<f64> = doppler
        .iter()
        .map(|f| (1.0 - (c * f / (2.0 * v * f0)).powi(2)).sqrt())
        .collect();
    // Effective range chirp rate after range/azimuth coupling.
    let km: Vec<f64> = doppler
        .iter()
        .zip(&migration)
        .map(|(f, d)| kr / (1.0 - kr * c * r_ref * f * f / (2.0 * v * v * f0.powi(3) * d.powi(3))))
        .collect();

    let tau = |k: usize| 2.0 * r_ref / c + (k as f64 - nr as f64 / 2.0) / fs;
    let range_of = |k: usize| r_ref + (k as f64 - nr as f64 / 2.0) * c / (2.0 * fs);
    let f_tau = |k: usize| signed_bin(k, nr) * fs / nr as f64;

    let mut phases = [
        Vec::with_capacity(nr * na),
        Vec::with_capacity(nr * na),
        Vec::with_capacity(nr * na),
    ];
    for n in 0..na {
        let (d, k_m) = (migration[n], km[n]);
        for k in 0..nr {
            let t = tau(k) - 2.0 * r_ref / (c * d);
            phases[0].push(PI * k_m * (1.0 / d - 1.0) * t * t);

            let f = f_tau(k);
            phases[1].push(PI * d / k_m * f * f + 4.0 * PI / c * (1.0 / d - 1.0) * r_ref * f);

            let r0 = range_of(k);
            phases[2].push(
                4.0 * PI * r0 * f0 * d / c
                    - 4.0 * PI * k_m / (c * c) * (1.0 - d) * ((r0 - r_ref) / d).powi(2),
            );
        }
    }
    if phases.iter().flatten().any(|p| !p.is_finite()) {
        return Err(Error::InvalidGeometry("non-finite mask phase".into()));
    }
    let [p1, p2, p3] = phases;
    let to_grid = |p: Vec<f64>| {
        ComplexGrid::from_vec(nr, na, p.into_iter().map(|ph| Complex64::from_polar(1.0, ph)).collect())
    };
    PhaseMaskSet::new(to_grid(p1)?, to_grid(p2)?, to_grid(p3)?)
}

/// The echo operator `D` (forward) and image formation (adjoint = inverse).
#[derive(Debug, Clone)]
pub struct CsaOperator {
    masks: Arc<PhaseMaskSet>,
    range_dft: UnitaryDft,
    azimuth_dft: UnitaryDft,
}

impl CsaOperator {
    pub fn new(masks: Arc<PhaseMaskSet>) -> Result<Self> {
        let (nr, na) = masks.shape();
        Ok(Self {
            range_dft: UnitaryDft::new(nr)?,
            azimuth_dft: UnitaryDft::new(na)?,
            masks,
        })
    }

    pub fn masks(&self) -> &PhaseMaskSet {
        &self.masks
    }

    pub fn shape(&self) -> (usize, usize) {
        self.masks.shape()
    }

    /// Runs `row DFT -> ⊙first -> F_r -> ⊙mid -> F_r^H -> ⊙last -> row IDFT`
    /// in place, conjugating the masks when `conj` is set.
    fn pipeline(&self, grid: &mut ComplexGrid, masks: [&ComplexGrid; 3], conj: bool) {
        let (nr, na) = grid.shape();
        self.rows_dft(grid, false);

        let range = &self.range_dft;
        let m = |g: &ComplexGrid, i: usize| {
            let v = g.as_slice()[i];
            if conj {
                v.conj()
            } else {
                v
            }
        };
        exec::for_each_chunk(grid.as_mut_slice(), nr, |col, data| {
            let mut scratch = range.make_scratch();
            let base = col * nr;
            let hadamard = |data: &mut [Complex64], h: &ComplexGrid| {
                for (i, v) in data.iter_mut().enumerate() {
                    *v *= m(h, base + i);
                }
            };
            hadamard(data, masks[0]);
            range.forward_with_scratch(data, &mut scratch);
            hadamard(data, masks[1]);
            range.inverse_with_scratch(data, &mut scratch);
            hadamard(data, masks[2]);
        });

        self.rows_dft(grid, true);
        debug_assert_eq!(grid.shape(), (nr, na));
    }

    /// Unitary DFT along every row (the azimuth dimension).
    fn rows_dft(&self, grid: &mut ComplexGrid, inverse: bool) {
        let mut t = grid.transpose();
        let az = &self.azimuth_dft;
        exec::for_each_chunk(t.as_mut_slice(), grid.cols(), |_, row| {
            let mut scratch = az.make_scratch();
            if inverse {
                az.inverse_with_scratch(row, &mut scratch);
            } else {
                az.forward_with_scratch(row, &mut scratch);
            }
        });
        *grid = t.transpose();
    }

    /// Image formation `Z` from echoes `Y`.
    pub fn image(&self, echoes: &ComplexGrid) -> Result<ComplexGrid> {
        echoes.ensure_same_shape(self.masks.h1())?;
        let mut z = echoes.clone();
        let m = &self.masks;
        self.pipeline(&mut z, [m.h1(), m.h2(), m.h3()], false);
        Ok(z)
    }

    /// Echo simulation `Y` from an image `Z`.
    pub fn simulate(&self, image: &ComplexGrid) -> Result<ComplexGrid> {
        image.ensure_same_shape(self.masks.h1())?;
        let mut y = image.clone();
        let m = &self.masks;
        self.pipeline(&mut y, [m.h3(), m.h2(), m.h1()], true);
        Ok(y)
    }

    fn unvec(&self, v: &[Complex64]) -> ComplexGrid {
        let (nr, na) = self.shape();
        ComplexGrid::from_vec(nr, na, v.to_vec()).expect("operator input has length N_r * N_a")
    }
}

impl LinearOperator for CsaOperator {
    fn in_dim(&self) -> usize {
        let (nr, na) = self.shape();
        nr * na
    }

    fn out_dim(&self) -> usize {
        self.in_dim()
    }

    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut g = self.unvec(x);
        let m = &self.masks;
        self.pipeline(&mut g, [m.h3(), m.h2(), m.h1()], true);
        g.into_vec()
    }

    fn apply_adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        let mut g = self.unvec(y);
        let m = &self.masks;
        self.pipeline(&mut g, [m.h1(), m.h2(), m.h3()], false);
        g.into_vec()
    }
}

/// Image formation from echoes.
pub fn csa_image(echoes: &ComplexGrid, masks: &PhaseMaskSet) -> Result<ComplexGrid> {
    CsaOperator::new(Arc::new(masks.clone()))?.image(echoes)
}

/// Echo simulation: the reversed chirp-scaling pipeline.
pub fn csa_inverse(image: &ComplexGrid, masks: &PhaseMaskSet) -> Result<ComplexGrid> {
    CsaOperator::new(Arc::new(masks.clone()))?.simulate(image)
}

/// The vectorised echo operator `y = D z`.
pub fn operator_d(masks: Arc<PhaseMaskSet>) -> Result<CsaOperator> {
    CsaOperator::new(masks)
}
