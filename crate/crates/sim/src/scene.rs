//! Synthetic reflectivity scenes.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use quadcs_core::random::{stream_rng, unit_phase};
use quadcs_core::{synthesize, Complex64, ComplexGrid, WaveletConfig};
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum AmplitudeLaw {
    /// Unit magnitude, uniform phase.
    #[default]
    UnitPhase,
    /// Circular complex Gaussian (Rayleigh magnitude).
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SceneSpec {
    /// `count` isolated scatterers at distinct random pixels.
    PointTargets {
        count: usize,
        #[serde(default)]
        amplitude: AmplitudeLaw,
    },
    /// Exactly `count` nonzero Daubechies-4 coefficients, synthesised.
    WaveletSparse {
        count: usize,
        #[serde(default)]
        amplitude: AmplitudeLaw,
    },
    /// Grayscale image used as real reflectivity in `[0, 1]`.
    ImageFile { path: PathBuf },
}

fn amplitudes<R: Rng>(rng: &mut R, n: usize, law: AmplitudeLaw) -> Vec<Complex64> {
    match law {
        AmplitudeLaw::UnitPhase => unit_phase(rng, n),
        AmplitudeLaw::Gaussian => {
            let g = Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).unwrap();
            (0..n).map(|_| Complex64::new(g.sample(rng), g.sample(rng))).collect()
        }
    }
}

/// Builds a `rows x cols` scene. Identical inputs give identical grids.
pub fn scene_gen(desc: &SceneSpec, rows: usize, cols: usize, wavelet: &WaveletConfig, seed: u64) -> Result<ComplexGrid> {
    let n = rows * cols;
    let mut rng = stream_rng(seed, 0x5cee);
    match desc {
        SceneSpec::PointTargets { count, amplitude } | SceneSpec::WaveletSparse { count, amplitude } => {
            if *count > n {
                bail!("sparsity {count} exceeds grid size {n}");
            }
            let mut support = sample(&mut rng, n, *count).into_vec();
            support.sort_unstable();
            let amps = amplitudes(&mut rng, *count, *amplitude);
            let mut v = vec![Complex64::new(0.0, 0.0); n];
            for (i, a) in support.into_iter().zip(amps) {
                v[i] = a;
            }
            if matches!(desc, SceneSpec::WaveletSparse { .. }) {
                Ok(synthesize(&v, rows, cols, wavelet)?)
            } else {
                Ok(ComplexGrid::from_vec(rows, cols, v)?)
            }
        }
        SceneSpec::ImageFile { path } => {
            let img = image::open(path)
                .with_context(|| format!("reading scene image {}", path.display()))?
                .into_luma8();
            let (w, h) = img.dimensions();
            if (h as usize, w as usize) != (rows, cols) {
                bail!("image is {h} x {w}, grid is {rows} x {cols}");
            }
            Ok(ComplexGrid::from_fn(rows, cols, |r, c| {
                Complex64::new(img.get_pixel(c as u32, r as u32).0[0] as f64 / 255.0, 0.0)
            }))
        }
    }
}

/// Writes the magnitude of `grid` as an 8-bit PNG, mapping `[0, peak]` to
/// `[0, 255]` (values above `peak` saturate).
pub fn export_png(grid: &ComplexGrid, peak: f64, path: &std::path::Path) -> Result<()> {
    let (rows, cols) = grid.shape();
    let img = image::GrayImage::from_fn(cols as u32, rows as u32, |x, y| {
        let m = grid.get(y as usize, x as usize).norm();
        let v = if peak > 0.0 { (m / peak * 255.0).round().min(255.0) } else { 0.0 };
        image::Luma([v as u8])
    });
    img.save(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use quadcs_core::analyze;

    #[test]
    fn empty_scene_is_zero() {
        let desc = SceneSpec::PointTargets {
            count: 0,
            amplitude: AmplitudeLaw::UnitPhase,
        };
        let g = scene_gen(&desc, 8, 8, &WaveletConfig::default(), 1).unwrap();
        assert!(g.as_slice().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn wavelet_sparse_has_exact_support() {
        let cfg = WaveletConfig::default();
        let desc = SceneSpec::WaveletSparse {
            count: 10,
            amplitude: AmplitudeLaw::UnitPhase,
        };
        let g = scene_gen(&desc, 32, 32, &cfg, 4).unwrap();
        let x = analyze(&g, &cfg).unwrap();
        assert_eq!(x.iter().filter(|v| v.norm() > 1e-9).count(), 10);
    }

    #[test]
    fn deterministic_and_bounded() {
        let desc = SceneSpec::PointTargets {
            count: 5,
            amplitude: AmplitudeLaw::Gaussian,
        };
        let cfg = WaveletConfig::default();
        assert_eq!(scene_gen(&desc, 16, 16, &cfg, 3).unwrap(), scene_gen(&desc, 16, 16, &cfg, 3).unwrap());
        assert_ne!(scene_gen(&desc, 16, 16, &cfg, 3).unwrap(), scene_gen(&desc, 16, 16, &cfg, 4).unwrap());
        let too_many = SceneSpec::PointTargets {
            count: 300,
            amplitude: AmplitudeLaw::UnitPhase,
        };
        assert!(scene_gen(&too_many, 16, 16, &cfg, 0).is_err());
    }

    #[test]
    fn png_round_trip_through_image_scene() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.png");
        let g = ComplexGrid::from_fn(8, 16, |r, c| Complex64::new((r + c) as f64, 0.0));
        export_png(&g, g.max_abs(), &path).unwrap();
        let back = scene_gen(&SceneSpec::ImageFile { path: path.clone() }, 8, 16, &WaveletConfig::default(), 0).unwrap();
        assert_eq!(back.get(7, 15).re, 1.0);
        assert_eq!(back.get(0, 0).re, 0.0);
        assert!(scene_gen(&SceneSpec::ImageFile { path }, 16, 16, &WaveletConfig::default(), 0).is_err());
    }
}
