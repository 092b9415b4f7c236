//! Experiment configuration, read from and written back as JSON.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use quadcs_core::{
    build_csa_masks, Acceleration, CsaGeometry, MatvecPath, PhaseMaskSet, SamplerConfig, SolverConfig,
    SpreadingLaw, SpreadingMode, StepMode, WaveletConfig,
};
use serde::{Deserialize, Serialize};

use crate::scene::{AmplitudeLaw, SceneSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Independent,
    Fixed,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Independent => "independent",
            Mode::Fixed => "fixed",
        }
    }
}

impl From<Mode> for SpreadingMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Independent => SpreadingMode::Independent,
            Mode::Fixed => SpreadingMode::Fixed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Law {
    UniformPhase,
    FlatSpectrum,
}

impl From<Law> for SpreadingLaw {
    fn from(l: Law) -> Self {
        match l {
            Law::UniformPhase => SpreadingLaw::UniformPhase,
            Law::FlatSpectrum => SpreadingLaw::FlatSpectrum,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathChoice {
    Dense,
    Fast,
}

impl From<PathChoice> for MatvecPath {
    fn from(p: PathChoice) -> Self {
        match p {
            PathChoice::Dense => MatvecPath::Dense,
            PathChoice::Fast => MatvecPath::Fast,
        }
    }
}

/// Source of the three chirp-scaling phase masks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MaskSpec {
    /// Physical masks from the desk-scale X-band geometry.
    Csa,
    /// i.i.d. uniform-phase masks.
    Random { seed: u64 },
    /// All-ones masks (`D = I`).
    Identity,
}

impl MaskSpec {
    pub fn build(&self, rows: usize, cols: usize) -> Result<PhaseMaskSet> {
        Ok(match self {
            MaskSpec::Csa => build_csa_masks(&CsaGeometry::desk(rows, cols))?,
            MaskSpec::Random { seed } => PhaseMaskSet::random(rows, cols, *seed),
            MaskSpec::Identity => PhaseMaskSet::identity(rows, cols),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    pub lambda: f64,
    pub max_iters: usize,
    pub rel_tol: f64,
    pub acceleration: AccelName,
    pub power_iters: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AccelName {
    None,
    Fista,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            lambda: 0.01,
            max_iters: 500,
            rel_tol: 1e-5,
            acceleration: AccelName::None,
            power_iters: 30,
        }
    }
}

impl SolverSettings {
    pub fn to_config(&self, seed: u64) -> SolverConfig {
        SolverConfig {
            lambda: self.lambda,
            max_iters: self.max_iters,
            rel_tol: self.rel_tol,
            step: StepMode::PowerIteration { iters: self.power_iters },
            acceleration: match self.acceleration {
                AccelName::None => Acceleration::None,
                AccelName::Fista => Acceleration::Fista,
            },
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub range_bins: usize,
    pub azimuth_pulses: usize,
    pub gammas: Vec<f64>,
    pub modes: Vec<Mode>,
    /// One experiment cell per (gamma, mode, seed); the seed drives the scene.
    pub seeds: Vec<u64>,
    /// Base seed of the spreading coefficients, mixed with the cell seed.
    pub sampler_seed: u64,
    pub scene: SceneSpec,
    pub masks: MaskSpec,
    pub wavelet_levels: usize,
    pub spreading_law: Law,
    pub path: PathChoice,
    pub solver: SolverSettings,
    /// Per-sample SNR of additive complex white noise; `None` is noiseless.
    pub noise_snr_db: Option<f64>,
    /// Fill the `wall_ms` summary column. Off by default because timings
    /// are not reproducible.
    pub record_wall_time: bool,
    /// Grid edge used for the coherence diagnostic.
    pub coherence_grid: usize,
    pub export_png: bool,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            range_bins: 128,
            azimuth_pulses: 128,
            gammas: vec![0.25, 0.125],
            modes: vec![Mode::Independent, Mode::Fixed],
            seeds: vec![1],
            sampler_seed: 7,
            scene: SceneSpec::WaveletSparse {
                count: 300,
                amplitude: AmplitudeLaw::UnitPhase,
            },
            masks: MaskSpec::Csa,
            wavelet_levels: 3,
            spreading_law: Law::UniformPhase,
            path: PathChoice::Fast,
            solver: SolverSettings::default(),
            noise_snr_db: None,
            record_wall_time: false,
            coherence_grid: 16,
            export_png: false,
            output_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises") + "\n"
    }

    pub fn wavelet(&self) -> WaveletConfig {
        WaveletConfig {
            levels: self.wavelet_levels,
        }
    }

    pub fn sampler(&self, gamma: f64, mode: Mode, seed: u64) -> Result<SamplerConfig> {
        Ok(SamplerConfig::with_ratio(self.range_bins, self.azimuth_pulses, gamma)?
            .mode(mode.into())
            .law(self.spreading_law.into())
            .seed(cell_seed(self.sampler_seed, seed)))
    }

    pub fn validate(&self) -> Result<()> {
        if self.gammas.is_empty() || self.modes.is_empty() || self.seeds.is_empty() {
            bail!("gammas, modes and seeds must be non-empty");
        }
        for &g in &self.gammas {
            self.sampler(g, Mode::Independent, 0)
                .with_context(|| format!("gamma {g} on a {} range-bin grid", self.range_bins))?;
        }
        self.wavelet().check(self.range_bins, self.azimuth_pulses)?;
        self.solver.to_config(0).validate()?;
        if let Some(snr) = self.noise_snr_db {
            if !snr.is_finite() {
                bail!("noise_snr_db must be finite");
            }
        }
        Ok(())
    }
}

/// SplitMix64 finaliser over `base + seed`.
pub fn cell_seed(base: u64, seed: u64) -> u64 {
    let mut z = base.wrapping_add(seed).wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_and_defaults() {
        let cfg = ExperimentConfig::default();
        let back: ExperimentConfig = serde_json::from_str(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
        let partial: ExperimentConfig = serde_json::from_str(r#"{"range_bins": 64, "gammas": [0.25]}"#).unwrap();
        assert_eq!(partial.range_bins, 64);
        assert_eq!(partial.modes, cfg.modes);
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn nested_sections_accept_partial_objects() {
        let cfg: ExperimentConfig = serde_json::from_str(
            r#"{
                "scene": { "kind": "wavelet-sparse", "count": 50 },
                "masks": { "kind": "random", "seed": 3 },
                "modes": ["fixed"],
                "solver": { "max_iters": 5000 }
            }"#,
        )
        .unwrap();
        assert_eq!(cfg.solver.max_iters, 5000);
        assert_eq!(cfg.solver.lambda, 0.01);
        assert_eq!(cfg.masks, MaskSpec::Random { seed: 3 });
        assert_eq!(
            cfg.scene,
            SceneSpec::WaveletSparse {
                count: 50,
                amplitude: AmplitudeLaw::UnitPhase
            }
        );
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn gamma_must_give_valid_sampler() {
        let mut cfg = ExperimentConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.gammas = vec![0.3];
        assert!(cfg.validate().is_err());
        cfg.gammas = vec![1.0 / 128.0]; // N_r + M_r odd
        assert!(cfg.validate().is_err());
    }
}
