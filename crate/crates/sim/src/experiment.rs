//! The end-to-end pipeline: scene, echoes, compressive acquisition,
//! reconstruction and metrics, over a grid of experiment cells.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use anyhow::{Context, Result};
use quadcs_core::random::complex_gaussian;
use quadcs_core::{
    csa_inverse, exec, gen_spreading, ista_solve, measure, mutual_coherence, nmse, psnr, synthesize, Complex64,
    Compose, ComplexGrid, MeasurementOperator, PhaseMaskSet, SolveReport, SpreadingSpectrum, WaveletBasis,
};

use crate::arrayfile::write_grid;
use crate::config::{cell_seed, ExperimentConfig, Mode};
use crate::scene::{export_png, scene_gen};

/// Everything produced by the forward half of the pipeline.
#[derive(Debug, Clone)]
pub struct Simulated {
    pub scene: ComplexGrid,
    pub echoes: ComplexGrid,
    pub spectrum: SpreadingSpectrum,
    /// `M_r x N_a` measurements, noise included.
    pub measurements: ComplexGrid,
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub image: ComplexGrid,
    pub report: SolveReport,
    /// Factor the measurements were multiplied by before solving.
    pub scale: f64,
}

/// Scene through acquisition for one cell.
pub fn simulate(cfg: &ExperimentConfig, masks: &PhaseMaskSet, gamma: f64, mode: Mode, seed: u64) -> Result<Simulated> {
    let (nr, na) = (cfg.range_bins, cfg.azimuth_pulses);
    let scene = scene_gen(&cfg.scene, nr, na, &cfg.wavelet(), seed).context("stage scene")?;
    let echoes = csa_inverse(&scene, masks).context("stage echo simulation")?;
    let spectrum = gen_spreading(&cfg.sampler(gamma, mode, seed)?).context("stage spreading")?;
    let mut measurements = measure(&echoes, &spectrum).context("stage acquisition")?.data;
    if let Some(snr_db) = cfg.noise_snr_db {
        add_noise(&mut measurements, snr_db, cell_seed(cfg.sampler_seed ^ 0x004e_015e, seed));
    }
    Ok(Simulated {
        scene,
        echoes,
        spectrum,
        measurements,
    })
}

/// Complex white noise at `snr_db` below the mean sample power.
fn add_noise(grid: &mut ComplexGrid, snr_db: f64, seed: u64) {
    let n = grid.len();
    let power = grid.as_slice().iter().map(|v| v.norm_sqr()).sum::<f64>() / n as f64;
    let sigma = (power / 10f64.powf(snr_db / 10.0)).sqrt();
    let noise = complex_gaussian(n, seed, 0);
    for (v, e) in grid.as_mut_slice().iter_mut().zip(noise) {
        *v += e * sigma;
    }
}

/// Solves for the wavelet coefficients on `A = Φ Ψ` and returns the image.
pub fn reconstruct(
    cfg: &ExperimentConfig,
    masks: Arc<PhaseMaskSet>,
    spectrum: &SpreadingSpectrum,
    measurements: &ComplexGrid,
    solver_seed: u64,
) -> Result<Reconstruction> {
    let (nr, na) = (cfg.range_bins, cfg.azimuth_pulses);
    let phi = MeasurementOperator::new(spectrum, masks, cfg.path.into()).context("stage operator")?;
    let psi = WaveletBasis::new(nr, na, cfg.wavelet())?;
    let a = Compose::new(phi, psi)?;
    let peak = measurements.max_abs();
    let scale = if peak > 0.0 { 1.0 / peak } else { 1.0 };
    let y: Vec<Complex64> = measurements.as_slice().iter().map(|v| v * scale).collect();
    let report = ista_solve(&a, &y, &cfg.solver.to_config(solver_seed)).context("stage solve")?;
    let mut image = synthesize(&report.estimate, nr, na, &cfg.wavelet())?;
    for v in image.as_mut_slice() {
        *v /= scale;
    }
    Ok(Reconstruction { image, report, scale })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub gamma: f64,
    pub mode: Mode,
    pub seed: u64,
    pub psnr_db: f64,
    pub nmse: f64,
    pub iters: usize,
    pub wall_ms: Option<f64>,
    pub dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceResult {
    pub gamma: f64,
    pub mode: Mode,
    pub coherence: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub cells: Vec<CellResult>,
    pub coherence: Vec<CoherenceResult>,
    pub output_dir: PathBuf,
}

impl ExperimentReport {
    /// Median NMSE over the cells matching `gamma` and `mode`.
    pub fn median_nmse(&self, gamma: f64, mode: Mode) -> Option<f64> {
        let mut v: Vec<f64> = self
            .cells
            .iter()
            .filter(|c| c.gamma == gamma && c.mode == mode)
            .map(|c| c.nmse)
            .collect();
        median(&mut v)
    }

    pub fn summary_csv(&self) -> String {
        let mut s = String::from("gamma,mode,seed,psnr_db,nmse,iters,wall_ms\n");
        for c in &self.cells {
            let wall = c.wall_ms.map(|w| format!("{w:.3}")).unwrap_or_default();
            let _ = writeln!(s, "{},{},{},{},{},{},{}", c.gamma, c.mode.name(), c.seed, c.psnr_db, c.nmse, c.iters, wall);
        }
        s
    }

    pub fn coherence_csv(&self) -> String {
        let mut s = String::from("gamma,mode,coherence\n");
        for c in &self.coherence {
            let _ = writeln!(s, "{},{},{}", c.gamma, c.mode.name(), c.coherence);
        }
        s
    }
}

pub fn median(v: &mut [f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

pub fn cell_dir_name(gamma: f64, mode: Mode, seed: u64) -> String {
    format!("g{gamma}_{}_s{seed}", mode.name())
}

fn run_cell(cfg: &ExperimentConfig, masks: &Arc<PhaseMaskSet>, gamma: f64, mode: Mode, seed: u64) -> Result<CellResult> {
    let start = Instant::now();
    let sim = simulate(cfg, masks, gamma, mode, seed)?;
    let rec = reconstruct(cfg, masks.clone(), &sim.spectrum, &sim.measurements, seed)?;
    let wall_ms = cfg.record_wall_time.then(|| start.elapsed().as_secs_f64() * 1e3);

    let dir = cfg.output_dir.join("cells").join(cell_dir_name(gamma, mode, seed));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    write_grid(&dir.join("recon.qsar"), &rec.image)?;
    fs::write(dir.join("trace.csv"), rec.report.trace_csv())?;
    if cfg.export_png {
        let peak = sim.scene.max_abs();
        export_png(&rec.image, peak, &dir.join("recon.png"))?;
        export_png(&sim.scene, peak, &dir.join("scene.png"))?;
    }
    Ok(CellResult {
        gamma,
        mode,
        seed,
        psnr_db: psnr(&sim.scene, &rec.image).context("stage metrics")?,
        nmse: nmse(&sim.scene, &rec.image).context("stage metrics")?,
        iters: rec.report.iterations,
        wall_ms,
        dir,
    })
}

/// Coherence of `A = Φ Ψ` on a small `g x g` grid, for comparing modes.
pub fn coherence_diagnostic(cfg: &ExperimentConfig, gamma: f64, mode: Mode) -> Result<f64> {
    let g = cfg.coherence_grid;
    let small = ExperimentConfig {
        range_bins: g,
        azimuth_pulses: g,
        ..cfg.clone()
    };
    let masks = Arc::new(small.masks.build(g, g)?);
    let seed = cfg.seeds.first().copied().unwrap_or(0);
    let spectrum = gen_spreading(&small.sampler(gamma, mode, seed)?)?;
    let phi = MeasurementOperator::new(&spectrum, masks, small.path.into())?;
    let a = Compose::new(phi, WaveletBasis::new(g, g, small.wavelet())?)?;
    Ok(mutual_coherence(&a))
}

/// Runs every (gamma, mode, seed) cell and writes all outputs under
/// `cfg.output_dir`. Cells run in parallel; output bytes do not depend on
/// the schedule.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let out = &cfg.output_dir;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    fs::write(out.join("config.resolved.json"), cfg.to_json())?;

    let masks = Arc::new(cfg.masks.build(cfg.range_bins, cfg.azimuth_pulses).context("stage masks")?);
    let mut jobs = Vec::new();
    for &gamma in &cfg.gammas {
        for &mode in &cfg.modes {
            for &seed in &cfg.seeds {
                jobs.push((gamma, mode, seed));
            }
        }
    }
    let cells = exec::map_indices(jobs.len(), |i| {
        let (gamma, mode, seed) = jobs[i];
        run_cell(cfg, &masks, gamma, mode, seed)
            .with_context(|| format!("cell gamma={gamma} mode={} seed={seed}", mode.name()))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut coherence = Vec::new();
    if cfg.coherence_grid > 0 {
        for &gamma in &cfg.gammas {
            for &mode in &cfg.modes {
                let c = coherence_diagnostic(cfg, gamma, mode).context("stage coherence")?;
                coherence.push(CoherenceResult { gamma, mode, coherence: c });
            }
        }
    }

    let report = ExperimentReport {
        cells,
        coherence,
        output_dir: out.clone(),
    };
    fs::write(out.join("summary.csv"), report.summary_csv())?;
    fs::write(out.join("coherence.csv"), report.coherence_csv())?;
    Ok(report)
}

/// Relative path of every regular file under `dir`, sorted.
pub fn list_outputs(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d)? {
            let p = entry?.path();
            if p.is_dir() {
                stack.push(p);
            } else {
                files.push(p.strip_prefix(dir).expect("under root").to_path_buf());
            }
        }
    }
    files.sort();
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Law, MaskSpec, PathChoice};
    use crate::scene::{AmplitudeLaw, SceneSpec};

    fn small(dir: &Path) -> ExperimentConfig {
        ExperimentConfig {
            range_bins: 32,
            azimuth_pulses: 16,
            gammas: vec![0.25],
            seeds: vec![1, 2],
            scene: SceneSpec::WaveletSparse {
                count: 8,
                amplitude: AmplitudeLaw::UnitPhase,
            },
            wavelet_levels: 2,
            coherence_grid: 8,
            output_dir: dir.to_path_buf(),
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn summary_has_one_record_per_cell() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small(dir.path());
        let rep = run_experiment(&cfg).unwrap();
        assert_eq!(rep.cells.len(), 4);
        let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
        assert_eq!(summary.lines().count(), 5);
        assert!(summary.starts_with("gamma,mode,seed,psnr_db,nmse,iters,wall_ms\n"));
        assert!(summary.lines().nth(1).unwrap().ends_with(','));
        assert_eq!(rep.coherence.len(), 2);
        let back = ExperimentConfig::load(&dir.path().join("config.resolved.json")).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn full_rank_unitary_limit_recovers_scene() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small(dir.path());
        cfg.gammas = vec![1.0];
        cfg.modes = vec![Mode::Independent];
        cfg.spreading_law = Law::FlatSpectrum;
        cfg.solver.lambda = 1e-9;
        cfg.solver.rel_tol = 0.0;
        cfg.solver.max_iters = 50;
        let rep = run_experiment(&cfg).unwrap();
        for c in &rep.cells {
            assert!(c.nmse <= 1e-6, "nmse {}", c.nmse);
        }
    }

    #[test]
    fn fast_and_dense_paths_agree_end_to_end() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small(dir.path());
        cfg.modes = vec![Mode::Independent];
        cfg.masks = MaskSpec::Random { seed: 3 };
        cfg.solver.max_iters = 60;
        let fast = run_experiment(&cfg).unwrap();
        cfg.path = PathChoice::Dense;
        let dense = run_experiment(&cfg).unwrap();
        for (f, d) in fast.cells.iter().zip(&dense.cells) {
            assert!((f.nmse - d.nmse).abs() <= 1e-8, "{} vs {}", f.nmse, d.nmse);
        }
    }

    #[test]
    fn noise_lowers_quality_deterministically() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small(dir.path());
        cfg.modes = vec![Mode::Independent];
        cfg.seeds = vec![1];
        let clean = run_experiment(&cfg).unwrap().cells[0].nmse;
        cfg.noise_snr_db = Some(0.0);
        let a = run_experiment(&cfg).unwrap().cells[0].nmse;
        let b = run_experiment(&cfg).unwrap().cells[0].nmse;
        assert_eq!(a, b);
        assert!(a > clean);
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&mut []), None);
    }
}
