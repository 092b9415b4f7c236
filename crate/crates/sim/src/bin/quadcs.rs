use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use quadcs_core::{nmse, psnr, SpreadingSpectrum};
use quadcs_sim::arrayfile::{read_grid, write_grid};
use quadcs_sim::config::{AccelName, ExperimentConfig, Law, MaskSpec, Mode, PathChoice};
use quadcs_sim::experiment::{median, reconstruct, simulate};
use quadcs_sim::scene::{AmplitudeLaw, SceneSpec};
use quadcs_sim::{run_benchmark, run_experiment, run_selftest, Fault};

#[derive(Parser)]
#[command(name = "quadcs", version, about = "Compressive SAR acquisition and reconstruction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a scene, its echoes and compressive measurements for one cell.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.25)]
        gamma: f64,
        #[arg(long, value_enum, default_value_t = ModeArg::Independent)]
        mode: ModeArg,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Reconstruct an image from measurement and spreading files.
    Reconstruct {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        measurements: PathBuf,
        #[arg(long)]
        spreading: PathBuf,
        /// Ground-truth scene for PSNR/NMSE.
        #[arg(long)]
        reference: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Run every (gamma, mode, seed) cell and compare spreading modes.
    Compare {
        #[command(flatten)]
        common: Common,
    },
    /// Time the dense and FFT measurement paths.
    Bench {
        #[arg(long, value_delimiter = ',', default_values_t = [64usize, 128, 256])]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 0.25)]
        gamma: f64,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Also write the table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run the invariant checks.
    Selftest {
        /// Plant a known fault to confirm the checks catch it.
        #[arg(long)]
        inject_fault: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Independent,
    Fixed,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Independent => Mode::Independent,
            ModeArg::Fixed => Mode::Fixed,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MaskArg {
    Csa,
    Random,
    Identity,
}

#[derive(Clone, Copy, ValueEnum)]
enum SceneArg {
    PointTargets,
    WaveletSparse,
}

/// Overrides applied on top of the config file (or the defaults).
#[derive(Args)]
struct Common {
    /// JSON config file; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    range_bins: Option<usize>,
    #[arg(long)]
    azimuth_pulses: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    gammas: Option<Vec<f64>>,
    #[arg(long, value_enum, value_delimiter = ',')]
    modes: Option<Vec<ModeArg>>,
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long)]
    sampler_seed: Option<u64>,
    #[arg(long, value_enum)]
    scene: Option<SceneArg>,
    #[arg(long)]
    sparsity: Option<usize>,
    /// Grayscale image used as the scene instead of a synthetic one.
    #[arg(long)]
    scene_image: Option<PathBuf>,
    #[arg(long, value_enum)]
    masks: Option<MaskArg>,
    #[arg(long)]
    mask_seed: Option<u64>,
    #[arg(long)]
    wavelet_levels: Option<usize>,
    #[arg(long)]
    flat_spectrum: bool,
    #[arg(long)]
    dense: bool,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    fista: bool,
    #[arg(long)]
    noise_snr_db: Option<f64>,
    #[arg(long)]
    record_wall_time: bool,
    #[arg(long)]
    export_png: bool,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

impl Common {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = &self.$field {
                    c.$field = v.clone();
                }
            )*};
        }
        set!(range_bins, azimuth_pulses, gammas, seeds, sampler_seed, wavelet_levels, output_dir);
        if let Some(m) = &self.modes {
            c.modes = m.iter().map(|&m| m.into()).collect();
        }
        let (count, amplitude) = match &c.scene {
            SceneSpec::PointTargets { count, amplitude } | SceneSpec::WaveletSparse { count, amplitude } => {
                (*count, *amplitude)
            }
            SceneSpec::ImageFile { .. } => (300, AmplitudeLaw::UnitPhase),
        };
        let count = self.sparsity.unwrap_or(count);
        match self.scene {
            Some(SceneArg::PointTargets) => c.scene = SceneSpec::PointTargets { count, amplitude },
            Some(SceneArg::WaveletSparse) => c.scene = SceneSpec::WaveletSparse { count, amplitude },
            None => {
                if let SceneSpec::PointTargets { count: k, .. } | SceneSpec::WaveletSparse { count: k, .. } =
                    &mut c.scene
                {
                    *k = count;
                }
            }
        }
        if let Some(p) = &self.scene_image {
            c.scene = SceneSpec::ImageFile { path: p.clone() };
        }
        match self.masks {
            Some(MaskArg::Csa) => c.masks = MaskSpec::Csa,
            Some(MaskArg::Identity) => c.masks = MaskSpec::Identity,
            Some(MaskArg::Random) => c.masks = MaskSpec::Random {
                seed: self.mask_seed.unwrap_or(0),
            },
            None => {}
        }
        if self.flat_spectrum {
            c.spreading_law = Law::FlatSpectrum;
        }
        if self.dense {
            c.path = PathChoice::Dense;
        }
        if let Some(v) = self.lambda {
            c.solver.lambda = v;
        }
        if let Some(v) = self.max_iters {
            c.solver.max_iters = v;
        }
        if let Some(v) = self.rel_tol {
            c.solver.rel_tol = v;
        }
        if self.fista {
            c.solver.acceleration = AccelName::Fista;
        }
        if self.noise_snr_db.is_some() {
            c.noise_snr_db = self.noise_snr_db;
        }
        c.record_wall_time |= self.record_wall_time;
        c.export_png |= self.export_png;
        c.validate()?;
        Ok(c)
    }
}

fn prepare_output(cfg: &ExperimentConfig) -> Result<()> {
    std::fs::create_dir_all(&cfg.output_dir).with_context(|| format!("creating {}", cfg.output_dir.display()))?;
    std::fs::write(cfg.output_dir.join("config.resolved.json"), cfg.to_json())?;
    Ok(())
}

fn cmd_simulate(common: &Common, gamma: f64, mode: Mode, seed: u64) -> Result<()> {
    let cfg = common.resolve()?;
    prepare_output(&cfg)?;
    let masks = cfg.masks.build(cfg.range_bins, cfg.azimuth_pulses)?;
    let sim = simulate(&cfg, &masks, gamma, mode, seed)?;
    let out = &cfg.output_dir;
    write_grid(&out.join("scene.qsar"), &sim.scene)?;
    write_grid(&out.join("echoes.qsar"), &sim.echoes)?;
    write_grid(&out.join("spreading.qsar"), &sim.spectrum.to_grid())?;
    write_grid(&out.join("measurements.qsar"), &sim.measurements)?;
    println!(
        "wrote scene, echoes, spreading and {} x {} measurements to {}",
        sim.measurements.rows(),
        sim.measurements.cols(),
        out.display()
    );
    Ok(())
}

fn cmd_reconstruct(common: &Common, meas: &Path, spreading: &Path, reference: Option<&PathBuf>, seed: u64) -> Result<()> {
    let cfg = common.resolve()?;
    prepare_output(&cfg)?;
    let y = read_grid(meas).with_context(|| format!("reading {}", meas.display()))?;
    let s = read_grid(spreading).with_context(|| format!("reading {}", spreading.display()))?;
    if y.cols() != cfg.azimuth_pulses {
        bail!("measurements have {} pulses, config has {}", y.cols(), cfg.azimuth_pulses);
    }
    let spectrum = SpreadingSpectrum::from_grid(cfg.range_bins, y.rows(), &s)?;
    let masks = Arc::new(cfg.masks.build(cfg.range_bins, cfg.azimuth_pulses)?);
    let rec = reconstruct(&cfg, masks, &spectrum, &y, seed)?;
    write_grid(&cfg.output_dir.join("recon.qsar"), &rec.image)?;
    std::fs::write(cfg.output_dir.join("trace.csv"), rec.report.trace_csv())?;
    println!(
        "iterations {}, final relative change {:.3e}, step {:.4e}",
        rec.report.iterations, rec.report.final_rel_change, rec.report.step
    );
    if let Some(r) = reference {
        let truth = read_grid(r).with_context(|| format!("reading {}", r.display()))?;
        println!("psnr {:.2} dB, nmse {:.4e}", psnr(&truth, &rec.image)?, nmse(&truth, &rec.image)?);
    }
    Ok(())
}

fn cmd_compare(common: &Common) -> Result<()> {
    let cfg = common.resolve()?;
    let report = run_experiment(&cfg)?;
    print!("{}", report.summary_csv());
    for &gamma in &cfg.gammas {
        for &mode in &cfg.modes {
            let mut v: Vec<f64> = report
                .cells
                .iter()
                .filter(|c| c.gamma == gamma && c.mode == mode)
                .map(|c| c.nmse)
                .collect();
            let coh = report
                .coherence
                .iter()
                .find(|c| c.gamma == gamma && c.mode == mode)
                .map(|c| format!("{:.4}", c.coherence))
                .unwrap_or_default();
            println!(
                "gamma {gamma} {:<11} median nmse {:.4e}  coherence {coh}",
                mode.name(),
                median(&mut v).unwrap_or(f64::NAN)
            );
        }
    }
    println!("outputs in {}", cfg.output_dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Simulate {
            common,
            gamma,
            mode,
            seed,
        } => cmd_simulate(common, *gamma, (*mode).into(), *seed),
        Command::Reconstruct {
            common,
            measurements,
            spreading,
            reference,
            seed,
        } => cmd_reconstruct(common, measurements, spreading, reference.as_ref(), *seed),
        Command::Compare { common } => cmd_compare(common),
        Command::Bench {
            sizes,
            gamma,
            repeats,
            threads,
            csv,
        } => run_benchmark(sizes, *gamma, *repeats, *threads).and_then(|r| {
            print!("{}", r.table());
            if let Some(p) = csv {
                std::fs::write(p, r.csv())?;
            }
            Ok(())
        }),
        Command::Selftest { inject_fault } => {
            let fault = if *inject_fault { Fault::FastAdjointConjugation } else { Fault::None };
            let report = run_selftest(fault);
            print!("{}", report.render());
            return if report.all_passed() { ExitCode::SUCCESS } else { ExitCode::from(3) };
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
