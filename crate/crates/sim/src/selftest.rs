//! Invariant checks at toy sizes, runnable from the command line.

use std::fmt::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use anyhow::Result;
use quadcs_core::grid::max_rel_diff;
use quadcs_core::random::complex_gaussian;
use quadcs_core::{
    adjoint_residual, analyze, build_circulant, build_toeplitz, csa_image, csa_inverse, gen_spreading, ista_solve,
    BlockToeplitz, Compose, ComplexGrid, CsaOperator, LinearOperator, MatvecPath, MeasurementOperator, PhaseMaskSet,
    SamplerConfig, SolverConfig, StepMode, WaveletBasis, WaveletConfig, synthesize,
};

const NR: usize = 16;
const NA: usize = 8;
const MR: usize = 4;
const TRIALS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelftestReport {
    pub checks: Vec<Check>,
}

impl SelftestReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            match &c.error {
                Some(e) => {
                    let _ = writeln!(s, "{tag}  {:<28} error: {e}", c.name);
                }
                None => {
                    let _ = writeln!(s, "{tag}  {:<28} residual {:.3e} (tol {:.0e})", c.name, c.residual, c.tolerance);
                }
            }
        }
        let passed = self.checks.iter().filter(|c| c.passed).count();
        let _ = writeln!(s, "{passed}/{} checks passed", self.checks.len());
        s
    }
}

/// Faults the self-test can plant to prove it notices them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fault {
    #[default]
    None,
    /// Fast-path adjoint multiplies by the eigenvalues instead of their
    /// conjugates.
    FastAdjointConjugation,
}

fn run(name: &'static str, tolerance: f64, f: impl FnOnce() -> Result<f64>) -> Check {
    let outcome = catch_unwind(AssertUnwindSafe(f));
    let (residual, error) = match outcome {
        Ok(Ok(r)) => (r, None),
        Ok(Err(e)) => (f64::NAN, Some(format!("{e:#}"))),
        Err(_) => (f64::NAN, Some("panicked".to_string())),
    };
    Check {
        name,
        residual,
        tolerance,
        passed: error.is_none() && residual <= tolerance,
        error,
    }
}

struct Fixture {
    masks: Arc<PhaseMaskSet>,
    wavelet: WaveletConfig,
    fast: MeasurementOperator,
    dense: MeasurementOperator,
}

fn fixture(fault: Fault) -> Result<Fixture> {
    let masks = Arc::new(PhaseMaskSet::random(NR, NA, 11));
    let spectrum = gen_spreading(&SamplerConfig::new(NR, MR, NA).seed(5))?;
    let mut blocks = BlockToeplitz::new(&spectrum, MatvecPath::Fast)?;
    if fault == Fault::FastAdjointConjugation {
        blocks = blocks.corrupt_adjoint_conjugation();
    }
    let fast = MeasurementOperator::from_parts(CsaOperator::new(masks.clone())?, blocks)?;
    let dense = MeasurementOperator::new(&spectrum, masks.clone(), MatvecPath::Dense)?;
    Ok(Fixture {
        masks,
        wavelet: WaveletConfig { levels: 2 },
        fast,
        dense,
    })
}

fn structural_identity() -> Result<f64> {
    let mut worst = 0.0f64;
    for seed in 0..10 {
        let s = gen_spreading(&SamplerConfig::new(NR, MR, 2).seed(seed))?;
        for l in 0..s.pulses() {
            let t = build_toeplitz(&s, l)?;
            let c = build_circulant(&s, l)?;
            let scale = 1.0 / (MR as f64).sqrt();
            for r in 0..MR {
                for col in 0..NR {
                    worst = worst.max((t.get(r, col) - c.get(r, col) * scale).norm());
                }
            }
        }
    }
    Ok(worst)
}

fn ista_monotone(a: &dyn LinearOperator) -> Result<f64> {
    let y = complex_gaussian(a.out_dim(), 3, 0);
    let cfg = SolverConfig {
        lambda: 0.05,
        max_iters: 100,
        rel_tol: 0.0,
        step: StepMode::PowerIteration { iters: 30 },
        ..SolverConfig::default()
    };
    let rep = ista_solve(a, &y, &cfg)?;
    let worst = rep
        .objective
        .windows(2)
        .map(|w| (w[1] - w[0]) / w[0].abs().max(1e-300))
        .fold(0.0f64, f64::max);
    Ok(worst)
}

/// Runs every check; never panics.
pub fn run_selftest(fault: Fault) -> SelftestReport {
    let fx = match fixture(fault) {
        Ok(f) => f,
        Err(e) => {
            return SelftestReport {
                checks: vec![Check {
                    name: "fixture",
                    residual: f64::NAN,
                    tolerance: 0.0,
                    passed: false,
                    error: Some(format!("{e:#}")),
                }],
            }
        }
    };
    let psi = || WaveletBasis::new(NR, NA, fx.wavelet);
    let checks = vec![
        run("adjoint D", 1e-10, || {
            Ok(adjoint_residual(&CsaOperator::new(fx.masks.clone())?, TRIALS, 1)?)
        }),
        run("adjoint Phi (fast)", 1e-10, || Ok(adjoint_residual(&fx.fast, TRIALS, 2)?)),
        run("adjoint Phi (dense)", 1e-10, || Ok(adjoint_residual(&fx.dense, TRIALS, 3)?)),
        run("adjoint Psi", 1e-10, || Ok(adjoint_residual(&psi()?, TRIALS, 4)?)),
        run("adjoint A = Phi Psi", 1e-10, || {
            Ok(adjoint_residual(&Compose::new(&fx.fast, psi()?)?, TRIALS, 5)?)
        }),
        run("Toeplitz = truncated circulant", 0.0, structural_identity),
        run("fast vs dense Phi", 1e-10, || {
            let mut worst = 0.0f64;
            for t in 0..TRIALS as u64 {
                let x = complex_gaussian(NR * NA, t, 6);
                worst = worst.max(max_rel_diff(&fx.fast.apply(&x), &fx.dense.apply(&x)));
                let y = complex_gaussian(MR * NA, t, 7);
                worst = worst.max(max_rel_diff(&fx.fast.apply_adjoint(&y), &fx.dense.apply_adjoint(&y)));
            }
            Ok(worst)
        }),
        run("CSA round trip", 1e-10, || {
            let g = ComplexGrid::from_vec(NR, NA, complex_gaussian(NR * NA, 8, 0))?;
            let back = csa_image(&csa_inverse(&g, &fx.masks)?, &fx.masks)?;
            Ok(max_rel_diff(back.as_slice(), g.as_slice()))
        }),
        run("wavelet reconstruction", 1e-11, || {
            let g = ComplexGrid::from_vec(NR, NA, complex_gaussian(NR * NA, 9, 0))?;
            let back = synthesize(&analyze(&g, &fx.wavelet)?, NR, NA, &fx.wavelet)?;
            Ok(max_rel_diff(back.as_slice(), g.as_slice()))
        }),
        run("ISTA monotone objective", 1e-12, || {
            ista_monotone(&Compose::new(&fx.fast, psi()?)?)
        }),
    ];
    SelftestReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_build_passes() {
        let r = run_selftest(Fault::None);
        assert!(r.checks.len() >= 6);
        assert!(r.all_passed(), "{}", r.render());
    }

    #[test]
    fn injected_conjugation_fault_is_caught() {
        let r = run_selftest(Fault::FastAdjointConjugation);
        let failed: Vec<_> = r.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
        assert!(failed.contains(&"adjoint Phi (fast)"), "{}", r.render());
        assert!(!failed.contains(&"adjoint Phi (dense)"));
    }
}
