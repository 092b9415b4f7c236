//! Dense versus fast timing of the block-Toeplitz measurement product.

use std::fmt::Write as _;
use std::hint::black_box;
use std::time::Instant;

use anyhow::{bail, Result};
use quadcs_core::random::complex_gaussian;
use quadcs_core::{gen_spreading, BlockToeplitz, LinearOperator, MatvecPath, SamplerConfig};

use crate::experiment::median;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub size: usize,
    pub compressive_samples: usize,
    pub dense_ms: f64,
    pub fast_ms: f64,
}

impl BenchRow {
    pub fn speedup(&self) -> f64 {
        self.dense_ms / self.fast_ms
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub gamma: f64,
    pub repeats: usize,
    pub threads: usize,
    pub rows: Vec<BenchRow>,
    /// Least-squares slope of `log t` against `log N0`.
    pub dense_exponent: f64,
    pub fast_exponent: f64,
}

impl BenchReport {
    pub fn table(&self) -> String {
        let mut s = format!(
            "gamma = {}, median of {} runs, {} thread(s)\n{:>6} {:>6} {:>12} {:>12} {:>9}\n",
            self.gamma, self.repeats, self.threads, "N0", "M_r", "dense_ms", "fast_ms", "speedup"
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:>6} {:>6} {:>12.4} {:>12.4} {:>9.2}",
                r.size,
                r.compressive_samples,
                r.dense_ms,
                r.fast_ms,
                r.speedup()
            );
        }
        let _ = writeln!(
            s,
            "fitted exponents: dense {:.3}, fast {:.3}",
            self.dense_exponent, self.fast_exponent
        );
        s
    }

    pub fn csv(&self) -> String {
        let mut s = String::from("n0,m_r,dense_ms,fast_ms,speedup\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},{},{},{},{}", r.size, r.compressive_samples, r.dense_ms, r.fast_ms, r.speedup());
        }
        s
    }
}

/// Slope of the least-squares line through `(ln x, ln y)`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

fn time_ms(repeats: usize, mut f: impl FnMut()) -> f64 {
    f(); // warm-up
    let mut t: Vec<f64> = (0..repeats)
        .map(|_| {
            let start = Instant::now();
            f();
            start.elapsed().as_secs_f64() * 1e3
        })
        .collect();
    median(&mut t).expect("repeats >= 1")
}

fn measure_sizes(sizes: &[usize], gamma: f64, repeats: usize) -> Result<Vec<BenchRow>> {
    sizes
        .iter()
        .map(|&n| {
            let spectrum = gen_spreading(&SamplerConfig::with_ratio(n, n, gamma)?.seed(n as u64))?;
            let dense = BlockToeplitz::new(&spectrum, MatvecPath::Dense)?;
            let fast = BlockToeplitz::new(&spectrum, MatvecPath::Fast)?;
            let x = complex_gaussian(n * n, 1, 0);
            Ok(BenchRow {
                size: n,
                compressive_samples: spectrum.compressive_samples(),
                dense_ms: time_ms(repeats, || {
                    black_box(dense.apply(black_box(&x)));
                }),
                fast_ms: time_ms(repeats, || {
                    black_box(fast.apply(black_box(&x)));
                }),
            })
        })
        .collect()
}

/// Times `diag(T_l)` on an `N0 x N0` grid for each size with the dense and
/// the FFT path, using `threads` worker threads (1 isolates the per-pulse
/// arithmetic from scheduling).
pub fn run_benchmark(sizes: &[usize], gamma: f64, repeats: usize, threads: usize) -> Result<BenchReport> {
    if sizes.len() < 2 || repeats == 0 || threads == 0 {
        bail!("need at least two sizes, one repeat and one thread");
    }
    #[cfg(feature = "parallel")]
    let rows = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()?
        .install(|| measure_sizes(sizes, gamma, repeats))?;
    #[cfg(not(feature = "parallel"))]
    let (rows, threads) = (measure_sizes(sizes, gamma, repeats)?, 1);

    let n: Vec<f64> = rows.iter().map(|r| r.size as f64).collect();
    let dense: Vec<f64> = rows.iter().map(|r| r.dense_ms).collect();
    let fast: Vec<f64> = rows.iter().map(|r| r.fast_ms).collect();
    Ok(BenchReport {
        gamma,
        repeats,
        threads,
        dense_exponent: loglog_slope(&n, &dense),
        fast_exponent: loglog_slope(&n, &fast),
        rows,
    })
}
