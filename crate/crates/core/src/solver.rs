//! ℓ1-regularised least squares,
//! `min_x ½‖A x − y‖² + λ‖x‖₁`, by (optionally accelerated) iterative
//! shrinkage-thresholding.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{norm, norm_sqr};
use crate::operator::LinearOperator;
use crate::random::complex_gaussian;

/// Inflation applied to power-iteration estimates of `‖A‖²`.
pub const LIPSCHITZ_SAFETY: f64 = 1.05;

/// Complex soft threshold: `v · max(1 − τ/|v|, 0)`, phase preserved.
pub fn soft_threshold(v: &[Complex64], tau: f64) -> Vec<Complex64> {
    v.iter().map(|&z| shrink(z, tau)).collect()
}

#[inline]
fn shrink(z: Complex64, tau: f64) -> Complex64 {
    let mag = z.norm();
    if mag <= tau {
        Complex64::new(0.0, 0.0)
    } else {
        z * (1.0 - tau / mag)
    }
}

/// Power iteration on `A^H A` from a seeded Gaussian start. Returns the last
/// Rayleigh quotient, which never exceeds `‖A‖²`.
pub fn estimate_lipschitz(a: &dyn LinearOperator, iters: usize, seed: u64) -> Result<f64> {
    if iters == 0 {
        return Err(Error::InvalidSolver("power iteration needs at least one step".into()));
    }
    let mut x = complex_gaussian(a.in_dim(), seed, 0);
    let n0 = norm(&x);
    x.iter_mut().for_each(|v| *v /= n0);
    let mut rq = 0.0;
    for _ in 0..iters {
        let ax = a.apply(&x);
        rq = norm_sqr(&ax);
        let y = a.apply_adjoint(&ax);
        let ny = norm(&y);
        if !(ny.is_finite() && ny > f64::MIN_POSITIVE) {
            return Err(Error::ZeroOperator);
        }
        x = y.into_iter().map(|v| v / ny).collect();
    }
    if !(rq.is_finite() && rq > 0.0) {
        return Err(Error::ZeroOperator);
    }
    Ok(rq)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepMode {
    /// `1 / (1.05 L)` with `L` from `iters` power iterations.
    PowerIteration { iters: usize },
    /// `1 / L` for a known Lipschitz constant.
    Fixed { lipschitz: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Acceleration {
    None,
    Fista,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub lambda: f64,
    pub max_iters: usize,
    pub rel_tol: f64,
    pub step: StepMode,
    pub acceleration: Acceleration,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda: 0.01,
            max_iters: 500,
            rel_tol: 1e-5,
            step: StepMode::PowerIteration { iters: 30 },
            acceleration: Acceleration::None,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSolver(m.into()));
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return bad("lambda must be positive");
        }
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1");
        }
        if !(self.rel_tol >= 0.0) {
            return bad("rel_tol must be non-negative");
        }
        match self.step {
            StepMode::PowerIteration { iters: 0 } => bad("power iteration needs at least one step"),
            StepMode::Fixed { lipschitz } if !(lipschitz > 0.0 && lipschitz.is_finite()) => {
                bad("lipschitz constant must be positive")
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub estimate: Vec<Complex64>,
    /// `f(x_k)` for `k = 0..=iterations`, starting from `x_0 = 0`.
    pub objective: Vec<f64>,
    pub iterations: usize,
    pub final_rel_change: f64,
    /// Lipschitz constant the step was derived from (before inflation).
    pub lipschitz: f64,
    pub step: f64,
    /// `‖x̂ − prox(x̂ − step ∇)‖ / max(‖x̂‖, ε)` at the returned estimate.
    pub fixed_point_residual: f64,
}

impl SolveReport {
    /// `iter,objective` CSV.
    pub fn trace_csv(&self) -> String {
        let mut s = String::from("iter,objective\n");
        for (k, f) in self.objective.iter().enumerate() {
            s.push_str(&format!("{k},{f}\n"));
        }
        s
    }
}

const EPS: f64 = 1e-300;

fn objective(ax: &[Complex64], y: &[Complex64], x: &[Complex64], lambda: f64) -> f64 {
    let fit: f64 = ax.iter().zip(y).map(|(a, b)| (a - b).norm_sqr()).sum();
    let l1: f64 = x.iter().map(|v| v.norm()).sum();
    0.5 * fit + lambda * l1
}

/// Proximal gradient step from `base` given `A base`.
fn prox_step(
    a: &dyn LinearOperator,
    base: &[Complex64],
    a_base: &[Complex64],
    y: &[Complex64],
    step: f64,
    lambda: f64,
) -> Vec<Complex64> {
    let resid: Vec<Complex64> = a_base.iter().zip(y).map(|(p, q)| p - q).collect();
    let grad = a.apply_adjoint(&resid);
    base.iter()
        .zip(&grad)
        .map(|(b, g)| shrink(b - g * step, lambda * step))
        .collect()
}

/// Minimises `½‖A x − y‖² + λ‖x‖₁` from `x_0 = 0`.
///
/// Stops after `max_iters` or once `‖x_{k+1} − x_k‖ / max(‖x_k‖, ε)` drops
/// below `rel_tol`. Each iteration costs one `A` and one `A^H` application.
pub fn ista_solve(a: &dyn LinearOperator, y: &[Complex64], cfg: &SolverConfig) -> Result<SolveReport> {
    cfg.validate()?;
    if y.len() != a.out_dim() {
        return Err(Error::DimensionMismatch {
            expected: a.out_dim(),
            got: y.len(),
        });
    }
    let (lipschitz, step) = match cfg.step {
        StepMode::PowerIteration { iters } => {
            let l = estimate_lipschitz(a, iters, cfg.seed)?;
            (l, 1.0 / (LIPSCHITZ_SAFETY * l))
        }
        StepMode::Fixed { lipschitz } => (lipschitz, 1.0 / lipschitz),
    };
    let n = a.in_dim();
    let zero = Complex64::new(0.0, 0.0);
    let mut x = vec![zero; n];
    let mut ax = vec![zero; a.out_dim()];
    // FISTA extrapolation point and its image.
    let mut z = x.clone();
    let mut az = ax.clone();
    let mut t = 1.0f64;
    let mut trace = vec![objective(&ax, y, &x, cfg.lambda)];
    let mut rel = f64::INFINITY;
    let mut iterations = 0;
    let fista = cfg.acceleration == Acceleration::Fista;

    for k in 1..=cfg.max_iters {
        let x_new = if fista {
            prox_step(a, &z, &az, y, step, cfg.lambda)
        } else {
            prox_step(a, &x, &ax, y, step, cfg.lambda)
        };
        let ax_new = a.apply(&x_new);
        let diff: f64 = x_new.iter().zip(&x).map(|(p, q)| (p - q).norm_sqr()).sum();
        rel = diff.sqrt() / norm(&x).max(EPS);
        let f = objective(&ax_new, y, &x_new, cfg.lambda);
        if !f.is_finite() {
            return Err(Error::NonFinite(k));
        }
        trace.push(f);
        if fista {
            let t_new = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let beta = (t - 1.0) / t_new;
            z = x_new.iter().zip(&x).map(|(p, q)| p + (p - q) * beta).collect();
            az = ax_new.iter().zip(&ax).map(|(p, q)| p + (p - q) * beta).collect();
            t = t_new;
        }
        x = x_new;
        ax = ax_new;
        iterations = k;
        if rel < cfg.rel_tol {
            break;
        }
    }

    let next = prox_step(a, &x, &ax, y, step, cfg.lambda);
    let fp: f64 = next.iter().zip(&x).map(|(p, q)| (p - q).norm_sqr()).sum();
    let fixed_point_residual = fp.sqrt() / norm(&x).max(EPS);

    Ok(SolveReport {
        estimate: x,
        objective: trace,
        iterations,
        final_rel_change: rel,
        lipschitz,
        step,
        fixed_point_residual,
    })
}
