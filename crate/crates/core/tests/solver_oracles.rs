use quadcs_core::random::complex_gaussian;
use quadcs_core::{
    estimate_lipschitz, ista_solve, Acceleration, CenteredDft, Complex64, DenseMatrix, FnOperator, SolverConfig,
    StepMode, UnitaryDft,
};

/// `A = F diag(s) W` with `F` the unitary DFT and `W` the centred DFT, so
/// the singular values of `A` are exactly `|s|`.
fn known_spectrum(s: &[f64]) -> DenseMatrix {
    let n = s.len();
    let f = UnitaryDft::new(n).unwrap();
    let w = CenteredDft::new(n).unwrap();
    let s = s.to_vec();
    let op = FnOperator::new(
        n,
        n,
        move |x| {
            let mut v = x.to_vec();
            w.apply_with_scratch(&mut v, &mut w.make_scratch());
            v.iter_mut().zip(&s).for_each(|(a, b)| *a *= b);
            f.forward(&mut v);
            v
        },
        |_| unreachable!("only the forward map is assembled"),
    );
    DenseMatrix::from_operator(&op)
}

#[test]
fn lipschitz_never_exceeds_spectral_norm() {
    let s: Vec<f64> = (0..16).map(|k| 0.5 + 0.1 * k as f64).collect();
    let a = known_spectrum(&s);
    let truth = 2.0f64 * 2.0;
    for seed in 0..5 {
        for iters in [1, 3, 10] {
            let l = estimate_lipschitz(&a, iters, seed).unwrap();
            assert!(l <= truth * (1.0 + 1e-12), "iters {iters}: {l} > {truth}");
        }
        let l = estimate_lipschitz(&a, 400, seed).unwrap();
        assert!((l - truth).abs() <= 1e-6 * truth, "{l}");
    }
}

#[test]
fn ista_and_fista_reach_the_same_objective() {
    let s: Vec<f64> = (0..16).map(|k| if k % 3 == 0 { 0.05 } else { 1.0 + 0.2 * k as f64 }).collect();
    let a = known_spectrum(&s);
    let wide = DenseMatrix::from_fn(12, 16, |r, c| a.get(r, c));
    for (name, op) in [("square", &a), ("wide", &wide)] {
        let y = complex_gaussian(op.rows(), 3, 0);
        let run = |acceleration| {
            let cfg = SolverConfig {
                lambda: 0.05,
                max_iters: 50_000,
                rel_tol: 1e-12,
                step: StepMode::PowerIteration { iters: 100 },
                acceleration,
                seed: 1,
            };
            let rep = ista_solve(op, &y, &cfg).unwrap();
            *rep.objective.last().unwrap()
        };
        let (plain, fast) = (run(Acceleration::None), run(Acceleration::Fista));
        assert!((plain - fast).abs() <= 1e-6 * plain.abs(), "{name}: {plain} vs {fast}");
    }
}

#[test]
fn diagonal_three_one_minimiser() {
    // Separable problem: x_i = soft(y_i / d_i, lambda / d_i^2).
    let d = [3.0, 1.0];
    let a = DenseMatrix::from_fn(2, 2, |r, c| Complex64::new(if r == c { d[r] } else { 0.0 }, 0.0));
    let y = [Complex64::new(1.5, 0.0), Complex64::new(0.0, -0.5)];
    let lambda = 0.3;
    let cfg = SolverConfig {
        lambda,
        max_iters: 10_000,
        rel_tol: 1e-14,
        ..SolverConfig::default()
    };
    let rep = ista_solve(&a, &y, &cfg).unwrap();
    let expected = [Complex64::new((1.5 * 3.0 - lambda) / 9.0, 0.0), Complex64::new(0.0, -0.2)];
    for (x, e) in rep.estimate.iter().zip(expected) {
        assert!((x - e).norm() <= 1e-10, "{x} vs {e}");
    }
}
