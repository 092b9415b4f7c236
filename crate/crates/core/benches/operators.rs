//! Dense vs FFT block-Toeplitz products, and the full measurement operator
//! on one thread vs the whole rayon pool. Build with
//! `--no-default-features` to time the sequential fallback instead.

use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use quadcs_core::random::complex_gaussian;
use quadcs_core::{
    build_csa_masks, exec, gen_spreading, BlockToeplitz, CsaGeometry, LinearOperator, MatvecPath,
    MeasurementOperator, SamplerConfig,
};

const SIZES: [usize; 3] = [64, 128, 256];
const GAMMA: f64 = 0.25;

fn backend() -> &'static str {
    if exec::is_parallel() {
        "rayon"
    } else {
        "sequential"
    }
}

fn block_paths(c: &mut Criterion) {
    let mut g = c.benchmark_group(format!("block_toeplitz/{}", backend()));
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    for n in SIZES {
        let s = gen_spreading(&SamplerConfig::with_ratio(n, n, GAMMA).unwrap().seed(1)).unwrap();
        let x = complex_gaussian(n * n, 2, 0);
        for path in [MatvecPath::Dense, MatvecPath::Fast] {
            let op = BlockToeplitz::new(&s, path).unwrap();
            g.bench_with_input(BenchmarkId::new(format!("{path:?}"), n), &x, |b, x| {
                single.install(|| b.iter(|| black_box(op.apply(black_box(x)))))
            });
        }
    }
    g.finish();
}

fn phi_threads(c: &mut Criterion) {
    let mut g = c.benchmark_group(format!("phi_fast/{}", backend()));
    let pools = [
        ("1_thread", rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap()),
        ("all_threads", rayon::ThreadPoolBuilder::new().build().unwrap()),
    ];
    for n in SIZES {
        let s = gen_spreading(&SamplerConfig::with_ratio(n, n, GAMMA).unwrap().seed(1)).unwrap();
        let masks = Arc::new(build_csa_masks(&CsaGeometry::desk(n, n)).unwrap());
        let phi = MeasurementOperator::new(&s, masks, MatvecPath::Fast).unwrap();
        let x = complex_gaussian(n * n, 3, 0);
        let y = complex_gaussian(phi.out_dim(), 4, 0);
        for (label, pool) in &pools {
            g.bench_with_input(BenchmarkId::new(format!("apply/{label}"), n), &x, |b, x| {
                pool.install(|| b.iter(|| black_box(phi.apply(black_box(x)))))
            });
            g.bench_with_input(BenchmarkId::new(format!("adjoint/{label}"), n), &y, |b, y| {
                pool.install(|| b.iter(|| black_box(phi.apply_adjoint(black_box(y)))))
            });
        }
    }
    g.finish();
}

criterion_group!(benches, block_paths, phi_threads);
criterion_main!(benches);
