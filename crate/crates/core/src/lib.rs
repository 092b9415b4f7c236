//! Compressive SAR acquisition and reconstruction.
//!
//! * [`csa`]: chirp-scaling image formation and the echo operator `D`.
//! * [`measurement`]: per-pulse spreading, Toeplitz/circulant blocks and the
//!   measurement operator `Φ` with dense and FFT paths.
//! * [`wavelet`]: the orthonormal Daubechies-4 basis `Ψ`.
//! * [`solver`]: ISTA/FISTA for the ℓ1 problem on `A = Φ Ψ`.
//!
//! Grids are column-major (`vec` stacks columns) with range along rows and
//! azimuth pulses along columns. With the default `parallel` feature the
//! per-pulse and per-column loops run on rayon; results are bit-identical
//! either way.

pub mod csa;
pub mod dft;
pub mod error;
pub mod exec;
pub mod grid;
pub mod measurement;
pub mod metrics;
pub mod operator;
pub mod random;
pub mod solver;
pub mod wavelet;

pub use num_complex::Complex64;

pub use csa::{build_csa_masks, csa_image, csa_inverse, operator_d, CsaGeometry, CsaOperator, PhaseMaskSet};
pub use dft::{centered_dft_apply, unitary_dft, CenteredDft, UnitaryDft};
pub use error::{Error, Result};
pub use grid::ComplexGrid;
pub use measurement::{
    build_circulant, build_toeplitz, gen_spreading, measure, operator_phi, BlockToeplitz, MatvecPath,
    MeasurementOperator, MeasurementSet, SamplerConfig, SpreadingLaw, SpreadingMode, SpreadingSpectrum,
};
pub use metrics::{mutual_coherence, nmse, psnr};
pub use operator::{adjoint_residual, Compose, DenseMatrix, FnOperator, Identity, LinearOperator};
pub use solver::{estimate_lipschitz, ista_solve, soft_threshold, Acceleration, SolveReport, SolverConfig, StepMode};
pub use wavelet::{analyze, synthesize, WaveletBasis, WaveletConfig};
