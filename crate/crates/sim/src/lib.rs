//! Simulation and experiment driver for compressive SAR imaging: synthetic
//! scenes, the acquire-and-reconstruct pipeline, the dense/fast benchmark
//! and the self-test, plus the `QSAR` array file format.

pub mod arrayfile;
pub mod bench;
pub mod config;
pub mod experiment;
pub mod scene;
pub mod selftest;

pub use bench::{run_benchmark, BenchReport};
pub use config::{ExperimentConfig, Mode};
pub use experiment::{run_experiment, ExperimentReport};
pub use scene::{scene_gen, SceneSpec};
pub use selftest::{run_selftest, Fault, SelftestReport};
