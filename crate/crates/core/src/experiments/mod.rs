//! Seeded numerical experiments and their reports.

pub mod checks;
pub mod counterexample;
pub mod decoupling;
pub mod embedding;
pub mod fields;
pub mod propagation;
pub mod report;

pub use checks::{run_selftest, SelftestConfig};
pub use counterexample::{run_counterexample, CounterexampleConfig};
pub use decoupling::{run_decoupling_cone, run_decoupling_sphere, ConeConfig, SphereConfig};
pub use embedding::{run_embedding_scan, EmbeddingConfig};
pub use fields::{gaussian_band_field, ModelKind, RandomFieldModel, SupportShape};
pub use propagation::{run_halfwave, run_local_smoothing, HalfwaveConfig, LocalSmoothingConfig};
pub use report::{fit_loglog, Check, ExperimentReport, LogFit, ScalingRun, SlopeBound, Verdict};
