//! Experiment layer over `shockstab-core`: configuration files, presets,
//! parallel sweeps, and deterministic output bundles.

pub mod bundle;
pub mod config;
pub mod experiment;
pub mod presets;

pub use config::{ConfigError, ExperimentConfig, Mode};
pub use experiment::LabError;
