//! Experiment configuration, catalog, persistence and verification.

pub mod catalog;
pub mod config;
pub mod initspec;
pub mod run;
pub mod verify;

pub use catalog::{catalog, lookup, CatalogEntry};
pub use config::{ExperimentConfig, ResolutionPolicy, System};
pub use initspec::InitSpec;
pub use run::{output_dir_for, run, validate, Assertion, RunRecord};
pub use verify::{verify_dir, VerifyReport};
