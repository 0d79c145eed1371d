//! File formats, the instance corpus and the experiment harness built on
//! [`linpen_core`].
//!
//! The `linpen` binary wraps [`run_experiment`] and [`summarize`]; see the
//! [`config`] module for the configuration schema.

pub mod config;
pub mod error;
pub mod experiments;
pub mod files;
pub mod manifest;
pub mod summarize;

pub use config::{ExperimentConfig, ExperimentKind};
pub use error::{HarnessError, Result};
pub use experiments::{run_experiment, RunReport};
pub use files::{load_instance, save_instance, Corpus, CorpusSpec, Instance};
pub use summarize::summarize;

pub use linpen_core;
