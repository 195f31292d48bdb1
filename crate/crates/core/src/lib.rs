//! Online attentive kernel-based temporal-difference learning.
//!
//! The crate bundles four classic-control simulators ([`envs`]), the kernel and
//! attention feature maps ([`features`]), an online novelty-based dictionary
//! ([`dictionary`]), value-function approximators ([`vfa`]), the two-timescale
//! update engine ([`learners`]) and an experiment harness ([`harness`]) that
//! drives training, evaluation and the diagnostic probes.

pub mod cli;
pub mod config;
pub mod dictionary;
pub mod envs;
mod error;
pub mod features;
pub mod harness;
pub mod learners;
pub mod output;
pub mod seeding;
pub mod vfa;

pub use error::{Error, Result};
