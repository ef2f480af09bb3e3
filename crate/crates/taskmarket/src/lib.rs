//! A task-assignment model of firm-level labor demand with five occupation
//! types and digital capital, plus the measurement and estimation layer
//! needed to study it on synthetic panels: task-intensity scores, hiring
//! concentration, instruments, fixed-effects and 2SLS estimators, a job-title
//! classifier, and a deterministic synthetic panel generator.

pub mod assignment;
pub mod classifier;
pub mod cutoff;
pub mod econ;
pub mod error;
pub mod metrics;
pub mod model;
pub mod numfmt;
pub mod synth;
