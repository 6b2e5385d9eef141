//! Einstellung Rigidity Index (ERI) diagnostics for continual learning.
//!
//! The crate reads accuracy logs of a continual learner and a from-scratch
//! baseline, computes adaptation delay (AD), performance deficit (PD) and
//! relative cue reliance (SFR_rel, CSR_rel), classifies the resulting
//! regime, and builds the shortcut-injection and masking datasets those logs
//! are evaluated on.
//!
//! - [`logio`]: log data model and CSV/JSON parsing.
//! - [`metrics`]: time-to-threshold, AD, PD, masking deltas, regimes.
//! - [`aggregate`]: mean/SD summaries and AD(tau) grid summaries.
//! - [`datasetops`]: CIFAR-100 binary I/O, benchmark plans, patch and mask.
//! - [`report`]: panels, heatmap and summary exports, synthetic curves.

pub mod aggregate;
pub mod datasetops;
pub mod error;
pub mod logio;
pub mod metrics;
pub mod report;

pub use error::{Error, Result};
