//! Driver situation-awareness (SA) estimation from eye-tracking data.
//!
//! The pipeline turns raw 2 kHz gaze samples into blink/saccade/fixation
//! events, aggregates them into per-trial predictor features, trains a
//! GOSS gradient-boosted tree regressor on an SA label in [0, 1], and
//! explains the model with exact tree Shapley values. A synthetic study
//! generator and a 10-fold cross-validation harness with SHAP-ranked
//! feature selection close the loop end to end.
//!
//! Modules:
//! - [`gaze`] — gaze samples, event detection, pupil preprocessing, AOI labels
//! - [`features`] — per-trial predictor extraction and dataset CSV I/O
//! - [`sa_score`] — ground-truth SA scoring from scene recreations
//! - [`gbdt`] — histogram-based leaf-wise boosted trees with GOSS sampling
//! - [`shap`] — tree Shapley values, a brute-force oracle, and aggregates
//! - [`eval`] — metrics, fold plans, cross-validation, feature selection
//! - [`synth`] — deterministic synthetic study generation

pub mod error;
pub mod eval;
pub mod features;
pub mod gaze;
pub mod gbdt;
pub mod sa_score;
pub mod shap;
pub mod synth;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
