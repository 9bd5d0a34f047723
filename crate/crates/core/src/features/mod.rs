//! Per-trial predictor variables.
//!
//! A trial exposes 28 predictors: 12 contextual values supplied as
//! metadata (demographics, video and decision-task context) and 16
//! eye-tracking aggregates computed from detected events and the pupil
//! series. Missing values are carried as an explicit mask end to end;
//! the tree learner routes them by a stored default direction.

mod dataset;
mod extract;

pub use dataset::Dataset;
pub use extract::extract_features;

use crate::{Error, Result};

/// The 28 predictor names, in canonical column order.
pub const FEATURE_NAMES: [&str; 28] = [
    "age",
    "gender",
    "yearDriving",
    "drivingFrequency",
    "videoLength",
    "decisionTime",
    "decisionMade",
    "correctDecision",
    "danger",
    "difficulty",
    "carPlacedLeft",
    "carPlacedRight",
    "numS",
    "sAmpMean",
    "sAmpStd",
    "sAmpMax",
    "numF",
    "fMean",
    "fStd",
    "fMax",
    "backMirror",
    "leftMirror",
    "rightMirror",
    "road",
    "sky",
    "pupilChange",
    "pupilMean",
    "pupilStd",
];

/// Index of the first eye-tracking predictor (`numS`); the eye-only view
/// keeps columns `EYE_FEATURE_START..28` (16 features).
pub const EYE_FEATURE_START: usize = 12;

/// The five AOI count features, matching the default layout region names.
pub const AOI_FEATURES: [&str; 5] = ["backMirror", "leftMirror", "rightMirror", "road", "sky"];

pub const VALID_VIDEO_LENGTHS: [f64; 6] = [1.0, 3.0, 6.0, 9.0, 12.0, 20.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum FeatureKind {
    Continuous,
    Nominal,
}

/// Kind lookup for correlation choice (Pearson for continuous, Spearman
/// for nominal). Unknown names default to continuous.
pub fn feature_kind(name: &str) -> FeatureKind {
    match name {
        "gender" | "drivingFrequency" | "decisionMade" | "correctDecision" => FeatureKind::Nominal,
        _ => FeatureKind::Continuous,
    }
}

pub fn feature_index(name: &str) -> Option<usize> {
    FEATURE_NAMES.iter().position(|n| *n == name)
}

/// Contextual variables 1-12, supplied alongside the gaze recording.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrialMeta {
    pub age: f64,
    /// male = 1, female = 0
    pub gender: f64,
    pub year_driving: f64,
    /// ordinal 1-6 (1 = daily, 6 = never)
    pub driving_frequency: f64,
    /// seconds, one of {1, 3, 6, 9, 12, 20}
    pub video_length: f64,
    pub decision_time: f64,
    /// nominal 1-4
    pub decision_made: f64,
    /// nominal 0-5
    pub correct_decision: f64,
    /// Likert 0-100
    pub danger: f64,
    /// Likert 0-100
    pub difficulty: f64,
    pub car_placed_left: f64,
    pub car_placed_right: f64,
}

impl TrialMeta {
    pub fn validate(&self) -> Result<()> {
        if !VALID_VIDEO_LENGTHS.contains(&self.video_length) {
            return Err(Error::Invalid(format!(
                "videoLength must be one of {VALID_VIDEO_LENGTHS:?}, got {}",
                self.video_length
            )));
        }
        Ok(())
    }

    /// Values in registry order for columns 0-11.
    pub fn values(&self) -> [f64; 12] {
        [
            self.age,
            self.gender,
            self.year_driving,
            self.driving_frequency,
            self.video_length,
            self.decision_time,
            self.decision_made,
            self.correct_decision,
            self.danger,
            self.difficulty,
            self.car_placed_left,
            self.car_placed_right,
        ]
    }
}

/// One (participant, video) row: the 28 predictors plus the SA label.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub participant_id: u32,
    pub trial_id: u32,
    /// Predictor values in registry order; `None` = masked.
    pub values: Vec<Option<f64>>,
    /// SA label in [0, 1]; optional until scored.
    pub sa: Option<f64>,
}

impl TrialRecord {
    pub fn get(&self, name: &str) -> Option<f64> {
        feature_index(name).and_then(|i| self.values[i])
    }

    /// Structural invariants over extracted values.
    pub fn validate(&self) -> Result<()> {
        if self.values.len() != FEATURE_NAMES.len() {
            return Err(Error::Invalid(format!("expected 28 predictor values, got {}", self.values.len())));
        }
        let get = |name: &str| self.get(name);
        for name in ["numS", "numF", "backMirror", "leftMirror", "rightMirror", "road", "sky"] {
            if let Some(v) = get(name) {
                if v < 0.0 {
                    return Err(Error::Invalid(format!("count `{name}` is negative: {v}")));
                }
            }
        }
        if let (Some(mean), Some(max)) = (get("fMean"), get("fMax")) {
            if max < mean {
                return Err(Error::Invalid(format!("fMax {max} < fMean {mean}")));
            }
        }
        if let (Some(mean), Some(max)) = (get("sAmpMean"), get("sAmpMax")) {
            if max < mean {
                return Err(Error::Invalid(format!("sAmpMax {max} < sAmpMean {mean}")));
            }
        }
        if let Some(num_f) = get("numF") {
            let aoi_sum: f64 = AOI_FEATURES.iter().filter_map(|n| get(n)).sum();
            if aoi_sum > num_f {
                return Err(Error::Invalid(format!("AOI counts sum {aoi_sum} exceeds numF {num_f}")));
            }
        }
        if let Some(sa) = self.sa {
            if !(0.0..=1.0).contains(&sa) {
                return Err(Error::Invalid(format!("sa label {sa} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Mean over a slice; `None` when empty.
pub(crate) fn mean(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        None
    } else {
        Some(xs.iter().sum::<f64>() / xs.len() as f64)
    }
}

/// Sample (n-1) standard deviation; `None` when fewer than 2 values.
pub(crate) fn sample_std(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let m = mean(xs).unwrap();
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64;
    Some(var.sqrt())
}

pub(crate) fn max(xs: &[f64]) -> Option<f64> {
    xs.iter().copied().reduce(f64::max)
}
