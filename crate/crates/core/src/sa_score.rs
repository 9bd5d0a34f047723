//! Ground-truth SA scoring from scene recreations.
//!
//! A participant recreates the viewed driving scene by placing vehicles.
//! Three error measures — vehicle count, placement distance, and speed
//! relation to the ego vehicle — are each inverted onto [0, 1] and
//! averaged with equal weights into the SA label.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Ego speed is fixed; other vehicles drive one of three constant speeds.
pub const EGO_SPEED_KMH: f64 = 100.0;
/// Farthest vehicle distance in the scenarios; the distance-error scale.
pub const MAX_DISTANCE_M: f64 = 80.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Lane {
    Left,
    Middle,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vehicle {
    pub lane: Lane,
    /// Longitudinal position relative to the ego vehicle, metres.
    pub pos_m: f64,
    /// One of {80, 100, 120}.
    pub speed_kmh: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpeedRelation {
    Slower,
    Equal,
    Faster,
}

impl Vehicle {
    pub fn speed_relation(&self) -> SpeedRelation {
        if self.speed_kmh < EGO_SPEED_KMH {
            SpeedRelation::Slower
        } else if self.speed_kmh > EGO_SPEED_KMH {
            SpeedRelation::Faster
        } else {
            SpeedRelation::Equal
        }
    }
}

/// The true scene shown in the video.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneTruth {
    pub vehicles: Vec<Vehicle>,
}

/// The participant's recreation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneRecreation {
    pub vehicles: Vec<Vehicle>,
}

impl SceneTruth {
    pub fn validate(&self) -> Result<()> {
        if !(5..=6).contains(&self.vehicles.len()) {
            return Err(Error::Invalid(format!("scene needs 5 or 6 vehicles, got {}", self.vehicles.len())));
        }
        for v in &self.vehicles {
            if v.pos_m.abs() > MAX_DISTANCE_M {
                return Err(Error::Invalid(format!("vehicle position {} m exceeds the {MAX_DISTANCE_M} m extent", v.pos_m)));
            }
        }
        Ok(())
    }

    pub fn from_json_file(path: &Path) -> Result<SceneTruth> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        serde_json::from_str(&text).map_err(|e| Error::Json { file: path.display().to_string(), msg: e.to_string() })
    }
}

impl SceneRecreation {
    pub fn from_json_file(path: &Path) -> Result<SceneRecreation> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        serde_json::from_str(&text).map_err(|e| Error::Json { file: path.display().to_string(), msg: e.to_string() })
    }
}

/// A pairing of placed vehicles to truth vehicles (indices into the
/// respective lists). Each truth vehicle is used at most once.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Matching {
    pub pairs: Vec<(usize, usize)>, // (placed index, truth index)
}

/// Greedy per-lane nearest-position matching. Within each lane, the
/// placed/truth pair with the smallest position difference matches
/// first; remaining vehicles stay unmatched. Ties break toward lower
/// indices, keeping the matching deterministic.
pub fn match_vehicles(truth: &SceneTruth, rec: &SceneRecreation) -> Matching {
    let mut pairs = Vec::new();
    for lane in [Lane::Left, Lane::Middle, Lane::Right] {
        let truth_idx: Vec<usize> =
            (0..truth.vehicles.len()).filter(|&i| truth.vehicles[i].lane == lane).collect();
        let placed_idx: Vec<usize> =
            (0..rec.vehicles.len()).filter(|&i| rec.vehicles[i].lane == lane).collect();

        let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
        for &p in &placed_idx {
            for &t in &truth_idx {
                candidates.push(((rec.vehicles[p].pos_m - truth.vehicles[t].pos_m).abs(), p, t));
            }
        }
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

        let mut placed_used = vec![false; rec.vehicles.len()];
        let mut truth_used = vec![false; truth.vehicles.len()];
        for (_, p, t) in candidates {
            if !placed_used[p] && !truth_used[t] {
                placed_used[p] = true;
                truth_used[t] = true;
                pairs.push((p, t));
            }
        }
    }
    pairs.sort();
    Matching { pairs }
}

/// The three inverted error components and their aggregate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaScore {
    /// 1 - capped count error.
    pub s1: f64,
    /// 1 - mean distance-error percentage / 100 over matched pairs.
    pub s2: f64,
    /// 1 - wrong speed-relation fraction over matched pairs.
    pub s3: f64,
    pub sa: f64,
    /// Set when no vehicles matched: s2 and s3 fall to their worst value.
    pub no_matches: bool,
}

/// Score a recreation against the truth.
pub fn score_sa(truth: &SceneTruth, rec: &SceneRecreation) -> SaScore {
    let matching = match_vehicles(truth, rec);
    score_sa_with_matching(truth, rec, &matching)
}

pub fn score_sa_with_matching(truth: &SceneTruth, rec: &SceneRecreation, matching: &Matching) -> SaScore {
    let n_true = truth.vehicles.len() as f64;
    let n_placed = rec.vehicles.len() as f64;
    let count_err = (n_true - n_placed).abs().min(n_true);
    let s1 = 1.0 - count_err / n_true;

    let (s2, s3, no_matches) = if matching.pairs.is_empty() {
        (0.0, 0.0, true)
    } else {
        let m = matching.pairs.len() as f64;
        let mean_pct: f64 = matching
            .pairs
            .iter()
            .map(|&(p, t)| {
                let err = (rec.vehicles[p].pos_m - truth.vehicles[t].pos_m).abs();
                (err / MAX_DISTANCE_M * 100.0).min(100.0)
            })
            .sum::<f64>()
            / m;
        let mismatches = matching
            .pairs
            .iter()
            .filter(|&&(p, t)| rec.vehicles[p].speed_relation() != truth.vehicles[t].speed_relation())
            .count() as f64;
        (1.0 - mean_pct / 100.0, 1.0 - mismatches / m, false)
    };

    let sa = (s1 + s2 + s3) / 3.0;
    SaScore { s1, s2, s3, sa, no_matches }
}
