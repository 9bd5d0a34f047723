//! Areas of interest: named screen rectangles with an overlap priority.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const FRAME_WIDTH: f64 = 1920.0;
pub const FRAME_HEIGHT: f64 = 1080.0;

/// Axis-aligned pixel rectangle. Containment is inclusive on all edges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AoiRegion {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
    /// Overlap resolution rank: smaller number wins.
    pub priority: u32,
}

impl AoiRegion {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }
}

/// Named AOI regions for one screen layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AoiLayout {
    // BTreeMap keeps iteration (and thus tie-breaking) deterministic.
    pub regions: BTreeMap<String, AoiRegion>,
}

impl AoiLayout {
    /// The default driving-scene layout: rear-view mirror top centre, side
    /// mirrors at the frame edges, sky above the horizon, road below it.
    /// Mirrors take precedence over the road/sky panels they overlap.
    pub fn driving_default() -> AoiLayout {
        let mut regions = BTreeMap::new();
        regions.insert("backMirror".to_string(), AoiRegion { x0: 810.0, y0: 40.0, x1: 1110.0, y1: 160.0, priority: 1 });
        regions.insert("leftMirror".to_string(), AoiRegion { x0: 40.0, y0: 420.0, x1: 280.0, y1: 580.0, priority: 2 });
        regions.insert("rightMirror".to_string(), AoiRegion { x0: 1640.0, y0: 420.0, x1: 1880.0, y1: 580.0, priority: 3 });
        regions.insert("sky".to_string(), AoiRegion { x0: 0.0, y0: 0.0, x1: 1920.0, y1: 380.0, priority: 5 });
        regions.insert("road".to_string(), AoiRegion { x0: 0.0, y0: 380.0, x1: 1920.0, y1: 1080.0, priority: 4 });
        AoiLayout { regions }
    }

    /// Highest-priority region containing the point, if any.
    pub fn locate(&self, x: f64, y: f64) -> Option<&str> {
        self.regions
            .iter()
            .filter(|(_, r)| r.contains(x, y))
            .min_by_key(|(name, r)| (r.priority, name.as_str()))
            .map(|(name, _)| name.as_str())
    }

    /// Check every rectangle is non-empty and inside the frame.
    pub fn validate(&self) -> Result<()> {
        for (name, r) in &self.regions {
            if !(r.x0 < r.x1 && r.y0 < r.y1) {
                return Err(Error::Invalid(format!("AOI region `{name}` has an empty rectangle")));
            }
            if r.x0 < 0.0 || r.y0 < 0.0 || r.x1 > FRAME_WIDTH || r.y1 > FRAME_HEIGHT {
                return Err(Error::Invalid(format!(
                    "AOI region `{name}` extends outside the {FRAME_WIDTH}x{FRAME_HEIGHT} frame"
                )));
            }
        }
        Ok(())
    }

    pub fn from_json_file(path: &Path) -> Result<AoiLayout> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let layout: AoiLayout = serde_json::from_str(&text)
            .map_err(|e| Error::Json { file: path.display().to_string(), msg: e.to_string() })?;
        layout.validate()?;
        Ok(layout)
    }

    pub fn to_json_file(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.regions).expect("layout serializes");
        std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_layout_is_valid() {
        let layout = AoiLayout::driving_default();
        layout.validate().unwrap();
        assert_eq!(layout.regions.len(), 5);
    }

    #[test]
    fn locate_unique_containment() {
        let layout = AoiLayout::driving_default();
        assert_eq!(layout.locate(960.0, 700.0), Some("road"));
        assert_eq!(layout.locate(160.0, 500.0), Some("leftMirror"));
    }

    #[test]
    fn locate_outside_all_regions() {
        let mut layout = AoiLayout::driving_default();
        layout.regions.remove("road");
        layout.regions.remove("sky");
        assert_eq!(layout.locate(960.0, 900.0), None);
    }

    #[test]
    fn overlap_resolved_by_priority() {
        // backMirror (priority 1) sits inside the sky panel (priority 5).
        let layout = AoiLayout::driving_default();
        assert_eq!(layout.locate(960.0, 100.0), Some("backMirror"));
        // Side mirrors overlap the road panel.
        assert_eq!(layout.locate(1700.0, 500.0), Some("rightMirror"));
    }

    #[test]
    fn json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("layout.json");
        let layout = AoiLayout::driving_default();
        layout.to_json_file(&path).unwrap();
        let loaded = AoiLayout::from_json_file(&path).unwrap();
        assert_eq!(layout, loaded);
    }
}
