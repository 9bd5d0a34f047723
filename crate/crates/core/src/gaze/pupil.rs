//! Pupil-diameter preprocessing.
//!
//! Fixed order: moving-mean filter over pupil area, linear interpolation
//! across blink spans, median filter, then area-to-diameter conversion.
//! Both filters use a 100-sample window centred as `[i-50, i+49]`,
//! truncated at the trial edges, and aggregate only non-invalid samples
//! so blink-interpolation anchors stay uncontaminated.

use crate::{Error, Result};

use super::{Blink, GazeSample};

const FILTER_WINDOW: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PupilFlag {
    Measured,
    InterpolatedBlink,
    Invalid,
}

/// Cleaned pupil-diameter signal on the source timeline.
#[derive(Debug, Clone)]
pub struct PupilSeries {
    pub t: Vec<f64>,
    /// Diameter in millimetres; NaN where the flag is `Invalid`.
    pub diameter: Vec<f64>,
    pub flags: Vec<PupilFlag>,
}

impl PupilSeries {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// True when no sample carries a usable diameter.
    pub fn all_invalid(&self) -> bool {
        self.flags.iter().all(|f| *f == PupilFlag::Invalid)
    }

    /// Iterator over (t, diameter) of usable samples.
    pub fn usable(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.t
            .iter()
            .zip(self.diameter.iter())
            .zip(self.flags.iter())
            .filter(|(_, f)| **f != PupilFlag::Invalid)
            .map(|((t, d), _)| (*t, *d))
    }
}

fn window_bounds(i: usize, n: usize) -> (usize, usize) {
    let lo = i.saturating_sub(FILTER_WINDOW / 2);
    let hi = (i + FILTER_WINDOW / 2 - 1).min(n - 1);
    (lo, hi)
}

/// Area to diameter: the pupil is treated as a disc, `d = 2*sqrt(A/pi)`,
/// scaled by the device calibration factor (mm per unit).
fn area_to_diameter(area: f64, scale: f64) -> f64 {
    2.0 * (area / std::f64::consts::PI).sqrt() * scale
}

/// Run the pupil pipeline for one trial.
///
/// Blink spans are interpolated from their nearest valid neighbours;
/// longer invalid gaps stay invalid, as does a blink touching a trial
/// edge (there is no anchor to interpolate from). A fully invalid trial
/// yields an all-invalid series rather than an error.
pub fn pupil_pipeline(samples: &[GazeSample], blinks: &[Blink], scale: f64) -> Result<PupilSeries> {
    if !scale.is_finite() || scale <= 0.0 {
        return Err(Error::Config(format!("pupil scale must be > 0, got {scale}")));
    }
    let n = samples.len();
    let t: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let usable: Vec<bool> = samples.iter().map(|s| s.is_usable()).collect();

    // (1) moving mean over usable areas, O(1) per sample via prefix sums
    let mut prefix_sum = vec![0.0f64; n + 1];
    let mut prefix_count = vec![0usize; n + 1];
    for i in 0..n {
        prefix_sum[i + 1] = prefix_sum[i] + if usable[i] { samples[i].pupil_area } else { 0.0 };
        prefix_count[i + 1] = prefix_count[i] + usize::from(usable[i]);
    }
    let mut area = vec![f64::NAN; n];
    for i in 0..n {
        if !usable[i] {
            continue;
        }
        let (lo, hi) = window_bounds(i, n);
        let count = prefix_count[hi + 1] - prefix_count[lo];
        area[i] = (prefix_sum[hi + 1] - prefix_sum[lo]) / count as f64;
    }

    // (2) linear interpolation across blink spans
    let mut flags: Vec<PupilFlag> =
        usable.iter().map(|&u| if u { PupilFlag::Measured } else { PupilFlag::Invalid }).collect();
    for b in blinks {
        let left = (0..b.span.start).rev().find(|&j| usable[j]);
        let right = (b.span.end + 1..n).find(|&j| usable[j]);
        if let (Some(l), Some(r)) = (left, right) {
            for j in b.span.start..=b.span.end {
                let frac = (t[j] - t[l]) / (t[r] - t[l]);
                area[j] = area[l] + (area[r] - area[l]) * frac;
                flags[j] = PupilFlag::InterpolatedBlink;
            }
        }
    }

    // (3) median filter over currently-usable areas, rolling sorted window
    let present: Vec<bool> = flags.iter().map(|f| *f != PupilFlag::Invalid).collect();
    let mut filtered = vec![f64::NAN; n];
    let mut window: Vec<f64> = Vec::with_capacity(FILTER_WINDOW + 1);
    let half = FILTER_WINDOW / 2;
    // seed with [0, half-2]; each iteration i then slides in i+half-1
    for j in 0..(half - 1).min(n) {
        if present[j] {
            let pos = window.partition_point(|v| *v < area[j]);
            window.insert(pos, area[j]);
        }
    }
    for i in 0..n {
        // window covers [i-half, i+half-1]; slide the leading edge in
        let lead = i + half - 1;
        if lead < n && present[lead] {
            let pos = window.partition_point(|v| *v < area[lead]);
            window.insert(pos, area[lead]);
        }
        if present[i] {
            let m = window.len();
            filtered[i] = if m % 2 == 1 { window[m / 2] } else { (window[m / 2 - 1] + window[m / 2]) / 2.0 };
        }
        // drop the trailing edge (index i-half leaves the next window)
        if i >= half {
            let gone = i - half;
            if present[gone] {
                let pos = window.partition_point(|v| *v < area[gone]);
                debug_assert!(window[pos] == area[gone]);
                window.remove(pos);
            }
        }
    }

    // (4) area -> diameter
    let diameter: Vec<f64> = filtered
        .iter()
        .zip(present.iter())
        .map(|(&a, &p)| if p { area_to_diameter(a, scale) } else { f64::NAN })
        .collect();

    Ok(PupilSeries { t, diameter, flags })
}
