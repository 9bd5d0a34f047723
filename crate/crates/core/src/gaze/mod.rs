//! Gaze sample streams and ocular event detection.
//!
//! A trial is a time-ordered sequence of [`GazeSample`]s at a nominal
//! 2000 Hz. Detection proceeds in a fixed order: invalid/zero-area runs
//! become blinks (short) or invalid gaps (long), velocity runs become
//! saccades, and the remaining valid stretches become fixations, which
//! are then labelled with areas of interest.
//!
//! All durations come from timestamps. An event occupying samples
//! `[a, b]` spans the half-open time interval `[t[a], t[b+1])` (clipped
//! to the trace end), so adjacent events share boundaries exactly and
//! the per-kind durations partition the trial.

mod aoi;
mod detect;
mod io;
mod pupil;

pub use aoi::{AoiLayout, AoiRegion, FRAME_HEIGHT, FRAME_WIDTH};
pub use detect::{assign_aoi, detect_blinks, detect_fixations, detect_saccades, validate_samples};
pub use io::{read_gaze_csv, write_events_csv, write_gaze_csv};
pub use pupil::{pupil_pipeline, PupilFlag, PupilSeries};

/// Nominal sampling interval of the eye tracker (2000 Hz).
pub const NOMINAL_DT: f64 = 1.0 / 2000.0;

/// Maximum duration for an invalid run to count as a blink, seconds.
pub const BLINK_MAX_S: f64 = 0.200;
/// Minimum fixation duration, seconds (boundary-inclusive).
pub const FIXATION_MIN_S: f64 = 0.040;
/// Minimum point-to-point speed for saccade samples, pixels/second.
pub const SACCADE_SPEED_PX_S: f64 = 2000.0;
/// Saccade duration band, seconds (boundary-inclusive).
pub const SACCADE_MIN_S: f64 = 0.015;
pub const SACCADE_MAX_S: f64 = 0.150;

/// Absolute slack for duration threshold comparisons. Keeps exact-boundary
/// runs (e.g. a 40 ms fixation built from 0.5 ms steps) on the inclusive
/// side despite f64 rounding; one nanosecond is far below the 0.1 ms
/// timestamp resolution.
pub(crate) const EPS_T: f64 = 1e-9;
/// Relative slack for the speed threshold, same purpose.
pub(crate) const EPS_SPEED_REL: f64 = 1e-12;

/// One raw eye-tracker sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GazeSample {
    /// Seconds since trial start; strictly increasing within a trial.
    pub t: f64,
    /// Horizontal gaze position, pixels.
    pub x: f64,
    /// Vertical gaze position, pixels.
    pub y: f64,
    /// Pupil area in device units; 0 or negative means eyelid closed / lost.
    pub pupil_area: f64,
    /// Tracker validity flag.
    pub valid: bool,
}

impl GazeSample {
    /// A sample is usable when the tracker flagged it valid and the pupil
    /// area is positive; everything else is treated as signal loss.
    pub fn is_usable(&self) -> bool {
        self.valid && self.pupil_area > 0.0
    }
}

/// Inclusive range of sample indices owned by an event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleSpan {
    pub start: usize,
    pub end: usize,
}

impl SampleSpan {
    pub fn new(start: usize, end: usize) -> Self {
        SampleSpan { start, end }
    }

    pub fn contains(&self, i: usize) -> bool {
        i >= self.start && i <= self.end
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Blink {
    pub onset: f64,
    pub duration: f64,
    pub span: SampleSpan,
}

/// An invalid run too long to be a blink; treated as data loss.
#[derive(Debug, Clone, PartialEq)]
pub struct InvalidGap {
    pub onset: f64,
    pub duration: f64,
    pub span: SampleSpan,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Saccade {
    pub onset: f64,
    pub duration: f64,
    /// Euclidean start-to-end distance, pixels.
    pub amplitude: f64,
    pub span: SampleSpan,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fixation {
    pub onset: f64,
    pub duration: f64,
    pub centroid_x: f64,
    pub centroid_y: f64,
    /// Area-of-interest label, set by [`assign_aoi`] when the centroid
    /// falls inside a region.
    pub aoi: Option<String>,
    pub span: SampleSpan,
}

/// Unified event view used for the event CSV output.
#[derive(Debug, Clone, PartialEq)]
pub enum GazeEvent {
    Fixation(Fixation),
    Saccade(Saccade),
    Blink(Blink),
}

impl GazeEvent {
    pub fn onset(&self) -> f64 {
        match self {
            GazeEvent::Fixation(f) => f.onset,
            GazeEvent::Saccade(s) => s.onset,
            GazeEvent::Blink(b) => b.onset,
        }
    }

    pub fn kind_str(&self) -> &'static str {
        match self {
            GazeEvent::Fixation(_) => "Fixation",
            GazeEvent::Saccade(_) => "Saccade",
            GazeEvent::Blink(_) => "Blink",
        }
    }
}

/// All events detected in one trial, in the order the pipeline produces them.
#[derive(Debug, Clone, Default)]
pub struct TrialEvents {
    pub fixations: Vec<Fixation>,
    pub saccades: Vec<Saccade>,
    pub blinks: Vec<Blink>,
    pub gaps: Vec<InvalidGap>,
}

impl TrialEvents {
    /// Run the full detection pipeline on one validated trial.
    pub fn detect(samples: &[GazeSample], layout: &AoiLayout) -> crate::Result<TrialEvents> {
        validate_samples(samples)?;
        let (blinks, gaps) = detect_blinks(samples);
        let saccades = detect_saccades(samples);
        let mut fixations = detect_fixations(samples, &saccades, &blinks, &gaps);
        assign_aoi(&mut fixations, layout);
        Ok(TrialEvents { fixations, saccades, blinks, gaps })
    }

    /// Merged, onset-ordered event list.
    pub fn merged(&self) -> Vec<GazeEvent> {
        let mut all: Vec<GazeEvent> = self
            .fixations
            .iter()
            .cloned()
            .map(GazeEvent::Fixation)
            .chain(self.saccades.iter().cloned().map(GazeEvent::Saccade))
            .chain(self.blinks.iter().cloned().map(GazeEvent::Blink))
            .collect();
        all.sort_by(|a, b| a.onset().total_cmp(&b.onset()));
        all
    }
}
