//! Scripted gaze traces: a segment plan whose expected event list is
//! exact by index arithmetic, rendered to samples on demand.
//!
//! The plan fixes, per trial, the fixation/saccade/blink layout in sample
//! indices using the same boundary conventions the detector applies:
//! a saccade launches from the previous fixation's last sample and its
//! landing sample opens the next fixation; a blink splits a fixation at
//! a sample boundary. Every scripted event therefore reappears in
//! detection with the same onset and duration, which makes the script
//! the detector's integration oracle.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::gaze::{AoiLayout, GazeSample, NOMINAL_DT};

/// Gaze jitter inside fixations, pixels (clamped); far below the
/// 1 px/sample that would reach the saccade speed threshold.
const JITTER_SD_PX: f64 = 0.08;
const JITTER_CLAMP_PX: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum Segment {
    /// Samples [start, start+len) at `point`.
    Fix { start: usize, len: usize, point: (f64, f64) },
    /// m fast pairs from the previous sample (at `from`) to the landing
    /// sample; writes the m-1 interior samples [start, start+m-1).
    Sacc { start: usize, pairs: usize, from: (f64, f64), to: (f64, f64) },
    /// Samples [start, start+len) invalid with zero pupil area.
    Blink { start: usize, len: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ExpectedKind {
    Fixation,
    Saccade,
    Blink,
}

/// What the detector must report for one scripted event.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ExpectedEvent {
    pub kind: ExpectedKind,
    pub onset: f64,
    pub duration: f64,
    pub aoi: Option<String>,
    pub amplitude: Option<f64>,
    pub centroid: Option<(f64, f64)>,
}

/// Pupil-diameter curve parameters for one trial (millimetres).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PupilCurve {
    pub base_mm: f64,
    pub drift_mm: f64,
    pub ripple_mm: f64,
}

impl PupilCurve {
    pub fn diameter_at(&self, t: f64, trial_len: f64) -> f64 {
        self.base_mm
            + self.drift_mm * (t / trial_len - 0.5)
            + self.ripple_mm * (2.0 * std::f64::consts::PI * t / 7.0).sin()
    }
}

/// One trial's gaze script.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GazeScript {
    pub n_samples: usize,
    pub segments: Vec<Segment>,
    pub expected: Vec<ExpectedEvent>,
    pub pupil: PupilCurve,
    /// RNG stream for jitter during rendering.
    pub render_stream: u64,
}

pub(crate) struct ScriptBuilder<'a> {
    n: usize,
    cursor: usize,
    fix_start: usize,
    point: (f64, f64),
    layout: &'a AoiLayout,
    segments: Vec<Segment>,
    expected: Vec<ExpectedEvent>,
}

impl<'a> ScriptBuilder<'a> {
    pub fn new(n_samples: usize, start_point: (f64, f64), layout: &'a AoiLayout) -> Self {
        ScriptBuilder {
            n: n_samples,
            cursor: 0,
            fix_start: 0,
            point: start_point,
            layout,
            segments: Vec::new(),
            expected: Vec::new(),
        }
    }

    pub fn remaining(&self) -> usize {
        self.n - self.cursor
    }

    fn push_fix_samples(&mut self, len: usize) {
        assert!(self.cursor + len <= self.n, "fixation overruns the trial");
        self.segments.push(Segment::Fix { start: self.cursor, len, point: self.point });
        self.cursor += len;
    }

    fn close_fixation(&mut self, end_sample: usize) {
        // detected span [fix_start, end_sample]; half-open duration
        let duration = (end_sample + 1 - self.fix_start).min(self.n - 1 - self.fix_start) as f64 * NOMINAL_DT;
        self.expected.push(ExpectedEvent {
            kind: ExpectedKind::Fixation,
            onset: self.fix_start as f64 * NOMINAL_DT,
            duration,
            aoi: self.layout.locate(self.point.0, self.point.1).map(|s| s.to_string()),
            amplitude: None,
            centroid: Some(self.point),
        });
    }

    /// Extend the current fixation by `len` samples.
    pub fn hold(&mut self, len: usize) {
        self.push_fix_samples(len);
    }

    /// Close the eyes for `len` samples inside the current fixation; the
    /// fixation resumes at the same point afterwards. Both halves must be
    /// long enough to survive the 40 ms floor, which the planner ensures.
    pub fn blink(&mut self, len: usize) {
        let blink_start = self.cursor;
        self.close_fixation(blink_start - 1);
        self.segments.push(Segment::Blink { start: blink_start, len });
        self.expected.push(ExpectedEvent {
            kind: ExpectedKind::Blink,
            onset: blink_start as f64 * NOMINAL_DT,
            duration: len as f64 * NOMINAL_DT,
            aoi: None,
            amplitude: None,
            centroid: None,
        });
        self.cursor += len;
        self.fix_start = self.cursor;
    }

    /// Move to `to` over `pairs` fast sample pairs. The previous
    /// fixation's last written sample is the launch; the landing sample
    /// belongs to the next fixation and is written by the next `hold`.
    pub fn saccade_to(&mut self, to: (f64, f64), pairs: usize) {
        let onset_sample = self.cursor - 1;
        self.close_fixation(onset_sample - 1);
        self.segments.push(Segment::Sacc { start: self.cursor, pairs, from: self.point, to });
        let amplitude = ((to.0 - self.point.0).powi(2) + (to.1 - self.point.1).powi(2)).sqrt();
        self.expected.push(ExpectedEvent {
            kind: ExpectedKind::Saccade,
            onset: onset_sample as f64 * NOMINAL_DT,
            duration: pairs as f64 * NOMINAL_DT,
            aoi: None,
            amplitude: Some(amplitude),
            centroid: None,
        });
        self.cursor += pairs - 1;
        self.fix_start = self.cursor;
        self.point = to;
    }

    /// Close the final fixation at the last sample and return the script.
    pub fn finish(mut self, pupil: PupilCurve, render_stream: u64) -> GazeScript {
        assert_eq!(self.cursor, self.n, "script must fill the trial exactly");
        self.close_fixation(self.n - 1);
        GazeScript { n_samples: self.n, segments: self.segments, expected: self.expected, pupil, render_stream }
    }
}

impl GazeScript {
    pub fn trial_len_s(&self) -> f64 {
        (self.n_samples - 1) as f64 * NOMINAL_DT
    }

    pub fn expected_fixations(&self) -> impl Iterator<Item = &ExpectedEvent> {
        self.expected.iter().filter(|e| e.kind == ExpectedKind::Fixation)
    }

    /// Materialize the samples. Deterministic: jitter comes from the
    /// stored stream of the master-seeded generator.
    pub fn render(&self, master_seed: u64) -> Vec<GazeSample> {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(self.render_stream);
        rng.set_word_pos(0);

        let trial_len = self.trial_len_s();
        let mut samples: Vec<GazeSample> = (0..self.n_samples)
            .map(|i| {
                let t = i as f64 * NOMINAL_DT;
                let d = self.pupil.diameter_at(t, trial_len);
                GazeSample { t, x: 0.0, y: 0.0, pupil_area: std::f64::consts::PI * (d / 2.0) * (d / 2.0), valid: true }
            })
            .collect();

        let jitter = |rng: &mut ChaCha8Rng| -> f64 {
            // Box-Muller would waste a draw; a clamped triangular sum is
            // close enough for sub-pixel tremor
            let u: f64 = rng.gen_range(-1.0..1.0) + rng.gen_range(-1.0..1.0);
            (u * JITTER_SD_PX * 1.6).clamp(-JITTER_CLAMP_PX, JITTER_CLAMP_PX)
        };

        for segment in &self.segments {
            match segment {
                Segment::Fix { start, len, point } => {
                    for s in samples.iter_mut().skip(*start).take(*len) {
                        s.x = point.0 + jitter(&mut rng);
                        s.y = point.1 + jitter(&mut rng);
                    }
                }
                Segment::Sacc { start, pairs, from, to } => {
                    let m = *pairs as f64;
                    for k in 1..*pairs {
                        let frac = k as f64 / m;
                        let i = start + k - 1;
                        samples[i].x = from.0 + (to.0 - from.0) * frac;
                        samples[i].y = from.1 + (to.1 - from.1) * frac;
                    }
                }
                Segment::Blink { start, len } => {
                    for i in *start..start + len {
                        samples[i].pupil_area = 0.0;
                        samples[i].valid = false;
                        // gaze position frozen at the last fixation point
                        samples[i].x = samples[start - 1].x;
                        samples[i].y = samples[start - 1].y;
                    }
                }
            }
        }
        samples
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaze::{detect_blinks, detect_fixations, detect_saccades};

    fn simple_script() -> GazeScript {
        let layout = AoiLayout::driving_default();
        let mut sb = ScriptBuilder::new(2001, (960.0, 700.0), &layout); // 1 s trial
        sb.hold(400); // road fixation
        sb.saccade_to((960.0, 100.0), 40); // to the rear-view mirror
        sb.hold(300);
        sb.blink(240); // 120 ms
        sb.hold(400);
        sb.saccade_to((960.0, 700.0), 40);
        let rest = sb.remaining();
        sb.hold(rest);
        sb.finish(PupilCurve { base_mm: 3.2, drift_mm: 0.1, ripple_mm: 0.02 }, 99)
    }

    #[test]
    fn script_events_partition_the_trial() {
        let script = simple_script();
        let total: f64 = script.expected.iter().map(|e| e.duration).sum();
        assert!((total - script.trial_len_s()).abs() < 1e-9);
    }

    #[test]
    fn detector_reproduces_the_script_exactly() {
        let script = simple_script();
        let samples = script.render(1234);
        assert_eq!(samples.len(), 2001);

        let (blinks, gaps) = detect_blinks(&samples);
        let saccades = detect_saccades(&samples);
        let fixations = detect_fixations(&samples, &saccades, &blinks, &gaps);
        assert!(gaps.is_empty());

        let expected_fix: Vec<&ExpectedEvent> =
            script.expected.iter().filter(|e| e.kind == ExpectedKind::Fixation).collect();
        let expected_sacc: Vec<&ExpectedEvent> =
            script.expected.iter().filter(|e| e.kind == ExpectedKind::Saccade).collect();
        let expected_blink: Vec<&ExpectedEvent> =
            script.expected.iter().filter(|e| e.kind == ExpectedKind::Blink).collect();

        assert_eq!(fixations.len(), expected_fix.len());
        assert_eq!(saccades.len(), expected_sacc.len());
        assert_eq!(blinks.len(), expected_blink.len());

        for (got, want) in fixations.iter().zip(expected_fix) {
            assert!((got.onset - want.onset).abs() < 1e-9);
            assert!((got.duration - want.duration).abs() < 1e-9);
            let (cx, cy) = want.centroid.unwrap();
            assert!((got.centroid_x - cx).abs() < 0.5 && (got.centroid_y - cy).abs() < 0.5);
        }
        for (got, want) in saccades.iter().zip(expected_sacc) {
            assert!((got.onset - want.onset).abs() < 1e-9);
            assert!((got.duration - want.duration).abs() < 1e-9);
            assert!((got.amplitude - want.amplitude.unwrap()).abs() < 0.5);
        }
        for (got, want) in blinks.iter().zip(expected_blink) {
            assert!((got.onset - want.onset).abs() < 1e-9);
            assert!((got.duration - want.duration).abs() < 1e-9);
        }
    }

    #[test]
    fn rendering_is_deterministic() {
        let script = simple_script();
        assert_eq!(script.render(7), script.render(7));
        assert_ne!(script.render(7), script.render(8)); // jitter differs
    }
}
