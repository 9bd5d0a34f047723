//! Blink, saccade, and fixation detection.

use crate::{Error, Result};

use super::{
    AoiLayout, Blink, Fixation, GazeSample, InvalidGap, SampleSpan, Saccade, BLINK_MAX_S, EPS_SPEED_REL, EPS_T,
    FIXATION_MIN_S, SACCADE_MAX_S, SACCADE_MIN_S, SACCADE_SPEED_PX_S,
};

/// Check the per-trial sample preconditions: strictly increasing
/// timestamps and finite positions on usable samples.
pub fn validate_samples(samples: &[GazeSample]) -> Result<()> {
    for (i, w) in samples.windows(2).enumerate() {
        if w[1].t.partial_cmp(&w[0].t) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::Invalid(format!(
                "samples not strictly increasing in t at index {} ({} -> {})",
                i + 1,
                w[0].t,
                w[1].t
            )));
        }
    }
    for (i, s) in samples.iter().enumerate() {
        if s.is_usable() && !(s.x.is_finite() && s.y.is_finite()) {
            return Err(Error::Invalid(format!("non-finite gaze position at sample {i}")));
        }
    }
    Ok(())
}

/// Duration of the half-open interval owned by samples `[a, b]`: up to the
/// next sample's timestamp, or the trace end for the final run.
fn run_duration(samples: &[GazeSample], a: usize, b: usize) -> f64 {
    let end = (b + 1).min(samples.len() - 1);
    samples[end].t - samples[a].t
}

/// Find maximal unusable runs; short ones are blinks, long ones data loss.
///
/// Empty input yields empty output.
pub fn detect_blinks(samples: &[GazeSample]) -> (Vec<Blink>, Vec<InvalidGap>) {
    let mut blinks = Vec::new();
    let mut gaps = Vec::new();
    let n = samples.len();
    let mut i = 0;
    while i < n {
        if samples[i].is_usable() {
            i += 1;
            continue;
        }
        let start = i;
        while i < n && !samples[i].is_usable() {
            i += 1;
        }
        let end = i - 1;
        let span = SampleSpan::new(start, end);
        let onset = samples[start].t;
        let duration = run_duration(samples, start, end);
        if duration <= BLINK_MAX_S + EPS_T {
            blinks.push(Blink { onset, duration, span });
        } else {
            gaps.push(InvalidGap { onset, duration, span });
        }
    }
    (blinks, gaps)
}

/// Detect saccades from point-to-point speed over consecutive usable samples.
///
/// A run of consecutive fast pairs spanning `[t_s, t_e+1]` becomes a saccade
/// when its duration lies in the 15–150 ms band (inclusive); runs outside the
/// band are discarded entirely. The event's span covers the pairs' left
/// endpoints, so the landing sample stays available to the next fixation.
pub fn detect_saccades(samples: &[GazeSample]) -> Vec<Saccade> {
    let usable: Vec<usize> = (0..samples.len()).filter(|&i| samples[i].is_usable()).collect();
    if usable.len() < 2 {
        return Vec::new();
    }

    let speed_floor = SACCADE_SPEED_PX_S * (1.0 - EPS_SPEED_REL);
    let fast = |k: usize| -> bool {
        let (i, j) = (usable[k], usable[k + 1]);
        let dt = samples[j].t - samples[i].t;
        let dx = samples[j].x - samples[i].x;
        let dy = samples[j].y - samples[i].y;
        (dx * dx + dy * dy).sqrt() / dt >= speed_floor
    };

    let mut saccades = Vec::new();
    let n_pairs = usable.len() - 1;
    let mut k = 0;
    while k < n_pairs {
        if !fast(k) {
            k += 1;
            continue;
        }
        let run_start = k;
        while k < n_pairs && fast(k) {
            k += 1;
        }
        let run_end = k - 1; // last fast pair
        let first = usable[run_start];
        let last = usable[run_end + 1]; // right endpoint of the last fast pair
        let duration = samples[last].t - samples[first].t;
        if (SACCADE_MIN_S - EPS_T..=SACCADE_MAX_S + EPS_T).contains(&duration) {
            let dx = samples[last].x - samples[first].x;
            let dy = samples[last].y - samples[first].y;
            saccades.push(Saccade {
                onset: samples[first].t,
                duration,
                amplitude: (dx * dx + dy * dy).sqrt(),
                // exclude the landing sample: it opens the next event
                span: SampleSpan::new(first, usable[run_end]),
            });
        }
    }
    saccades
}

/// Fixations are the maximal usable runs left after removing saccade,
/// blink, and gap spans, subject to the 40 ms floor.
pub fn detect_fixations(
    samples: &[GazeSample],
    saccades: &[Saccade],
    blinks: &[Blink],
    gaps: &[InvalidGap],
) -> Vec<Fixation> {
    let n = samples.len();
    if n == 0 {
        return Vec::new();
    }
    let mut excluded = vec![false; n];
    for (i, s) in samples.iter().enumerate() {
        if !s.is_usable() {
            excluded[i] = true;
        }
    }
    let mark = |excluded: &mut Vec<bool>, span: SampleSpan| {
        for e in excluded.iter_mut().take(span.end + 1).skip(span.start) {
            *e = true;
        }
    };
    for s in saccades {
        mark(&mut excluded, s.span);
    }
    for b in blinks {
        mark(&mut excluded, b.span);
    }
    for g in gaps {
        mark(&mut excluded, g.span);
    }

    let mut fixations = Vec::new();
    let mut i = 0;
    while i < n {
        if excluded[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i < n && !excluded[i] {
            i += 1;
        }
        let end = i - 1;
        let duration = run_duration(samples, start, end);
        if duration >= FIXATION_MIN_S - EPS_T {
            let count = (end - start + 1) as f64;
            let cx = samples[start..=end].iter().map(|s| s.x).sum::<f64>() / count;
            let cy = samples[start..=end].iter().map(|s| s.y).sum::<f64>() / count;
            fixations.push(Fixation {
                onset: samples[start].t,
                duration,
                centroid_x: cx,
                centroid_y: cy,
                aoi: None,
                span: SampleSpan::new(start, end),
            });
        }
    }
    fixations
}

/// Label each fixation with the highest-priority AOI containing its centroid.
pub fn assign_aoi(fixations: &mut [Fixation], layout: &AoiLayout) {
    for f in fixations.iter_mut() {
        f.aoi = layout.locate(f.centroid_x, f.centroid_y).map(|s| s.to_string());
    }
}
