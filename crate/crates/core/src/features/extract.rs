//! Eye-tracking feature extraction for one trial.

use crate::gaze::{Fixation, PupilSeries, Saccade};

use super::{feature_index, mean, max, sample_std, TrialMeta, TrialRecord, AOI_FEATURES, FEATURE_NAMES};

/// Window at each trial edge for the pupil-change feature, seconds.
const PUPIL_CHANGE_WINDOW_S: f64 = 0.200;

/// Compute predictors 13-28 from the trial's events and pupil series and
/// attach the contextual variables 1-12.
///
/// Aggregates that lack data are masked rather than zeroed: moment
/// features need at least one event (two for standard deviations), and
/// pupil features need usable pupil samples. Counts are always present.
pub fn extract_features(
    fixations: &[Fixation],
    saccades: &[Saccade],
    pupil: &PupilSeries,
    meta: &TrialMeta,
    participant_id: u32,
    trial_id: u32,
) -> TrialRecord {
    let mut values: Vec<Option<f64>> = vec![None; FEATURE_NAMES.len()];
    for (i, v) in meta.values().iter().enumerate() {
        values[i] = Some(*v);
    }
    let mut set = |name: &str, v: Option<f64>| {
        values[feature_index(name).expect("registry name")] = v;
    };

    let amplitudes: Vec<f64> = saccades.iter().map(|s| s.amplitude).collect();
    set("numS", Some(saccades.len() as f64));
    set("sAmpMean", mean(&amplitudes));
    set("sAmpStd", sample_std(&amplitudes));
    set("sAmpMax", max(&amplitudes));

    let durations_ms: Vec<f64> = fixations.iter().map(|f| f.duration * 1000.0).collect();
    set("numF", Some(fixations.len() as f64));
    set("fMean", mean(&durations_ms));
    set("fStd", sample_std(&durations_ms));
    set("fMax", max(&durations_ms));

    for region in AOI_FEATURES {
        let count = fixations.iter().filter(|f| f.aoi.as_deref() == Some(region)).count();
        set(region, Some(count as f64));
    }

    let diam: Vec<(f64, f64)> = pupil.usable().collect();
    let all: Vec<f64> = diam.iter().map(|(_, d)| *d).collect();
    set("pupilMean", mean(&all));
    set("pupilStd", sample_std(&all));
    set("pupilChange", pupil_change(pupil, &diam));

    TrialRecord { participant_id, trial_id, values, sa: None }
}

/// Mean diameter over the last 200 ms minus the mean over the first
/// 200 ms of the trial; masked when either window has no usable samples.
fn pupil_change(pupil: &PupilSeries, usable: &[(f64, f64)]) -> Option<f64> {
    if pupil.is_empty() || usable.is_empty() {
        return None;
    }
    let t0 = pupil.t[0];
    let t1 = pupil.t[pupil.len() - 1];
    let head: Vec<f64> = usable.iter().filter(|(t, _)| *t <= t0 + PUPIL_CHANGE_WINDOW_S).map(|(_, d)| *d).collect();
    let tail: Vec<f64> = usable.iter().filter(|(t, _)| *t >= t1 - PUPIL_CHANGE_WINDOW_S).map(|(_, d)| *d).collect();
    match (mean(&head), mean(&tail)) {
        (Some(h), Some(t)) => Some(t - h),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaze::{PupilFlag, SampleSpan, NOMINAL_DT};

    fn meta() -> TrialMeta {
        TrialMeta {
            age: 25.0,
            gender: 1.0,
            year_driving: 5.0,
            driving_frequency: 2.0,
            video_length: 6.0,
            decision_time: 1.5,
            decision_made: 1.0,
            correct_decision: 1.0,
            danger: 40.0,
            difficulty: 50.0,
            car_placed_left: 1.0,
            car_placed_right: 2.0,
        }
    }

    fn fixation(duration: f64, aoi: Option<&str>) -> Fixation {
        Fixation {
            onset: 0.0,
            duration,
            centroid_x: 100.0,
            centroid_y: 100.0,
            aoi: aoi.map(|s| s.to_string()),
            span: SampleSpan::new(0, 1),
        }
    }

    fn constant_pupil(n: usize, d: f64) -> PupilSeries {
        PupilSeries {
            t: (0..n).map(|i| i as f64 * NOMINAL_DT).collect(),
            diameter: vec![d; n],
            flags: vec![PupilFlag::Measured; n],
        }
    }

    #[test]
    fn two_fixations_moments() {
        let fixations = vec![fixation(0.100, Some("road")), fixation(0.300, Some("backMirror"))];
        let record = extract_features(&fixations, &[], &constant_pupil(2000, 3.5), &meta(), 1, 1);
        assert_eq!(record.get("numF"), Some(2.0));
        assert_eq!(record.get("fMean"), Some(200.0));
        assert_eq!(record.get("fMax"), Some(300.0));
        // sample sd of {100, 300} = sqrt(2 * 100^2 / 1) = 141.42...
        let fstd = record.get("fStd").unwrap();
        assert!((fstd - 141.4213562373095).abs() < 1e-9);
        assert_eq!(record.get("road"), Some(1.0));
        assert_eq!(record.get("backMirror"), Some(1.0));
        assert_eq!(record.get("sky"), Some(0.0));
        record.validate().unwrap();
    }

    #[test]
    fn zero_events_masks_moments() {
        let record = extract_features(&[], &[], &constant_pupil(2000, 3.5), &meta(), 1, 1);
        assert_eq!(record.get("numS"), Some(0.0));
        assert_eq!(record.get("numF"), Some(0.0));
        assert_eq!(record.get("sAmpMean"), None);
        assert_eq!(record.get("sAmpStd"), None);
        assert_eq!(record.get("sAmpMax"), None);
        assert_eq!(record.get("fMean"), None);
        for region in AOI_FEATURES {
            assert_eq!(record.get(region), Some(0.0));
        }
        record.validate().unwrap();
    }

    #[test]
    fn single_fixation_masks_std_only() {
        let record = extract_features(&[fixation(0.080, None)], &[], &constant_pupil(2000, 3.5), &meta(), 1, 1);
        assert_eq!(record.get("numF"), Some(1.0));
        assert_eq!(record.get("fMean"), Some(80.0));
        assert_eq!(record.get("fStd"), None);
        assert_eq!(record.get("fMax"), Some(80.0));
    }

    #[test]
    fn constant_pupil_features() {
        let record = extract_features(&[], &[], &constant_pupil(4000, 3.5), &meta(), 1, 1);
        assert_eq!(record.get("pupilMean"), Some(3.5));
        assert_eq!(record.get("pupilStd"), Some(0.0));
        assert_eq!(record.get("pupilChange"), Some(0.0));
    }

    #[test]
    fn all_invalid_pupil_masks_pupil_features() {
        let n = 1000;
        let pupil = PupilSeries {
            t: (0..n).map(|i| i as f64 * NOMINAL_DT).collect(),
            diameter: vec![f64::NAN; n],
            flags: vec![PupilFlag::Invalid; n],
        };
        let record = extract_features(&[], &[], &pupil, &meta(), 1, 1);
        assert_eq!(record.get("pupilMean"), None);
        assert_eq!(record.get("pupilStd"), None);
        assert_eq!(record.get("pupilChange"), None);
    }

    #[test]
    fn meta_values_pass_through() {
        let record = extract_features(&[], &[], &constant_pupil(100, 3.0), &meta(), 7, 9);
        assert_eq!(record.get("videoLength"), Some(6.0));
        assert_eq!(record.get("danger"), Some(40.0));
        assert_eq!(record.participant_id, 7);
        assert_eq!(record.trial_id, 9);
    }
}
