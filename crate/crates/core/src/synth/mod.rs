//! Deterministic synthetic study generation.
//!
//! The generator plans gaze scripts whose extracted features drive a
//! published latent SA model, so the full pipeline can run end to end at
//! desk scale with known ground truth. Per-trial randomness comes from
//! counter-derived RNG streams of one master seed, so trials can be
//! generated in any order (or in parallel) with identical output.

mod scenario;
mod script;

pub use scenario::{sample_scenarios, Scenario, HAZARD_LENGTHS_S, N_HAZARD_TRIALS, VIDEO_LENGTHS_S};
pub use script::{ExpectedEvent, ExpectedKind, GazeScript, PupilCurve, Segment};

use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::features::{extract_features, Dataset, TrialMeta, TrialRecord};
use crate::gaze::{pupil_pipeline, write_gaze_csv, AoiLayout, TrialEvents, NOMINAL_DT};
use crate::{Error, Result};

use script::ScriptBuilder;

pub const GENERATOR_VERSION: u32 = 1;
pub const SAMPLE_RATE_HZ: f64 = 2000.0;

/// Latent SA model:
/// `SA = clamp01(intercept + len*lenScale + back*dBack + fix*dFix + road*dRoad + skill*dSkill + noise)`.
///
/// The weights are published constants, versioned with the output
/// format; acceptance checks reference them through the ledger.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorWeights {
    pub intercept: f64,
    pub len: f64,
    pub back: f64,
    pub fix: f64,
    pub road: f64,
    pub skill: f64,
}

impl Default for GeneratorWeights {
    fn default() -> Self {
        GeneratorWeights { intercept: 0.15, len: 0.18, back: 0.22, fix: 0.15, road: -0.22, skill: 0.12 }
    }
}

/// Scaled video-length driver: short videos hurt SA most; little
/// difference beyond a few seconds.
pub fn len_scale(video_length_s: f64) -> f64 {
    match video_length_s as u32 {
        1 => 0.0,
        3 => 0.55,
        6 => 0.75,
        9 => 0.85,
        12 => 0.92,
        _ => 1.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub n_participants: usize,
    pub n_trials: usize,
    pub seed: u64,
    /// Label noise standard deviation (0 for the noiseless variant).
    pub noise_sd: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams { n_participants: 32, n_trials: 33, seed: 0, noise_sd: 0.03 }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_participants == 0 || self.n_trials == 0 {
            return Err(Error::Config("study needs at least one participant and one trial".into()));
        }
        if !(0.0..=0.05).contains(&self.noise_sd) {
            return Err(Error::Config(format!("noise_sd must lie in [0, 0.05], got {}", self.noise_sd)));
        }
        Ok(())
    }
}

/// Simulated participant: demographics plus latent gaze behaviour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimParticipant {
    pub id: u32,
    pub age: f64,
    pub gender: f64,
    pub year_driving: f64,
    pub driving_frequency: f64,
    /// Latent skill in [0, 1]; surfaces through pupil baseline and the
    /// decision context.
    pub skill: f64,
    /// Scales fixation durations (and thus the scan rate).
    pub fix_scale: f64,
    pub pupil_base_mm: f64,
    pub saccade_speed_px_s: f64,
    pub blink_prob: f64,
}

/// Per-trial latent drivers, exported as the generative-effect ledger.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Drivers {
    pub len_scale: f64,
    pub back_count: f64,
    pub d_back: f64,
    pub fix_mean_ms: f64,
    pub d_fix: f64,
    pub road_count: f64,
    pub d_road: f64,
    pub skill: f64,
    pub noise: f64,
    pub sa_raw: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialPlan {
    pub participant_id: u32,
    pub trial_id: u32,
    pub script: GazeScript,
    pub meta: TrialMeta,
    pub drivers: Drivers,
    pub sa: f64,
}

/// The full planned study; gaze samples are rendered on demand.
#[derive(Debug, Clone)]
pub struct StudyPlan {
    pub params: SynthParams,
    pub weights: GeneratorWeights,
    pub scenarios: Vec<Scenario>,
    pub participants: Vec<SimParticipant>,
    pub trials: Vec<TrialPlan>,
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(0);
    rng
}

const STREAM_SCENARIO: u64 = 1 << 32;
const STREAM_PARTICIPANT: u64 = 2 << 32;
const STREAM_TRIAL: u64 = 3 << 32;
const STREAM_RENDER: u64 = 4 << 32;

fn trial_stream(base: u64, participant: u32, trial: u32) -> u64 {
    base | ((participant as u64) << 16) | trial as u64
}

fn sample_participant(id: u32, seed: u64) -> SimParticipant {
    let mut rng = stream_rng(seed, STREAM_PARTICIPANT + id as u64);
    let skill: f64 = rng.gen_range(0.0..1.0);
    let age = 22.0 + rng.gen_range(0.0f64..8.0).round();
    SimParticipant {
        id,
        age,
        gender: f64::from(rng.gen_bool(29.0 / 32.0)),
        year_driving: ((age - 18.0) - rng.gen_range(0.0..4.0)).max(1.0).round(),
        driving_frequency: *[1.0, 1.0, 2.0, 2.0, 3.0, 4.0, 5.0, 6.0].get(rng.gen_range(0..8)).unwrap(),
        skill,
        // mild spread keeps the scan rate (and thus numF) a crisp
        // length signal while fMean still varies by participant
        fix_scale: 0.88 + 0.24 * rng.gen_range(0.0..1.0),
        pupil_base_mm: 2.5 + 1.5 * skill,
        saccade_speed_px_s: rng.gen_range(8000.0..14000.0),
        blink_prob: rng.gen_range(0.06..0.16),
    }
}

/// AOI attention mix for one trial.
struct Shares {
    road: f64,
    back: f64,
    left: f64,
    right: f64,
}

fn sample_shares(rng: &mut ChaCha8Rng) -> Shares {
    let road = rng.gen_range(0.25..0.70);
    let back = rng.gen_range(0.02..(0.40f64).min(0.92 - road));
    let rest = 1.0 - road - back;
    let u: f64 = rng.gen_range(0.1..1.0);
    let v: f64 = rng.gen_range(0.1..1.0);
    let w: f64 = rng.gen_range(0.1..1.0);
    let s = u + v + w;
    Shares { road, back, left: rest * u / s, right: rest * v / s }
}

fn pick_region(shares: &Shares, rng: &mut ChaCha8Rng) -> &'static str {
    let x: f64 = rng.gen_range(0.0..1.0);
    if x < shares.road {
        "road"
    } else if x < shares.road + shares.back {
        "backMirror"
    } else if x < shares.road + shares.back + shares.left {
        "leftMirror"
    } else if x < shares.road + shares.back + shares.left + shares.right {
        "rightMirror"
    } else {
        "sky"
    }
}

fn point_in_region(layout: &AoiLayout, region: &str, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let r = layout.regions[region];
    const MARGIN: f64 = 12.0;
    (rng.gen_range(r.x0 + MARGIN..r.x1 - MARGIN), rng.gen_range(r.y0 + MARGIN..r.y1 - MARGIN))
}

/// Next fixation target at least 60 px from the current point, so the
/// connecting saccade always clears the speed threshold.
fn next_target(layout: &AoiLayout, shares: &Shares, from: (f64, f64), rng: &mut ChaCha8Rng) -> (f64, f64) {
    const MIN_AMPLITUDE: f64 = 60.0;
    for _ in 0..16 {
        let region = pick_region(shares, rng);
        let p = point_in_region(layout, region, rng);
        if ((p.0 - from.0).powi(2) + (p.1 - from.1).powi(2)).sqrt() >= MIN_AMPLITUDE {
            return p;
        }
    }
    // fall back to the mirror across the frame centre, clamped into road
    let r = layout.regions["road"];
    ((r.x0 + r.x1) - from.0.clamp(r.x0 + 20.0, r.x1 - 20.0), (700.0f64).clamp(r.y0 + 20.0, r.y1 - 20.0))
}

/// Fixation hold length in samples: participant-scaled lognormal around
/// 300 ms, clamped to [120, 700] ms.
fn fix_hold_samples(p: &SimParticipant, rng: &mut ChaCha8Rng) -> usize {
    let z: f64 = rng.gen_range(-1.0..1.0) + rng.gen_range(-1.0..1.0);
    let dur_ms = (300.0 * (0.25 * z).exp() * p.fix_scale).clamp(120.0, 700.0);
    (dur_ms / 1000.0 * SAMPLE_RATE_HZ).round() as usize
}

fn saccade_pairs(amplitude: f64, p: &SimParticipant) -> usize {
    // every pair must stay fast even with endpoint jitter: step >= 1.3 px
    let max_pairs = ((amplitude / 1.3).floor() as usize).min(280);
    let ideal = (amplitude / (p.saccade_speed_px_s * NOMINAL_DT)).round() as usize;
    ideal.clamp(32, max_pairs.max(32))
}

/// Plan one trial's gaze script and bookkeeping.
fn plan_trial(
    participant: &SimParticipant,
    scenario: &Scenario,
    trial_id: u32,
    params: &SynthParams,
    weights: &GeneratorWeights,
    layout: &AoiLayout,
) -> TrialPlan {
    let mut rng = stream_rng(params.seed, trial_stream(STREAM_TRIAL, participant.id, trial_id));
    let n_samples = (scenario.video_length_s * SAMPLE_RATE_HZ) as usize + 1;
    let shares = sample_shares(&mut rng);

    let start_point = point_in_region(layout, "road", &mut rng);
    let mut sb = ScriptBuilder::new(n_samples, start_point, layout);
    let mut point = start_point;

    const MIN_HOLD: usize = 180; // 90 ms
    // reserve: the widest saccade (280 pairs) plus a landing fixation
    const RESERVE: usize = 281 + MIN_HOLD;
    if n_samples < 2 * MIN_HOLD {
        let rest = sb.remaining();
        sb.hold(rest);
    } else {
        loop {
            let hold = fix_hold_samples(participant, &mut rng);
            if sb.remaining() < hold + RESERVE {
                let rest = sb.remaining();
                sb.hold(rest);
                break;
            }
            sb.hold(hold);

            // occasionally close the eyes mid-fixation
            if rng.gen_bool(participant.blink_prob) {
                let blink = rng.gen_range(120..=360usize); // 60-180 ms
                let resume = MIN_HOLD + rng.gen_range(0..120usize);
                if sb.remaining() >= blink + resume + RESERVE {
                    sb.blink(blink);
                    sb.hold(resume);
                }
            }

            let target = next_target(layout, &shares, point, &mut rng);
            let amplitude = ((target.0 - point.0).powi(2) + (target.1 - point.1).powi(2)).sqrt();
            sb.saccade_to(target, saccade_pairs(amplitude, participant));
            point = target;
        }
    }

    let drift = rng.gen_range(-0.12..0.12);
    let pupil = PupilCurve { base_mm: participant.pupil_base_mm, drift_mm: drift, ripple_mm: 0.02 };
    let script = sb.finish(pupil, trial_stream(STREAM_RENDER, participant.id, trial_id));

    // drivers from the realized script
    let fix_events: Vec<&ExpectedEvent> = script.expected_fixations().collect();
    let back_count = fix_events.iter().filter(|e| e.aoi.as_deref() == Some("backMirror")).count() as f64;
    let road_count = fix_events.iter().filter(|e| e.aoi.as_deref() == Some("road")).count() as f64;
    let fix_mean_ms = fix_events.iter().map(|e| e.duration * 1000.0).sum::<f64>() / fix_events.len().max(1) as f64;

    let d_len = len_scale(scenario.video_length_s);
    let d_back = (back_count / 12.0).min(1.0);
    let d_fix = ((fix_mean_ms - 220.0) / 180.0).clamp(0.0, 1.0);
    let d_road = ((road_count - 4.0) / 36.0).clamp(0.0, 1.0);

    let noise = if params.noise_sd > 0.0 {
        // sum of three uniforms approximates a normal well enough here
        let z: f64 =
            rng.gen_range(-1.0..1.0) + rng.gen_range(-1.0..1.0) + rng.gen_range(-1.0..1.0);
        z * params.noise_sd
    } else {
        0.0
    };
    let sa_raw = weights.intercept
        + weights.len * d_len
        + weights.back * d_back
        + weights.fix * d_fix
        + weights.road * d_road
        + weights.skill * participant.skill
        + noise;
    let sa = sa_raw.clamp(0.0, 1.0);

    let drivers = Drivers {
        len_scale: d_len,
        back_count,
        d_back,
        fix_mean_ms,
        d_fix,
        road_count,
        d_road,
        skill: participant.skill,
        noise,
        sa_raw,
    };

    // decision context: skill speeds decisions up and improves accuracy
    let decision_time =
        (0.5 + 2.5 * (1.0 - participant.skill) + rng.gen_range(-0.4..0.4)).clamp(0.3, 6.0);
    let correct = rng.gen_bool((0.5 + 0.4 * participant.skill).min(0.95));
    let decision_made = if scenario.hazard {
        if correct {
            match scenario.correct_decision as u32 {
                2 => 2.0,
                3 => 3.0,
                4 => [2.0, 3.0][rng.gen_range(0..2)],
                _ => 4.0, // brake
            }
        } else {
            [1.0, 2.0, 3.0, 4.0][rng.gen_range(0..4)]
        }
    } else if correct {
        1.0
    } else {
        [2.0, 3.0, 4.0][rng.gen_range(0..3)]
    };
    let left_truth = scenario.truth.vehicles.iter().filter(|v| v.lane == crate::sa_score::Lane::Left).count() as f64;
    let right_truth = scenario.truth.vehicles.iter().filter(|v| v.lane == crate::sa_score::Lane::Right).count() as f64;
    let miscount = |truth: f64, rng: &mut ChaCha8Rng| (truth + f64::from(rng.gen_bool(0.2)) - f64::from(rng.gen_bool(0.2))).max(0.0);
    let meta = TrialMeta {
        age: participant.age,
        gender: participant.gender,
        year_driving: participant.year_driving,
        driving_frequency: participant.driving_frequency,
        video_length: scenario.video_length_s,
        decision_time,
        decision_made,
        correct_decision: scenario.correct_decision,
        danger: if scenario.hazard { 55.0 + rng.gen_range(0.0..30.0) } else { 10.0 + rng.gen_range(0.0..30.0) },
        difficulty: (20.0 + 50.0 * (1.0 - participant.skill) + rng.gen_range(0.0..15.0)).min(100.0),
        car_placed_left: miscount(left_truth, &mut rng),
        car_placed_right: miscount(right_truth, &mut rng),
    };

    TrialPlan { participant_id: participant.id, trial_id, script, meta, drivers, sa }
}

/// Plan the whole study deterministically from the seed.
pub fn plan_study(params: &SynthParams) -> Result<StudyPlan> {
    params.validate()?;
    let layout = AoiLayout::driving_default();
    let mut scenario_rng = stream_rng(params.seed, STREAM_SCENARIO);
    let scenarios = sample_scenarios(params.n_trials, &mut scenario_rng);
    let participants: Vec<SimParticipant> =
        (1..=params.n_participants as u32).map(|id| sample_participant(id, params.seed)).collect();

    let weights = GeneratorWeights::default();
    let mut trials = Vec::with_capacity(params.n_participants * params.n_trials);
    for participant in &participants {
        for (idx, scenario) in scenarios.iter().enumerate() {
            let trial_id = idx as u32 + 1;
            trials.push(plan_trial(participant, scenario, trial_id, params, &weights, &layout));
        }
    }
    Ok(StudyPlan { params: *params, weights, scenarios, participants, trials })
}

impl StudyPlan {
    /// Render one trial's gaze stream.
    pub fn render(&self, trial: &TrialPlan) -> Vec<crate::gaze::GazeSample> {
        trial.script.render(self.params.seed)
    }

    /// Run detection + extraction over every trial and assemble the
    /// labelled dataset. One trial at a time: streams are rendered,
    /// consumed, and dropped.
    pub fn extract_dataset(&self) -> Result<Dataset> {
        let layout = AoiLayout::driving_default();
        let mut records = Vec::with_capacity(self.trials.len());
        for trial in &self.trials {
            records.push(self.extract_trial(trial, &layout)?);
        }
        Dataset::from_records(&records)
    }

    pub fn extract_trial(&self, trial: &TrialPlan, layout: &AoiLayout) -> Result<TrialRecord> {
        let samples = self.render(trial);
        let events = TrialEvents::detect(&samples, layout)?;
        let pupil = pupil_pipeline(&samples, &events.blinks, 1.0)?;
        let mut record =
            extract_features(&events.fixations, &events.saccades, &pupil, &trial.meta, trial.participant_id, trial.trial_id);
        record.sa = Some(trial.sa);
        record.validate()?;
        Ok(record)
    }

    /// The generative-effect ledger: one row of latent drivers per trial.
    pub fn truth_table(&self) -> Vec<(u32, u32, Drivers, f64)> {
        self.trials.iter().map(|t| (t.participant_id, t.trial_id, t.drivers, t.sa)).collect()
    }

    /// Write the study directory: per-trial gaze CSVs, `meta.csv`,
    /// `labels.csv`, `ledger.csv`, and `manifest.json`.
    pub fn write_study(&self, dir: &Path) -> Result<()> {
        let gaze_dir = dir.join("gaze");
        std::fs::create_dir_all(&gaze_dir).map_err(|e| Error::io(gaze_dir.display().to_string(), e))?;

        for trial in &self.trials {
            let samples = self.render(trial);
            let name = format!("p{:02}_t{:02}.csv", trial.participant_id, trial.trial_id);
            write_gaze_csv(&gaze_dir.join(name), &samples)?;
        }

        let meta_path = dir.join("meta.csv");
        let mut w = csv::Writer::from_path(&meta_path)
            .map_err(|e| Error::csv(meta_path.display().to_string(), None, None, e.to_string()))?;
        w.write_record([
            "participant_id",
            "trial_id",
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
        ])
        .map_err(|e| Error::csv(meta_path.display().to_string(), None, None, e.to_string()))?;
        for t in &self.trials {
            let m = &t.meta;
            w.write_record(&[
                t.participant_id.to_string(),
                t.trial_id.to_string(),
                m.age.to_string(),
                m.gender.to_string(),
                m.year_driving.to_string(),
                m.driving_frequency.to_string(),
                m.video_length.to_string(),
                m.decision_time.to_string(),
                m.decision_made.to_string(),
                m.correct_decision.to_string(),
                m.danger.to_string(),
                m.difficulty.to_string(),
                m.car_placed_left.to_string(),
                m.car_placed_right.to_string(),
            ])
            .map_err(|e| Error::csv(meta_path.display().to_string(), None, None, e.to_string()))?;
        }
        w.flush().map_err(|e| Error::io(meta_path.display().to_string(), e))?;

        let labels_path = dir.join("labels.csv");
        let mut w = csv::Writer::from_path(&labels_path)
            .map_err(|e| Error::csv(labels_path.display().to_string(), None, None, e.to_string()))?;
        w.write_record(["participant_id", "trial_id", "sa"])
            .map_err(|e| Error::csv(labels_path.display().to_string(), None, None, e.to_string()))?;
        for t in &self.trials {
            w.write_record(&[t.participant_id.to_string(), t.trial_id.to_string(), t.sa.to_string()])
                .map_err(|e| Error::csv(labels_path.display().to_string(), None, None, e.to_string()))?;
        }
        w.flush().map_err(|e| Error::io(labels_path.display().to_string(), e))?;

        let ledger_path = dir.join("ledger.csv");
        let mut w = csv::Writer::from_path(&ledger_path)
            .map_err(|e| Error::csv(ledger_path.display().to_string(), None, None, e.to_string()))?;
        w.write_record([
            "participant_id",
            "trial_id",
            "len_scale",
            "back_count",
            "d_back",
            "fix_mean_ms",
            "d_fix",
            "road_count",
            "d_road",
            "skill",
            "noise",
            "sa_raw",
            "sa",
        ])
        .map_err(|e| Error::csv(ledger_path.display().to_string(), None, None, e.to_string()))?;
        for (pid, tid, d, sa) in self.truth_table() {
            w.write_record(&[
                pid.to_string(),
                tid.to_string(),
                d.len_scale.to_string(),
                d.back_count.to_string(),
                d.d_back.to_string(),
                d.fix_mean_ms.to_string(),
                d.d_fix.to_string(),
                d.road_count.to_string(),
                d.d_road.to_string(),
                d.skill.to_string(),
                d.noise.to_string(),
                d.sa_raw.to_string(),
                sa.to_string(),
            ])
            .map_err(|e| Error::csv(ledger_path.display().to_string(), None, None, e.to_string()))?;
        }
        w.flush().map_err(|e| Error::io(ledger_path.display().to_string(), e))?;

        let manifest = serde_json::json!({
            "generator_version": GENERATOR_VERSION,
            "seed": self.params.seed,
            "n_participants": self.params.n_participants,
            "n_trials": self.params.n_trials,
            "noise_sd": self.params.noise_sd,
            "weights": self.weights,
            "sample_rate_hz": SAMPLE_RATE_HZ,
        });
        let manifest_path = dir.join("manifest.json");
        std::fs::write(&manifest_path, serde_json::to_string_pretty(&manifest).expect("manifest serializes"))
            .map_err(|e| Error::io(manifest_path.display().to_string(), e))?;
        Ok(())
    }
}
