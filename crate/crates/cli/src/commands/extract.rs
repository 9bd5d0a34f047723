use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context};
use clap::Args;
use sagaze_core::features::{extract_features, Dataset, TrialMeta, TrialRecord};
use sagaze_core::gaze::{pupil_pipeline, read_gaze_csv, write_events_csv, AoiLayout, TrialEvents};

use crate::manifest::{ensure_out_dir, ManifestBuilder};

#[derive(Args)]
pub struct ExtractArgs {
    /// Directory of per-trial gaze CSVs named `p{NN}_t{NN}.csv`.
    #[arg(long)]
    pub gaze_dir: PathBuf,
    /// Contextual metadata CSV (participant_id, trial_id, variables 1-12).
    #[arg(long)]
    pub meta: PathBuf,
    /// SA labels CSV; omit for an unlabelled dataset.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// AOI layout JSON; the built-in driving layout when omitted.
    #[arg(long)]
    pub aoi: Option<PathBuf>,
    /// Pupil area-to-millimetre calibration factor.
    #[arg(long, default_value_t = 1.0)]
    pub pupil_scale: f64,
    /// Also write one detected-event CSV per trial into this directory.
    #[arg(long)]
    pub events_out: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

fn load_meta(path: &Path) -> anyhow::Result<BTreeMap<(u32, u32), TrialMeta>> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("open {}", path.display()))?;
    let expected = [
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
    ];
    let headers: Vec<String> = reader.headers()?.iter().map(|s| s.to_string()).collect();
    if headers != expected {
        bail!("{}: expected header `{}`", path.display(), expected.join(","));
    }
    let mut meta = BTreeMap::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let row = idx + 2;
        let field = |i: usize| -> anyhow::Result<f64> {
            record[i]
                .trim()
                .parse::<f64>()
                .with_context(|| format!("{} row {row}, column `{}`: non-numeric", path.display(), expected[i]))
        };
        let key = (field(0)? as u32, field(1)? as u32);
        let m = TrialMeta {
            age: field(2)?,
            gender: field(3)?,
            year_driving: field(4)?,
            driving_frequency: field(5)?,
            video_length: field(6)?,
            decision_time: field(7)?,
            decision_made: field(8)?,
            correct_decision: field(9)?,
            danger: field(10)?,
            difficulty: field(11)?,
            car_placed_left: field(12)?,
            car_placed_right: field(13)?,
        };
        m.validate()?;
        if meta.insert(key, m).is_some() {
            bail!("{} row {row}: duplicate (participant, trial) key {key:?}", path.display());
        }
    }
    Ok(meta)
}

fn load_labels(path: &Path) -> anyhow::Result<BTreeMap<(u32, u32), f64>> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("open {}", path.display()))?;
    let headers: Vec<String> = reader.headers()?.iter().map(|s| s.to_string()).collect();
    if headers != ["participant_id", "trial_id", "sa"] {
        bail!("{}: expected header `participant_id,trial_id,sa`", path.display());
    }
    let mut labels = BTreeMap::new();
    for record in reader.records() {
        let record = record?;
        let key = (record[0].trim().parse::<u32>()?, record[1].trim().parse::<u32>()?);
        labels.insert(key, record[2].trim().parse::<f64>()?);
    }
    Ok(labels)
}

/// Parse `(participant, trial)` from a `p{NN}_t{NN}.csv` filename.
fn parse_trial_name(name: &str) -> Option<(u32, u32)> {
    let stem = name.strip_suffix(".csv")?;
    let rest = stem.strip_prefix('p')?;
    let (p, t) = rest.split_once("_t")?;
    Some((p.parse().ok()?, t.parse().ok()?))
}

pub fn run(args: ExtractArgs) -> anyhow::Result<()> {
    ensure_out_dir(&args.out)?;
    if let Some(events_dir) = &args.events_out {
        ensure_out_dir(events_dir)?;
    }
    let mut manifest = ManifestBuilder::new("extract");
    manifest.input("gaze_dir", &args.gaze_dir).input("meta", &args.meta);

    let layout = match &args.aoi {
        Some(path) => {
            manifest.input("aoi", path);
            AoiLayout::from_json_file(path)?
        }
        None => AoiLayout::driving_default(),
    };
    let meta = load_meta(&args.meta)?;
    let labels = match &args.labels {
        Some(path) => {
            manifest.input("labels", path);
            load_labels(path)?
        }
        None => BTreeMap::new(),
    };

    let mut names: Vec<(u32, u32, PathBuf)> = Vec::new();
    for entry in std::fs::read_dir(&args.gaze_dir).with_context(|| format!("read {}", args.gaze_dir.display()))? {
        let entry = entry?;
        let file_name = entry.file_name().to_string_lossy().to_string();
        if let Some((p, t)) = parse_trial_name(&file_name) {
            names.push((p, t, entry.path()));
        }
    }
    if names.is_empty() {
        bail!("no gaze files matching `p*_t*.csv` in {}", args.gaze_dir.display());
    }
    names.sort();

    let t0 = Instant::now();
    let mut records: Vec<TrialRecord> = Vec::with_capacity(names.len());
    for (p, t, path) in &names {
        let samples = read_gaze_csv(path)?;
        let events = TrialEvents::detect(&samples, &layout)?;
        let pupil = pupil_pipeline(&samples, &events.blinks, args.pupil_scale)?;
        let trial_meta = meta
            .get(&(*p, *t))
            .with_context(|| format!("{}: no metadata row for participant {p}, trial {t}", args.meta.display()))?;
        let mut record = extract_features(&events.fixations, &events.saccades, &pupil, trial_meta, *p, *t);
        record.sa = labels.get(&(*p, *t)).copied();
        records.push(record);

        if let Some(events_dir) = &args.events_out {
            let out = events_dir.join(format!("p{p:02}_t{t:02}_events.csv"));
            write_events_csv(&out, &events.merged())?;
        }
    }
    manifest.timing("extract", t0.elapsed().as_millis());

    let ds = Dataset::from_records(&records)?;
    let out_csv = args.out.join("dataset.csv");
    ds.write_csv(&out_csv)?;
    manifest.note("n_rows", serde_json::json!(ds.n_rows())).output(&out_csv);
    manifest.write(&args.out)?;
    println!("extracted {} trials into {}", ds.n_rows(), out_csv.display());
    Ok(())
}
