use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::Args;
use sagaze_core::sa_score::{score_sa, SceneRecreation, SceneTruth};

use crate::manifest::{ensure_out_dir, ManifestBuilder};

#[derive(Args)]
pub struct ScoreArgs {
    /// Pair listing CSV: `participant_id,trial_id,truth,recreation`
    /// with scene JSON paths (relative paths resolve against the CSV).
    #[arg(long)]
    pub pairs: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: ScoreArgs) -> anyhow::Result<()> {
    ensure_out_dir(&args.out)?;
    let mut manifest = ManifestBuilder::new("score");
    manifest.input("pairs", &args.pairs);

    let base = args.pairs.parent().map(|p| p.to_path_buf()).unwrap_or_default();
    let resolve = |raw: &str| {
        let path = PathBuf::from(raw);
        if path.is_absolute() {
            path
        } else {
            base.join(path)
        }
    };

    let mut reader = csv::Reader::from_path(&args.pairs).with_context(|| format!("open {}", args.pairs.display()))?;
    let headers: Vec<String> = reader.headers()?.iter().map(|s| s.to_string()).collect();
    if headers != ["participant_id", "trial_id", "truth", "recreation"] {
        bail!("{}: expected header `participant_id,trial_id,truth,recreation`", args.pairs.display());
    }

    let out_csv = args.out.join("scores.csv");
    let mut w = csv::Writer::from_path(&out_csv)?;
    w.write_record(["participant_id", "trial_id", "s1", "s2", "s3", "sa"])?;
    let mut n = 0usize;
    for record in reader.records() {
        let record = record?;
        let truth = SceneTruth::from_json_file(&resolve(&record[2]))?;
        truth.validate()?;
        let rec = SceneRecreation::from_json_file(&resolve(&record[3]))?;
        let score = score_sa(&truth, &rec);
        w.write_record(&[
            record[0].to_string(),
            record[1].to_string(),
            score.s1.to_string(),
            score.s2.to_string(),
            score.s3.to_string(),
            score.sa.to_string(),
        ])?;
        n += 1;
    }
    w.flush()?;

    manifest.note("n_pairs", serde_json::json!(n)).output(&out_csv);
    manifest.write(&args.out)?;
    println!("scored {n} recreations into {}", out_csv.display());
    Ok(())
}
