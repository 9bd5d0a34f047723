use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use sagaze_core::gbdt::{fit, save_model};

use crate::commands::{load_config, load_dataset};
use crate::manifest::{ensure_out_dir, ManifestBuilder};

#[derive(Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Training config JSON (TrainConfig field names).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Restrict to the 16 eye-tracking features.
    #[arg(long)]
    pub eye_only: bool,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: TrainArgs) -> anyhow::Result<()> {
    ensure_out_dir(&args.out)?;
    let mut manifest = ManifestBuilder::new("train");
    manifest.input("data", &args.data);

    let config = load_config(&args.config, args.seed)?;
    manifest.seed(config.seed).config(&config);

    let ds = load_dataset(&args.data, args.eye_only)?;
    let all_rows: Vec<usize> = (0..ds.n_rows()).collect();
    let (train_rows, val_rows) = sagaze_core::eval::early_stop_split(&all_rows, config.seed);

    let t0 = Instant::now();
    let (ensemble, state) = fit(&ds, &train_rows, &val_rows, &config)?;
    manifest.timing("fit", t0.elapsed().as_millis());

    let model_path = args.out.join("model.json");
    save_model(&ensemble, &config, &model_path)?;

    manifest
        .note("rounds_run", serde_json::json!(state.rounds_run))
        .note("best_round", serde_json::json!(state.best_round))
        .note("early_stopping_used", serde_json::json!(state.early_stopping_used))
        .note(
            "best_val_l2",
            serde_json::json!(state.val_l2.get(state.best_round.saturating_sub(1)).copied()),
        )
        .note("n_features", serde_json::json!(ds.n_features()))
        .output(&model_path);
    manifest.write(&args.out)?;
    println!(
        "trained {} trees (best round {} of {}) -> {}",
        ensemble.trees.len(),
        state.best_round,
        state.rounds_run,
        model_path.display()
    );
    Ok(())
}
