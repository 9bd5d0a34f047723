use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use sagaze_core::eval::{select_features, FoldPlan};

use crate::commands::{load_config, load_dataset};
use crate::manifest::{ensure_out_dir, ManifestBuilder};

#[derive(Args)]
pub struct SelectArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    #[arg(long)]
    pub eye_only: bool,
    #[arg(long)]
    pub group_by_participant: bool,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: SelectArgs) -> anyhow::Result<()> {
    ensure_out_dir(&args.out)?;
    let mut manifest = ManifestBuilder::new("select-features");
    manifest.input("data", &args.data);

    let config = load_config(&args.config, args.seed)?;
    manifest.seed(config.seed).config(&config);

    let ds = load_dataset(&args.data, args.eye_only)?;
    let plan = if args.group_by_participant {
        FoldPlan::grouped_by_participant(&ds, args.folds, config.seed)?
    } else {
        FoldPlan::new(ds.n_rows(), args.folds, config.seed)?
    };

    let t0 = Instant::now();
    let curve = select_features(&ds, &config, &plan)?;
    manifest.timing("selection", t0.elapsed().as_millis());

    let curve_path = args.out.join("curve.csv");
    curve.write_csv(&curve_path)?;
    let best_path = args.out.join("best_subset.json");
    let best = serde_json::json!({
        "best_k": curve.best_k,
        "features": &curve.ranking[..curve.best_k],
        "ranking": curve.ranking,
    });
    std::fs::write(&best_path, serde_json::to_string_pretty(&best)?)?;

    println!("best k = {} of {}", curve.best_k, curve.ranking.len());
    for p in &curve.points {
        println!(
            "  k={:<3} +{:<18} rmse {:.4} (se {:.4})",
            p.k, p.feature_added, p.report.pooled.rmse, p.report.fold_se.rmse
        );
    }

    manifest.output(&curve_path).output(&best_path);
    manifest.write(&args.out)?;
    Ok(())
}
