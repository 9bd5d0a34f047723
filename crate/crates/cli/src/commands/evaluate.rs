use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use sagaze_core::eval::{baselines, cross_validate, EvalReport, FoldPlan};
use serde::Serialize;

use crate::commands::{load_config, load_dataset};
use crate::manifest::{ensure_out_dir, ManifestBuilder};

#[derive(Args)]
pub struct EvaluateArgs {
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
    /// Keep each participant's rows in one fold (guards leakage).
    #[arg(long)]
    pub group_by_participant: bool,
    /// Skip the linear-regression and single-tree baselines.
    #[arg(long)]
    pub no_baselines: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct ReportFile {
    seed: u64,
    folds: usize,
    grouped_by_participant: bool,
    config: sagaze_core::gbdt::TrainConfig,
    reports: Vec<EvalReport>,
}

pub fn run(args: EvaluateArgs) -> anyhow::Result<()> {
    ensure_out_dir(&args.out)?;
    let mut manifest = ManifestBuilder::new("evaluate");
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
    let mut reports = vec![cross_validate(&ds, &config, &plan)?];
    manifest.timing("gbdt_cv", t0.elapsed().as_millis());
    if !args.no_baselines {
        let t1 = Instant::now();
        reports.extend(baselines(&ds, &plan)?);
        manifest.timing("baselines", t1.elapsed().as_millis());
    }

    for report in &reports {
        println!(
            "{:<18} pooled rmse {:.4}  mae {:.4}  corr {:.4}{}",
            report.model,
            report.pooled.rmse,
            report.pooled.mae,
            report.pooled.corr,
            if report.pooled.corr_degenerate { " (degenerate)" } else { "" }
        );
    }

    let report_path = args.out.join("report.json");
    let file = ReportFile {
        seed: config.seed,
        folds: args.folds,
        grouped_by_participant: args.group_by_participant,
        config: config.clone(),
        reports,
    };
    std::fs::write(&report_path, serde_json::to_string_pretty(&file)?)?;

    manifest.output(&report_path);
    manifest.write(&args.out)?;
    println!("report -> {}", report_path.display());
    Ok(())
}
