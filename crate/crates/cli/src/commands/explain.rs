use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use sagaze_core::gbdt::load_model;
use sagaze_core::shap::{
    explain_instance, global_importance, main_effects, report, DEFAULT_MAIN_EFFECT_BINS,
};

use crate::commands::load_dataset;
use crate::manifest::{ensure_out_dir, ManifestBuilder};

#[derive(Args)]
pub struct ExplainArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    /// Print the ordered contribution report for this row index.
    #[arg(long)]
    pub instance: Option<usize>,
    /// Bin count for continuous main-effect summaries.
    #[arg(long, default_value_t = DEFAULT_MAIN_EFFECT_BINS)]
    pub bins: usize,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: ExplainArgs) -> anyhow::Result<()> {
    ensure_out_dir(&args.out)?;
    let mut manifest = ManifestBuilder::new("explain");
    manifest.input("data", &args.data).input("model", &args.model);

    let (ensemble, _config) = load_model(&args.model)?;
    // match the dataset view to the model registry
    let eye_only = ensemble.feature_names.len() == 16 && ensemble.feature_names[0] == "numS";
    let ds = load_dataset(&args.data, eye_only)?;

    let t0 = Instant::now();
    let (importance, explanations) = global_importance(&ensemble, &ds)?;
    manifest.timing("shap", t0.elapsed().as_millis());
    let effects = main_effects(&ds, &explanations, args.bins)?;

    let shap_path = args.out.join("shap.csv");
    report::write_shap_csv(&shap_path, &ds, &explanations)?;
    let importance_path = args.out.join("importance.csv");
    report::write_importance_csv(&importance_path, &importance)?;
    let effects_path = args.out.join("main_effects.csv");
    report::write_main_effects_csv(&effects_path, &effects)?;
    let svg_path = args.out.join("importance.svg");
    report::write_importance_svg(&svg_path, &importance)?;

    if let Some(row) = args.instance {
        if row >= ds.n_rows() {
            anyhow::bail!("--instance {row} out of range ({} rows)", ds.n_rows());
        }
        let instance_report = explain_instance(&ensemble, &ds, row)?;
        print!("{}", instance_report.render());
    }

    manifest.output(&shap_path).output(&importance_path).output(&effects_path).output(&svg_path);
    manifest.write(&args.out)?;
    println!("explanations -> {}", args.out.display());
    Ok(())
}
