use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use sagaze_core::synth::{plan_study, SynthParams};

use crate::manifest::{ensure_out_dir, ManifestBuilder};

#[derive(Args)]
pub struct SynthArgs {
    /// Output directory for the study files.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 32)]
    pub participants: usize,
    #[arg(long, default_value_t = 33)]
    pub trials: usize,
    /// SA label noise standard deviation (0 disables noise).
    #[arg(long, default_value_t = 0.03)]
    pub noise: f64,
}

pub fn run(args: SynthArgs) -> anyhow::Result<()> {
    ensure_out_dir(&args.out)?;
    let mut manifest = ManifestBuilder::new("synth");
    manifest.seed(args.seed);

    let params = SynthParams {
        n_participants: args.participants,
        n_trials: args.trials,
        seed: args.seed,
        noise_sd: args.noise,
    };
    let t0 = Instant::now();
    let plan = plan_study(&params)?;
    manifest.timing("plan", t0.elapsed().as_millis());

    let t1 = Instant::now();
    plan.write_study(&args.out)?;
    manifest.timing("write", t1.elapsed().as_millis());

    manifest
        .note("n_gaze_files", serde_json::json!(plan.trials.len()))
        .output(args.out.join("gaze"))
        .output(args.out.join("meta.csv"))
        .output(args.out.join("labels.csv"))
        .output(args.out.join("ledger.csv"))
        .output(args.out.join("manifest.json"));
    manifest.write(&args.out)?;
    println!("wrote {} trials to {}", plan.trials.len(), args.out.display());
    Ok(())
}
