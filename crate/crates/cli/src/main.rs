//! `sagaze` — the situation-awareness pipeline CLI.
//!
//! Subcommands cover the full loop: generate a synthetic study, extract
//! features from gaze streams, score scene recreations, train the
//! boosted-tree model, evaluate it under cross-validation, explain it
//! with Shapley values, run SHAP-ranked feature selection, and stream
//! single-row predictions. Every command writes a `manifest.json` beside
//! its outputs; all data outputs are deterministic given the seed.

mod commands;
mod manifest;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "sagaze", version, about = "Driver situation-awareness estimation from eye-tracking data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic study: gaze CSVs, metadata, labels, ledger.
    Synth(commands::synth::SynthArgs),
    /// Detect events in gaze streams and build the feature dataset.
    Extract(commands::extract::ExtractArgs),
    /// Score scene recreations into SA labels.
    Score(commands::score::ScoreArgs),
    /// Train the boosted-tree model on a dataset.
    Train(commands::train::TrainArgs),
    /// Cross-validate the model (and baselines) on a dataset.
    Evaluate(commands::evaluate::EvaluateArgs),
    /// Shapley explanations: per-instance values, importance, main effects.
    Explain(commands::explain::ExplainArgs),
    /// Sequential feature selection along the SHAP importance ranking.
    SelectFeatures(commands::select::SelectArgs),
    /// Stream rows through a trained model, one prediction per line.
    Predict(commands::predict::PredictArgs),
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(args) => commands::synth::run(args),
        Command::Extract(args) => commands::extract::run(args),
        Command::Score(args) => commands::score::run(args),
        Command::Train(args) => commands::train::run(args),
        Command::Evaluate(args) => commands::evaluate::run(args),
        Command::Explain(args) => commands::explain::run(args),
        Command::SelectFeatures(args) => commands::select::run(args),
        Command::Predict(args) => commands::predict::run(args),
    };
    if let Err(err) = result {
        // single-line machine-parsable error
        let line = serde_json::json!({ "error": { "message": format!("{err:#}") } });
        eprintln!("{line}");
        std::process::exit(1);
    }
}
