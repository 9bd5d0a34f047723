use std::io::{BufRead, Write};
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::Args;
use sagaze_core::gbdt::load_model;

use crate::manifest::{ensure_out_dir, ManifestBuilder};

#[derive(Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Input CSV stream; `-` for stdin.
    #[arg(long, default_value = "-")]
    pub input: String,
    /// Output stream; `-` for stdout. One `sa_hat,latency_us` line per
    /// row, flushed per row.
    #[arg(long, default_value = "-")]
    pub output: String,
    /// Optional directory for the run manifest.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Column plan for the incoming header: either exactly the model
/// features, or the dataset layout with id columns and a trailing `sa`.
struct ColumnPlan {
    feature_cols: Vec<usize>,
}

fn plan_columns(header: &[String], feature_names: &[String]) -> anyhow::Result<ColumnPlan> {
    if header == feature_names {
        return Ok(ColumnPlan { feature_cols: (0..header.len()).collect() });
    }
    let body: &[String] = if header.len() >= 2 && header[0] == "participant_id" && header[1] == "trial_id" {
        let rest = &header[2..];
        if rest.last().map(|s| s.as_str()) == Some("sa") {
            &rest[..rest.len() - 1]
        } else {
            rest
        }
    } else {
        header
    };
    if body != feature_names {
        match body.iter().find(|n| !feature_names.contains(n)) {
            Some(unknown) => bail!("unknown feature name `{unknown}` in the input header"),
            None => bail!("input header does not match the model registry {feature_names:?}"),
        }
    }
    let start = if header.first().map(|s| s.as_str()) == Some("participant_id") { 2 } else { 0 };
    Ok(ColumnPlan { feature_cols: (start..start + feature_names.len()).collect() })
}

pub fn run(args: PredictArgs) -> anyhow::Result<()> {
    let (ensemble, _config) = load_model(&args.model)?;

    let reader: Box<dyn BufRead> = if args.input == "-" {
        Box::new(std::io::BufReader::new(std::io::stdin()))
    } else {
        let file = std::fs::File::open(&args.input).with_context(|| format!("open {}", args.input))?;
        Box::new(std::io::BufReader::new(file))
    };
    let mut writer: Box<dyn Write> = if args.output == "-" {
        Box::new(std::io::stdout())
    } else {
        Box::new(std::fs::File::create(&args.output).with_context(|| format!("create {}", args.output))?)
    };

    let mut lines = reader.lines();
    let header_line = match lines.next() {
        Some(line) => line?,
        None => {
            // empty stream: clean exit, zero rows
            writeln!(writer, "sa_hat,latency_us")?;
            writer.flush()?;
            return Ok(());
        }
    };
    let header: Vec<String> = header_line.split(',').map(|s| s.trim().to_string()).collect();
    let plan = plan_columns(&header, &ensemble.feature_names)?;

    writeln!(writer, "sa_hat,latency_us")?;
    writer.flush()?;

    let mut latencies_us: Vec<f64> = Vec::new();
    let mut row_values: Vec<Option<f64>> = vec![None; ensemble.feature_names.len()];
    let mut n_rows = 0usize;
    let mut n_bad = 0usize;

    for (idx, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let mut parse_row = || -> anyhow::Result<()> {
            if fields.len() != header.len() {
                bail!("expected {} fields, got {}", header.len(), fields.len());
            }
            for (f, &col) in plan.feature_cols.iter().enumerate() {
                let raw = fields[col].trim();
                row_values[f] = if raw.is_empty() {
                    None
                } else {
                    Some(raw.parse::<f64>().with_context(|| format!("column `{}`", header[col]))?)
                };
            }
            Ok(())
        };
        if let Err(err) = parse_row() {
            n_bad += 1;
            eprintln!("{}", serde_json::json!({ "error": { "row": idx + 2, "message": format!("{err:#}") } }));
            continue;
        }

        // latency measured around the pure inference call only
        let t0 = Instant::now();
        let sa_hat = ensemble.predict_row(&row_values);
        let latency_us = t0.elapsed().as_nanos() as f64 / 1000.0;

        latencies_us.push(latency_us);
        n_rows += 1;
        writeln!(writer, "{sa_hat},{latency_us}")?;
        writer.flush()?;
    }

    if let Some(out) = &args.out {
        ensure_out_dir(out)?;
        let mut manifest = ManifestBuilder::new("predict");
        manifest.input("model", &args.model).input("input", &args.input);
        let mut sorted = latencies_us.clone();
        sorted.sort_by(|a, b| a.total_cmp(b));
        let pick = |q: f64| -> f64 {
            if sorted.is_empty() {
                0.0
            } else {
                sorted[((sorted.len() - 1) as f64 * q).round() as usize]
            }
        };
        manifest
            .note("rows", serde_json::json!(n_rows))
            .note("malformed_rows", serde_json::json!(n_bad))
            .note("latency_us_p50", serde_json::json!(pick(0.5)))
            .note("latency_us_p99", serde_json::json!(pick(0.99)))
            .note("latency_us_max", serde_json::json!(sorted.last().copied().unwrap_or(0.0)));
        manifest.write(out)?;
    }
    Ok(())
}
