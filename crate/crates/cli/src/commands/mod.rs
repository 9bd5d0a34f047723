pub mod evaluate;
pub mod explain;
pub mod extract;
pub mod predict;
pub mod score;
pub mod select;
pub mod synth;
pub mod train;

use std::path::{Path, PathBuf};

use sagaze_core::features::Dataset;
use sagaze_core::gbdt::TrainConfig;

/// Load the training config: defaults, optional JSON overlay, seed flag
/// wins over the file's seed.
pub fn load_config(config_path: &Option<PathBuf>, seed: Option<u64>) -> anyhow::Result<TrainConfig> {
    let mut config = match config_path {
        Some(path) => TrainConfig::from_json_file(path)?,
        None => TrainConfig::default(),
    };
    if let Some(seed) = seed {
        config.seed = seed;
    }
    Ok(config)
}

/// Load a dataset CSV, optionally restricted to the eye-tracking columns.
pub fn load_dataset(path: &Path, eye_only: bool) -> anyhow::Result<Dataset> {
    let ds = Dataset::load_csv(path)?;
    Ok(if eye_only { ds.eye_only_view()? } else { ds })
}
