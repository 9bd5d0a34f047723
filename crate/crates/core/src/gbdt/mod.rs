//! Additive regression-tree model: leaf-wise histogram trees with GOSS
//! sampling, shrinkage, L2-regularized leaf values, and early stopping
//! on a held-out validation split.
//!
//! The model is `prediction(x) = base_score + eta * sum_j leaf_j(x)`,
//! with `base_score` the mean training label. Each boosting round fits
//! one tree to the L2-loss gradients `g_i = yhat_i - y_i` (unit
//! hessians), sampled by GOSS and grown best-first.

pub mod binning;
pub mod goss;
pub mod tree;

pub use binning::{BinnedDataset, FeatureBins, MISSING_BIN};
pub use goss::goss_sample;
pub use tree::{grow_tree, Tree, TreeNode};

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::features::Dataset;
use crate::{Error, Result};

/// Training hyperparameters. Defaults follow the fixed configuration the
/// model is specified with; the regularization and sampling constants are
/// exposed so sensitivity can be explored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub num_leaves: usize,
    pub learning_rate: f64,
    pub num_boost_round: usize,
    pub early_stopping_rounds: usize,
    /// GOSS large-gradient fraction kept at weight 1.
    pub goss_a: f64,
    /// GOSS small-gradient fraction kept at weight (1 - a) / b.
    pub goss_b: f64,
    pub max_bins: usize,
    pub lambda_l2: f64,
    pub min_data_in_leaf: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            num_leaves: 100,
            learning_rate: 0.05,
            num_boost_round: 5000,
            early_stopping_rounds: 100,
            goss_a: 0.2,
            goss_b: 0.1,
            max_bins: 255,
            lambda_l2: 1.0,
            min_data_in_leaf: 20,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.goss_a > 0.0 && self.goss_b > 0.0 && self.goss_a + self.goss_b <= 1.0) {
            return Err(Error::Config(format!(
                "GOSS fractions need 0 < a, 0 < b, a + b <= 1; got a={}, b={}",
                self.goss_a, self.goss_b
            )));
        }
        if self.max_bins < 2 {
            return Err(Error::Config(format!("max_bins must be >= 2, got {}", self.max_bins)));
        }
        if self.num_leaves < 2 {
            return Err(Error::Config(format!("num_leaves must be >= 2, got {}", self.num_leaves)));
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(Error::Config(format!("learning_rate must be > 0, got {}", self.learning_rate)));
        }
        if self.num_boost_round == 0 {
            return Err(Error::Config("num_boost_round must be >= 1".into()));
        }
        if self.lambda_l2 < 0.0 {
            return Err(Error::Config(format!("lambda_l2 must be >= 0, got {}", self.lambda_l2)));
        }
        Ok(())
    }

    pub fn from_json_file(path: &Path) -> Result<TrainConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let config: TrainConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Json { file: path.display().to_string(), msg: e.to_string() })?;
        config.validate()?;
        Ok(config)
    }
}

/// Read access to one instance's feature values by registry index.
pub trait FeatureRow {
    /// `None` = masked.
    fn feature(&self, index: usize) -> Option<f64>;
}

impl FeatureRow for &[Option<f64>] {
    fn feature(&self, index: usize) -> Option<f64> {
        self[index]
    }
}

impl FeatureRow for Vec<Option<f64>> {
    fn feature(&self, index: usize) -> Option<f64> {
        self[index]
    }
}

/// The trained additive model.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeEnsemble {
    /// Mean of the training labels; the round-zero prediction.
    pub base_score: f64,
    pub learning_rate: f64,
    pub feature_names: Vec<String>,
    pub trees: Vec<Tree>,
}

impl TreeEnsemble {
    /// Pure prediction: base score plus shrunk leaf values.
    pub fn predict_row(&self, row: &dyn FeatureRow) -> f64 {
        let leaf_sum: f64 = self.trees.iter().map(|t| t.predict_row(row)).sum();
        self.base_score + self.learning_rate * leaf_sum
    }

    /// Registry check: the dataset must expose exactly the ensemble's
    /// features, in order, before any tree walk.
    pub fn check_registry(&self, names: &[String]) -> Result<()> {
        if names != self.feature_names.as_slice() {
            let unknown = names.iter().find(|n| !self.feature_names.contains(n));
            return Err(Error::Registry(match unknown {
                Some(n) => format!("unknown feature name `{n}`"),
                None => format!("feature columns must match the model registry {:?}", self.feature_names),
            }));
        }
        Ok(())
    }

    pub fn predict_dataset(&self, ds: &Dataset) -> Result<Vec<f64>> {
        self.check_registry(ds.feature_names())?;
        Ok((0..ds.n_rows()).map(|r| self.predict_row(&ds.row(r))).collect())
    }

    /// Expected model output under the cover-weighted leaf walk; the SHAP
    /// base value.
    pub fn expected_value(&self) -> f64 {
        self.base_score + self.learning_rate * self.trees.iter().map(|t| t.expected_value()).sum::<f64>()
    }

    pub fn validate(&self) -> Result<()> {
        for tree in &self.trees {
            tree.validate()?;
        }
        Ok(())
    }
}

/// Per-round training diagnostics and the boosting replay state.
#[derive(Debug, Clone)]
pub struct TrainState {
    pub rounds_run: usize,
    /// Number of trees kept after truncation to the best validation l2.
    pub best_round: usize,
    /// Validation mean absolute error per round.
    pub val_l1: Vec<f64>,
    /// Validation mean squared error per round.
    pub val_l2: Vec<f64>,
    pub early_stopping_used: bool,
    pub base_score: f64,
    /// Training mean squared error per round.
    pub train_l2: Vec<f64>,
    /// Training-row predictions at the best round, aligned with the
    /// `train_rows` passed to `fit`; the replay oracle for `predict`.
    pub train_predictions: Vec<f64>,
}

/// Boosted training with early stopping.
///
/// `val_rows` must be disjoint from `train_rows`; when empty, early
/// stopping is disabled and the fit runs to the round cap (flagged in
/// the returned state).
pub fn fit(ds: &Dataset, train_rows: &[usize], val_rows: &[usize], config: &TrainConfig) -> Result<(TreeEnsemble, TrainState)> {
    config.validate()?;
    if train_rows.is_empty() {
        return Err(Error::Invalid("fit needs at least one training row".into()));
    }
    if val_rows.iter().any(|r| train_rows.contains(r)) {
        return Err(Error::Invalid("validation split overlaps the training rows".into()));
    }
    let y: Vec<f64> = train_rows
        .iter()
        .map(|&r| ds.sa(r).ok_or_else(|| Error::Invalid(format!("training row {r} has no sa label"))))
        .collect::<Result<_>>()?;
    let y_val: Vec<f64> = val_rows
        .iter()
        .map(|&r| ds.sa(r).ok_or_else(|| Error::Invalid(format!("validation row {r} has no sa label"))))
        .collect::<Result<_>>()?;

    let n = train_rows.len();
    let base_score = y.iter().sum::<f64>() / n as f64;
    let binned = BinnedDataset::build(ds, train_rows, config.max_bins);

    let mut yhat: Vec<f64> = vec![base_score; n];
    let mut yhat_val: Vec<f64> = vec![base_score; val_rows.len()];
    let mut trees: Vec<Tree> = Vec::new();
    let mut grads = vec![0.0f64; n];

    let use_early_stop = !val_rows.is_empty() && config.early_stopping_rounds > 0;
    let mut train_l2: Vec<f64> = Vec::new();
    let mut val_l1: Vec<f64> = Vec::new();
    let mut val_l2: Vec<f64> = Vec::new();
    let mut best_l2 = f64::INFINITY;
    let mut best_l1 = f64::INFINITY;
    let mut since_l2 = 0usize;
    let mut since_l1 = 0usize;
    let mut best_round = 0usize;
    let mut best_train_predictions = yhat.clone();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for round in 0..config.num_boost_round {
        for i in 0..n {
            grads[i] = yhat[i] - y[i];
        }
        // independent counter-derived stream per round, rewound to its start
        rng.set_stream(round as u64 + 1);
        rng.set_word_pos(0);
        let (rows, weights) = goss_sample(&grads, config.goss_a, config.goss_b, &mut rng);
        let tree = grow_tree(&binned, &rows, &grads, &weights, config);

        for (i, &r) in train_rows.iter().enumerate() {
            yhat[i] += config.learning_rate * tree.predict_row(&ds.row(r));
        }
        for (j, &r) in val_rows.iter().enumerate() {
            yhat_val[j] += config.learning_rate * tree.predict_row(&ds.row(r));
        }
        trees.push(tree);
        train_l2.push(yhat.iter().zip(y.iter()).map(|(p, t)| (p - t) * (p - t)).sum::<f64>() / n as f64);

        if use_early_stop {
            let m = y_val.len() as f64;
            let l2 = yhat_val.iter().zip(y_val.iter()).map(|(p, t)| (p - t) * (p - t)).sum::<f64>() / m;
            let l1 = yhat_val.iter().zip(y_val.iter()).map(|(p, t)| (p - t).abs()).sum::<f64>() / m;
            val_l2.push(l2);
            val_l1.push(l1);
            if l2 < best_l2 {
                best_l2 = l2;
                since_l2 = 0;
                best_round = round + 1;
                best_train_predictions.copy_from_slice(&yhat);
            } else {
                since_l2 += 1;
            }
            if l1 < best_l1 {
                best_l1 = l1;
                since_l1 = 0;
            } else {
                since_l1 += 1;
            }
            // stop only when neither metric has improved for the patience window
            if since_l2 >= config.early_stopping_rounds && since_l1 >= config.early_stopping_rounds {
                break;
            }
        }
    }

    let rounds_run = trees.len();
    if !use_early_stop {
        best_round = rounds_run;
        best_train_predictions.copy_from_slice(&yhat);
    }
    trees.truncate(best_round);

    let ensemble = TreeEnsemble {
        base_score,
        learning_rate: config.learning_rate,
        feature_names: ds.feature_names().to_vec(),
        trees,
    };
    let state = TrainState {
        rounds_run,
        best_round,
        val_l1,
        val_l2,
        early_stopping_used: use_early_stop,
        base_score,
        train_l2,
        train_predictions: best_train_predictions,
    };
    Ok((ensemble, state))
}

const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    version: u32,
    config: TrainConfig,
    feature_names: Vec<String>,
    base_score: f64,
    learning_rate: f64,
    trees: Vec<Tree>,
}

/// Write the model as versioned JSON with a config echo.
pub fn save_model(ensemble: &TreeEnsemble, config: &TrainConfig, path: &Path) -> Result<()> {
    let file = ModelFile {
        version: MODEL_VERSION,
        config: config.clone(),
        feature_names: ensemble.feature_names.clone(),
        base_score: ensemble.base_score,
        learning_rate: ensemble.learning_rate,
        trees: ensemble.trees.clone(),
    };
    let text = serde_json::to_string(&file).expect("model serializes");
    std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Load a model file, rejecting unknown versions and corrupt trees.
pub fn load_model(path: &Path) -> Result<(TreeEnsemble, TrainConfig)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let file: ModelFile =
        serde_json::from_str(&text).map_err(|e| Error::Json { file: path.display().to_string(), msg: e.to_string() })?;
    if file.version != MODEL_VERSION {
        return Err(Error::Model(format!("unknown model version {}, expected {MODEL_VERSION}", file.version)));
    }
    let ensemble = TreeEnsemble {
        base_score: file.base_score,
        learning_rate: file.learning_rate,
        feature_names: file.feature_names,
        trees: file.trees,
    };
    ensemble.validate()?;
    Ok((ensemble, file.config))
}
