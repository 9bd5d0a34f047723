//! K-fold cross-validation and SHAP-ranked sequential feature selection.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::features::Dataset;
use crate::gbdt::{fit, TrainConfig};
use crate::shap::{importance_from_explanations, shap_values, Explanation, ImportanceTable};
use crate::{Error, Result};

use super::{fold_mean_se, metrics, EvalReport, FoldMetrics, FoldPlan};

/// Fraction of each training fold held out for early stopping.
const EARLY_STOP_FRACTION: f64 = 0.1;

/// Split a training fold into (train, early-stop validation): the last
/// 10% of a seeded shuffle.
pub fn early_stop_split(rows: &[usize], seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut shuffled = rows.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    shuffled.shuffle(&mut rng);
    let n_val = ((rows.len() as f64) * EARLY_STOP_FRACTION).floor() as usize;
    let split = rows.len() - n_val;
    let val = shuffled.split_off(split);
    (shuffled, val)
}

/// Generic CV loop: `fit_predict(ds, train_rows, test_rows, fold)` returns
/// held-out predictions plus any flags. Pooled metrics are computed over
/// the concatenated held-out predictions in row order, so every row is
/// predicted exactly once.
pub(crate) fn cross_validate_with<F>(
    ds: &Dataset,
    plan: &FoldPlan,
    model: &str,
    mut fit_predict: F,
) -> Result<EvalReport>
where
    F: FnMut(&Dataset, &[usize], &[usize], usize) -> Result<(Vec<f64>, Vec<String>)>,
{
    plan.validate(ds.n_rows())?;
    let y_all = ds.labels()?;
    let mut pooled_pred = vec![f64::NAN; ds.n_rows()];
    let mut per_fold = Vec::with_capacity(plan.folds.len());
    let mut flags = Vec::new();

    for (fold, test_rows) in plan.folds.iter().enumerate() {
        let train_rows = plan.training_rows(fold);
        let (pred, mut fold_flags) = fit_predict(ds, &train_rows, test_rows, fold)?;
        if pred.len() != test_rows.len() {
            return Err(Error::Invalid("fold prediction length mismatch".into()));
        }
        flags.append(&mut fold_flags);
        let y_fold: Vec<f64> = test_rows.iter().map(|&r| y_all[r]).collect();
        let m = metrics(&y_fold, &pred)?;
        if m.corr_degenerate {
            flags.push(format!("fold {fold}: degenerate correlation"));
        }
        per_fold.push(FoldMetrics { fold, n: test_rows.len(), metrics: m });
        for (&r, &p) in test_rows.iter().zip(pred.iter()) {
            pooled_pred[r] = p;
        }
    }

    let pooled = metrics(&y_all, &pooled_pred)?;
    let (fold_mean, fold_se) = fold_mean_se(&per_fold);
    Ok(EvalReport {
        model: model.to_string(),
        feature_names: ds.feature_names().to_vec(),
        seed: plan.seed,
        per_fold,
        pooled,
        fold_mean,
        fold_se,
        flags,
    })
}

/// 10-fold (or k-fold) evaluation of the boosted-tree model: each fold is
/// predicted by a model fit on the other folds, with an internal
/// early-stopping split inside the training rows.
pub fn cross_validate(ds: &Dataset, config: &TrainConfig, plan: &FoldPlan) -> Result<EvalReport> {
    Ok(cross_validate_with_predictions(ds, config, plan)?.0)
}

/// As [`cross_validate`], additionally returning the held-out prediction
/// for every row (row order), so pooled metrics can be re-derived.
pub fn cross_validate_with_predictions(
    ds: &Dataset,
    config: &TrainConfig,
    plan: &FoldPlan,
) -> Result<(EvalReport, Vec<f64>)> {
    if ds.n_rows() < 20 {
        return Err(Error::Invalid(format!("cross-validation needs at least 20 rows, got {}", ds.n_rows())));
    }
    let mut pooled = vec![f64::NAN; ds.n_rows()];
    let report = cross_validate_with(ds, plan, "gbdt", |ds, train_rows, test_rows, fold| {
        let (fit_rows, val_rows) = early_stop_split(train_rows, config.seed ^ (fold as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let (ensemble, state) = fit(ds, &fit_rows, &val_rows, config)?;
        let mut flags = Vec::new();
        if !state.early_stopping_used {
            flags.push(format!("fold {fold}: early stopping disabled (empty validation split)"));
        }
        let pred: Vec<f64> = test_rows.iter().map(|&r| ensemble.predict_row(&ds.row(r))).collect();
        for (&r, &p) in test_rows.iter().zip(pred.iter()) {
            pooled[r] = p;
        }
        Ok((pred, flags))
    })?;
    Ok((report, pooled))
}

/// Cross-validated SHAP: every row is explained by the fold model that
/// did not train on it, then explanations aggregate into one global
/// importance table. This is the reference ranking for feature selection.
pub fn cv_shap_importance(
    ds: &Dataset,
    config: &TrainConfig,
    plan: &FoldPlan,
) -> Result<(ImportanceTable, Vec<Explanation>)> {
    plan.validate(ds.n_rows())?;
    let mut explanations: Vec<Option<Explanation>> = vec![None; ds.n_rows()];
    for (fold, test_rows) in plan.folds.iter().enumerate() {
        let train_rows = plan.training_rows(fold);
        let (fit_rows, val_rows) = early_stop_split(&train_rows, config.seed ^ (fold as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let (ensemble, _) = fit(ds, &fit_rows, &val_rows, config)?;
        for &r in test_rows {
            explanations[r] = Some(shap_values(&ensemble, &ds.row(r))?);
        }
    }
    let explanations: Vec<Explanation> = explanations.into_iter().map(|e| e.expect("plan covers rows")).collect();
    let table = importance_from_explanations(ds, &explanations)?;
    Ok((table, explanations))
}

/// One evaluated prefix of the importance ranking.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurvePoint {
    pub k: usize,
    pub feature_added: String,
    pub report: EvalReport,
}

/// Sequential feature-selection curve and the one-standard-error choice.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectionCurve {
    /// Feature names in descending global-importance order (frozen from
    /// the reference run before any prefix is evaluated).
    pub ranking: Vec<String>,
    pub points: Vec<CurvePoint>,
    /// Smallest k whose pooled RMSE is within one standard error of the
    /// global minimum.
    pub best_k: usize,
}

/// Evaluate every prefix of the importance ranking with the same fold
/// plan, most important feature first.
pub fn select_features(ds: &Dataset, config: &TrainConfig, plan: &FoldPlan) -> Result<SelectionCurve> {
    let (importance, _) = cv_shap_importance(ds, config, plan)?;
    let order = importance.order();
    let ranking: Vec<String> = order.iter().map(|&f| ds.feature_names()[f].clone()).collect();

    let mut points = Vec::with_capacity(order.len());
    for k in 1..=order.len() {
        let sub = ds.select_columns(&order[..k])?;
        let report = cross_validate(&sub, config, plan)?;
        points.push(CurvePoint { k, feature_added: ranking[k - 1].clone(), report });
    }

    let best_idx = (0..points.len())
        .min_by(|&a, &b| points[a].report.pooled.rmse.total_cmp(&points[b].report.pooled.rmse))
        .expect("at least one point");
    let threshold = points[best_idx].report.pooled.rmse + points[best_idx].report.fold_se.rmse;
    let best_k = points.iter().find(|p| p.report.pooled.rmse <= threshold).map(|p| p.k).expect("threshold covers the minimum");

    Ok(SelectionCurve { ranking, points, best_k })
}

impl SelectionCurve {
    /// `curve.csv`: k, feature added, pooled metrics, fold standard errors.
    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        let file = path.display().to_string();
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(&file, None, None, e.to_string()))?;
        w.write_record(["k", "feature_added", "rmse", "mae", "corr", "rmse_se", "mae_se", "corr_se", "best"])
            .map_err(|e| Error::csv(&file, None, None, e.to_string()))?;
        for p in &self.points {
            w.write_record(&[
                p.k.to_string(),
                p.feature_added.clone(),
                p.report.pooled.rmse.to_string(),
                p.report.pooled.mae.to_string(),
                p.report.pooled.corr.to_string(),
                p.report.fold_se.rmse.to_string(),
                p.report.fold_se.mae.to_string(),
                p.report.fold_se.corr.to_string(),
                (p.k == self.best_k).to_string(),
            ])
            .map_err(|e| Error::csv(&file, None, None, e.to_string()))?;
        }
        w.flush().map_err(|e| Error::io(&file, e))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hash01(i: usize, salt: u64) -> f64 {
        let h = (i as u64).wrapping_mul(6364136223846793005).wrapping_add(salt);
        ((h >> 33) % 100_000) as f64 / 100_000.0
    }

    fn quick_config() -> TrainConfig {
        TrainConfig { seed: 5, num_boost_round: 250, early_stopping_rounds: 30, ..TrainConfig::default() }
    }

    /// Label equals one feature exactly: the tree model must track it.
    #[test]
    fn identity_task_pooled_rmse_is_small() {
        let mut ds = Dataset::new(vec!["x".into(), "noise".into()]).unwrap();
        for r in 0..400usize {
            let x = hash01(r, 1);
            ds.push_row(1, r as u32, &[Some(x), Some(hash01(r, 2))], Some(x)).unwrap();
        }
        let plan = FoldPlan::new(400, 10, 5).unwrap();
        let report = cross_validate(&ds, &quick_config(), &plan).unwrap();
        assert!(report.pooled.rmse <= 0.02, "pooled rmse {}", report.pooled.rmse);
    }

    /// Pooled metrics recomputed from the concatenated held-out
    /// predictions equal the reported pooled metrics exactly.
    #[test]
    fn pooled_metrics_match_concatenated_predictions() {
        let mut ds = Dataset::new(vec!["a".into(), "b".into()]).unwrap();
        for r in 0..120usize {
            let a = hash01(r, 3);
            let b = hash01(r, 4);
            ds.push_row(1, r as u32, &[Some(a), Some(b)], Some(0.3 * a + 0.4 * b)).unwrap();
        }
        let plan = FoldPlan::new(120, 6, 2).unwrap();
        let (report, predictions) = cross_validate_with_predictions(&ds, &quick_config(), &plan).unwrap();
        assert!(predictions.iter().all(|p| p.is_finite()));
        let recomputed = metrics(&ds.labels().unwrap(), &predictions).unwrap();
        assert_eq!(recomputed.rmse, report.pooled.rmse);
        assert_eq!(recomputed.mae, report.pooled.mae);
        assert_eq!(recomputed.corr, report.pooled.corr);
    }

    #[test]
    fn same_seed_gives_identical_reports() {
        let mut ds = Dataset::new(vec!["a".into()]).unwrap();
        for r in 0..80usize {
            ds.push_row(1, r as u32, &[Some(hash01(r, 9))], Some(hash01(r, 9) * 0.7)).unwrap();
        }
        let plan = FoldPlan::new(80, 4, 11).unwrap();
        let a = cross_validate(&ds, &quick_config(), &plan).unwrap();
        let b = cross_validate(&ds, &quick_config(), &plan).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    /// Re-evaluating the best-k subset reproduces the curve's entry.
    #[test]
    fn best_k_reevaluation_matches_the_curve() {
        let mut ds = Dataset::new(vec!["x0".into(), "x1".into(), "x2".into(), "x3".into()]).unwrap();
        for r in 0..160usize {
            let values: Vec<Option<f64>> = (0..4).map(|f| Some(hash01(r, f as u64 + 40))).collect();
            let y = 0.25 + 0.5 * values[0].unwrap();
            ds.push_row(1, r as u32, &values, Some(y)).unwrap();
        }
        let config = TrainConfig { seed: 13, num_boost_round: 150, early_stopping_rounds: 20, ..TrainConfig::default() };
        let plan = FoldPlan::new(160, 8, 13).unwrap();
        let curve = select_features(&ds, &config, &plan).unwrap();
        let k = curve.best_k;
        let order: Vec<usize> = curve.ranking[..k]
            .iter()
            .map(|name| ds.feature_names().iter().position(|f| f == name).unwrap())
            .collect();
        let sub = ds.select_columns(&order).unwrap();
        let re_run = cross_validate(&sub, &config, &plan).unwrap();
        let entry = &curve.points[k - 1].report;
        assert_eq!(re_run.pooled.rmse, entry.pooled.rmse);
        assert_eq!(re_run.pooled.mae, entry.pooled.mae);
        assert_eq!(re_run.pooled.corr, entry.pooled.corr);
    }

    /// All-noise-but-one selection: flat curve after k = 1.
    #[test]
    fn noise_features_flatten_the_curve() {
        let mut ds = Dataset::new((0..6).map(|i| format!("f{i}")).collect()).unwrap();
        for r in 0..200usize {
            let values: Vec<Option<f64>> = (0..6).map(|f| Some(hash01(r, f as u64 * 77 + 5))).collect();
            let y = 0.1 + 0.7 * values[0].unwrap();
            ds.push_row(1, r as u32, &values, Some(y)).unwrap();
        }
        let config = TrainConfig { seed: 21, num_boost_round: 200, early_stopping_rounds: 25, ..TrainConfig::default() };
        let plan = FoldPlan::new(200, 10, 21).unwrap();
        let curve = select_features(&ds, &config, &plan).unwrap();
        assert_eq!(curve.ranking[0], "f0");
        assert_eq!(curve.best_k, 1);
        let rmse_1 = curve.points[0].report.pooled.rmse;
        let rmse_last = curve.points.last().unwrap().report.pooled.rmse;
        assert!(rmse_last >= rmse_1 - curve.points[0].report.fold_se.rmse);
    }
}
