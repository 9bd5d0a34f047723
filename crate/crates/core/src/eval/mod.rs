//! Cross-validation harness: metrics, fold plans, model evaluation,
//! SHAP-ranked sequential feature selection, and two reference baselines.

mod baselines;
mod cv;

pub use baselines::{baselines, linear_regression_cv, single_tree_cv, BaselineKind};
pub use cv::{
    cross_validate, cross_validate_with_predictions, cv_shap_importance, early_stop_split, select_features,
    CurvePoint, SelectionCurve,
};
pub(crate) use cv::cross_validate_with;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::features::Dataset;
use crate::{Error, Result};

/// RMSE, MAE, and the Pearson correlation between predictions and truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub rmse: f64,
    pub mae: f64,
    /// 0 when degenerate (either side constant), flagged below.
    pub corr: f64,
    pub corr_degenerate: bool,
}

/// The three performance measures over aligned prediction/truth vectors.
pub fn metrics(y: &[f64], y_hat: &[f64]) -> Result<Metrics> {
    if y.len() != y_hat.len() {
        return Err(Error::Invalid(format!("metric length mismatch: {} vs {}", y.len(), y_hat.len())));
    }
    if y.is_empty() {
        return Err(Error::Invalid("metrics need at least one pair".into()));
    }
    let n = y.len() as f64;
    let mut se = 0.0;
    let mut ae = 0.0;
    for (t, p) in y.iter().zip(y_hat.iter()) {
        se += (t - p) * (t - p);
        ae += (t - p).abs();
    }
    let rmse = (se / n).sqrt();
    let mae = ae / n;
    let (corr, corr_degenerate) = match crate::shap::stats::pearson(y_hat, y) {
        Some(r) => (r, false),
        None => (0.0, true),
    };
    Ok(Metrics { rmse, mae, corr, corr_degenerate })
}

/// Disjoint row-index folds covering the dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub seed: u64,
    pub folds: Vec<Vec<usize>>,
}

impl FoldPlan {
    /// Row-level folds: a seeded shuffle of `0..n` chopped into `k`
    /// contiguous chunks whose sizes differ by at most one.
    pub fn new(n: usize, k: usize, seed: u64) -> Result<FoldPlan> {
        if k < 2 || n < k {
            return Err(Error::Invalid(format!("cannot split {n} rows into {k} folds")));
        }
        let mut rows: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rows.shuffle(&mut rng);
        let base = n / k;
        let extra = n % k;
        let mut folds = Vec::with_capacity(k);
        let mut start = 0;
        for i in 0..k {
            let size = base + usize::from(i < extra);
            folds.push(rows[start..start + size].to_vec());
            start += size;
        }
        Ok(FoldPlan { seed, folds })
    }

    /// Participant-grouped folds: all rows of one participant land in the
    /// same fold (greedy balance, shuffled group order). Guards against
    /// participant leakage at the cost of slightly uneven folds.
    pub fn grouped_by_participant(ds: &Dataset, k: usize, seed: u64) -> Result<FoldPlan> {
        if k < 2 {
            return Err(Error::Invalid("need at least 2 folds".into()));
        }
        let mut groups: std::collections::BTreeMap<u32, Vec<usize>> = std::collections::BTreeMap::new();
        for r in 0..ds.n_rows() {
            groups.entry(ds.participant_id(r)).or_default().push(r);
        }
        if groups.len() < k {
            return Err(Error::Invalid(format!("{} participants cannot fill {k} folds", groups.len())));
        }
        let mut order: Vec<u32> = groups.keys().copied().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        order.shuffle(&mut rng);
        let mut folds: Vec<Vec<usize>> = vec![Vec::new(); k];
        for pid in order {
            let smallest = (0..k).min_by_key(|&i| (folds[i].len(), i)).unwrap();
            folds[smallest].extend(&groups[&pid]);
        }
        Ok(FoldPlan { seed, folds })
    }

    pub fn n_rows(&self) -> usize {
        self.folds.iter().map(|f| f.len()).sum()
    }

    /// All rows except the given fold, ascending.
    pub fn training_rows(&self, fold: usize) -> Vec<usize> {
        let mut rows: Vec<usize> =
            self.folds.iter().enumerate().filter(|(i, _)| *i != fold).flat_map(|(_, f)| f.iter().copied()).collect();
        rows.sort_unstable();
        rows
    }

    /// Check the folds partition `0..n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        let mut seen = vec![false; n];
        for fold in &self.folds {
            for &r in fold {
                if r >= n || seen[r] {
                    return Err(Error::Invalid("fold plan is not a partition".into()));
                }
                seen[r] = true;
            }
        }
        if seen.iter().all(|&s| s) {
            Ok(())
        } else {
            Err(Error::Invalid("fold plan does not cover all rows".into()))
        }
    }
}

/// Per-fold metrics alongside the fold size.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub fold: usize,
    pub n: usize,
    pub metrics: Metrics,
}

/// Cross-validation outcome for one model and feature subset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub model: String,
    pub feature_names: Vec<String>,
    pub seed: u64,
    pub per_fold: Vec<FoldMetrics>,
    /// Metrics over the concatenated held-out predictions (primary).
    pub pooled: Metrics,
    pub fold_mean: Metrics,
    /// Standard errors of the per-fold metric means.
    pub fold_se: MetricsSe,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MetricsSe {
    pub rmse: f64,
    pub mae: f64,
    pub corr: f64,
}

pub(crate) fn fold_mean_se(per_fold: &[FoldMetrics]) -> (Metrics, MetricsSe) {
    let k = per_fold.len() as f64;
    let mean = |get: &dyn Fn(&Metrics) -> f64| per_fold.iter().map(|f| get(&f.metrics)).sum::<f64>() / k;
    let se = |get: &dyn Fn(&Metrics) -> f64, m: f64| {
        if per_fold.len() < 2 {
            return 0.0;
        }
        let var = per_fold.iter().map(|f| (get(&f.metrics) - m) * (get(&f.metrics) - m)).sum::<f64>() / (k - 1.0);
        (var / k).sqrt()
    };
    let rmse = mean(&|m| m.rmse);
    let mae = mean(&|m| m.mae);
    let corr = mean(&|m| m.corr);
    (
        Metrics { rmse, mae, corr, corr_degenerate: per_fold.iter().any(|f| f.metrics.corr_degenerate) },
        MetricsSe { rmse: se(&|m| m.rmse, rmse), mae: se(&|m| m.mae, mae), corr: se(&|m| m.corr, corr) },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_prediction() {
        let y = [0.1, 0.5, 0.9];
        let m = metrics(&y, &y).unwrap();
        assert_eq!(m.rmse, 0.0);
        assert_eq!(m.mae, 0.0);
        assert!((m.corr - 1.0).abs() < 1e-12);
        assert!(!m.corr_degenerate);
    }

    #[test]
    fn hand_computed_fixture() {
        // y = (0, 1), y_hat = (1, 0): rmse = 1, mae = 1, corr = -1
        let m = metrics(&[0.0, 1.0], &[1.0, 0.0]).unwrap();
        assert!((m.rmse - 1.0).abs() < 1e-12);
        assert!((m.mae - 1.0).abs() < 1e-12);
        assert!((m.corr + 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_prediction_is_degenerate() {
        let m = metrics(&[0.0, 0.5, 1.0], &[0.4, 0.4, 0.4]).unwrap();
        assert!(m.corr_degenerate);
        assert_eq!(m.corr, 0.0);
        // rmse is the sd-like value around the constant
        let expected = ((0.16 + 0.01 + 0.36) / 3.0f64).sqrt();
        assert!((m.rmse - expected).abs() < 1e-12);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        assert!(metrics(&[0.0], &[0.0, 1.0]).is_err());
        assert!(metrics(&[], &[]).is_err());
    }

    #[test]
    fn rmse_dominates_mae() {
        // Jensen: rmse >= mae for any error vector
        for seed in 0..20u64 {
            let y: Vec<f64> = (0..50).map(|i| ((i as u64 * 31 + seed * 7) % 100) as f64 / 100.0).collect();
            let y_hat: Vec<f64> = (0..50).map(|i| ((i as u64 * 17 + seed * 13) % 100) as f64 / 100.0).collect();
            let m = metrics(&y, &y_hat).unwrap();
            assert!(m.rmse >= m.mae - 1e-12);
        }
    }

    #[test]
    fn fold_plan_partitions_with_balanced_sizes() {
        let plan = FoldPlan::new(105, 10, 42).unwrap();
        plan.validate(105).unwrap();
        let sizes: Vec<usize> = plan.folds.iter().map(|f| f.len()).collect();
        assert!(sizes.iter().all(|&s| s == 10 || s == 11));
        assert_eq!(sizes.iter().sum::<usize>(), 105);
    }

    #[test]
    fn fold_plan_depends_only_on_n_and_seed() {
        let a = FoldPlan::new(64, 10, 9).unwrap();
        let b = FoldPlan::new(64, 10, 9).unwrap();
        assert_eq!(a, b);
        let c = FoldPlan::new(64, 10, 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn grouped_folds_keep_participants_together() {
        let mut ds = Dataset::new(vec!["x".into()]).unwrap();
        for p in 0..12u32 {
            for t in 0..5u32 {
                ds.push_row(p, t, &[Some(0.0)], Some(0.5)).unwrap();
            }
        }
        let plan = FoldPlan::grouped_by_participant(&ds, 4, 1).unwrap();
        plan.validate(60).unwrap();
        for fold in &plan.folds {
            let pids: std::collections::BTreeSet<u32> = fold.iter().map(|&r| ds.participant_id(r)).collect();
            // participants fully contained: every row of each pid is here
            for pid in pids {
                let total = (0..60).filter(|&r| ds.participant_id(r) == pid).count();
                let here = fold.iter().filter(|&&r| ds.participant_id(r) == pid).count();
                assert_eq!(total, here);
            }
        }
    }
}
