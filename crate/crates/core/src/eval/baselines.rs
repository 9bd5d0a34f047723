//! Reference models evaluated under the identical fold plan: ordinary
//! least squares (masked cells mean-imputed per column) and a single
//! leaf-wise regression tree.

use crate::features::Dataset;
use crate::gbdt::{fit, TrainConfig};
use crate::Result;

use super::{cross_validate_with, EvalReport, FoldPlan};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    LinearRegression,
    SingleTree,
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            let (pivot_row, rest) = a.split_at_mut(col + 1);
            let pivot_row = &pivot_row[col];
            let target = &mut rest[row - col - 1];
            for (t, p) in target[col..].iter_mut().zip(pivot_row[col..].iter()) {
                *t -= factor * p;
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

struct LinearModel {
    /// Intercept followed by one coefficient per feature.
    beta: Vec<f64>,
    /// Per-column imputation means from the training rows.
    impute: Vec<f64>,
    ridge_fallback: bool,
}

fn design_value(ds: &Dataset, f: usize, r: usize, impute: &[f64]) -> f64 {
    ds.value(f, r).unwrap_or(impute[f])
}

fn fit_linear(ds: &Dataset, rows: &[usize]) -> crate::Result<LinearModel> {
    let p = ds.n_features();
    let impute: Vec<f64> = (0..p)
        .map(|f| {
            let present: Vec<f64> = rows.iter().filter_map(|&r| ds.value(f, r)).collect();
            if present.is_empty() {
                0.0
            } else {
                present.iter().sum::<f64>() / present.len() as f64
            }
        })
        .collect();

    let dim = p + 1;
    let mut xtx = vec![vec![0.0; dim]; dim];
    let mut xty = vec![0.0; dim];
    for &r in rows {
        let y = ds.sa(r).ok_or_else(|| crate::Error::Invalid(format!("row {r} has no sa label")))?;
        let mut x = Vec::with_capacity(dim);
        x.push(1.0);
        for f in 0..p {
            x.push(design_value(ds, f, r, &impute));
        }
        for i in 0..dim {
            for j in 0..dim {
                xtx[i][j] += x[i] * x[j];
            }
            xty[i] += x[i] * y;
        }
    }

    match solve(xtx.clone(), xty.clone()) {
        Some(beta) => Ok(LinearModel { beta, impute, ridge_fallback: false }),
        None => {
            // tiny ridge keeps a singular design solvable
            let mut ridged = xtx;
            for (i, row) in ridged.iter_mut().enumerate() {
                row[i] += 1e-8;
            }
            let beta = solve(ridged, xty).expect("ridge-regularized system is positive definite");
            Ok(LinearModel { beta, impute, ridge_fallback: true })
        }
    }
}

impl LinearModel {
    fn predict(&self, ds: &Dataset, r: usize) -> f64 {
        let mut acc = self.beta[0];
        for f in 0..ds.n_features() {
            acc += self.beta[f + 1] * design_value(ds, f, r, &self.impute);
        }
        acc
    }
}

/// OLS baseline under the shared fold plan.
pub fn linear_regression_cv(ds: &Dataset, plan: &FoldPlan) -> Result<EvalReport> {
    cross_validate_with(ds, plan, "linear_regression", |ds, train_rows, test_rows, _fold| {
        let model = fit_linear(ds, train_rows)?;
        let mut flags = Vec::new();
        if model.ridge_fallback {
            flags.push("singular design matrix: ridge fallback".to_string());
        }
        Ok((test_rows.iter().map(|&r| model.predict(ds, r)).collect(), flags))
    })
}

/// A single leaf-wise tree (32-leaf budget, no shrinkage, no sampling)
/// under the shared fold plan.
pub fn single_tree_cv(ds: &Dataset, plan: &FoldPlan) -> Result<EvalReport> {
    let config = TrainConfig {
        num_leaves: 32,
        learning_rate: 1.0,
        num_boost_round: 1,
        early_stopping_rounds: 0,
        goss_a: 0.5,
        goss_b: 0.5, // a + b = 1: keep every row
        lambda_l2: 0.0,
        min_data_in_leaf: 20,
        ..TrainConfig::default()
    };
    cross_validate_with(ds, plan, "single_tree", move |ds, train_rows, test_rows, _fold| {
        let (ensemble, _) = fit(ds, train_rows, &[], &config)?;
        Ok((test_rows.iter().map(|&r| ensemble.predict_row(&ds.row(r))).collect(), Vec::new()))
    })
}

/// Both baselines under one plan.
pub fn baselines(ds: &Dataset, plan: &FoldPlan) -> Result<Vec<EvalReport>> {
    Ok(vec![linear_regression_cv(ds, plan)?, single_tree_cv(ds, plan)?])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::FoldPlan;

    fn hash01(i: usize, salt: u64) -> f64 {
        let h = (i as u64).wrapping_mul(6364136223846793005).wrapping_add(salt);
        ((h >> 33) % 10_000) as f64 / 10_000.0
    }

    fn linear_dataset(n: usize) -> Dataset {
        let mut ds = Dataset::new(vec!["a".into(), "b".into()]).unwrap();
        for r in 0..n {
            let a = hash01(r, 1);
            let b = hash01(r, 2);
            let y = 0.2 + 0.5 * a - 0.3 * b;
            ds.push_row(1, r as u32, &[Some(a), Some(b)], Some(y)).unwrap();
        }
        ds
    }

    fn step_dataset(n: usize) -> Dataset {
        let mut ds = Dataset::new(vec!["a".into(), "b".into()]).unwrap();
        for r in 0..n {
            let a = hash01(r, 1);
            let b = hash01(r, 2);
            let y = if a > 0.5 { 0.8 } else { 0.2 };
            ds.push_row(1, r as u32, &[Some(a), Some(b)], Some(y)).unwrap();
        }
        ds
    }

    #[test]
    fn linear_baseline_wins_on_linear_target() {
        let ds = linear_dataset(300);
        let plan = FoldPlan::new(300, 10, 3).unwrap();
        let lin = linear_regression_cv(&ds, &plan).unwrap();
        let tree = single_tree_cv(&ds, &plan).unwrap();
        assert!(lin.pooled.rmse < tree.pooled.rmse, "lin {} vs tree {}", lin.pooled.rmse, tree.pooled.rmse);
        assert!(lin.pooled.rmse < 1e-6); // noiseless linear target is exact
    }

    #[test]
    fn tree_baseline_wins_on_step_target() {
        let ds = step_dataset(300);
        let plan = FoldPlan::new(300, 10, 3).unwrap();
        let lin = linear_regression_cv(&ds, &plan).unwrap();
        let tree = single_tree_cv(&ds, &plan).unwrap();
        assert!(tree.pooled.rmse < lin.pooled.rmse, "tree {} vs lin {}", tree.pooled.rmse, lin.pooled.rmse);
    }

    #[test]
    fn baselines_share_the_fold_plan() {
        let ds = linear_dataset(100);
        let plan = FoldPlan::new(100, 10, 7).unwrap();
        let reports = baselines(&ds, &plan).unwrap();
        assert_eq!(reports.len(), 2);
        for report in &reports {
            assert_eq!(report.seed, 7);
            assert_eq!(report.per_fold.len(), 10);
        }
    }

    #[test]
    fn singular_design_falls_back_to_ridge() {
        // duplicated column makes X'X singular
        let mut ds = Dataset::new(vec!["a".into(), "a_copy".into()]).unwrap();
        for r in 0..60 {
            let a = hash01(r, 5);
            ds.push_row(1, r as u32, &[Some(a), Some(a)], Some(0.5 * a)).unwrap();
        }
        let plan = FoldPlan::new(60, 5, 1).unwrap();
        let report = linear_regression_cv(&ds, &plan).unwrap();
        assert!(report.flags.iter().any(|f| f.contains("ridge")), "flags: {:?}", report.flags);
        assert!(report.pooled.rmse < 1e-3);
    }
}
