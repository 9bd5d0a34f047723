//! Shapley additive explanations for the tree ensemble.
//!
//! Two independent routes compute the same quantity: the polynomial
//! path-dependent tree algorithm ([`shap_values`]) and the exponential
//! subset-enumeration oracle ([`brute_force_shap`]). The oracle exists
//! to verify the fast path and is guarded to small feature counts.

mod aggregate;
mod brute;
pub mod report;
pub mod stats;
mod tree_shap;

pub use aggregate::{
    explain_instance, global_importance, importance_from_explanations, main_effects, main_effects_with_overrides,
    BinSummary, ContributionLine, ImportanceTable, InstanceReport, MainEffect, DEFAULT_MAIN_EFFECT_BINS,
};
pub use brute::{brute_force_shap, BRUTE_FORCE_MAX_FEATURES};
pub use tree_shap::shap_values;

/// Additive explanation of one prediction: the expected model output
/// plus one signed contribution per feature.
#[derive(Debug, Clone, PartialEq)]
pub struct Explanation {
    /// Expected model output over the training distribution (the
    /// cover-weighted walk with an empty coalition).
    pub base_value: f64,
    pub contributions: Vec<f64>,
}

impl Explanation {
    /// base value plus all contributions; equals the prediction under
    /// local accuracy.
    pub fn total(&self) -> f64 {
        self.base_value + self.contributions.iter().sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gbdt::{Tree, TreeEnsemble, TreeNode};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn leaf(value: f64, cover: u32) -> TreeNode {
        TreeNode { feature: 0, threshold: 0.0, default_left: true, left: -1, right: -1, value, cover }
    }

    fn split(feature: u32, threshold: f64, left: i32, right: i32, cover: u32) -> TreeNode {
        TreeNode { feature, threshold, default_left: true, left, right, value: 0.0, cover }
    }

    fn stump(feature: u32, threshold: f64, left_value: f64, right_value: f64, left_cover: u32, right_cover: u32) -> Tree {
        Tree {
            nodes: vec![
                split(feature, threshold, 1, 2, left_cover + right_cover),
                leaf(left_value, left_cover),
                leaf(right_value, right_cover),
            ],
        }
    }

    fn names(p: usize) -> Vec<String> {
        (0..p).map(|i| format!("f{i}")).collect()
    }

    #[test]
    fn zero_tree_ensemble_explains_as_base_only() {
        let ensemble =
            TreeEnsemble { base_score: 0.7, learning_rate: 0.05, feature_names: names(3), trees: vec![] };
        let row: Vec<Option<f64>> = vec![Some(1.0), Some(2.0), Some(3.0)];
        let ex = shap_values(&ensemble, &row).unwrap();
        assert_eq!(ex.base_value, 0.7);
        assert_eq!(ex.contributions, vec![0.0, 0.0, 0.0]);
        let bf = brute_force_shap(&ensemble, &row).unwrap();
        assert_eq!(bf.base_value, 0.7);
        assert_eq!(bf.contributions, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn single_stump_explains_by_hand() {
        // one feature, one stump: phi_0 = prediction - base value
        let ensemble = TreeEnsemble {
            base_score: 0.5,
            learning_rate: 0.1,
            feature_names: names(2),
            trees: vec![stump(0, 1.0, -1.0, 1.0, 30, 10)],
        };
        let row: Vec<Option<f64>> = vec![Some(0.0), Some(9.0)]; // routed left
        let ex = shap_values(&ensemble, &row).unwrap();
        let prediction = ensemble.predict_row(&row);
        assert!((ex.base_value - ensemble.expected_value()).abs() < 1e-15);
        assert!((ex.contributions[0] - (prediction - ex.base_value)).abs() < 1e-12);
        assert_eq!(ex.contributions[1], 0.0); // missingness
        let bf = brute_force_shap(&ensemble, &row).unwrap();
        assert!((bf.contributions[0] - ex.contributions[0]).abs() < 1e-12);
        assert_eq!(bf.contributions[1], 0.0);
    }

    #[test]
    fn symmetric_model_gives_symmetric_contributions() {
        // f = x0 + x1 via two identical stumps with symmetric covers;
        // a symmetric instance must split credit equally
        let ensemble = TreeEnsemble {
            base_score: 0.0,
            learning_rate: 1.0,
            feature_names: names(2),
            trees: vec![stump(0, 0.0, -1.0, 1.0, 50, 50), stump(1, 0.0, -1.0, 1.0, 50, 50)],
        };
        let row: Vec<Option<f64>> = vec![Some(1.0), Some(1.0)];
        let bf = brute_force_shap(&ensemble, &row).unwrap();
        assert!((bf.contributions[0] - bf.contributions[1]).abs() < 1e-12);
        let ts = shap_values(&ensemble, &row).unwrap();
        assert!((ts.contributions[0] - ts.contributions[1]).abs() < 1e-12);
    }

    #[test]
    fn brute_force_oracle_is_self_consistent() {
        // random 8-feature ensemble: base + sum(phi) equals the prediction
        let (ensemble, _) = random_ensemble(8, 4, 3, 42);
        let row = random_row(8, 43);
        let bf = brute_force_shap(&ensemble, &row).unwrap();
        let prediction = ensemble.predict_row(&row);
        assert!((bf.total() - prediction).abs() < 1e-10, "gap {}", (bf.total() - prediction).abs());
    }

    #[test]
    fn brute_force_refuses_oversized_models() {
        let ensemble =
            TreeEnsemble { base_score: 0.0, learning_rate: 1.0, feature_names: names(21), trees: vec![] };
        let row: Vec<Option<f64>> = vec![Some(0.0); 21];
        let err = brute_force_shap(&ensemble, &row).unwrap_err().to_string();
        assert!(err.contains("cap"), "got: {err}");
    }

    #[test]
    fn zero_cover_model_is_rejected_by_shap() {
        let mut tree = stump(0, 0.0, -1.0, 1.0, 10, 10);
        tree.nodes[1].cover = 0;
        let ensemble =
            TreeEnsemble { base_score: 0.0, learning_rate: 1.0, feature_names: names(1), trees: vec![tree] };
        let row: Vec<Option<f64>> = vec![Some(1.0)];
        assert!(shap_values(&ensemble, &row).is_err());
    }

    /// Random tree with conserved covers, random splits and duplicate
    /// features allowed along a path.
    fn random_tree(rng: &mut ChaCha8Rng, p: usize, depth: usize, cover: u32) -> Vec<TreeNode> {
        fn build(nodes: &mut Vec<TreeNode>, rng: &mut ChaCha8Rng, p: usize, depth: usize, cover: u32) -> usize {
            let idx = nodes.len();
            if depth == 0 || cover < 2 || rng.gen_bool(0.25) {
                nodes.push(TreeNode {
                    feature: 0,
                    threshold: 0.0,
                    default_left: true,
                    left: -1,
                    right: -1,
                    value: rng.gen_range(-1.0..1.0),
                    cover,
                });
                return idx;
            }
            nodes.push(TreeNode {
                feature: rng.gen_range(0..p as u32),
                threshold: rng.gen_range(-1.0..1.0),
                default_left: rng.gen_bool(0.5),
                left: 0,
                right: 0,
                value: 0.0,
                cover,
            });
            let left_cover = rng.gen_range(1..cover);
            let left = build(nodes, rng, p, depth - 1, left_cover);
            let right = build(nodes, rng, p, depth - 1, cover - left_cover);
            nodes[idx].left = left as i32;
            nodes[idx].right = right as i32;
            idx
        }
        let mut nodes = Vec::new();
        build(&mut nodes, rng, p, depth, cover);
        nodes
    }

    pub(crate) fn random_ensemble(p: usize, n_trees: usize, depth: usize, seed: u64) -> (TreeEnsemble, ChaCha8Rng) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let trees: Vec<Tree> = (0..n_trees)
            .map(|_| {
                let cover = rng.gen_range(50..200);
                Tree { nodes: random_tree(&mut rng, p, depth, cover) }
            })
            .collect();
        let ensemble = TreeEnsemble {
            base_score: rng.gen_range(-0.5..0.5),
            learning_rate: rng.gen_range(0.05..1.0),
            feature_names: names(p),
            trees,
        };
        ensemble.validate().unwrap();
        (ensemble, rng)
    }

    pub(crate) fn random_row(p: usize, seed: u64) -> Vec<Option<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..p).map(|_| if rng.gen_bool(0.15) { None } else { Some(rng.gen_range(-1.2..1.2)) }).collect()
    }

    #[test]
    fn tree_algorithm_matches_brute_force_on_random_models() {
        let mut worst: f64 = 0.0;
        for seed in 0..40u64 {
            let p = 2 + (seed as usize % 7); // up to 8 features
            let (ensemble, _) = random_ensemble(p, 1 + seed as usize % 5, 4, seed * 7 + 1);
            let row = random_row(p, seed * 13 + 5);
            let fast = shap_values(&ensemble, &row).unwrap();
            let slow = brute_force_shap(&ensemble, &row).unwrap();
            assert!((fast.base_value - slow.base_value).abs() < 1e-10);
            for f in 0..p {
                worst = worst.max((fast.contributions[f] - slow.contributions[f]).abs());
            }
            // local accuracy on both routes
            let prediction = ensemble.predict_row(&row);
            assert!((fast.total() - prediction).abs() < 1e-9, "seed {seed}");
            assert!((slow.total() - prediction).abs() < 1e-9, "seed {seed}");
        }
        assert!(worst <= 1e-9, "max |treeshap - brute| = {worst}");
    }

    #[test]
    fn duplicating_a_single_feature_tree_never_shrinks_its_contribution() {
        // consistency, testable form: duplicating a tree that uses only
        // feature 0 never decreases |phi_0|
        for seed in 0..10u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed + 101);
            let tree = stump(0, rng.gen_range(-0.5..0.5), rng.gen_range(-1.0..0.0), rng.gen_range(0.0..1.0), 40, 60);
            let base = TreeEnsemble {
                base_score: 0.1,
                learning_rate: 0.5,
                feature_names: names(3),
                trees: vec![tree.clone()],
            };
            let doubled = TreeEnsemble {
                base_score: 0.1,
                learning_rate: 0.5,
                feature_names: names(3),
                trees: vec![tree.clone(), tree],
            };
            let row = random_row(3, seed * 3 + 7);
            let a = shap_values(&base, &row).unwrap().contributions[0].abs();
            let b = shap_values(&doubled, &row).unwrap().contributions[0].abs();
            assert!(b >= a - 1e-12, "seed {seed}: {b} < {a}");
        }
    }

    #[test]
    fn importance_and_ranks() {
        use crate::features::Dataset;
        let mut ds = Dataset::new(vec!["a".into(), "b".into(), "c".into()]).unwrap();
        ds.push_row(1, 1, &[Some(1.0), Some(2.0), Some(3.0)], Some(0.5)).unwrap();
        ds.push_row(1, 2, &[Some(4.0), None, Some(6.0)], Some(0.6)).unwrap();
        let explanations = vec![
            Explanation { base_value: 0.5, contributions: vec![0.1, -0.2, 0.0] },
            Explanation { base_value: 0.5, contributions: vec![-0.3, 0.1, 0.0] },
        ];
        let table = importance_from_explanations(&ds, &explanations).unwrap();
        assert_eq!(table.impact, vec![0.4, 0.30000000000000004, 0.0]);
        assert_eq!(table.order(), vec![0, 1, 2]);
        assert_eq!(table.rank, vec![0, 1, 2]);
        // unused feature: impact 0, last rank
        assert_eq!(table.impact[2], 0.0);
        assert_eq!(table.scatter[1][1].0, None);
    }

    #[test]
    fn importance_is_additive_over_disjoint_halves() {
        let (ensemble, _) = random_ensemble(4, 3, 3, 77);
        let mut full = crate::features::Dataset::new(names(4)).unwrap();
        for r in 0..20u32 {
            let row = random_row(4, 1000 + r as u64);
            full.push_row(1, r, &row, Some(0.0)).unwrap();
        }
        let (table_full, explanations) = global_importance(&ensemble, &full).unwrap();
        // split the explanations in half and sum the impacts
        let first = &explanations[..10];
        let second = &explanations[10..];
        for f in 0..4 {
            let a: f64 = first.iter().map(|e| e.contributions[f].abs()).sum();
            let b: f64 = second.iter().map(|e| e.contributions[f].abs()).sum();
            assert!((a + b - table_full.impact[f]).abs() < 1e-12);
        }
    }

    #[test]
    fn single_row_importance_is_that_rows_magnitude() {
        let (ensemble, _) = random_ensemble(3, 2, 3, 5);
        let mut ds = crate::features::Dataset::new(names(3)).unwrap();
        let row = random_row(3, 17);
        ds.push_row(1, 1, &row, Some(0.0)).unwrap();
        let (table, explanations) = global_importance(&ensemble, &ds).unwrap();
        for f in 0..3 {
            assert_eq!(table.impact[f], explanations[0].contributions[f].abs());
        }
    }

    #[test]
    fn main_effects_bins_and_flags() {
        use crate::features::Dataset;
        // nominal feature with 2 levels + continuous feature
        let mut ds = Dataset::new(vec!["gender".into(), "decisionTime".into()]).unwrap();
        for r in 0..40u32 {
            let g = (r % 2) as f64;
            let dt = r as f64 * 0.1;
            ds.push_row(1, r, &[Some(g), Some(dt)], Some(0.5)).unwrap();
        }
        let explanations: Vec<Explanation> = (0..40)
            .map(|r| Explanation {
                base_value: 0.5,
                contributions: vec![if r % 2 == 0 { -0.1 } else { 0.1 }, r as f64 * 0.01],
            })
            .collect();
        let effects = main_effects(&ds, &explanations, DEFAULT_MAIN_EFFECT_BINS).unwrap();

        let gender = &effects[0];
        assert_eq!(gender.kind, crate::features::FeatureKind::Nominal);
        assert_eq!(gender.bins.len(), 2);
        assert_eq!(gender.bins.iter().map(|b| b.count).sum::<usize>(), 40);
        assert!(gender.correlation > 0.99); // Spearman on a monotone pattern

        let dt = &effects[1];
        assert_eq!(dt.bins.len(), 18);
        assert_eq!(dt.bins.iter().map(|b| b.count).sum::<usize>(), 40);
        assert!(dt.correlation > 0.999); // Pearson, perfectly linear
        assert!(dt.p_value < 1e-10);
    }

    #[test]
    fn degenerate_shap_correlation_is_flagged_zero() {
        use crate::features::Dataset;
        let mut ds = Dataset::new(vec!["x".into()]).unwrap();
        for r in 0..10u32 {
            ds.push_row(1, r, &[Some(r as f64)], Some(0.5)).unwrap();
        }
        let explanations: Vec<Explanation> =
            (0..10).map(|_| Explanation { base_value: 0.5, contributions: vec![0.25] }).collect();
        let effects = main_effects(&ds, &explanations, 18).unwrap();
        assert!(effects[0].degenerate);
        assert_eq!(effects[0].correlation, 0.0);
    }

    #[test]
    fn all_masked_feature_yields_flagged_empty_effect() {
        use crate::features::Dataset;
        let mut ds = Dataset::new(vec!["x".into(), "y".into()]).unwrap();
        for r in 0..5u32 {
            ds.push_row(1, r, &[None, Some(r as f64)], Some(0.5)).unwrap();
        }
        let explanations: Vec<Explanation> =
            (0..5).map(|r| Explanation { base_value: 0.5, contributions: vec![0.0, r as f64 * 0.02] }).collect();
        let effects = main_effects(&ds, &explanations, 18).unwrap();
        assert!(effects[0].all_masked);
        assert!(effects[0].bins.is_empty());
    }

    #[test]
    fn instance_report_sums_and_orders() {
        let (ensemble, _) = random_ensemble(5, 3, 3, 21);
        let mut ds = crate::features::Dataset::new(names(5)).unwrap();
        ds.push_row(1, 1, &random_row(5, 99), Some(0.4)).unwrap();
        let report = explain_instance(&ensemble, &ds, 0).unwrap();
        assert!(report.accuracy_gap < 1e-9);
        for w in report.lines.windows(2) {
            assert!(w[0].phi.abs() >= w[1].phi.abs());
        }
        let rendered = report.render();
        assert!(rendered.contains("base_value"));
        assert!(rendered.contains("prediction"));
    }

    #[test]
    fn constant_model_report_shows_base_only() {
        let ensemble =
            TreeEnsemble { base_score: 0.42, learning_rate: 0.05, feature_names: names(2), trees: vec![] };
        let mut ds = crate::features::Dataset::new(names(2)).unwrap();
        ds.push_row(1, 1, &[Some(1.0), Some(2.0)], None).unwrap();
        let report = explain_instance(&ensemble, &ds, 0).unwrap();
        assert_eq!(report.base_value, 0.42);
        assert!(report.lines.iter().all(|l| l.phi == 0.0));
        assert_eq!(report.accuracy_gap, 0.0);
    }
}
