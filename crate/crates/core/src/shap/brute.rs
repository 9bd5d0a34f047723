//! Subset-enumeration Shapley oracle.
//!
//! Computes the same conditional expectation as the tree algorithm —
//! features outside the coalition are marginalized by descending both
//! children weighted by cover — but assembles contributions directly
//! from the combinatorial definition over all feature subsets. Exponential
//! in the feature count; guarded at 20 features.

use crate::gbdt::{FeatureRow, Tree, TreeEnsemble};
use crate::{Error, Result};

use super::Explanation;

/// Hard cap on the enumerable feature count (2^20 subsets).
pub const BRUTE_FORCE_MAX_FEATURES: usize = 20;

/// Cover-weighted conditional expectation of one tree given the
/// coalition `in_set`.
fn walk(tree: &Tree, node_idx: usize, row: &dyn FeatureRow, in_set: &[bool]) -> f64 {
    let node = &tree.nodes[node_idx];
    if node.is_leaf() {
        return node.value;
    }
    if in_set[node.feature as usize] {
        let go_left = match row.feature(node.feature as usize) {
            Some(v) => v <= node.threshold,
            None => node.default_left,
        };
        let child = if go_left { node.left } else { node.right } as usize;
        walk(tree, child, row, in_set)
    } else {
        let l = node.left as usize;
        let r = node.right as usize;
        let lc = tree.nodes[l].cover as f64;
        let rc = tree.nodes[r].cover as f64;
        (lc * walk(tree, l, row, in_set) + rc * walk(tree, r, row, in_set)) / node.cover as f64
    }
}

fn subset_value(ensemble: &TreeEnsemble, row: &dyn FeatureRow, in_set: &[bool]) -> f64 {
    let leaf_sum: f64 = ensemble.trees.iter().map(|t| walk(t, 0, row, in_set)).sum();
    ensemble.base_score + ensemble.learning_rate * leaf_sum
}

/// Pascal-triangle binomials; exact in f64 for n <= 20.
fn binomials(n: usize) -> Vec<f64> {
    let mut row = vec![1.0];
    for _ in 0..n {
        let mut next = vec![1.0];
        for i in 0..row.len() - 1 {
            next.push(row[i] + row[i + 1]);
        }
        next.push(1.0);
        row = next;
    }
    row
}

/// Shapley values by full subset enumeration.
///
/// For every subset S not containing p, the marginal contribution
/// `v(S + p) - v(S)` enters with weight `|S|! (P - |S| - 1)! / P!`.
pub fn brute_force_shap(ensemble: &TreeEnsemble, row: &dyn FeatureRow) -> Result<Explanation> {
    ensemble.validate()?;
    let p = ensemble.feature_names.len();
    if p > BRUTE_FORCE_MAX_FEATURES {
        return Err(Error::Unsupported(format!(
            "brute-force Shapley enumerates 2^P subsets; P = {p} exceeds the cap of {BRUTE_FORCE_MAX_FEATURES}. \
             Use the tree algorithm for full-size models."
        )));
    }

    // memoize v(S) for every subset mask
    let n_masks = 1usize << p;
    let mut values = vec![0.0f64; n_masks];
    let mut in_set = vec![false; p];
    for (mask, slot) in values.iter_mut().enumerate() {
        for (f, flag) in in_set.iter_mut().enumerate() {
            *flag = mask >> f & 1 == 1;
        }
        *slot = subset_value(ensemble, row, &in_set);
    }

    // weight(s) = s! (P - s - 1)! / P! = 1 / (P * C(P-1, s))
    let choose = binomials(p.saturating_sub(1));
    let weight = |s: usize| 1.0 / (p as f64 * choose[s]);

    let mut phi = vec![0.0; p];
    for (feature, phi_f) in phi.iter_mut().enumerate() {
        let bit = 1usize << feature;
        for mask in 0..n_masks {
            if mask & bit != 0 {
                continue;
            }
            let s = (mask as u32).count_ones() as usize;
            *phi_f += weight(s) * (values[mask | bit] - values[mask]);
        }
    }

    Ok(Explanation { base_value: values[0], contributions: phi })
}
