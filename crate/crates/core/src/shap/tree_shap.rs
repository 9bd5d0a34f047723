//! Polynomial-time exact Shapley values for tree ensembles.
//!
//! Path-dependent formulation: conditional expectations follow the
//! training covers down each tree. The algorithm tracks, for every
//! root-to-leaf path, the proportion of feature subsets flowing hot
//! (instance side) and cold (cover-weighted side) through each split,
//! maintaining the subset-size weights incrementally so each leaf
//! contributes to every path feature in one pass.

use crate::gbdt::{FeatureRow, Tree, TreeEnsemble};
use crate::{Error, Result};

use super::Explanation;

#[derive(Debug, Clone, Copy)]
struct PathElem {
    feature: i32,
    zero: f64,
    one: f64,
    weight: f64,
}

fn extend(path: &mut Vec<PathElem>, zero: f64, one: f64, feature: i32) {
    let l = path.len();
    path.push(PathElem { feature, zero, one, weight: if l == 0 { 1.0 } else { 0.0 } });
    for i in (0..l).rev() {
        path[i + 1].weight += one * path[i].weight * (i as f64 + 1.0) / (l as f64 + 1.0);
        path[i].weight = zero * path[i].weight * (l as f64 - i as f64) / (l as f64 + 1.0);
    }
}

fn unwind(path: &mut Vec<PathElem>, i: usize) {
    let l = path.len() - 1;
    let one = path[i].one;
    let zero = path[i].zero;
    if one != 0.0 {
        let mut n = path[l].weight;
        for j in (0..l).rev() {
            let t = path[j].weight;
            path[j].weight = n * (l as f64 + 1.0) / ((j as f64 + 1.0) * one);
            n = t - path[j].weight * zero * (l as f64 - j as f64) / (l as f64 + 1.0);
        }
    } else {
        for j in (0..l).rev() {
            path[j].weight = path[j].weight * (l as f64 + 1.0) / (zero * (l as f64 - j as f64));
        }
    }
    for j in i..l {
        path[j].feature = path[j + 1].feature;
        path[j].zero = path[j + 1].zero;
        path[j].one = path[j + 1].one;
    }
    path.pop();
}

/// Total path weight after removing element `i`, without mutating.
fn unwound_sum(path: &[PathElem], i: usize) -> f64 {
    let l = path.len() - 1;
    let one = path[i].one;
    let zero = path[i].zero;
    let mut total = 0.0;
    if one != 0.0 {
        let mut n = path[l].weight;
        for j in (0..l).rev() {
            let t = n * (l as f64 + 1.0) / ((j as f64 + 1.0) * one);
            total += t;
            n = path[j].weight - t * zero * (l as f64 - j as f64) / (l as f64 + 1.0);
        }
    } else {
        for j in (0..l).rev() {
            total += path[j].weight * (l as f64 + 1.0) / (zero * (l as f64 - j as f64));
        }
    }
    total
}

#[allow(clippy::too_many_arguments)]
fn recurse(tree: &Tree, node_idx: usize, mut path: Vec<PathElem>, zero: f64, one: f64, feature: i32, row: &dyn FeatureRow, phi: &mut [f64]) {
    extend(&mut path, zero, one, feature);
    let node = &tree.nodes[node_idx];

    if node.is_leaf() {
        for i in 1..path.len() {
            let w = unwound_sum(&path, i);
            phi[path[i].feature as usize] += w * (path[i].one - path[i].zero) * node.value;
        }
        return;
    }

    let go_left = match row.feature(node.feature as usize) {
        Some(v) => v <= node.threshold,
        None => node.default_left,
    };
    let (hot, cold) = if go_left {
        (node.left as usize, node.right as usize)
    } else {
        (node.right as usize, node.left as usize)
    };
    let hot_cover = tree.nodes[hot].cover as f64;
    let cold_cover = tree.nodes[cold].cover as f64;
    let node_cover = node.cover as f64;

    // a repeated feature on the path is unwound and its fractions reused
    let mut incoming_zero = 1.0;
    let mut incoming_one = 1.0;
    if let Some(k) = path.iter().position(|e| e.feature == node.feature as i32) {
        incoming_zero = path[k].zero;
        incoming_one = path[k].one;
        unwind(&mut path, k);
    }

    let f = node.feature as i32;
    recurse(tree, hot, path.clone(), incoming_zero * hot_cover / node_cover, incoming_one, f, row, phi);
    recurse(tree, cold, path, incoming_zero * cold_cover / node_cover, 0.0, f, row, phi);
}

/// Per-tree Shapley contributions (unscaled by the learning rate),
/// accumulated into `phi`.
pub(crate) fn tree_contributions(tree: &Tree, row: &dyn FeatureRow, phi: &mut [f64]) {
    recurse(tree, 0, Vec::new(), 1.0, 1.0, -1, row, phi);
}

/// Exact Shapley contributions for one instance under the trained
/// ensemble. Satisfies local accuracy (base value plus contributions
/// reconstruct the prediction) and missingness (features absent from
/// every tree contribute exactly zero).
pub fn shap_values(ensemble: &TreeEnsemble, row: &dyn FeatureRow) -> Result<Explanation> {
    ensemble.validate().map_err(|e| match e {
        Error::Model(msg) => Error::Model(format!("cannot explain a corrupt model: {msg}")),
        other => other,
    })?;
    let p = ensemble.feature_names.len();
    let mut phi = vec![0.0; p];
    for tree in &ensemble.trees {
        tree_contributions(tree, row, &mut phi);
    }
    for v in phi.iter_mut() {
        *v *= ensemble.learning_rate;
    }
    Ok(Explanation { base_value: ensemble.expected_value(), contributions: phi })
}
