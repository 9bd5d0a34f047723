//! Leaf-wise regression tree growth over binned data.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::binning::{BinnedDataset, MISSING_BIN};
use super::{FeatureRow, TrainConfig};

/// Flat tree node. Internal nodes carry the split; leaves carry the
/// value (left/right are -1). `cover` counts the sampled training rows
/// that reached the node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub feature: u32,
    pub threshold: f64,
    pub default_left: bool,
    pub left: i32,
    pub right: i32,
    pub value: f64,
    pub cover: u32,
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        self.left < 0
    }

    fn leaf(value: f64, cover: u32) -> TreeNode {
        TreeNode { feature: 0, threshold: 0.0, default_left: true, left: -1, right: -1, value, cover }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    /// Route a feature row to its leaf value. Masked features follow the
    /// stored default direction.
    pub fn predict_row(&self, row: &dyn FeatureRow) -> f64 {
        let mut idx = 0usize;
        loop {
            let node = &self.nodes[idx];
            if node.is_leaf() {
                return node.value;
            }
            let go_left = match row.feature(node.feature as usize) {
                Some(v) => v <= node.threshold,
                None => node.default_left,
            };
            idx = if go_left { node.left as usize } else { node.right as usize };
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_leaf()).count()
    }

    pub fn max_depth(&self) -> usize {
        fn depth(nodes: &[TreeNode], idx: usize) -> usize {
            let n = &nodes[idx];
            if n.is_leaf() {
                0
            } else {
                1 + depth(nodes, n.left as usize).max(depth(nodes, n.right as usize))
            }
        }
        depth(&self.nodes, 0)
    }

    /// Cover-weighted expected leaf value: the conditional-expectation walk
    /// with an empty feature coalition.
    pub fn expected_value(&self) -> f64 {
        fn walk(nodes: &[TreeNode], idx: usize) -> f64 {
            let n = &nodes[idx];
            if n.is_leaf() {
                n.value
            } else {
                let l = &nodes[n.left as usize];
                let r = &nodes[n.right as usize];
                (l.cover as f64 * walk(nodes, n.left as usize) + r.cover as f64 * walk(nodes, n.right as usize))
                    / n.cover as f64
            }
        }
        walk(&self.nodes, 0)
    }

    /// Structural checks used on model load: child links in range, covers
    /// conserved, no zero-cover nodes.
    pub fn validate(&self) -> crate::Result<()> {
        if self.nodes.is_empty() {
            return Err(crate::Error::Model("tree has no nodes".into()));
        }
        for (i, n) in self.nodes.iter().enumerate() {
            if n.cover == 0 {
                return Err(crate::Error::Model(format!("node {i} has zero cover")));
            }
            if n.is_leaf() {
                continue;
            }
            let (l, r) = (n.left, n.right);
            if l < 0 || r < 0 || l as usize >= self.nodes.len() || r as usize >= self.nodes.len() {
                return Err(crate::Error::Model(format!("node {i} has out-of-range children")));
            }
            let sum = self.nodes[l as usize].cover + self.nodes[r as usize].cover;
            if sum != n.cover {
                return Err(crate::Error::Model(format!(
                    "cover not conserved at node {i}: {} + {} != {}",
                    self.nodes[l as usize].cover,
                    self.nodes[r as usize].cover,
                    n.cover
                )));
            }
        }
        Ok(())
    }
}

struct SplitInfo {
    feature: usize,
    bin: u16,
    threshold: f64,
    default_left: bool,
    gain: f64,
}

#[derive(Clone, Copy)]
struct NodeStats {
    grad: f64,
    hess: f64,
    count: usize,
}

/// Frontier entry for best-first growth: largest gain first, insertion
/// order breaks ties.
struct Frontier {
    gain: f64,
    seq: usize,
    node_id: usize,
    rows: Vec<u32>,
    stats: NodeStats,
    split: SplitInfo,
}

impl PartialEq for Frontier {
    fn eq(&self, other: &Self) -> bool {
        self.seq == other.seq
    }
}
impl Eq for Frontier {}
impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain.total_cmp(&other.gain).then(other.seq.cmp(&self.seq))
    }
}

fn leaf_value(grad: f64, hess: f64, lambda: f64) -> f64 {
    -grad / (hess + lambda)
}

fn gain_term(grad: f64, hess: f64, lambda: f64) -> f64 {
    grad * grad / (hess + lambda)
}

/// `grads` and `weight_of` are indexed by row position; rows outside the
/// sample never appear in any node's row list.
struct GrowContext<'a> {
    binned: &'a BinnedDataset,
    grads: &'a [f64],
    weight_of: Vec<f64>,
    config: &'a TrainConfig,
}

impl GrowContext<'_> {
    fn node_stats(&self, rows: &[u32]) -> NodeStats {
        let mut grad = 0.0;
        let mut hess = 0.0;
        for &row in rows {
            let w = self.weight_of[row as usize];
            grad += self.grads[row as usize] * w;
            hess += w;
        }
        NodeStats { grad, hess, count: rows.len() }
    }

    /// Exhaustive histogram scan for the best split of one node.
    ///
    /// Candidates are enumerated by ascending feature, ascending bin,
    /// default-left before default-right; a candidate replaces the best
    /// only on a strictly larger gain, which fixes the tie-break order.
    fn best_split(&self, rows: &[u32], stats: &NodeStats) -> Option<SplitInfo> {
        let lambda = self.config.lambda_l2;
        let parent_term = gain_term(stats.grad, stats.hess, lambda);
        let min_data = self.config.min_data_in_leaf;
        let mut best: Option<SplitInfo> = None;

        for f in 0..self.binned.features.len() {
            let n_bins = self.binned.features[f].n_bins();
            if n_bins < 2 {
                continue; // constant feature: never split on it
            }
            let codes = &self.binned.codes[f];
            let mut hist_g = vec![0.0f64; n_bins];
            let mut hist_h = vec![0.0f64; n_bins];
            let mut hist_n = vec![0usize; n_bins];
            let (mut miss_g, mut miss_h, mut miss_n) = (0.0f64, 0.0f64, 0usize);
            for &row in rows {
                let w = self.weight_of[row as usize];
                let g = self.grads[row as usize] * w;
                let code = codes[row as usize];
                if code == MISSING_BIN {
                    miss_g += g;
                    miss_h += w;
                    miss_n += 1;
                } else {
                    hist_g[code as usize] += g;
                    hist_h[code as usize] += w;
                    hist_n[code as usize] += 1;
                }
            }

            let (mut left_g, mut left_h, mut left_n) = (0.0f64, 0.0f64, 0usize);
            for b in 0..n_bins - 1 {
                left_g += hist_g[b];
                left_h += hist_h[b];
                left_n += hist_n[b];
                for default_left in [true, false] {
                    let (lg, lh, ln) = if default_left {
                        (left_g + miss_g, left_h + miss_h, left_n + miss_n)
                    } else {
                        (left_g, left_h, left_n)
                    };
                    let (rg, rh, rn) = (stats.grad - lg, stats.hess - lh, stats.count - ln);
                    if ln < min_data || rn < min_data {
                        continue;
                    }
                    let gain = 0.5 * (gain_term(lg, lh, lambda) + gain_term(rg, rh, lambda) - parent_term);
                    if best.as_ref().is_none_or(|s| gain > s.gain) {
                        best = Some(SplitInfo {
                            feature: f,
                            bin: b as u16,
                            threshold: self.binned.features[f].edges[b],
                            default_left,
                            gain,
                        });
                    }
                }
            }
        }
        best.filter(|s| s.gain > 0.0)
    }
}

/// Grow one tree best-first: repeatedly split the frontier leaf with the
/// largest gain until the leaf budget is exhausted or no split has
/// positive gain.
///
/// `rows` are the sampled row positions with aligned `weights`; `grads`
/// is indexed by row position over the full training set.
pub fn grow_tree(binned: &BinnedDataset, rows: &[u32], grads: &[f64], weights: &[f64], config: &TrainConfig) -> Tree {
    let mut weight_of = vec![0.0; grads.len()];
    for (&row, &w) in rows.iter().zip(weights.iter()) {
        weight_of[row as usize] = w;
    }
    let ctx = GrowContext { binned, grads, weight_of, config };

    let stats = ctx.node_stats(rows);
    let root_value = leaf_value(stats.grad, stats.hess, config.lambda_l2);
    let mut nodes = vec![TreeNode::leaf(root_value, rows.len() as u32)];

    if rows.len() < 2 * config.min_data_in_leaf {
        return Tree { nodes };
    }

    let mut heap: BinaryHeap<Frontier> = BinaryHeap::new();
    let mut seq = 0usize;
    if let Some(split) = ctx.best_split(rows, &stats) {
        heap.push(Frontier { gain: split.gain, seq, node_id: 0, rows: rows.to_vec(), stats, split });
        seq += 1;
    }

    let mut n_leaves = 1usize;
    while n_leaves < config.num_leaves {
        let Some(entry) = heap.pop() else { break };
        let Frontier { node_id, rows, stats, split, .. } = entry;

        let codes = &binned.codes[split.feature];
        let mut left_rows = Vec::new();
        let mut right_rows = Vec::new();
        for &row in &rows {
            let code = codes[row as usize];
            let go_left = if code == MISSING_BIN { split.default_left } else { code <= split.bin };
            if go_left {
                left_rows.push(row);
            } else {
                right_rows.push(row);
            }
        }

        let left_stats = ctx.node_stats(&left_rows);
        let right_stats = NodeStats {
            grad: stats.grad - left_stats.grad,
            hess: stats.hess - left_stats.hess,
            count: stats.count - left_stats.count,
        };

        let left_id = nodes.len();
        nodes.push(TreeNode::leaf(leaf_value(left_stats.grad, left_stats.hess, config.lambda_l2), left_rows.len() as u32));
        let right_id = nodes.len();
        nodes.push(TreeNode::leaf(
            leaf_value(right_stats.grad, right_stats.hess, config.lambda_l2),
            right_rows.len() as u32,
        ));

        let node = &mut nodes[node_id];
        node.feature = split.feature as u32;
        node.threshold = split.threshold;
        node.default_left = split.default_left;
        node.left = left_id as i32;
        node.right = right_id as i32;
        node.value = 0.0;
        n_leaves += 1;

        for (child_id, child_rows, child_stats) in
            [(left_id, left_rows, left_stats), (right_id, right_rows, right_stats)]
        {
            if child_rows.len() >= 2 * config.min_data_in_leaf {
                if let Some(split) = ctx.best_split(&child_rows, &child_stats) {
                    heap.push(Frontier {
                        gain: split.gain,
                        seq,
                        node_id: child_id,
                        rows: child_rows,
                        stats: child_stats,
                        split,
                    });
                    seq += 1;
                }
            }
        }
    }

    Tree { nodes }
}
