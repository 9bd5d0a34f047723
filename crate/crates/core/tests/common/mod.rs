//! Shared builders for integration tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sagaze_core::gbdt::{Tree, TreeEnsemble, TreeNode};

fn random_tree(rng: &mut ChaCha8Rng, p: usize, depth: usize, cover: u32) -> Vec<TreeNode> {
    fn build(nodes: &mut Vec<TreeNode>, rng: &mut ChaCha8Rng, p: usize, depth: usize, cover: u32) -> usize {
        let idx = nodes.len();
        if depth == 0 || cover < 2 || rng.gen_bool(0.2) {
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

/// Random ensemble with conserved covers; duplicate features along a
/// path are allowed, exercising the unwind logic.
pub fn random_ensemble(seed: u64, p: usize, n_trees: usize, depth: usize) -> TreeEnsemble {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let trees: Vec<Tree> = (0..n_trees)
        .map(|_| {
            let cover = rng.gen_range(40..400);
            Tree { nodes: random_tree(&mut rng, p, depth, cover) }
        })
        .collect();
    let ensemble = TreeEnsemble {
        base_score: rng.gen_range(-0.5..0.5),
        learning_rate: rng.gen_range(0.05..1.0),
        feature_names: (0..p).map(|i| format!("f{i}")).collect(),
        trees,
    };
    ensemble.validate().expect("random ensemble is structurally valid");
    ensemble
}

/// Random instance with occasional masked cells.
pub fn random_instance(seed: u64, p: usize) -> Vec<Option<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..p).map(|_| if rng.gen_bool(0.15) { None } else { Some(rng.gen_range(-1.3..1.3)) }).collect()
}
