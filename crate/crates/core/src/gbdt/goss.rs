//! Gradient-based one-side sampling.
//!
//! Keep every sample in the top `a` fraction by absolute gradient with
//! weight 1; keep a uniform random `b` fraction of the remainder,
//! re-weighted by `(1 - a) / b` so the small-gradient mass stays
//! unbiased in the weighted gradient sums.

use rand::seq::index::sample as index_sample;
use rand_chacha::ChaCha8Rng;

/// Select the rows used to grow one tree. Returns the kept row positions
/// in ascending order with their aligned weights; deterministic for a
/// given RNG state. Ties in |gradient| break toward the lower index.
pub fn goss_sample(gradients: &[f64], a: f64, b: f64, rng: &mut ChaCha8Rng) -> (Vec<u32>, Vec<f64>) {
    let n = gradients.len();
    let top_n = (a * n as f64).ceil() as usize;
    let rand_n = (b * n as f64).ceil() as usize;

    if top_n + rand_n >= n {
        return ((0..n as u32).collect(), vec![1.0; n]);
    }

    let mut order: Vec<u32> = (0..n as u32).collect();
    // stable sort: equal |gradient| keeps ascending index order
    order.sort_by(|&i, &j| gradients[j as usize].abs().total_cmp(&gradients[i as usize].abs()));

    let rest = &order[top_n..];
    let picks = index_sample(rng, rest.len(), rand_n);

    let small_weight = (1.0 - a) / b;
    let mut kept: Vec<(u32, f64)> = order[..top_n].iter().map(|&i| (i, 1.0)).collect();
    kept.extend(picks.iter().map(|k| (rest[k], small_weight)));
    kept.sort_by_key(|(i, _)| *i);

    let rows = kept.iter().map(|(i, _)| *i).collect();
    let weights = kept.iter().map(|(_, w)| *w).collect();
    (rows, weights)
}
