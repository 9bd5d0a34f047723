//! Equal-frequency feature quantization for histogram tree growth.

use crate::features::Dataset;

/// Bin code for masked values.
pub const MISSING_BIN: u16 = u16::MAX;

/// Bin boundaries for one feature: `edges[k]` is the inclusive upper
/// threshold of bin `k`; values above the last edge fall in the final
/// bin. Edges sit midway between adjacent distinct training values, so
/// raw-value routing (`v <= edge`) and bin routing agree exactly on the
/// training rows.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureBins {
    pub edges: Vec<f64>,
}

impl FeatureBins {
    pub fn n_bins(&self) -> usize {
        self.edges.len() + 1
    }

    pub fn code(&self, value: f64) -> u16 {
        self.edges.partition_point(|e| value > *e) as u16
    }

    /// Quantize the present values of one feature into at most `max_bins`
    /// bins by equal-frequency boundaries. When there are no more distinct
    /// values than bins, every distinct value gets its own bin.
    pub fn build(values: &mut [f64], max_bins: usize) -> FeatureBins {
        values.sort_by(|a, b| a.total_cmp(b));
        let mut distinct: Vec<(f64, usize)> = Vec::new();
        for &v in values.iter() {
            match distinct.last_mut() {
                Some((last, c)) if *last == v => *c += 1,
                _ => distinct.push((v, 1)),
            }
        }
        let n = values.len();
        let mut edges = Vec::new();
        if distinct.len() <= max_bins {
            for w in distinct.windows(2) {
                edges.push(midpoint(w[0].0, w[1].0));
            }
        } else {
            let mut cum = 0usize;
            for (i, (v, c)) in distinct.iter().take(distinct.len() - 1).enumerate() {
                cum += c;
                let target = (edges.len() + 1) as f64 * n as f64 / max_bins as f64;
                if cum as f64 >= target && edges.len() < max_bins - 1 {
                    edges.push(midpoint(*v, distinct[i + 1].0));
                }
            }
        }
        FeatureBins { edges }
    }
}

fn midpoint(a: f64, b: f64) -> f64 {
    a + (b - a) / 2.0
}

/// Per-feature bins plus the binned code matrix over the training rows.
#[derive(Debug, Clone)]
pub struct BinnedDataset {
    pub features: Vec<FeatureBins>,
    /// `codes[feature][position]`, positions indexing into the training
    /// row list; `MISSING_BIN` where the cell is masked.
    pub codes: Vec<Vec<u16>>,
    pub n_rows: usize,
}

impl BinnedDataset {
    pub fn build(ds: &Dataset, rows: &[usize], max_bins: usize) -> BinnedDataset {
        let mut features = Vec::with_capacity(ds.n_features());
        let mut codes = Vec::with_capacity(ds.n_features());
        for f in 0..ds.n_features() {
            let mut present: Vec<f64> = rows.iter().filter_map(|&r| ds.value(f, r)).collect();
            let bins = FeatureBins::build(&mut present, max_bins);
            let col: Vec<u16> = rows
                .iter()
                .map(|&r| match ds.value(f, r) {
                    Some(v) => bins.code(v),
                    None => MISSING_BIN,
                })
                .collect();
            features.push(bins);
            codes.push(col);
        }
        BinnedDataset { features, codes, n_rows: rows.len() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_distinct_values_get_exact_bins() {
        let mut values = vec![1.0, 2.0, 2.0, 5.0, 1.0];
        let bins = FeatureBins::build(&mut values, 255);
        assert_eq!(bins.n_bins(), 3);
        assert_eq!(bins.edges, vec![1.5, 3.5]);
        assert_eq!(bins.code(1.0), 0);
        assert_eq!(bins.code(2.0), 1);
        assert_eq!(bins.code(5.0), 2);
        assert_eq!(bins.code(3.5), 1); // inclusive upper edge
        assert_eq!(bins.code(3.6), 2);
    }

    #[test]
    fn constant_feature_is_a_single_bin() {
        let mut values = vec![4.0; 100];
        let bins = FeatureBins::build(&mut values, 255);
        assert_eq!(bins.n_bins(), 1);
        assert_eq!(bins.code(4.0), 0);
    }

    #[test]
    fn uniform_values_fill_bins_evenly() {
        // rank-count oracle: 10 000 distinct values into 255 bins means
        // every bin holds floor or ceil of 10000/255 rank positions.
        let mut values: Vec<f64> = (0..10_000).map(|i| (i as f64) * 0.001 + (i as f64).sin() * 1e-7).collect();
        let sorted = {
            let mut v = values.clone();
            v.sort_by(|a, b| a.total_cmp(b));
            v
        };
        let bins = FeatureBins::build(&mut values, 255);
        assert_eq!(bins.n_bins(), 255);
        let mut counts = vec![0usize; bins.n_bins()];
        for v in &sorted {
            counts[bins.code(*v) as usize] += 1;
        }
        let lo = 10_000 / 255;
        let hi = lo + 1;
        for (b, c) in counts.iter().enumerate() {
            assert!(*c == lo || *c == hi, "bin {b} holds {c} ranks, expected {lo} or {hi}");
        }
    }

    #[test]
    fn masked_values_get_the_dedicated_bin() {
        let mut ds = Dataset::new(vec!["a".into()]).unwrap();
        ds.push_row(1, 1, &[Some(1.0)], Some(0.0)).unwrap();
        ds.push_row(1, 2, &[None], Some(0.0)).unwrap();
        ds.push_row(1, 3, &[Some(2.0)], Some(0.0)).unwrap();
        let binned = BinnedDataset::build(&ds, &[0, 1, 2], 255);
        assert_eq!(binned.codes[0], vec![0, MISSING_BIN, 1]);
    }
}
