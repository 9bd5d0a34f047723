//! Global importance, per-feature main effects, and instance reports.

use crate::features::{Dataset, FeatureKind};
use crate::gbdt::TreeEnsemble;
use crate::{Error, Result};

use super::stats::{correlation_p_value, pearson, spearman};
use super::{shap_values, Explanation};

/// Global feature importance: summed absolute contributions over a
/// dataset, plus the full (value, contribution) scatter per feature for
/// beeswarm/box rendering.
#[derive(Debug, Clone)]
pub struct ImportanceTable {
    pub feature_names: Vec<String>,
    /// Sum of |phi| over all explained instances, per feature.
    pub impact: Vec<f64>,
    /// `rank[f]` is the 0-based importance rank of feature `f`
    /// (0 = most important). Ties break by feature index.
    pub rank: Vec<usize>,
    /// Per feature: (feature value if present, shap value) per instance.
    pub scatter: Vec<Vec<(Option<f64>, f64)>>,
}

impl ImportanceTable {
    /// Feature indices in descending-importance order.
    pub fn order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.impact.len()).collect();
        order.sort_by(|&a, &b| self.impact[b].total_cmp(&self.impact[a]).then(a.cmp(&b)));
        order
    }
}

/// Build the importance table from per-row explanations aligned with the
/// dataset rows.
pub fn importance_from_explanations(ds: &Dataset, explanations: &[Explanation]) -> Result<ImportanceTable> {
    if explanations.len() != ds.n_rows() {
        return Err(Error::Invalid(format!(
            "{} explanations for {} rows",
            explanations.len(),
            ds.n_rows()
        )));
    }
    let p = ds.n_features();
    let mut impact = vec![0.0; p];
    let mut scatter: Vec<Vec<(Option<f64>, f64)>> = vec![Vec::with_capacity(ds.n_rows()); p];
    for (r, ex) in explanations.iter().enumerate() {
        if ex.contributions.len() != p {
            return Err(Error::Invalid("explanation width does not match the dataset".into()));
        }
        for f in 0..p {
            impact[f] += ex.contributions[f].abs();
            scatter[f].push((ds.value(f, r), ex.contributions[f]));
        }
    }
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| impact[b].total_cmp(&impact[a]).then(a.cmp(&b)));
    let mut rank = vec![0; p];
    for (pos, &f) in order.iter().enumerate() {
        rank[f] = pos;
    }
    Ok(ImportanceTable { feature_names: ds.feature_names().to_vec(), impact, rank, scatter })
}

/// Explain every row of the dataset with one model and aggregate.
pub fn global_importance(ensemble: &TreeEnsemble, ds: &Dataset) -> Result<(ImportanceTable, Vec<Explanation>)> {
    ensemble.check_registry(ds.feature_names())?;
    let explanations: Vec<Explanation> =
        (0..ds.n_rows()).map(|r| shap_values(ensemble, &ds.row(r))).collect::<Result<_>>()?;
    let table = importance_from_explanations(ds, &explanations)?;
    Ok((table, explanations))
}

/// Default bin count for continuous features in main-effect summaries.
pub const DEFAULT_MAIN_EFFECT_BINS: usize = 18;

/// Five-number summary of the contributions falling into one value bin.
#[derive(Debug, Clone, PartialEq)]
pub struct BinSummary {
    /// Inclusive value range of the bin (equal for nominal levels).
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// Main effect of one feature: binned contribution summaries plus the
/// correlation between feature values and contributions.
#[derive(Debug, Clone)]
pub struct MainEffect {
    pub feature: String,
    pub kind: FeatureKind,
    pub bins: Vec<BinSummary>,
    /// Pearson (continuous) or Spearman (nominal) correlation; 0 when
    /// degenerate.
    pub correlation: f64,
    pub p_value: f64,
    pub degenerate: bool,
    /// Set when the feature is masked on every row.
    pub all_masked: bool,
}

fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

fn summarize(lo: f64, hi: f64, mut phis: Vec<f64>) -> BinSummary {
    phis.sort_by(|a, b| a.total_cmp(b));
    BinSummary {
        lo,
        hi,
        count: phis.len(),
        min: phis[0],
        q1: quantile_sorted(&phis, 0.25),
        median: quantile_sorted(&phis, 0.5),
        q3: quantile_sorted(&phis, 0.75),
        max: phis[phis.len() - 1],
    }
}

/// Main effects for every feature: continuous features are binned by
/// equal frequency into at most `bins` bins (default 18, capped at the
/// distinct-value count); nominal features get one bin per level.
pub fn main_effects(ds: &Dataset, explanations: &[Explanation], bins: usize) -> Result<Vec<MainEffect>> {
    main_effects_with_overrides(ds, explanations, bins, &std::collections::BTreeMap::new())
}

/// As [`main_effects`], with per-feature bin-count overrides.
pub fn main_effects_with_overrides(
    ds: &Dataset,
    explanations: &[Explanation],
    bins: usize,
    bins_per_feature: &std::collections::BTreeMap<String, usize>,
) -> Result<Vec<MainEffect>> {
    if explanations.len() != ds.n_rows() {
        return Err(Error::Invalid("explanations do not align with the dataset rows".into()));
    }
    let mut out = Vec::with_capacity(ds.n_features());
    for f in 0..ds.n_features() {
        let bins = bins_per_feature.get(&ds.feature_names()[f]).copied().unwrap_or(bins);
        let kind = ds.kinds()[f];
        let pairs: Vec<(f64, f64)> = (0..ds.n_rows())
            .filter_map(|r| ds.value(f, r).map(|v| (v, explanations[r].contributions[f])))
            .collect();
        if pairs.is_empty() {
            out.push(MainEffect {
                feature: ds.feature_names()[f].clone(),
                kind,
                bins: Vec::new(),
                correlation: 0.0,
                p_value: 1.0,
                degenerate: true,
                all_masked: true,
            });
            continue;
        }

        let values: Vec<f64> = pairs.iter().map(|(v, _)| *v).collect();
        let phis: Vec<f64> = pairs.iter().map(|(_, p)| *p).collect();
        let corr = match kind {
            FeatureKind::Continuous => pearson(&values, &phis),
            FeatureKind::Nominal => spearman(&values, &phis),
        };
        let (correlation, p_value, degenerate) = match corr {
            Some(r) => (r, correlation_p_value(r, pairs.len()), false),
            None => (0.0, 1.0, true),
        };

        let mut sorted = pairs.clone();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut distinct: Vec<f64> = values.clone();
        distinct.sort_by(|a, b| a.total_cmp(b));
        distinct.dedup();

        let bin_summaries = match kind {
            FeatureKind::Nominal => distinct
                .iter()
                .map(|&level| {
                    let phis: Vec<f64> =
                        sorted.iter().filter(|(v, _)| *v == level).map(|(_, p)| *p).collect();
                    summarize(level, level, phis)
                })
                .collect(),
            FeatureKind::Continuous => {
                let n_bins = bins.max(1).min(distinct.len());
                let n = sorted.len();
                let mut summaries = Vec::with_capacity(n_bins);
                let mut start = 0usize;
                for b in 0..n_bins {
                    let mut end = ((b + 1) as f64 * n as f64 / n_bins as f64).round() as usize;
                    // never split identical values across bins
                    while end < n && end > 0 && sorted[end].0 == sorted[end - 1].0 {
                        end += 1;
                    }
                    if b == n_bins - 1 {
                        end = n;
                    }
                    if end <= start {
                        continue;
                    }
                    let slice = &sorted[start..end];
                    summaries.push(summarize(
                        slice[0].0,
                        slice[slice.len() - 1].0,
                        slice.iter().map(|(_, p)| *p).collect(),
                    ));
                    start = end;
                }
                summaries
            }
        };

        out.push(MainEffect {
            feature: ds.feature_names()[f].clone(),
            kind,
            bins: bin_summaries,
            correlation,
            p_value,
            degenerate,
            all_masked: false,
        });
    }
    Ok(out)
}

/// One line of an ordered instance report.
#[derive(Debug, Clone)]
pub struct ContributionLine {
    pub feature: String,
    pub value: Option<f64>,
    pub phi: f64,
}

/// Per-instance explanation: base value, then features sorted by
/// descending |contribution|.
#[derive(Debug, Clone)]
pub struct InstanceReport {
    pub base_value: f64,
    pub prediction: f64,
    pub lines: Vec<ContributionLine>,
    /// |base + sum(phi) - prediction|, printed with the report.
    pub accuracy_gap: f64,
}

pub fn explain_instance(ensemble: &TreeEnsemble, ds: &Dataset, row: usize) -> Result<InstanceReport> {
    ensemble.check_registry(ds.feature_names())?;
    let ex = shap_values(ensemble, &ds.row(row))?;
    let prediction = ensemble.predict_row(&ds.row(row));
    let mut lines: Vec<ContributionLine> = (0..ds.n_features())
        .map(|f| ContributionLine {
            feature: ds.feature_names()[f].clone(),
            value: ds.value(f, row),
            phi: ex.contributions[f],
        })
        .collect();
    lines.sort_by(|a, b| b.phi.abs().total_cmp(&a.phi.abs()).then(a.feature.cmp(&b.feature)));
    let total: f64 = ex.base_value + ex.contributions.iter().sum::<f64>();
    Ok(InstanceReport { base_value: ex.base_value, prediction, lines, accuracy_gap: (total - prediction).abs() })
}

impl InstanceReport {
    /// Text rendering used by the CLI: base value first, features by
    /// descending |contribution|, and the reconstruction check last.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("base_value = {:.6}\n", self.base_value));
        for line in &self.lines {
            let value = match line.value {
                Some(v) => format!("{v}"),
                None => "missing".to_string(),
            };
            out.push_str(&format!("{:>+10.6}  {} = {}\n", line.phi, line.feature, value));
        }
        out.push_str(&format!("prediction = {:.6} (base + contributions, gap {:.3e})\n", self.prediction, self.accuracy_gap));
        out
    }
}
