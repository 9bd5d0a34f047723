//! File outputs for explanation artifacts.
//!
//! `shap.csv`: one row per (instance, feature) with the feature value and
//! contribution. `importance.csv`: feature, impact, rank. `main_effects.csv`:
//! per-bin summaries plus the correlation columns. `importance.svg`: a
//! static bar chart of global impacts.

use std::path::Path;

use crate::features::{Dataset, FeatureKind};
use crate::{Error, Result};

use super::{Explanation, ImportanceTable, MainEffect};

pub fn write_shap_csv(path: &Path, ds: &Dataset, explanations: &[Explanation]) -> Result<()> {
    let file = path.display().to_string();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(&file, None, None, e.to_string()))?;
    w.write_record(["participant_id", "trial_id", "feature", "value", "phi", "base_value"])
        .map_err(|e| Error::csv(&file, None, None, e.to_string()))?;
    for (r, ex) in explanations.iter().enumerate() {
        for f in 0..ds.n_features() {
            w.write_record(&[
                ds.participant_id(r).to_string(),
                ds.trial_id(r).to_string(),
                ds.feature_names()[f].clone(),
                ds.value(f, r).map(|v| v.to_string()).unwrap_or_default(),
                ex.contributions[f].to_string(),
                ex.base_value.to_string(),
            ])
            .map_err(|e| Error::csv(&file, None, None, e.to_string()))?;
        }
    }
    w.flush().map_err(|e| Error::io(&file, e))?;
    Ok(())
}

pub fn write_importance_csv(path: &Path, table: &ImportanceTable) -> Result<()> {
    let file = path.display().to_string();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(&file, None, None, e.to_string()))?;
    w.write_record(["feature", "impact", "rank"]).map_err(|e| Error::csv(&file, None, None, e.to_string()))?;
    for &f in &table.order() {
        w.write_record(&[table.feature_names[f].clone(), table.impact[f].to_string(), table.rank[f].to_string()])
            .map_err(|e| Error::csv(&file, None, None, e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(&file, e))?;
    Ok(())
}

pub fn write_main_effects_csv(path: &Path, effects: &[MainEffect]) -> Result<()> {
    let file = path.display().to_string();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(&file, None, None, e.to_string()))?;
    w.write_record([
        "feature", "kind", "bin", "lo", "hi", "count", "min", "q1", "median", "q3", "max", "r", "p", "degenerate",
    ])
    .map_err(|e| Error::csv(&file, None, None, e.to_string()))?;
    for effect in effects {
        let kind = match effect.kind {
            FeatureKind::Continuous => "continuous",
            FeatureKind::Nominal => "nominal",
        };
        if effect.bins.is_empty() {
            w.write_record(&[
                effect.feature.clone(),
                kind.to_string(),
                String::new(),
                String::new(),
                String::new(),
                "0".to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                effect.correlation.to_string(),
                effect.p_value.to_string(),
                effect.degenerate.to_string(),
            ])
            .map_err(|e| Error::csv(&file, None, None, e.to_string()))?;
            continue;
        }
        for (b, bin) in effect.bins.iter().enumerate() {
            w.write_record(&[
                effect.feature.clone(),
                kind.to_string(),
                b.to_string(),
                bin.lo.to_string(),
                bin.hi.to_string(),
                bin.count.to_string(),
                bin.min.to_string(),
                bin.q1.to_string(),
                bin.median.to_string(),
                bin.q3.to_string(),
                bin.max.to_string(),
                effect.correlation.to_string(),
                effect.p_value.to_string(),
                effect.degenerate.to_string(),
            ])
            .map_err(|e| Error::csv(&file, None, None, e.to_string()))?;
        }
    }
    w.flush().map_err(|e| Error::io(&file, e))?;
    Ok(())
}

/// Static horizontal bar chart of global impacts, most important on top.
pub fn write_importance_svg(path: &Path, table: &ImportanceTable) -> Result<()> {
    let order = table.order();
    let max_impact = order.first().map(|&f| table.impact[f]).unwrap_or(0.0).max(f64::MIN_POSITIVE);
    let bar_h = 18;
    let gap = 6;
    let label_w = 170;
    let chart_w = 420;
    let height = order.len() * (bar_h + gap) + gap;
    let width = label_w + chart_w + 80;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    for (i, &f) in order.iter().enumerate() {
        let y = gap + i * (bar_h + gap);
        let w = (table.impact[f] / max_impact * chart_w as f64).round().max(1.0);
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n",
            label_w - 6,
            y + bar_h - 4,
            table.feature_names[f]
        ));
        svg.push_str(&format!(
            "  <rect x=\"{label_w}\" y=\"{y}\" width=\"{w}\" height=\"{bar_h}\" fill=\"#4878d0\"/>\n"
        ));
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\">{:.4}</text>\n",
            label_w as f64 + w + 6.0,
            y + bar_h - 4,
            table.impact[f]
        ));
    }
    svg.push_str("</svg>\n");
    std::fs::write(path, svg).map_err(|e| Error::io(path.display().to_string(), e))
}
