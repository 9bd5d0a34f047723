//! Column-major dataset with an explicit missing-value mask.

use std::collections::BTreeSet;
use std::path::Path;

use crate::{Error, Result};

use super::{feature_kind, FeatureKind, TrialRecord, EYE_FEATURE_START, FEATURE_NAMES};

/// An ordered table of trials: id columns, named feature columns with
/// per-cell masks, and an optional SA label column.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    feature_names: Vec<String>,
    kinds: Vec<FeatureKind>,
    participant_ids: Vec<u32>,
    trial_ids: Vec<u32>,
    /// `columns[f][r]`; meaningful only where `masks[f][r]` is true.
    columns: Vec<Vec<f64>>,
    masks: Vec<Vec<bool>>,
    sa: Vec<Option<f64>>,
}

impl Dataset {
    pub fn new(feature_names: Vec<String>) -> Result<Dataset> {
        let unique: BTreeSet<&String> = feature_names.iter().collect();
        if unique.len() != feature_names.len() {
            return Err(Error::Registry("duplicate feature names".into()));
        }
        let kinds = feature_names.iter().map(|n| feature_kind(n)).collect();
        let columns = vec![Vec::new(); feature_names.len()];
        let masks = vec![Vec::new(); feature_names.len()];
        Ok(Dataset {
            feature_names,
            kinds,
            participant_ids: Vec::new(),
            trial_ids: Vec::new(),
            columns,
            masks,
            sa: Vec::new(),
        })
    }

    pub fn push_row(&mut self, participant_id: u32, trial_id: u32, values: &[Option<f64>], sa: Option<f64>) -> Result<()> {
        if values.len() != self.feature_names.len() {
            return Err(Error::Invalid(format!(
                "row has {} values, dataset has {} features",
                values.len(),
                self.feature_names.len()
            )));
        }
        if self
            .participant_ids
            .iter()
            .zip(self.trial_ids.iter())
            .any(|(&p, &t)| p == participant_id && t == trial_id)
        {
            return Err(Error::Invalid(format!("duplicate (participant, trial) key ({participant_id}, {trial_id})")));
        }
        self.participant_ids.push(participant_id);
        self.trial_ids.push(trial_id);
        for (f, v) in values.iter().enumerate() {
            self.columns[f].push(v.unwrap_or(0.0));
            self.masks[f].push(v.is_some());
        }
        self.sa.push(sa);
        Ok(())
    }

    pub fn from_records(records: &[TrialRecord]) -> Result<Dataset> {
        let mut ds = Dataset::new(FEATURE_NAMES.iter().map(|s| s.to_string()).collect())?;
        for r in records {
            r.validate()?;
            ds.push_row(r.participant_id, r.trial_id, &r.values, r.sa)?;
        }
        Ok(ds)
    }

    pub fn n_rows(&self) -> usize {
        self.participant_ids.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn kinds(&self) -> &[FeatureKind] {
        &self.kinds
    }

    pub fn participant_id(&self, row: usize) -> u32 {
        self.participant_ids[row]
    }

    pub fn trial_id(&self, row: usize) -> u32 {
        self.trial_ids[row]
    }

    /// Value at (feature, row); `None` when masked.
    pub fn value(&self, feature: usize, row: usize) -> Option<f64> {
        if self.masks[feature][row] {
            Some(self.columns[feature][row])
        } else {
            None
        }
    }

    pub fn sa(&self, row: usize) -> Option<f64> {
        self.sa[row]
    }

    pub fn set_sa(&mut self, row: usize, sa: f64) {
        self.sa[row] = Some(sa);
    }

    /// All labels; errors when any row is unscored.
    pub fn labels(&self) -> Result<Vec<f64>> {
        self.sa
            .iter()
            .enumerate()
            .map(|(i, s)| s.ok_or_else(|| Error::Invalid(format!("row {i} has no sa label"))))
            .collect()
    }

    /// Borrowed view of one row's feature values for prediction.
    pub fn row(&self, row: usize) -> DatasetRow<'_> {
        DatasetRow { dataset: self, row }
    }

    /// Restrict to the 16 eye-tracking features (registry columns 13-28).
    /// Rows are unchanged; applying the view twice is a no-op.
    pub fn eye_only_view(&self) -> Result<Dataset> {
        let eye_names: Vec<&str> = FEATURE_NAMES[EYE_FEATURE_START..].to_vec();
        let indices: Vec<usize> = eye_names
            .iter()
            .map(|n| {
                self.feature_names
                    .iter()
                    .position(|f| f == n)
                    .ok_or_else(|| Error::Registry(format!("eye-only view needs column `{n}`")))
            })
            .collect::<Result<_>>()?;
        Ok(Dataset {
            feature_names: eye_names.iter().map(|s| s.to_string()).collect(),
            kinds: indices.iter().map(|&i| self.kinds[i]).collect(),
            participant_ids: self.participant_ids.clone(),
            trial_ids: self.trial_ids.clone(),
            columns: indices.iter().map(|&i| self.columns[i].clone()).collect(),
            masks: indices.iter().map(|&i| self.masks[i].clone()).collect(),
            sa: self.sa.clone(),
        })
    }

    /// Restrict to an ordered subset of feature columns.
    pub fn select_columns(&self, indices: &[usize]) -> Result<Dataset> {
        for &i in indices {
            if i >= self.n_features() {
                return Err(Error::Registry(format!("column index {i} out of range")));
            }
        }
        Ok(Dataset {
            feature_names: indices.iter().map(|&i| self.feature_names[i].clone()).collect(),
            kinds: indices.iter().map(|&i| self.kinds[i]).collect(),
            participant_ids: self.participant_ids.clone(),
            trial_ids: self.trial_ids.clone(),
            columns: indices.iter().map(|&i| self.columns[i].clone()).collect(),
            masks: indices.iter().map(|&i| self.masks[i].clone()).collect(),
            sa: self.sa.clone(),
        })
    }

    /// Write as CSV: `participant_id,trial_id,<features...>,sa`; masked
    /// cells and unscored labels serialize as empty fields.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = path.display().to_string();
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(&file, None, None, e.to_string()))?;
        let mut header = vec!["participant_id".to_string(), "trial_id".to_string()];
        header.extend(self.feature_names.iter().cloned());
        header.push("sa".to_string());
        w.write_record(&header).map_err(|e| Error::csv(&file, None, None, e.to_string()))?;
        for r in 0..self.n_rows() {
            let mut record = vec![self.participant_ids[r].to_string(), self.trial_ids[r].to_string()];
            for f in 0..self.n_features() {
                record.push(match self.value(f, r) {
                    Some(v) => v.to_string(),
                    None => String::new(),
                });
            }
            record.push(self.sa[r].map(|v| v.to_string()).unwrap_or_default());
            w.write_record(&record).map_err(|e| Error::csv(&file, None, None, e.to_string()))?;
        }
        w.flush().map_err(|e| Error::io(&file, e))?;
        Ok(())
    }

    /// Load a dataset CSV with any feature columns between the id columns
    /// and `sa`. Rejects duplicate (participant, trial) keys and
    /// non-numeric cells with row/column diagnostics.
    pub fn load_csv(path: &Path) -> Result<Dataset> {
        let file = path.display().to_string();
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(false)
            .from_path(path)
            .map_err(|e| Error::csv(&file, None, None, e.to_string()))?;
        let headers: Vec<String> =
            reader.headers().map_err(|e| Error::csv(&file, None, None, e.to_string()))?.iter().map(|s| s.to_string()).collect();
        if headers.len() < 3 || headers[0] != "participant_id" || headers[1] != "trial_id" || headers[headers.len() - 1] != "sa"
        {
            return Err(Error::csv(
                &file,
                None,
                None,
                "header must be `participant_id,trial_id,<features...>,sa`",
            ));
        }
        let feature_names: Vec<String> = headers[2..headers.len() - 1].to_vec();
        let mut ds = Dataset::new(feature_names.clone())?;

        for (idx, record) in reader.records().enumerate() {
            let row = idx + 2;
            let record = record.map_err(|e| Error::csv(&file, Some(row), None, e.to_string()))?;
            if record.len() != headers.len() {
                return Err(Error::csv(&file, Some(row), None, format!("expected {} fields, got {}", headers.len(), record.len())));
            }
            let parse_id = |field: &str, col: &str| -> Result<u32> {
                field
                    .trim()
                    .parse::<u32>()
                    .map_err(|_| Error::csv(&file, Some(row), Some(col), format!("non-integer id `{field}`")))
            };
            let participant = parse_id(&record[0], "participant_id")?;
            let trial = parse_id(&record[1], "trial_id")?;
            let mut values = Vec::with_capacity(feature_names.len());
            for (f, name) in feature_names.iter().enumerate() {
                let field = record[f + 2].trim();
                if field.is_empty() {
                    values.push(None);
                } else {
                    let v = field
                        .parse::<f64>()
                        .map_err(|_| Error::csv(&file, Some(row), Some(name), format!("non-numeric value `{field}`")))?;
                    values.push(Some(v));
                }
            }
            let sa_field = record[headers.len() - 1].trim();
            let sa = if sa_field.is_empty() {
                None
            } else {
                Some(
                    sa_field
                        .parse::<f64>()
                        .map_err(|_| Error::csv(&file, Some(row), Some("sa"), format!("non-numeric value `{sa_field}`")))?,
                )
            };
            ds.push_row(participant, trial, &values, sa)
                .map_err(|e| Error::csv(&file, Some(row), None, e.to_string()))?;
        }
        Ok(ds)
    }

    /// Load with the strict 28-column registry check: the feature columns
    /// must be exactly the canonical names, in order.
    pub fn load_table_csv(path: &Path) -> Result<Dataset> {
        let ds = Dataset::load_csv(path)?;
        let file = path.display().to_string();
        for (i, expected) in FEATURE_NAMES.iter().enumerate() {
            match ds.feature_names.get(i) {
                Some(got) if got == expected => {}
                Some(got) => {
                    return Err(Error::csv(&file, None, Some(expected), format!("expected column `{expected}`, found `{got}`")))
                }
                None => return Err(Error::csv(&file, None, Some(expected), format!("missing column `{expected}`"))),
            }
        }
        if ds.feature_names.len() > FEATURE_NAMES.len() {
            let extra = &ds.feature_names[FEATURE_NAMES.len()];
            return Err(Error::csv(&file, None, Some(extra), format!("unknown column `{extra}`")));
        }
        Ok(ds)
    }
}

/// One row viewed through the dataset's feature registry.
#[derive(Debug, Clone, Copy)]
pub struct DatasetRow<'a> {
    dataset: &'a Dataset,
    row: usize,
}

impl crate::gbdt::FeatureRow for DatasetRow<'_> {
    fn feature(&self, index: usize) -> Option<f64> {
        self.dataset.value(index, self.row)
    }
}
