//! The feature matrix with group/label metadata: construction from
//! extracted vectors, per-fold standardization, per-class statistics,
//! and CSV interchange.
//!
//! CSV schema: UTF-8, comma-separated, header row first. Reserved
//! columns `speaker_id` (string) and `label` (0/1); every other column
//! is a numeric feature. Lines starting with `#` before the header are
//! ignored so reports can carry a config-hash banner.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::select::mann_whitney_u;

/// N x D feature matrix plus row metadata. Immutable in practice: the
/// pipeline always derives new tables instead of mutating.
#[derive(Debug, Clone)]
pub struct FeatureTable {
    pub rows: Vec<Vec<f64>>,
    pub column_names: Vec<String>,
    /// Speaker (group) id per row.
    pub groups: Vec<String>,
    /// Binary label per row: PD = 1, HC = 0.
    pub labels: Vec<u8>,
}

impl FeatureTable {
    pub fn new(
        rows: Vec<Vec<f64>>,
        column_names: Vec<String>,
        groups: Vec<String>,
        labels: Vec<u8>,
    ) -> Result<FeatureTable> {
        let table = FeatureTable { rows, column_names, groups, labels };
        table.validate()?;
        Ok(table)
    }

    fn validate(&self) -> Result<()> {
        let n = self.rows.len();
        let d = self.column_names.len();
        if n == 0 || d == 0 {
            return Err(Error::InvalidInput("empty feature table".into()));
        }
        if self.groups.len() != n || self.labels.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.groups.len().min(self.labels.len()),
            });
        }
        for row in &self.rows {
            if row.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: row.len() });
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("feature value {v}")));
            }
        }
        let mut sorted = self.column_names.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != d {
            return Err(Error::Schema("duplicate column names".into()));
        }
        if self.labels.iter().any(|&l| l > 1) {
            return Err(Error::Schema("labels must be 0 or 1".into()));
        }
        // Every group carries exactly one label.
        let mut seen: std::collections::HashMap<&str, u8> = std::collections::HashMap::new();
        for (g, &l) in self.groups.iter().zip(&self.labels) {
            match seen.insert(g.as_str(), l) {
                Some(prev) if prev != l => {
                    return Err(Error::Schema(format!(
                        "group {g} appears with labels {prev} and {l}"
                    )))
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_features(&self) -> usize {
        self.column_names.len()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    pub fn distinct_groups(&self) -> Vec<String> {
        let mut out = Vec::new();
        for g in &self.groups {
            if !out.contains(g) {
                out.push(g.clone());
            }
        }
        out
    }

    /// A table restricted to the masked columns (used by selection).
    pub fn select_columns(&self, mask: &[bool]) -> Result<FeatureTable> {
        if mask.len() != self.num_features() {
            return Err(Error::DimensionMismatch {
                expected: self.num_features(),
                got: mask.len(),
            });
        }
        let keep: Vec<usize> = (0..mask.len()).filter(|&j| mask[j]).collect();
        if keep.is_empty() {
            return Err(Error::InvalidInput("mask selects no columns".into()));
        }
        FeatureTable::new(
            self.rows
                .iter()
                .map(|r| keep.iter().map(|&j| r[j]).collect())
                .collect(),
            keep.iter().map(|&j| self.column_names[j].clone()).collect(),
            self.groups.clone(),
            self.labels.clone(),
        )
    }
}

/// Assemble a table from extracted feature vectors (input order kept).
pub fn build_table(vectors: &[FeatureVector]) -> Result<FeatureTable> {
    if vectors.is_empty() {
        return Err(Error::InvalidInput("no feature vectors".into()));
    }
    let names: Vec<String> = crate::features::feature_names()
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut rows = Vec::with_capacity(vectors.len());
    let mut groups = Vec::with_capacity(vectors.len());
    let mut labels = Vec::with_capacity(vectors.len());
    for v in vectors {
        if v.values.len() != names.len() {
            return Err(Error::DimensionMismatch { expected: names.len(), got: v.values.len() });
        }
        let label = v.label.as_binary().ok_or_else(|| {
            Error::Schema(format!("segment of {} has no PD/HC label", v.speaker_id))
        })?;
        rows.push(v.values.clone());
        groups.push(v.speaker_id.clone());
        labels.push(label);
    }
    FeatureTable::new(rows, names, groups, labels)
}

/// Per-column affine transform fit on training rows only. Constant
/// columns pass through unscaled and are flagged.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub constant: Vec<bool>,
}

impl Standardizer {
    pub fn fit(table: &FeatureTable, row_mask: &[bool]) -> Result<Standardizer> {
        if row_mask.len() != table.num_rows() {
            return Err(Error::DimensionMismatch {
                expected: table.num_rows(),
                got: row_mask.len(),
            });
        }
        let idx: Vec<usize> = (0..row_mask.len()).filter(|&i| row_mask[i]).collect();
        if idx.len() < 2 {
            return Err(Error::InvalidInput("standardizer needs at least 2 rows".into()));
        }
        let d = table.num_features();
        let mut mean = vec![0.0; d];
        let mut std = vec![1.0; d];
        let mut constant = vec![false; d];
        for j in 0..d {
            let m = idx.iter().map(|&i| table.rows[i][j]).sum::<f64>() / idx.len() as f64;
            let var = idx
                .iter()
                .map(|&i| (table.rows[i][j] - m).powi(2))
                .sum::<f64>()
                / idx.len() as f64;
            mean[j] = m;
            let s = var.sqrt();
            if s == 0.0 {
                constant[j] = true;
            } else {
                std[j] = s;
            }
        }
        Ok(Standardizer { mean, std, constant })
    }

    pub fn fit_all(table: &FeatureTable) -> Result<Standardizer> {
        Standardizer::fit(table, &vec![true; table.num_rows()])
    }

    pub fn apply(&self, table: &FeatureTable) -> Result<FeatureTable> {
        if self.mean.len() != table.num_features() {
            return Err(Error::DimensionMismatch {
                expected: self.mean.len(),
                got: table.num_features(),
            });
        }
        let rows = table.rows.iter().map(|r| self.apply_row(r)).collect();
        FeatureTable::new(
            rows,
            table.column_names.clone(),
            table.groups.clone(),
            table.labels.clone(),
        )
    }

    pub fn apply_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(j, &v)| {
                if self.constant[j] {
                    v
                } else {
                    (v - self.mean[j]) / self.std[j]
                }
            })
            .collect()
    }

    pub fn apply_matrix(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.apply_row(r)).collect()
    }
}

/// Per-feature class statistics: mean +/- std for each class plus the
/// Mann-Whitney p-value of the class difference.
#[derive(Debug, Clone)]
pub struct GroupStats {
    pub feature_names: Vec<String>,
    pub pd_mean: Vec<f64>,
    pub pd_std: Vec<f64>,
    pub hc_mean: Vec<f64>,
    pub hc_std: Vec<f64>,
    pub p_value: Vec<f64>,
}

pub fn group_stats(table: &FeatureTable) -> Result<GroupStats> {
    let pd_rows: Vec<usize> = (0..table.num_rows()).filter(|&i| table.labels[i] == 1).collect();
    let hc_rows: Vec<usize> = (0..table.num_rows()).filter(|&i| table.labels[i] == 0).collect();
    if pd_rows.is_empty() || hc_rows.is_empty() {
        return Err(Error::InvalidInput("group statistics need both classes".into()));
    }
    let d = table.num_features();
    let mut out = GroupStats {
        feature_names: table.column_names.clone(),
        pd_mean: Vec::with_capacity(d),
        pd_std: Vec::with_capacity(d),
        hc_mean: Vec::with_capacity(d),
        hc_std: Vec::with_capacity(d),
        p_value: Vec::with_capacity(d),
    };
    for j in 0..d {
        let pd: Vec<f64> = pd_rows.iter().map(|&i| table.rows[i][j]).collect();
        let hc: Vec<f64> = hc_rows.iter().map(|&i| table.rows[i][j]).collect();
        out.pd_mean.push(crate::dsp::mean(&pd));
        out.pd_std.push(crate::dsp::std_pop(&pd));
        out.hc_mean.push(crate::dsp::mean(&hc));
        out.hc_std.push(crate::dsp::std_pop(&hc));
        out.p_value.push(mann_whitney_u(&pd, &hc)?.p);
    }
    Ok(out)
}

pub fn write_csv(table: &FeatureTable, path: &Path) -> Result<()> {
    let mut out = String::from("speaker_id,label");
    for name in &table.column_names {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for i in 0..table.num_rows() {
        write!(out, "{},{}", table.groups[i], table.labels[i]).unwrap();
        for v in &table.rows[i] {
            // Shortest representation that round-trips.
            write!(out, ",{v}").unwrap();
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::WriteFailed {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

pub fn read_csv(path: &Path) -> Result<FeatureTable> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::UnreadableFile {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    let mut lines = text.lines().filter(|l| !l.trim_start().starts_with('#'));
    let header = lines.next().ok_or_else(|| Error::Schema("empty CSV".into()))?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    let speaker_col = columns
        .iter()
        .position(|&c| c == "speaker_id")
        .ok_or_else(|| Error::Schema("missing reserved column `speaker_id`".into()))?;
    let label_col = columns
        .iter()
        .position(|&c| c == "label")
        .ok_or_else(|| Error::Schema("missing reserved column `label`".into()))?;
    let feature_cols: Vec<usize> = (0..columns.len())
        .filter(|&j| j != speaker_col && j != label_col)
        .collect();
    if feature_cols.is_empty() {
        return Err(Error::Schema("no feature columns".into()));
    }

    let mut rows = Vec::new();
    let mut groups = Vec::new();
    let mut labels = Vec::new();
    for (line_no, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != columns.len() {
            return Err(Error::Schema(format!(
                "row {} has {} cells, header has {}",
                line_no + 2,
                cells.len(),
                columns.len()
            )));
        }
        groups.push(cells[speaker_col].to_string());
        labels.push(match cells[label_col] {
            "0" => 0,
            "1" => 1,
            other => {
                return Err(Error::Schema(format!(
                    "row {}: label must be 0 or 1, got {other:?}",
                    line_no + 2
                )))
            }
        });
        let mut row = Vec::with_capacity(feature_cols.len());
        for &j in &feature_cols {
            let v: f64 = cells[j].parse().map_err(|_| {
                Error::Schema(format!(
                    "row {}: non-numeric cell {:?} in column {}",
                    line_no + 2,
                    cells[j],
                    columns[j]
                ))
            })?;
            row.push(v);
        }
        rows.push(row);
    }
    FeatureTable::new(
        rows,
        feature_cols.iter().map(|&j| columns[j].to_string()).collect(),
        groups,
        labels,
    )
}
