//! CSV and JSON file formats.
//!
//! * data: header row, a `y` column and any number of feature columns.
//! * groups: `column,group`, one row per feature column.
//! * coefficients: `index,group,value`, index is the 0-based position of the
//!   feature among the data file's feature columns.
//! * truth: `index,group,beta_true`.
//!
//! Floats are written in shortest round-trip form, so re-reading a file
//! reproduces the in-memory values bit for bit.

use std::collections::HashMap;
use std::fs::File;
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SglError};
use crate::model::{Coefficients, GroupedProblem, WeightMode};
use crate::sim::SimDataset;

pub const RESPONSE_COLUMN: &str = "y";

/// A problem loaded from files, with the bookkeeping needed to map the
/// problem's group-contiguous column order back to the file's order.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub problem: GroupedProblem,
    /// Feature names in file order.
    pub feature_names: Vec<String>,
    /// One label per group, in problem order.
    pub group_labels: Vec<String>,
    /// `feature_order[k]` is the file position of problem column `k`.
    pub feature_order: Vec<usize>,
}

impl Dataset {
    /// File position → problem column.
    pub fn problem_positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.feature_order.len()];
        for (k, &orig) in self.feature_order.iter().enumerate() {
            pos[orig] = k;
        }
        pos
    }

    pub fn group_label_of_feature(&self, file_index: usize) -> &str {
        let k = self.problem_positions()[file_index];
        &self.group_labels[self.problem.groups().group_of(k)]
    }

    /// Coefficient rows in file order.
    pub fn coefficient_rows(&self, beta: &Coefficients) -> Vec<CoefficientRow> {
        let pos = self.problem_positions();
        let groups = self.problem.groups();
        (0..self.feature_names.len())
            .map(|i| CoefficientRow {
                index: i,
                group: self.group_labels[groups.group_of(pos[i])].clone(),
                value: beta.as_slice()[pos[i]],
            })
            .collect()
    }

    /// Coefficients in problem order from rows keyed by file index.
    pub fn coefficients_from_rows(&self, rows: &[CoefficientRow], source: &Path) -> Result<Coefficients> {
        let p = self.feature_names.len();
        if rows.len() != p {
            return Err(SglError::input(source, format!("{} coefficient rows for {p} features", rows.len())));
        }
        let pos = self.problem_positions();
        let mut values = vec![f64::NAN; p];
        for row in rows {
            if row.index >= p {
                return Err(SglError::input(source, format!("coefficient index {} out of range", row.index)));
            }
            values[pos[row.index]] = row.value;
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(SglError::input(source, "duplicate or missing coefficient indices"));
        }
        Coefficients::from_vec(values)
    }

    /// Reorders a vector given in file order into problem order.
    pub fn to_problem_order(&self, file_ordered: &[f64]) -> Vec<f64> {
        self.feature_order.iter().map(|&i| file_ordered[i]).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub index: usize,
    pub group: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthRow {
    pub index: usize,
    pub group: String,
    pub beta_true: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct GroupRow {
    column: String,
    group: String,
}

/// Flat run summary written as `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub objective: f64,
    pub sweeps: usize,
    pub converged: bool,
    pub kkt_worst: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub n: usize,
    pub p: usize,
    #[serde(rename = "L")]
    pub n_groups: usize,
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| SglError::input(path, e.to_string()))
}

fn csv_error(path: &Path, e: csv::Error) -> SglError {
    SglError::input(path, e.to_string())
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut reader = csv::Reader::from_reader(open(path)?);
    reader
        .deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(|e| csv_error(path, e))
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    for row in rows {
        writer.serialize(row).map_err(|e| csv_error(path, e))?;
    }
    writer.flush()?;
    Ok(())
}

/// Reads `data` and `groups`, reorders columns so each group is contiguous
/// (groups in order of first appearance) and builds the centered problem.
pub fn read_dataset(data: &Path, groups: &Path, weight_mode: WeightMode) -> Result<Dataset> {
    let mut reader = csv::Reader::from_reader(open(data)?);
    let headers = reader.headers().map_err(|e| csv_error(data, e))?.clone();
    let y_col = headers
        .iter()
        .position(|h| h == RESPONSE_COLUMN)
        .ok_or_else(|| SglError::input(data, "missing `y` column"))?;
    let feature_cols: Vec<usize> = (0..headers.len()).filter(|&c| c != y_col).collect();
    if feature_cols.is_empty() {
        return Err(SglError::input(data, "no feature columns"));
    }
    let feature_names: Vec<String> = feature_cols.iter().map(|&c| headers[c].to_string()).collect();

    let mut y = Vec::new();
    let mut values = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(data, e))?;
        let parse = |c: usize| -> Result<f64> {
            let text = record.get(c).unwrap_or("").trim();
            text.parse::<f64>().map_err(|_| {
                SglError::input(data, format!("row {}: cannot parse `{text}` in column `{}`", line + 2, &headers[c]))
            })
        };
        y.push(parse(y_col)?);
        for &c in &feature_cols {
            values.push(parse(c)?);
        }
    }
    let n = y.len();
    let p = feature_names.len();

    let group_rows: Vec<GroupRow> = read_rows(groups)?;
    let mut label_of: HashMap<&str, &str> = HashMap::new();
    for row in &group_rows {
        if !feature_names.iter().any(|f| f == &row.column) {
            return Err(SglError::input(groups, format!("unknown column `{}`", row.column)));
        }
        if label_of.insert(row.column.as_str(), row.group.as_str()).is_some() {
            return Err(SglError::input(groups, format!("column `{}` listed twice", row.column)));
        }
    }
    let mut group_labels: Vec<String> = Vec::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    for (i, name) in feature_names.iter().enumerate() {
        let label = label_of
            .get(name.as_str())
            .ok_or_else(|| SglError::input(groups, format!("no group for column `{name}`")))?;
        match group_labels.iter().position(|g| g == label) {
            Some(l) => members[l].push(i),
            None => {
                group_labels.push(label.to_string());
                members.push(vec![i]);
            }
        }
    }
    let sizes: Vec<usize> = members.iter().map(Vec::len).collect();
    let feature_order: Vec<usize> = members.into_iter().flatten().collect();

    let raw_x = Array2::from_shape_fn((n, p), |(i, k)| values[i * p + feature_order[k]]);
    let problem = GroupedProblem::build(Array1::from(y).view(), raw_x.view(), &sizes, weight_mode)
        .map_err(|e| SglError::input(data, e.to_string()))?;
    Ok(Dataset {
        problem,
        feature_names,
        group_labels,
        feature_order,
    })
}

/// Writes `data.csv`, `groups.csv` and `truth.csv` into `dir`. Features are
/// named `x1..xp`, groups `1..L`.
pub fn write_sim_dataset(dir: &Path, sim: &SimDataset) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let p = sim.x.ncols();
    let groups = sim.groups();
    let names: Vec<String> = (1..=p).map(|j| format!("x{j}")).collect();

    let data_path = dir.join("data.csv");
    let mut writer = csv::Writer::from_path(&data_path).map_err(|e| csv_error(&data_path, e))?;
    let mut header = vec![RESPONSE_COLUMN.to_string()];
    header.extend(names.iter().cloned());
    writer.write_record(&header).map_err(|e| csv_error(&data_path, e))?;
    for (i, row) in sim.x.rows().into_iter().enumerate() {
        let mut record = vec![sim.y[i].to_string()];
        record.extend(row.iter().map(f64::to_string));
        writer.write_record(&record).map_err(|e| csv_error(&data_path, e))?;
    }
    writer.flush()?;

    let group_rows: Vec<GroupRow> = names
        .iter()
        .enumerate()
        .map(|(j, name)| GroupRow {
            column: name.clone(),
            group: (groups.group_of(j) + 1).to_string(),
        })
        .collect();
    write_rows(&dir.join("groups.csv"), &group_rows)?;

    let truth: Vec<TruthRow> = sim
        .beta_true
        .iter()
        .enumerate()
        .map(|(j, &b)| TruthRow {
            index: j,
            group: (groups.group_of(j) + 1).to_string(),
            beta_true: b,
        })
        .collect();
    write_rows(&dir.join("truth.csv"), &truth)
}

pub fn write_coefficients(path: &Path, rows: &[CoefficientRow]) -> Result<()> {
    write_rows(path, rows)
}

pub fn read_coefficients(path: &Path) -> Result<Vec<CoefficientRow>> {
    read_rows(path)
}

/// Truth vector in file order.
pub fn read_truth(path: &Path, p: usize) -> Result<Vec<f64>> {
    let rows: Vec<TruthRow> = read_rows(path)?;
    if rows.len() != p {
        return Err(SglError::input(path, format!("{} truth rows for {p} features", rows.len())));
    }
    let mut out = vec![f64::NAN; p];
    for row in rows {
        if row.index >= p {
            return Err(SglError::input(path, format!("index {} out of range", row.index)));
        }
        out[row.index] = row.beta_true;
    }
    if out.iter().any(|v| v.is_nan()) {
        return Err(SglError::input(path, "duplicate or missing indices"));
    }
    Ok(out)
}

pub fn write_summary(path: &Path, summary: &Summary) -> Result<()> {
    let text = serde_json::to_string_pretty(summary)?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

pub fn read_summary(path: &Path) -> Result<Summary> {
    Ok(serde_json::from_reader(open(path)?)?)
}
