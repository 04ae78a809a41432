use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::Read;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::objectives::{LeastSquares, Logistic, Loss};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Regression,
    Binary,
}

#[derive(Clone, Debug)]
pub struct Dataset {
    pub name: String,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub task: Task,
    pub feature_names: Vec<String>,
    pub intercept_index: Option<usize>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, a: DMatrix<f64>, b: DVector<f64>, task: Task) -> Result<Self> {
        let feature_names = (0..a.ncols()).map(|j| format!("x{j}")).collect();
        let ds = Dataset {
            name: name.into(),
            a,
            b,
            task,
            feature_names,
            intercept_index: None,
        };
        ds.validate()?;
        Ok(ds)
    }

    fn validate(&self) -> Result<()> {
        if self.a.nrows() != self.b.len() {
            return Err(invalid(format!("{} rows but {} targets", self.a.nrows(), self.b.len())));
        }
        if self.feature_names.len() != self.a.ncols() {
            return Err(invalid("one feature name per column is required"));
        }
        if self.task == Task::Binary && self.b.iter().any(|&v| v != 0.0 && v != 1.0) {
            return Err(Error::Schema("binary labels must be 0 or 1".into()));
        }
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.a.nrows()
    }

    pub fn columns(&self) -> usize {
        self.a.ncols()
    }

    /// Least squares for regression, logistic loss for binary labels.
    pub fn loss(&self) -> Result<Loss> {
        Ok(match self.task {
            Task::Regression => Loss::LeastSquares(LeastSquares::new(self.a.clone(), self.b.clone())?),
            Task::Binary => Loss::Logistic(Logistic::new(self.a.clone(), self.b.clone())?),
        })
    }
}

/// How to read a CSV file into a [`Dataset`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CsvSchema {
    pub label: String,
    pub task: Task,
    /// Columns to one-hot encode. Any other non-numeric cell is a parse error.
    #[serde(default)]
    pub categorical: Vec<String>,
}

impl CsvSchema {
    pub fn new(label: impl Into<String>, task: Task) -> Self {
        CsvSchema {
            label: label.into(),
            task,
            categorical: Vec::new(),
        }
    }
}

fn is_missing(cell: &str) -> bool {
    matches!(cell, "" | "?" | "NA" | "na" | "NaN" | "nan")
}

pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Dataset> {
    let path = path.as_ref();
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    read_csv(File::open(path)?, schema, &name)
}

/// Parses a headed CSV. Rows with a missing cell are dropped with a warning.
///
/// Row numbers in parse errors count data lines from 1, excluding the header.
pub fn read_csv<R: Read>(reader: R, schema: &CsvSchema, name: &str) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let label_col = header
        .iter()
        .position(|h| *h == schema.label)
        .ok_or_else(|| Error::Schema(format!("label column '{}' not found", schema.label)))?;
    for c in &schema.categorical {
        if !header.contains(c) {
            return Err(Error::Schema(format!("categorical column '{c}' not found")));
        }
        if *c == schema.label {
            return Err(Error::Schema("the label column cannot be categorical".into()));
        }
    }
    let categorical: BTreeSet<usize> = header
        .iter()
        .enumerate()
        .filter(|(_, h)| schema.categorical.contains(h))
        .map(|(j, _)| j)
        .collect();

    // (data line number, cells)
    let mut rows: Vec<(usize, Vec<String>)> = Vec::new();
    let mut dropped = 0;
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let cells: Vec<String> = rec.iter().map(str::to_string).collect();
        if cells.iter().any(|c| is_missing(c)) {
            dropped += 1;
            continue;
        }
        rows.push((line + 1, cells));
    }
    if dropped > 0 {
        log::warn!("{name}: dropped {dropped} rows with missing values");
    }

    // levels of each categorical column, in sorted order
    let mut levels: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for &j in &categorical {
        let set: BTreeSet<&str> = rows.iter().map(|(_, r)| r[j].as_str()).collect();
        levels.insert(j, set.into_iter().map(str::to_string).collect());
    }
    let mut names = Vec::new();
    for (j, h) in header.iter().enumerate() {
        if j == label_col {
            continue;
        }
        match levels.get(&j) {
            Some(ls) => names.extend(ls.iter().map(|l| format!("{h}={l}"))),
            None => names.push(h.clone()),
        }
    }

    let m = rows.len();
    let n = names.len();
    let mut a = DMatrix::zeros(m, n);
    let mut b = DVector::zeros(m);
    for (r, (line, cells)) in rows.iter().enumerate() {
        let mut col = 0;
        for (j, cell) in cells.iter().enumerate() {
            let parse = || {
                cell.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Parse {
                        row: *line,
                        column: header[j].clone(),
                        message: format!("'{cell}' is not a finite number"),
                    })
            };
            if j == label_col {
                b[r] = parse()?;
            } else if let Some(ls) = levels.get(&j) {
                let k = ls.binary_search(cell).expect("level collected above");
                a[(r, col + k)] = 1.0;
                col += ls.len();
            } else {
                a[(r, col)] = parse()?;
                col += 1;
            }
        }
    }
    let ds = Dataset {
        name: name.to_string(),
        a,
        b,
        task: schema.task,
        feature_names: names,
        intercept_index: None,
    };
    ds.validate()?;
    Ok(ds)
}

/// Intercept column, unit-norm columns and, for the regularized solver, identity rows.
///
/// Zero columns cannot be normalized and are dropped with a warning. The intercept
/// is appended last (unless one is already recorded). With `for_arht` the result is
/// `(A; I)` and `(b; 0)`, of shape `(m + n′) × n′`; this embedding only makes sense
/// for least squares.
pub fn preprocess(ds: &Dataset, for_arht: bool) -> Result<Dataset> {
    if for_arht && ds.task != Task::Regression {
        return Err(invalid("identity-row augmentation applies to regression datasets only"));
    }
    let m = ds.rows();
    let mut cols = Vec::new();
    let mut names = Vec::new();
    let mut intercept = None;
    for (j, c) in ds.a.column_iter().enumerate() {
        let norm = c.norm();
        if norm == 0.0 {
            log::warn!("{}: dropping all-zero column '{}'", ds.name, ds.feature_names[j]);
            continue;
        }
        if ds.intercept_index == Some(j) {
            intercept = Some(cols.len());
        }
        cols.push(c / norm);
        names.push(ds.feature_names[j].clone());
    }
    if intercept.is_none() {
        intercept = Some(cols.len());
        cols.push(DVector::from_element(m, 1.0 / (m as f64).sqrt()));
        names.push("intercept".into());
    }
    let n = cols.len();
    let mut a = DMatrix::from_columns(&cols);
    let mut b = ds.b.clone();
    if for_arht {
        a = a.insert_rows(m, n, 0.0);
        for j in 0..n {
            a[(m + j, j)] = 1.0;
        }
        b = b.insert_rows(m, n, 0.0);
    }
    Ok(Dataset {
        name: ds.name.clone(),
        a,
        b,
        task: ds.task,
        feature_names: names,
        intercept_index: intercept,
    })
}
