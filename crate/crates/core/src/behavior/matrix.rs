use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::BehaviorState;

pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Labelled row-stochastic matrix. Only constructed through validation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionMatrix {
    labels: Vec<String>,
    rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MatrixViolation {
    Empty,
    LabelCount { labels: usize, rows: usize },
    RowLength { row: String, expected: usize, found: usize },
    DuplicateLabel { label: String },
    MissingState { label: String },
    UnknownState { label: String },
    NonFinite { row: String, column: String },
    NegativeEntry { row: String, column: String, value: f64 },
    EntryAboveOne { row: String, column: String, value: f64 },
    RowSum { row: String, sum: f64 },
    UnknownOverrideRow { transform: String, row: String },
}

impl fmt::Display for MatrixViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use MatrixViolation::*;
        match self {
            Empty => write!(f, "matrix has no states"),
            LabelCount { labels, rows } => write!(f, "{labels} labels but {rows} rows"),
            RowLength { row, expected, found } => {
                write!(f, "row {row}: expected {expected} entries, found {found}")
            }
            DuplicateLabel { label } => write!(f, "duplicate state label {label}"),
            MissingState { label } => write!(f, "state {label} missing"),
            UnknownState { label } => write!(f, "unknown state label {label}"),
            NonFinite { row, column } => write!(f, "row {row}, column {column}: not finite"),
            NegativeEntry { row, column, value } => {
                write!(f, "row {row}, column {column}: negative entry {value}")
            }
            EntryAboveOne { row, column, value } => {
                write!(f, "row {row}, column {column}: entry {value} exceeds 1")
            }
            RowSum { row, sum } => write!(f, "row {row} sums to {sum}, expected 1"),
            UnknownOverrideRow { transform, row } => {
                write!(f, "transform {transform} overrides unknown row {row}")
            }
        }
    }
}

/// Every violation found in a candidate matrix, not only the first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixReport {
    pub violations: Vec<MatrixViolation>,
}

impl fmt::Display for MatrixReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for MatrixReport {}

fn check_row(label: &str, labels: &[String], row: &[f64], out: &mut Vec<MatrixViolation>) {
    if row.len() != labels.len() {
        out.push(MatrixViolation::RowLength {
            row: label.to_string(),
            expected: labels.len(),
            found: row.len(),
        });
        return;
    }
    let mut sum = 0.0;
    let mut finite = true;
    for (value, column) in row.iter().zip(labels) {
        let (row, column) = (label.to_string(), column.clone());
        if !value.is_finite() {
            finite = false;
            out.push(MatrixViolation::NonFinite { row, column });
        } else if *value < 0.0 {
            out.push(MatrixViolation::NegativeEntry { row, column, value: *value });
        } else if *value > 1.0 {
            out.push(MatrixViolation::EntryAboveOne { row, column, value: *value });
        }
        sum += value;
    }
    if finite && (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
        out.push(MatrixViolation::RowSum {
            row: label.to_string(),
            sum,
        });
    }
}

/// Validates a square labelled matrix of any size.
pub fn validate_matrix(
    labels: Vec<String>,
    rows: Vec<Vec<f64>>,
) -> Result<TransitionMatrix, MatrixReport> {
    let mut violations = Vec::new();
    if labels.is_empty() && rows.is_empty() {
        violations.push(MatrixViolation::Empty);
    }
    if labels.len() != rows.len() {
        violations.push(MatrixViolation::LabelCount {
            labels: labels.len(),
            rows: rows.len(),
        });
    }
    let mut seen = BTreeSet::new();
    for label in &labels {
        if !seen.insert(label.as_str()) {
            violations.push(MatrixViolation::DuplicateLabel {
                label: label.clone(),
            });
        }
    }
    for (i, row) in rows.iter().enumerate() {
        let label = labels.get(i).cloned().unwrap_or_else(|| format!("#{}", i + 1));
        check_row(&label, &labels, row, &mut violations);
    }
    if violations.is_empty() {
        Ok(TransitionMatrix { labels, rows })
    } else {
        Err(MatrixReport { violations })
    }
}

/// Validates a matrix over exactly the fifteen behaviour states (any order).
pub fn validate_behavior_matrix(
    labels: Vec<String>,
    rows: Vec<Vec<f64>>,
) -> Result<TransitionMatrix, MatrixReport> {
    let mut violations = Vec::new();
    for label in &labels {
        if label.parse::<BehaviorState>().is_err() {
            violations.push(MatrixViolation::UnknownState {
                label: label.clone(),
            });
        }
    }
    for state in BehaviorState::ALL {
        if !labels.iter().any(|l| l == state.label()) {
            violations.push(MatrixViolation::MissingState {
                label: state.label().to_string(),
            });
        }
    }
    match validate_matrix(labels, rows) {
        Ok(m) if violations.is_empty() => Ok(m),
        Ok(_) => Err(MatrixReport { violations }),
        Err(mut report) => {
            report.violations.extend(violations);
            Err(report)
        }
    }
}

impl TransitionMatrix {
    pub fn identity(labels: Vec<String>) -> Result<Self, MatrixReport> {
        let n = labels.len();
        let rows = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        validate_matrix(labels, rows)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Entry M(from)(to).
    pub fn get(&self, from: &str, to: &str) -> Option<f64> {
        Some(self.rows[self.index_of(from)?][self.index_of(to)?])
    }

    pub fn row(&self, label: &str) -> Option<&[f64]> {
        self.index_of(label).map(|i| self.rows[i].as_slice())
    }

    /// Row vector times matrix.
    pub(crate) fn left_multiply(&self, v: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for (vi, row) in v.iter().zip(&self.rows) {
            if *vi == 0.0 {
                continue;
            }
            for (o, m) in out.iter_mut().zip(row) {
                *o += vi * m;
            }
        }
    }
}

/// Named replacement rows. Each row is complete over the target matrix's states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdoptionTransform {
    pub name: String,
    pub row_overrides: BTreeMap<String, Vec<f64>>,
}

impl AdoptionTransform {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            row_overrides: BTreeMap::new(),
        }
    }

    pub fn with_row(mut self, state: impl Into<String>, row: Vec<f64>) -> Self {
        self.row_overrides.insert(state.into(), row);
        self
    }

    /// Checks each replacement row on its own, without a target matrix.
    pub fn validate(&self, labels: &[String]) -> Result<(), MatrixReport> {
        let mut violations = Vec::new();
        for (state, row) in &self.row_overrides {
            if !labels.contains(state) {
                violations.push(MatrixViolation::UnknownOverrideRow {
                    transform: self.name.clone(),
                    row: state.clone(),
                });
                continue;
            }
            check_row(state, labels, row, &mut violations);
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(MatrixReport { violations })
        }
    }
}

/// Replaces the overridden rows wholesale; every other row is copied.
pub fn apply_transform(
    base: &TransitionMatrix,
    transform: &AdoptionTransform,
) -> Result<TransitionMatrix, MatrixReport> {
    transform.validate(&base.labels)?;
    let rows = base
        .labels
        .iter()
        .zip(&base.rows)
        .map(|(label, row)| {
            transform
                .row_overrides
                .get(label)
                .cloned()
                .unwrap_or_else(|| row.clone())
        })
        .collect();
    validate_matrix(base.labels.clone(), rows)
}
