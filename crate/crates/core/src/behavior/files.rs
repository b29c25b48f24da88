//! Matrix and transform documents.
//!
//! A matrix file lists the ordered state labels and one row per label:
//!
//! ```toml
//! name = "maria-baseline"
//! labels = ["S1", "S2", ...]
//! rows = [
//!   [0.0, 0.0, 0.01, ...],
//!   ...
//! ]
//! ```
//!
//! A transform file names complete replacement rows:
//!
//! ```toml
//! name = "maria-adoption"
//! [rows]
//! S1 = [0.0, 0.0, 0.80, 0.10, 0.10, ...]
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use super::{validate_behavior_matrix, AdoptionTransform, MatrixReport, TransitionMatrix};

#[derive(Debug, Error)]
pub enum MatrixFileError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid matrix: {0}")]
    Invalid(#[from] MatrixReport),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMatrix {
    name: String,
    #[serde(default)]
    #[allow(dead_code)]
    description: Option<String>,
    labels: Vec<String>,
    rows: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTransform {
    name: String,
    #[serde(default)]
    #[allow(dead_code)]
    note: Option<String>,
    #[serde(default)]
    rows: BTreeMap<String, Vec<f64>>,
}

fn parse_toml<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, MatrixFileError> {
    toml::from_str(text).map_err(|e| MatrixFileError::Parse {
        line: e
            .span()
            .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
            .unwrap_or(0),
        message: e.message().to_string(),
    })
}

fn read(path: &Path) -> Result<String, MatrixFileError> {
    std::fs::read_to_string(path).map_err(|source| MatrixFileError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Returns the document's name and the validated matrix.
pub fn parse_matrix(text: &str) -> Result<(String, TransitionMatrix), MatrixFileError> {
    let raw: RawMatrix = parse_toml(text)?;
    let matrix = validate_behavior_matrix(raw.labels, raw.rows)?;
    Ok((raw.name, matrix))
}

pub fn parse_transform(text: &str) -> Result<AdoptionTransform, MatrixFileError> {
    let raw: RawTransform = parse_toml(text)?;
    Ok(AdoptionTransform {
        name: raw.name,
        row_overrides: raw.rows,
    })
}

pub fn load_matrix(path: &Path) -> Result<(String, TransitionMatrix), MatrixFileError> {
    parse_matrix(&read(path)?)
}

pub fn load_transform(path: &Path) -> Result<AdoptionTransform, MatrixFileError> {
    parse_transform(&read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_error_reports_line() {
        let text = "name = \"x\"\nlabels = [\"S1\"]\nrows = [[1.0,]\n";
        match parse_matrix(text) {
            Err(MatrixFileError::Parse { line, .. }) => assert!(line >= 3, "line {line}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn wrong_dimension_is_a_validation_error() {
        let text = "name = \"x\"\nlabels = [\"S1\"]\nrows = [[1.0]]\n";
        match parse_matrix(text) {
            Err(MatrixFileError::Invalid(report)) => {
                assert_eq!(report.violations.len(), 14, "{report}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn transform_rows_are_kept_verbatim() {
        let t = parse_transform("name = \"t\"\n[rows]\nS2 = [0.5, 0.5]\n").unwrap();
        assert_eq!(t.name, "t");
        assert_eq!(t.row_overrides["S2"], vec![0.5, 0.5]);
        let empty = parse_transform("name = \"empty\"\n").unwrap();
        assert!(empty.row_overrides.is_empty());
    }
}
