//! Catalog document ingestion.
//!
//! Comma-separated text with a header row. Required columns:
//! `code,name,category,unit_weight_kg,carbon_factor,nitrogen_factor,water_factor`;
//! optional: `measures_applied,measures_possible` (semicolon-separated measure
//! identifiers) and `image_ref`. Rows that fail validation are reported and
//! skipped; the rest are loaded.

use std::fmt;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Catalog, Product, ProductId};
use crate::footprint::{Dimension, FootprintFactor, PerDimension, SustainabilityChecklist};

pub const COLUMNS: [&str; 10] = [
    "code",
    "name",
    "category",
    "unit_weight_kg",
    "carbon_factor",
    "nitrogen_factor",
    "water_factor",
    "measures_applied",
    "measures_possible",
    "image_ref",
];
const REQUIRED: usize = 7;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum RejectReason {
    DuplicateCode,
    MissingField { field: String },
    MissingFactor { dimension: Dimension },
    InvalidFactor { dimension: Dimension, value: String },
    NonpositiveWeight { value: String },
    InvalidChecklist { message: String },
    Malformed { message: String },
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectReason::DuplicateCode => write!(f, "duplicate code"),
            RejectReason::MissingField { field } => write!(f, "missing field {field}"),
            RejectReason::MissingFactor { dimension } => write!(f, "missing {dimension} factor"),
            RejectReason::InvalidFactor { dimension, value } => {
                write!(f, "invalid {dimension} factor {value:?}")
            }
            RejectReason::NonpositiveWeight { value } => {
                write!(f, "nonpositive weight {value:?}")
            }
            RejectReason::InvalidChecklist { message } => write!(f, "invalid checklist: {message}"),
            RejectReason::Malformed { message } => write!(f, "malformed row: {message}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub line: u64,
    pub code: Option<String>,
    #[serde(flatten)]
    pub reason: RejectReason,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub accepted: usize,
    pub rejected: Vec<Rejection>,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("header: missing required column {0}")]
    MissingColumn(&'static str),
    #[error("header: unknown column {0:?}")]
    UnknownColumn(String),
    #[error("header: duplicate column {0:?}")]
    DuplicateColumn(String),
    #[error("cannot read document: {0}")]
    Csv(#[from] csv::Error),
}

struct Layout {
    positions: [Option<usize>; COLUMNS.len()],
    width: usize,
}

impl Layout {
    fn from_header(header: &csv::StringRecord) -> Result<Self, IngestError> {
        let mut positions = [None; COLUMNS.len()];
        for (i, name) in header.iter().enumerate() {
            let name = name.trim();
            let slot = COLUMNS
                .iter()
                .position(|c| *c == name)
                .ok_or_else(|| IngestError::UnknownColumn(name.to_string()))?;
            if positions[slot].replace(i).is_some() {
                return Err(IngestError::DuplicateColumn(name.to_string()));
            }
        }
        if let Some(missing) = (0..REQUIRED).find(|&i| positions[i].is_none()) {
            return Err(IngestError::MissingColumn(COLUMNS[missing]));
        }
        Ok(Self {
            positions,
            width: header.len(),
        })
    }

    fn field<'r>(&self, record: &'r csv::StringRecord, column: usize) -> &'r str {
        self.positions[column]
            .and_then(|i| record.get(i))
            .map(str::trim)
            .unwrap_or("")
    }
}

fn measures(text: &str) -> Vec<&str> {
    text.split(';').map(str::trim).filter(|s| !s.is_empty()).collect()
}

fn parse_row(layout: &Layout, record: &csv::StringRecord) -> Result<Product, RejectReason> {
    if record.len() != layout.width {
        return Err(RejectReason::Malformed {
            message: format!("expected {} fields, found {}", layout.width, record.len()),
        });
    }
    let required = |column: usize| {
        let value = layout.field(record, column);
        if value.is_empty() {
            Err(RejectReason::MissingField {
                field: COLUMNS[column].to_string(),
            })
        } else {
            Ok(value)
        }
    };
    let code = required(0)?;
    let name = required(1)?;
    let category = required(2)?;
    let weight_text = required(3)?;
    let unit_weight_kg = weight_text
        .parse::<f64>()
        .ok()
        .filter(|w| w.is_finite() && *w > 0.0)
        .ok_or_else(|| RejectReason::NonpositiveWeight {
            value: weight_text.to_string(),
        })?;

    let factors = PerDimension::try_from_fn(|d| {
        let column = 4 + d as usize;
        let text = layout.field(record, column);
        if text.is_empty() {
            return Err(RejectReason::MissingFactor { dimension: d });
        }
        text.parse::<f64>()
            .ok()
            .and_then(|v| FootprintFactor::new(d, v).ok())
            .ok_or_else(|| RejectReason::InvalidFactor {
                dimension: d,
                value: text.to_string(),
            })
    })?;

    let applied = measures(layout.field(record, 7));
    let possible = measures(layout.field(record, 8));
    let checklist = if applied.is_empty() && possible.is_empty() {
        None
    } else {
        Some(
            SustainabilityChecklist::new(applied, possible).map_err(|e| {
                RejectReason::InvalidChecklist {
                    message: e.to_string(),
                }
            })?,
        )
    };
    let image_ref = Some(layout.field(record, 9))
        .filter(|s| !s.is_empty())
        .map(str::to_string);

    Ok(Product {
        product_id: ProductId::for_code(code),
        name: name.to_string(),
        category: category.to_string(),
        code: code.to_string(),
        unit_weight_kg,
        factors,
        checklist,
        image_ref,
    })
}

/// Loads every valid row. Later rows repeating a code are rejected.
pub fn ingest<R: Read>(reader: R) -> Result<(Catalog, IngestReport), IngestError> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut records = csv.records();
    let mut catalog = Catalog::new();
    let mut report = IngestReport::default();

    let Some(header) = records.next() else {
        return Ok((catalog, report));
    };
    let layout = Layout::from_header(&header?)?;

    for record in records {
        let (line, outcome) = match record {
            Ok(record) => {
                let line = record.position().map(|p| p.line()).unwrap_or(0);
                let code = Some(layout.field(&record, 0))
                    .filter(|c| !c.is_empty())
                    .map(str::to_string);
                (line, parse_row(&layout, &record).map_err(|r| (code, r)))
            }
            Err(e) => {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                if !matches!(e.kind(), csv::ErrorKind::Utf8 { .. }) {
                    return Err(e.into());
                }
                let reason = RejectReason::Malformed {
                    message: e.to_string(),
                };
                (line, Err((None, reason)))
            }
        };
        let result = outcome.and_then(|product| {
            let code = product.code.clone();
            catalog.insert(product).map_err(|e| {
                let reason = match e {
                    super::CatalogError::DuplicateCode(_) => RejectReason::DuplicateCode,
                    other => RejectReason::Malformed {
                        message: other.to_string(),
                    },
                };
                (Some(code), reason)
            })
        });
        match result {
            Ok(()) => report.accepted += 1,
            Err((code, reason)) => report.rejected.push(Rejection { line, code, reason }),
        }
    }
    tracing::debug!(
        accepted = report.accepted,
        rejected = report.rejected.len(),
        "catalog ingested"
    );
    Ok((catalog, report))
}

pub fn ingest_path(path: &Path) -> Result<(Catalog, IngestReport), IngestError> {
    let file = std::fs::File::open(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    ingest(std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "code,name,category,unit_weight_kg,carbon_factor,nitrogen_factor,water_factor,measures_applied,measures_possible,image_ref\n";

    #[test]
    fn empty_document() {
        let (catalog, report) = ingest("".as_bytes()).unwrap();
        assert!(catalog.is_empty());
        assert_eq!(report, IngestReport::default());
        let (catalog, report) = ingest(HEADER.as_bytes()).unwrap();
        assert!(catalog.is_empty());
        assert!(report.rejected.is_empty());
    }

    #[test]
    fn duplicate_code_keeps_first() {
        let doc = format!(
            "{HEADER}111,Oat drink,plant-drinks,1.0,0.4,0.003,48,,,\n111,Soy drink,plant-drinks,1.0,0.5,0.004,30,,,\n"
        );
        let (catalog, report) = ingest(doc.as_bytes()).unwrap();
        assert_eq!(catalog.lookup_by_code("111").unwrap().name, "Oat drink");
        assert_eq!(report.accepted, 1);
        assert_eq!(
            report.rejected,
            vec![Rejection {
                line: 3,
                code: Some("111".into()),
                reason: RejectReason::DuplicateCode
            }]
        );
        assert_eq!(report.rejected[0].reason.to_string(), "duplicate code");
    }

    #[test]
    fn row_errors_are_reported_with_lines() {
        let doc = format!(
            "{HEADER}\
             1,A,x,0,1,1,1,,,\n\
             2,B,x,1.0,,1,1,,,\n\
             3,C,x,1.0,1,-1,1,,,\n\
             4,D,x,1.0,1,1,1,a;b,a,\n\
             5,E,x,1.0,1,1\n\
             ,F,x,1.0,1,1,1,,,\n\
             7,G,x,abc,1,1,1,,,\n\
             8,H,x,0.5,1,1,1,a,a;b;c,img/h.png\n"
        );
        let (catalog, report) = ingest(doc.as_bytes()).unwrap();
        assert_eq!(report.accepted, 1);
        let got: Vec<(u64, String)> = report
            .rejected
            .iter()
            .map(|r| (r.line, r.reason.to_string()))
            .collect();
        assert_eq!(
            got,
            vec![
                (2, "nonpositive weight \"0\"".to_string()),
                (3, "missing carbon factor".to_string()),
                (4, "invalid nitrogen factor \"-1\"".to_string()),
                (
                    5,
                    "invalid checklist: sustainability measures [\"b\"] are applied but not listed as possible"
                        .to_string()
                ),
                (6, "malformed row: expected 10 fields, found 6".to_string()),
                (7, "missing field code".to_string()),
                (8, "nonpositive weight \"abc\"".to_string()),
            ]
        );
        let h = catalog.lookup_by_code("8").unwrap();
        assert_eq!(h.checklist.as_ref().unwrap().possible().len(), 3);
        assert_eq!(h.image_ref.as_deref(), Some("img/h.png"));
    }

    #[test]
    fn optional_columns_may_be_absent() {
        let doc = "code,name,category,unit_weight_kg,carbon_factor,nitrogen_factor,water_factor\n1,A,x,1,0.1,0.001,10\n";
        let (catalog, report) = ingest(doc.as_bytes()).unwrap();
        assert_eq!(report.accepted, 1);
        assert!(catalog.lookup_by_code("1").unwrap().checklist.is_none());
    }

    #[test]
    fn header_problems_are_fatal() {
        assert!(matches!(
            ingest("code,name\n".as_bytes()),
            Err(IngestError::MissingColumn("category"))
        ));
        let doc = HEADER.replace("image_ref", "picture");
        assert!(matches!(
            ingest(doc.as_bytes()),
            Err(IngestError::UnknownColumn(c)) if c == "picture"
        ));
    }

    #[test]
    fn ingest_then_lookup() {
        let doc = format!("{HEADER}999,Fresh thing,x,1,0.1,0.001,10,,,\n");
        let (catalog, _) = ingest(doc.as_bytes()).unwrap();
        let p = catalog.lookup_by_code("999").unwrap();
        assert_eq!(p.product_id, ProductId::for_code("999"));
    }
}
