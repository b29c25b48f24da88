//! Daily reference configuration.
//!
//! ```toml
//! [carbon]
//! daily_total = 4.0
//! units = "kg CO2e per person-day"
//! ```
//!
//! One table per dimension, all three required.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use toml::Spanned;

use super::{DailyReference, Dimension, PerDimension};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct References(PerDimension<DailyReference>);


impl References {
    pub fn new(per_dimension: PerDimension<DailyReference>) -> Result<Self, ReferenceError> {
        for (d, r) in per_dimension.iter() {
            if r.dimension() != d {
                return Err(ReferenceError::Invalid {
                    line: 0,
                    field: format!("{d}.dimension"),
                    message: format!("reference is tagged {}", r.dimension()),
                });
            }
        }
        Ok(Self(per_dimension))
    }

    pub fn get(&self, d: Dimension) -> &DailyReference {
        &self.0[d]
    }

    pub fn per_dimension(&self) -> &PerDimension<DailyReference> {
        &self.0
    }

    pub fn load(path: &Path) -> Result<Self, ReferenceError> {
        let text = std::fs::read_to_string(path).map_err(|e| ReferenceError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        parse_references(&text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReferenceError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}: {field}: {message}")]
    Invalid {
        line: usize,
        field: String,
        message: String,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawReference {
    daily_total: Spanned<f64>,
    units: Spanned<String>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

pub fn parse_references(text: &str) -> Result<References, ReferenceError> {
    let raw: BTreeMap<Spanned<String>, Spanned<RawReference>> =
        toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| line_of(text, s.start)).unwrap_or(0);
            ReferenceError::Invalid {
                line,
                field: "document".into(),
                message: e.message().to_string(),
            }
        })?;

    let mut found: BTreeMap<Dimension, DailyReference> = BTreeMap::new();
    for (name, entry) in &raw {
        let line = line_of(text, name.span().start);
        let Some(d) = Dimension::parse(name.get_ref()) else {
            return Err(ReferenceError::Invalid {
                line,
                field: name.get_ref().clone(),
                message: "unknown dimension (expected carbon, nitrogen or water)".into(),
            });
        };
        let entry = entry.get_ref();
        if entry.units.get_ref().trim().is_empty() {
            return Err(ReferenceError::Invalid {
                line: line_of(text, entry.units.span().start),
                field: format!("{d}.units"),
                message: "units annotation must not be empty".into(),
            });
        }
        let total = *entry.daily_total.get_ref();
        let reference = DailyReference::new(d, total, entry.units.get_ref().clone()).map_err(
            |_| ReferenceError::Invalid {
                line: line_of(text, entry.daily_total.span().start),
                field: format!("{d}.daily_total"),
                message: format!("must be a finite positive number, got {total}"),
            },
        )?;
        found.insert(d, reference);
    }

    let per_dimension = PerDimension::try_from_fn(|d| {
        found.remove(&d).ok_or_else(|| ReferenceError::Invalid {
            line: 0,
            field: d.to_string(),
            message: "dimension missing from reference document".into(),
        })
    })?;
    References::new(per_dimension)
}
