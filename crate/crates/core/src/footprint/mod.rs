//! Food product footprint measures.
//!
//! Three measures are computed for every footprint dimension:
//!
//! - footprint by weight: `weight_kg × factor`,
//! - percent of possible sustainability measures met at the farm,
//! - percent daily value: the weight footprint divided by the daily
//!   footprint of a healthy diet.
//!
//! The star rating folds them into one number in `[0, 3]`. Each dimension
//! contributes `clamp(1 − daily_value, 0, 1)`; the sustainability score joins
//! the average as a fourth term when farm data is known.

mod references;

use std::collections::BTreeSet;
use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::Product;

pub use references::{parse_references, ReferenceError, References};

/// Upper bound of the star scale.
pub const MAX_STARS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Carbon,
    Nitrogen,
    Water,
}

impl Dimension {
    pub const ALL: [Dimension; 3] = [Dimension::Carbon, Dimension::Nitrogen, Dimension::Water];

    pub fn as_str(self) -> &'static str {
        match self {
            Dimension::Carbon => "carbon",
            Dimension::Nitrogen => "nitrogen",
            Dimension::Water => "water",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|d| d.as_str() == name)
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A value for each of the three dimensions. Total by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerDimension<T> {
    pub carbon: T,
    pub nitrogen: T,
    pub water: T,
}

impl<T> PerDimension<T> {
    pub fn from_fn(mut f: impl FnMut(Dimension) -> T) -> Self {
        Self {
            carbon: f(Dimension::Carbon),
            nitrogen: f(Dimension::Nitrogen),
            water: f(Dimension::Water),
        }
    }

    pub fn try_from_fn<E>(mut f: impl FnMut(Dimension) -> Result<T, E>) -> Result<Self, E> {
        Ok(Self {
            carbon: f(Dimension::Carbon)?,
            nitrogen: f(Dimension::Nitrogen)?,
            water: f(Dimension::Water)?,
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = (Dimension, &T)> {
        Dimension::ALL.into_iter().map(move |d| (d, &self[d]))
    }

    pub fn map<U>(&self, mut f: impl FnMut(Dimension, &T) -> U) -> PerDimension<U> {
        PerDimension::from_fn(|d| f(d, &self[d]))
    }
}

impl<T> Index<Dimension> for PerDimension<T> {
    type Output = T;

    fn index(&self, d: Dimension) -> &T {
        match d {
            Dimension::Carbon => &self.carbon,
            Dimension::Nitrogen => &self.nitrogen,
            Dimension::Water => &self.water,
        }
    }
}

impl<T> IndexMut<Dimension> for PerDimension<T> {
    fn index_mut(&mut self, d: Dimension) -> &mut T {
        match d {
            Dimension::Carbon => &mut self.carbon,
            Dimension::Nitrogen => &mut self.nitrogen,
            Dimension::Water => &mut self.water,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FootprintError {
    #[error("{field}: expected a finite non-negative number, got {value}")]
    NegativeOrNonFinite { field: &'static str, value: f64 },
    #[error("{field}: expected a finite positive number, got {value}")]
    NonPositive { field: &'static str, value: f64 },
    #[error("dimension mismatch: footprint is {footprint}, reference is {reference}")]
    DimensionMismatch {
        footprint: Dimension,
        reference: Dimension,
    },
    #[error("sustainability checklist has no possible measures")]
    EmptyChecklist,
    #[error("sustainability measures {0:?} are applied but not listed as possible")]
    UnknownMeasures(Vec<String>),
    #[error("{field}: value {value} outside [0, 1]")]
    OutOfUnitRange { field: &'static str, value: f64 },
    #[error("missing value for the {0} dimension")]
    MissingDimension(Dimension),
}

fn non_negative(field: &'static str, value: f64) -> Result<f64, FootprintError> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(FootprintError::NegativeOrNonFinite { field, value })
    }
}

/// Impact per kilogram of product in one dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FootprintFactor {
    dimension: Dimension,
    value: f64,
}

impl FootprintFactor {
    pub fn new(dimension: Dimension, value: f64) -> Result<Self, FootprintError> {
        Ok(Self {
            dimension,
            value: non_negative("factor", value)?,
        })
    }

    pub fn dimension(&self) -> Dimension {
        self.dimension
    }

    pub fn value(&self) -> f64 {
        self.value
    }
}

/// Daily footprint of a healthy diet, per person-day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailyReference {
    dimension: Dimension,
    daily_total: f64,
    units: String,
}

impl DailyReference {
    pub fn new(
        dimension: Dimension,
        daily_total: f64,
        units: impl Into<String>,
    ) -> Result<Self, FootprintError> {
        if !(daily_total.is_finite() && daily_total > 0.0) {
            return Err(FootprintError::NonPositive {
                field: "daily_total",
                value: daily_total,
            });
        }
        Ok(Self {
            dimension,
            daily_total,
            units: units.into(),
        })
    }

    pub fn dimension(&self) -> Dimension {
        self.dimension
    }

    pub fn daily_total(&self) -> f64 {
        self.daily_total
    }

    pub fn units(&self) -> &str {
        &self.units
    }
}

/// Farm-level sustainability measures: which apply out of which are possible.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SustainabilityChecklist {
    applied: BTreeSet<String>,
    possible: BTreeSet<String>,
}

impl SustainabilityChecklist {
    pub fn new<A, P, S>(applied: A, possible: P) -> Result<Self, FootprintError>
    where
        A: IntoIterator<Item = S>,
        P: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let applied: BTreeSet<String> = applied.into_iter().map(Into::into).collect();
        let possible: BTreeSet<String> = possible.into_iter().map(Into::into).collect();
        if possible.is_empty() {
            return Err(FootprintError::EmptyChecklist);
        }
        let unknown: Vec<String> = applied.difference(&possible).cloned().collect();
        if !unknown.is_empty() {
            return Err(FootprintError::UnknownMeasures(unknown));
        }
        Ok(Self { applied, possible })
    }

    pub fn applied(&self) -> &BTreeSet<String> {
        &self.applied
    }

    pub fn possible(&self) -> &BTreeSet<String> {
        &self.possible
    }
}

/// A footprint amount tagged with the dimension it was measured in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightFootprint {
    pub dimension: Dimension,
    pub amount: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FootprintAssessment {
    pub weight_kg: f64,
    pub per_dimension_weight: PerDimension<f64>,
    pub per_dimension_dv: PerDimension<f64>,
    /// Absent when the product carries no farm checklist.
    pub sustainability_score: Option<f64>,
    pub stars: f64,
}

pub fn footprint_weight(
    weight_kg: f64,
    factor: &FootprintFactor,
) -> Result<WeightFootprint, FootprintError> {
    let weight_kg = non_negative("weight_kg", weight_kg)?;
    Ok(WeightFootprint {
        dimension: factor.dimension,
        amount: weight_kg * factor.value,
    })
}

pub fn sustainability_score(checklist: &SustainabilityChecklist) -> Result<f64, FootprintError> {
    // The constructor already enforces these; checklists can also arrive via serde.
    if checklist.possible.is_empty() {
        return Err(FootprintError::EmptyChecklist);
    }
    if !checklist.applied.is_subset(&checklist.possible) {
        let unknown = checklist
            .applied
            .difference(&checklist.possible)
            .cloned()
            .collect();
        return Err(FootprintError::UnknownMeasures(unknown));
    }
    Ok(checklist.applied.len() as f64 / checklist.possible.len() as f64)
}

pub fn daily_value(
    footprint: WeightFootprint,
    reference: &DailyReference,
) -> Result<f64, FootprintError> {
    if footprint.dimension != reference.dimension {
        return Err(FootprintError::DimensionMismatch {
            footprint: footprint.dimension,
            reference: reference.dimension,
        });
    }
    if !(reference.daily_total.is_finite() && reference.daily_total > 0.0) {
        return Err(FootprintError::NonPositive {
            field: "daily_total",
            value: reference.daily_total,
        });
    }
    let amount = non_negative("footprint", footprint.amount)?;
    Ok(amount / reference.daily_total)
}

/// Sub-score of one dimension: 1 at zero impact, 0 at or beyond a full day's allotment.
pub fn dimension_subscore(dv: f64) -> f64 {
    (1.0 - dv).clamp(0.0, 1.0)
}

pub fn star_rating(
    per_dimension_dv: &PerDimension<f64>,
    sustainability: Option<f64>,
) -> Result<f64, FootprintError> {
    let mut total = 0.0;
    for (_, &dv) in per_dimension_dv.iter() {
        total += dimension_subscore(non_negative("daily_value", dv)?);
    }
    let mut terms = 3.0;
    if let Some(score) = sustainability {
        if !(0.0..=1.0).contains(&score) {
            return Err(FootprintError::OutOfUnitRange {
                field: "sustainability",
                value: score,
            });
        }
        total += score;
        terms += 1.0;
    }
    Ok(MAX_STARS * (total / terms))
}

/// Star rating from a partially filled map, e.g. one decoded from user input.
pub fn star_rating_from_map(
    per_dimension_dv: &std::collections::BTreeMap<Dimension, f64>,
    sustainability: Option<f64>,
) -> Result<f64, FootprintError> {
    let dvs = PerDimension::try_from_fn(|d| {
        per_dimension_dv
            .get(&d)
            .copied()
            .ok_or(FootprintError::MissingDimension(d))
    })?;
    star_rating(&dvs, sustainability)
}

/// Full assessment of `weight_kg` of `product`.
pub fn assess(
    product: &Product,
    weight_kg: f64,
    references: &References,
) -> Result<FootprintAssessment, FootprintError> {
    let per_dimension_weight =
        PerDimension::try_from_fn(|d| footprint_weight(weight_kg, &product.factors[d]))?;
    let per_dimension_dv =
        PerDimension::try_from_fn(|d| daily_value(per_dimension_weight[d], references.get(d)))?;
    let sustainability_score = product
        .checklist
        .as_ref()
        .map(sustainability_score)
        .transpose()?;
    let stars = star_rating(&per_dimension_dv, sustainability_score)?;
    Ok(FootprintAssessment {
        weight_kg,
        per_dimension_weight: per_dimension_weight.map(|_, fw| fw.amount),
        per_dimension_dv,
        sustainability_score,
        stars,
    })
}

/// Nearest half star, for display only.
pub fn display_stars(stars: f64) -> f64 {
    (stars * 2.0).round() / 2.0
}
