//! Product catalog: ingestion, code and category indexes, substring search
//! and same-category lower-footprint alternatives.

mod ingest;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use parking_lot::RwLock;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::footprint::{
    self, FootprintAssessment, FootprintError, FootprintFactor, PerDimension, References,
    SustainabilityChecklist,
};

pub use ingest::{ingest, ingest_path, IngestError, IngestReport, Rejection, RejectReason, COLUMNS};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProductId(String);

impl ProductId {
    /// Stable identifier derived from the identification code.
    pub fn for_code(code: &str) -> Self {
        let digest = Sha256::digest(code.as_bytes());
        let hex: String = digest[..8].iter().map(|b| format!("{b:02x}")).collect();
        ProductId(format!("p-{hex}"))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for ProductId {
    fn from(s: &str) -> Self {
        ProductId(s.to_string())
    }
}

impl fmt::Display for ProductId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Product {
    pub product_id: ProductId,
    pub name: String,
    pub category: String,
    pub code: String,
    pub unit_weight_kg: f64,
    pub factors: PerDimension<FootprintFactor>,
    pub checklist: Option<SustainabilityChecklist>,
    pub image_ref: Option<String>,
}

impl Product {
    /// Assessment of one unit of this product.
    pub fn assess(&self, references: &References) -> Result<FootprintAssessment, FootprintError> {
        footprint::assess(self, self.unit_weight_kg, references)
    }

    pub fn stars(&self, references: &References) -> Result<f64, FootprintError> {
        self.assess(references).map(|a| a.stars)
    }

    fn validate(&self) -> Result<(), CatalogError> {
        if self.code.is_empty() {
            return Err(CatalogError::InvalidProduct("empty identification code".into()));
        }
        if !(self.unit_weight_kg.is_finite() && self.unit_weight_kg > 0.0) {
            return Err(CatalogError::InvalidProduct(format!(
                "{}: unit weight must be positive",
                self.code
            )));
        }
        for (d, f) in self.factors.iter() {
            if f.dimension() != d || !(f.value().is_finite() && f.value() >= 0.0) {
                return Err(CatalogError::InvalidProduct(format!(
                    "{}: bad {d} factor",
                    self.code
                )));
            }
        }
        if let Some(c) = &self.checklist {
            footprint::sustainability_score(c)
                .map_err(|e| CatalogError::InvalidProduct(format!("{}: {e}", self.code)))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CatalogError {
    #[error("duplicate identification code {0}")]
    DuplicateCode(String),
    #[error("duplicate product id {0}")]
    DuplicateId(ProductId),
    #[error("product {0} is not in the catalog")]
    NotInCatalog(ProductId),
    #[error("invalid product: {0}")]
    InvalidProduct(String),
    #[error(transparent)]
    Footprint(#[from] FootprintError),
    #[error("snapshot: {0}")]
    Snapshot(String),
}

#[derive(Debug, Clone, Default)]
pub struct Catalog {
    products: Vec<Product>,
    lower_names: Vec<String>,
    by_id: HashMap<ProductId, usize>,
    code_index: HashMap<String, usize>,
    category_index: BTreeMap<String, BTreeSet<ProductId>>,
}

impl Catalog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.products.len()
    }

    pub fn is_empty(&self) -> bool {
        self.products.is_empty()
    }

    pub fn products(&self) -> &[Product] {
        &self.products
    }

    pub fn insert(&mut self, product: Product) -> Result<(), CatalogError> {
        product.validate()?;
        if self.code_index.contains_key(&product.code) {
            return Err(CatalogError::DuplicateCode(product.code));
        }
        if self.by_id.contains_key(&product.product_id) {
            return Err(CatalogError::DuplicateId(product.product_id));
        }
        let idx = self.products.len();
        self.code_index.insert(product.code.clone(), idx);
        self.by_id.insert(product.product_id.clone(), idx);
        self.category_index
            .entry(product.category.clone())
            .or_default()
            .insert(product.product_id.clone());
        self.lower_names.push(product.name.to_lowercase());
        self.products.push(product);
        Ok(())
    }

    pub fn get(&self, id: &ProductId) -> Option<&Product> {
        self.by_id.get(id).map(|&i| &self.products[i])
    }

    pub fn lookup_by_code(&self, code: &str) -> Option<&Product> {
        self.code_index.get(code).map(|&i| &self.products[i])
    }

    pub fn categories(&self) -> impl Iterator<Item = (&str, &BTreeSet<ProductId>)> {
        self.category_index.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn in_category<'a>(&'a self, category: &str) -> impl Iterator<Item = &'a Product> + 'a {
        self.category_index
            .get(category)
            .into_iter()
            .flatten()
            .filter_map(move |id| self.get(id))
    }

    /// Same-category product with the highest star rating strictly above
    /// `product`'s. Ties go to the lower carbon footprint, then the smaller id.
    pub fn suggest_alternative(
        &self,
        product: &Product,
        references: &References,
    ) -> Result<Option<&Product>, CatalogError> {
        if self.get(&product.product_id) != Some(product) {
            return Err(CatalogError::NotInCatalog(product.product_id.clone()));
        }
        let threshold = product.stars(references)?;
        let mut best: Option<(f64, f64, &Product)> = None;
        for candidate in self.in_category(&product.category) {
            let assessment = candidate.assess(references)?;
            if assessment.stars <= threshold {
                continue;
            }
            let key = (assessment.stars, assessment.per_dimension_weight.carbon, candidate);
            best = match best {
                None => Some(key),
                Some(current) if better_alternative(&key, &current) => Some(key),
                keep => keep,
            };
        }
        Ok(best.map(|(_, _, p)| p))
    }

    /// Median star rating of a category; mean of the two middle values for even sizes.
    pub fn category_median_stars(
        &self,
        category: &str,
        references: &References,
    ) -> Result<Option<f64>, CatalogError> {
        let mut stars = self
            .in_category(category)
            .map(|p| p.stars(references))
            .collect::<Result<Vec<_>, _>>()?;
        if stars.is_empty() {
            return Ok(None);
        }
        stars.sort_by(f64::total_cmp);
        let mid = stars.len() / 2;
        Ok(Some(if stars.len() % 2 == 1 {
            stars[mid]
        } else {
            (stars[mid - 1] + stars[mid]) / 2.0
        }))
    }

    /// Case-insensitive substring matches over product names. A product whose
    /// whole name equals the query comes first; the rest are alphabetical.
    pub fn search(&self, query: &str, limit: usize) -> Vec<&Product> {
        let mut hits = self.substring_matches(query);
        let needle = query.to_lowercase();
        hits.sort_by(|a, b| {
            let exact_a = self.lower_names[self.by_id[&a.product_id]] == needle;
            let exact_b = self.lower_names[self.by_id[&b.product_id]] == needle;
            exact_b
                .cmp(&exact_a)
                .then_with(|| self.alphabetical(a, b))
        });
        hits.truncate(limit);
        hits
    }

    /// Unordered substring matches; empty query matches nothing.
    pub fn substring_matches(&self, query: &str) -> Vec<&Product> {
        if query.is_empty() {
            return Vec::new();
        }
        let needle = query.to_lowercase();
        self.lower_names
            .iter()
            .zip(&self.products)
            .filter(|(name, _)| name.contains(&needle))
            .map(|(_, p)| p)
            .collect()
    }

    /// Lowercased name, then product id.
    pub fn alphabetical(&self, a: &Product, b: &Product) -> Ordering {
        let la = &self.lower_names[self.by_id[&a.product_id]];
        let lb = &self.lower_names[self.by_id[&b.product_id]];
        la.cmp(lb).then_with(|| a.product_id.cmp(&b.product_id))
    }

    pub fn save_snapshot(&self, path: &Path) -> Result<(), CatalogError> {
        let json = serde_json::to_vec(&self.products)
            .map_err(|e| CatalogError::Snapshot(e.to_string()))?;
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, json)
            .and_then(|_| std::fs::rename(&tmp, path))
            .map_err(|e| CatalogError::Snapshot(e.to_string()))
    }

    pub fn load_snapshot(path: &Path) -> Result<Self, CatalogError> {
        let bytes = std::fs::read(path).map_err(|e| CatalogError::Snapshot(e.to_string()))?;
        let products: Vec<Product> =
            serde_json::from_slice(&bytes).map_err(|e| CatalogError::Snapshot(e.to_string()))?;
        let mut catalog = Catalog::new();
        for p in products {
            catalog.insert(p)?;
        }
        Ok(catalog)
    }
}

fn better_alternative(a: &(f64, f64, &Product), b: &(f64, f64, &Product)) -> bool {
    a.0.total_cmp(&b.0)
        .then_with(|| b.1.total_cmp(&a.1))
        .then_with(|| b.2.product_id.cmp(&a.2.product_id))
        == Ordering::Greater
}

/// Shared catalog that readers snapshot and ingestion swaps whole.
#[derive(Debug, Default)]
pub struct CatalogHandle {
    current: RwLock<Arc<Catalog>>,
}

impl CatalogHandle {
    pub fn new(catalog: Catalog) -> Self {
        Self {
            current: RwLock::new(Arc::new(catalog)),
        }
    }

    pub fn snapshot(&self) -> Arc<Catalog> {
        self.current.read().clone()
    }

    pub fn replace(&self, catalog: Catalog) -> Arc<Catalog> {
        std::mem::replace(&mut *self.current.write(), Arc::new(catalog))
    }
}
