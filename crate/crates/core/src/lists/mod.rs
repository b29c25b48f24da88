//! Shopping lists, scan check-off, purchase history and the community feed.
//!
//! Operations on one list are serialized by that list's lock. A scan touches
//! the list, the purchase history and the scanner's profile; all three are
//! committed to the store in a single transaction before the in-memory state
//! changes.

mod ranking;
mod store;

use std::collections::HashMap;
use std::sync::Arc;

use chrono::{DateTime, Utc};
use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{Catalog, CatalogError, CatalogHandle, Product, ProductId};
use crate::clock::{Clock, MonotoneClock};
use crate::footprint::{FootprintAssessment, FootprintError, References};
use crate::gamify::{
    self, EventKind, EventOutcome, GamificationEvent, GamifyConfig, GamifyError,
    LeaderboardEntry, MissionProgressReport, PlayerProfile, ProfileRegistry, UserId,
};

pub use ranking::{history_stats, rank_candidates, HistoryStats};
pub use store::{Batch, Store, StoreError, StoredState};

/// Suggestions returned when seeding a new list.
pub const SEED_SUGGESTIONS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ListId(String);

impl ListId {
    pub fn new(id: impl Into<String>) -> Self {
        ListId(id.into())
    }

    fn generate() -> Self {
        ListId(format!("l-{}", uuid::Uuid::new_v4().simple()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl std::fmt::Display for ListId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ListItem {
    pub item_id: String,
    pub label: String,
    pub linked_product: Option<ProductId>,
    pub checked: bool,
    pub scan_code: Option<String>,
    /// Checked by hand rather than by scanning.
    pub manual_check: bool,
    pub assessment: Option<FootprintAssessment>,
    /// Product the item held before an accepted alternative replaced it.
    pub replaced_product: Option<ProductId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShoppingList {
    pub list_id: ListId,
    pub owner: UserId,
    pub name: String,
    pub items: Vec<ListItem>,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
    next_item: u64,
}

impl ShoppingList {
    pub fn item(&self, item_id: &str) -> Option<&ListItem> {
        self.items.iter().find(|i| i.item_id == item_id)
    }

    pub fn checked_count(&self) -> usize {
        self.items.iter().filter(|i| i.checked).count()
    }

    fn push_item(&mut self, label: String, linked_product: Option<ProductId>) -> usize {
        self.next_item += 1;
        self.items.push(ListItem {
            item_id: format!("i{}", self.next_item),
            label,
            linked_product,
            checked: false,
            scan_code: None,
            manual_check: false,
            assessment: None,
            replaced_product: None,
        });
        self.items.len() - 1
    }

    /// Item a scan of `product` should check: an unchecked item linked to the
    /// product, else the unchecked item with the lexicographically smallest
    /// label that contains (or is contained in) the product name.
    fn match_scan(&self, product: &Product) -> Option<usize> {
        let unchecked = || self.items.iter().enumerate().filter(|(_, i)| !i.checked);
        if let Some((idx, _)) =
            unchecked().find(|(_, i)| i.linked_product.as_ref() == Some(&product.product_id))
        {
            return Some(idx);
        }
        let name = product.name.to_lowercase();
        unchecked()
            .filter(|(_, i)| {
                let label = i.label.trim().to_lowercase();
                !label.is_empty() && (name.contains(&label) || label.contains(&name))
            })
            .min_by(|(ia, a), (ib, b)| {
                a.label
                    .to_lowercase()
                    .cmp(&b.label.to_lowercase())
                    .then(ia.cmp(ib))
            })
            .map(|(idx, _)| idx)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PurchaseRecord {
    pub product_id: ProductId,
    pub at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharedRecommendation {
    /// Feed position; strictly increasing, usable as a polling cursor.
    pub seq: u64,
    pub author: UserId,
    pub product_id: ProductId,
    pub stars: f64,
    pub note: Option<String>,
    pub shared_at: DateTime<Utc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuggestionReason {
    History,
    LowerFootprintAlternative,
    Match,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Suggestion {
    pub product_id: ProductId,
    pub code: String,
    pub name: String,
    pub category: String,
    pub image_ref: Option<String>,
    pub stars: f64,
    pub reason: SuggestionReason,
    /// For alternatives: the history product this one improves on.
    pub alternative_to: Option<ProductId>,
    pub times_bought: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlternativeOffer {
    pub product: Product,
    pub assessment: FootprintAssessment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppliedEvent {
    pub event: GamificationEvent,
    pub outcome: EventOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanOutcome {
    pub list_id: ListId,
    pub item: ListItem,
    pub product: Product,
    pub assessment: FootprintAssessment,
    pub alternative: Option<AlternativeOffer>,
    pub events: Vec<AppliedEvent>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptOutcome {
    pub list_id: ListId,
    pub item: ListItem,
    pub events: Vec<AppliedEvent>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShareOutcome {
    pub recommendation: SharedRecommendation,
    pub events: Vec<AppliedEvent>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedPage {
    pub entries: Vec<SharedRecommendation>,
    /// Highest sequence number in the feed; pass back as `after` to poll.
    pub cursor: u64,
}

#[derive(Debug, Error)]
pub enum ListError {
    #[error("list {0} not found")]
    ListNotFound(ListId),
    #[error("list {0} belongs to another user")]
    Forbidden(ListId),
    #[error("item {0} not found")]
    ItemNotFound(String),
    #[error("no product with code {0:?}")]
    UnknownProduct(String),
    #[error("no product with id {0}")]
    UnknownProductId(ProductId),
    #[error("a list named {0:?} already exists")]
    DuplicateName(String),
    #[error("{0}")]
    Validation(String),
    #[error("product {0} was never scanned or bought by this user")]
    NoPurchaseProvenance(ProductId),
    #[error("item {0} is not a checked product")]
    NotChecked(String),
    #[error("item {0} already took an alternative")]
    AlreadyAccepted(String),
    #[error("no lower-footprint alternative for item {0}")]
    NoAlternative(String),
    #[error("offered alternative is {expected}, not {got}")]
    AlternativeMismatch { expected: ProductId, got: ProductId },
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Footprint(#[from] FootprintError),
    #[error(transparent)]
    Gamify(#[from] GamifyError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

type ListSlot = Arc<Mutex<ShoppingList>>;

pub struct Listkeeper {
    catalog: Arc<CatalogHandle>,
    references: Arc<References>,
    rules: Arc<GamifyConfig>,
    store: Store,
    clock: MonotoneClock<Arc<dyn Clock>>,
    lists: RwLock<HashMap<ListId, ListSlot>>,
    history: Mutex<HashMap<UserId, Vec<PurchaseRecord>>>,
    feed: RwLock<Vec<SharedRecommendation>>,
    profiles: ProfileRegistry,
}

impl Listkeeper {
    /// Builds the service on top of whatever `store` already holds.
    pub fn open(
        catalog: Arc<CatalogHandle>,
        references: Arc<References>,
        rules: Arc<GamifyConfig>,
        store: Store,
        clock: Arc<dyn Clock>,
    ) -> Result<Self, ListError> {
        let state = store.load()?;
        let clock = MonotoneClock::new(clock);
        for t in state
            .lists
            .iter()
            .map(|l| l.updated_at)
            .chain(state.feed.iter().map(|f| f.shared_at))
            .chain(state.history.values().flatten().map(|r| r.at))
        {
            clock.observe(t);
        }
        let mut feed = state.feed;
        feed.sort_by_key(|f| f.seq);
        Ok(Self {
            catalog,
            references,
            rules,
            store,
            clock,
            lists: RwLock::new(
                state
                    .lists
                    .into_iter()
                    .map(|l| (l.list_id.clone(), Arc::new(Mutex::new(l))))
                    .collect(),
            ),
            history: Mutex::new(state.history),
            feed: RwLock::new(feed),
            profiles: ProfileRegistry::from_profiles(state.profiles),
        })
    }

    pub fn catalog(&self) -> Arc<Catalog> {
        self.catalog.snapshot()
    }

    pub fn catalog_handle(&self) -> &Arc<CatalogHandle> {
        &self.catalog
    }

    pub fn references(&self) -> &References {
        &self.references
    }

    pub fn rules(&self) -> &GamifyConfig {
        &self.rules
    }

    fn slot(&self, owner: &UserId, list_id: &ListId) -> Result<ListSlot, ListError> {
        let slot = self
            .lists
            .read()
            .get(list_id)
            .cloned()
            .ok_or_else(|| ListError::ListNotFound(list_id.clone()))?;
        if slot.lock().owner != *owner {
            return Err(ListError::Forbidden(list_id.clone()));
        }
        Ok(slot)
    }

    fn suggestion(
        &self,
        product: &Product,
        reason: SuggestionReason,
        alternative_to: Option<ProductId>,
        stats: &HashMap<ProductId, HistoryStats>,
    ) -> Result<Suggestion, ListError> {
        Ok(Suggestion {
            product_id: product.product_id.clone(),
            code: product.code.clone(),
            name: product.name.clone(),
            category: product.category.clone(),
            image_ref: product.image_ref.clone(),
            stars: product.stars(&self.references)?,
            reason,
            alternative_to,
            times_bought: stats.get(&product.product_id).map_or(0, |s| s.count),
        })
    }

    fn user_history(&self, user: &UserId) -> Vec<PurchaseRecord> {
        self.history.lock().get(user).cloned().unwrap_or_default()
    }

    pub fn history(&self, user: &UserId) -> Vec<PurchaseRecord> {
        self.user_history(user)
    }

    pub fn create_list(
        &self,
        owner: &UserId,
        name: &str,
        seed_suggestions: bool,
    ) -> Result<(ShoppingList, Vec<Suggestion>), ListError> {
        let name = name.trim();
        if name.is_empty() {
            return Err(ListError::Validation("list name must not be empty".into()));
        }
        let now = self.clock.now();
        let list = ShoppingList {
            list_id: ListId::generate(),
            owner: owner.clone(),
            name: name.to_string(),
            items: Vec::new(),
            created_at: now,
            updated_at: now,
            next_item: 0,
        };
        {
            let mut lists = self.lists.write();
            if lists.values().any(|l| {
                let l = l.lock();
                l.owner == *owner && l.name == name
            }) {
                return Err(ListError::DuplicateName(name.to_string()));
            }
            let mut batch = Batch::default();
            batch.put_list(&list)?;
            self.store.commit(batch)?;
            lists.insert(list.list_id.clone(), Arc::new(Mutex::new(list.clone())));
        }
        let suggestions = if seed_suggestions {
            self.seed_suggestions(owner)?
        } else {
            Vec::new()
        };
        Ok((list, suggestions))
    }

    /// History products by frequency then recency, each followed by its
    /// lower-footprint alternative when one exists.
    fn seed_suggestions(&self, owner: &UserId) -> Result<Vec<Suggestion>, ListError> {
        let catalog = self.catalog.snapshot();
        let history = self.user_history(owner);
        let stats = history_stats(&history);
        let mut bought: Vec<&Product> = stats.keys().filter_map(|id| catalog.get(id)).collect();
        bought = rank_candidates(bought, &stats);

        let mut out: Vec<Suggestion> = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for product in bought {
            if out.len() >= SEED_SUGGESTIONS {
                break;
            }
            if seen.insert(product.product_id.clone()) {
                out.push(self.suggestion(product, SuggestionReason::History, None, &stats)?);
            }
            if out.len() >= SEED_SUGGESTIONS {
                break;
            }
            if let Some(alt) = catalog.suggest_alternative(product, &self.references)? {
                if seen.insert(alt.product_id.clone()) {
                    out.push(self.suggestion(
                        alt,
                        SuggestionReason::LowerFootprintAlternative,
                        Some(product.product_id.clone()),
                        &stats,
                    )?);
                }
            }
        }
        Ok(out)
    }

    /// Catalog products whose names contain `partial_text`, ranked by the
    /// user's purchase frequency, then recency, then name. Empty text yields
    /// the user's most frequent and most recent products.
    pub fn suggest_while_typing(
        &self,
        owner: &UserId,
        partial_text: &str,
        limit: usize,
    ) -> Result<Vec<Suggestion>, ListError> {
        let catalog = self.catalog.snapshot();
        let history = self.user_history(owner);
        let stats = history_stats(&history);
        let text = partial_text.trim();
        let candidates: Vec<&Product> = if text.is_empty() {
            stats.keys().filter_map(|id| catalog.get(id)).collect()
        } else {
            catalog.substring_matches(text)
        };
        rank_candidates(candidates, &stats)
            .into_iter()
            .take(limit)
            .map(|p| {
                let reason = if stats.contains_key(&p.product_id) {
                    SuggestionReason::History
                } else {
                    SuggestionReason::Match
                };
                self.suggestion(p, reason, None, &stats)
            })
            .collect()
    }

    pub fn lists_for(&self, owner: &UserId) -> Vec<ShoppingList> {
        let mut lists: Vec<ShoppingList> = self
            .lists
            .read()
            .values()
            .map(|l| l.lock().clone())
            .filter(|l| l.owner == *owner)
            .collect();
        lists.sort_by(|a, b| a.created_at.cmp(&b.created_at).then(a.list_id.cmp(&b.list_id)));
        lists
    }

    pub fn get_list(&self, owner: &UserId, list_id: &ListId) -> Result<ShoppingList, ListError> {
        Ok(self.slot(owner, list_id)?.lock().clone())
    }

    pub fn add_item(
        &self,
        owner: &UserId,
        list_id: &ListId,
        label: &str,
        product_code: Option<&str>,
    ) -> Result<ListItem, ListError> {
        let slot = self.slot(owner, list_id)?;
        let mut list = slot.lock();
        let catalog = self.catalog.snapshot();
        let product = match product_code {
            Some(code) => Some(
                catalog
                    .lookup_by_code(code)
                    .ok_or_else(|| ListError::UnknownProduct(code.to_string()))?,
            ),
            None => None,
        };
        let label = match (label.trim(), product) {
            ("", Some(p)) => p.name.clone(),
            ("", None) => return Err(ListError::Validation("item label must not be empty".into())),
            (l, _) => l.to_string(),
        };
        let mut updated = list.clone();
        let idx = updated.push_item(label, product.map(|p| p.product_id.clone()));
        updated.updated_at = self.clock.now();
        let mut batch = Batch::default();
        batch.put_list(&updated)?;
        self.store.commit(batch)?;
        let item = updated.items[idx].clone();
        *list = updated;
        Ok(item)
    }

    pub fn remove_item(
        &self,
        owner: &UserId,
        list_id: &ListId,
        item_id: &str,
    ) -> Result<ShoppingList, ListError> {
        let slot = self.slot(owner, list_id)?;
        let mut list = slot.lock();
        let mut updated = list.clone();
        let before = updated.items.len();
        updated.items.retain(|i| i.item_id != item_id);
        if updated.items.len() == before {
            return Err(ListError::ItemNotFound(item_id.to_string()));
        }
        updated.updated_at = self.clock.now();
        let mut batch = Batch::default();
        batch.put_list(&updated)?;
        self.store.commit(batch)?;
        *list = updated.clone();
        Ok(updated)
    }

    /// Checks or unchecks an item by hand. Earns no points.
    pub fn set_manual_check(
        &self,
        owner: &UserId,
        list_id: &ListId,
        item_id: &str,
        checked: bool,
    ) -> Result<ListItem, ListError> {
        let slot = self.slot(owner, list_id)?;
        let mut list = slot.lock();
        let catalog = self.catalog.snapshot();
        let mut updated = list.clone();
        let item = updated
            .items
            .iter_mut()
            .find(|i| i.item_id == item_id)
            .ok_or_else(|| ListError::ItemNotFound(item_id.to_string()))?;
        if checked {
            item.checked = true;
            item.manual_check = item.scan_code.is_none();
            if let Some(p) = item.linked_product.as_ref().and_then(|id| catalog.get(id)) {
                item.assessment = Some(p.assess(&self.references)?);
            }
        } else {
            item.checked = false;
            item.manual_check = false;
            item.scan_code = None;
        }
        let item = item.clone();
        updated.updated_at = self.clock.now();
        let mut batch = Batch::default();
        batch.put_list(&updated)?;
        self.store.commit(batch)?;
        *list = updated;
        Ok(item)
    }

    fn event(
        &self,
        catalog: &Catalog,
        kind: EventKind,
        user: &UserId,
        product: &Product,
        stars: f64,
        timestamp: DateTime<Utc>,
    ) -> Result<GamificationEvent, ListError> {
        Ok(GamificationEvent {
            kind,
            user: user.clone(),
            product_id: product.product_id.clone(),
            category: product.category.clone(),
            stars,
            category_median_stars: catalog
                .category_median_stars(&product.category, &self.references)?,
            timestamp,
        })
    }

    /// Applies `events` to a copy of the user's profile and returns the copy.
    fn apply_events(
        &self,
        profile: &PlayerProfile,
        events: Vec<GamificationEvent>,
    ) -> Result<(PlayerProfile, Vec<AppliedEvent>), ListError> {
        let mut updated = profile.clone();
        let applied = events
            .into_iter()
            .map(|event| {
                let outcome = updated.apply_event(&event, &self.rules)?;
                Ok(AppliedEvent { event, outcome })
            })
            .collect::<Result<_, GamifyError>>()?;
        Ok((updated, applied))
    }

    pub fn scan_check_off(
        &self,
        owner: &UserId,
        list_id: &ListId,
        code: &str,
    ) -> Result<ScanOutcome, ListError> {
        let slot = self.slot(owner, list_id)?;
        let mut list = slot.lock();
        let catalog = self.catalog.snapshot();
        let product = catalog
            .lookup_by_code(code)
            .ok_or_else(|| ListError::UnknownProduct(code.to_string()))?;
        let assessment = product.assess(&self.references)?;
        let alternative = catalog
            .suggest_alternative(product, &self.references)?
            .map(|alt| {
                Ok::<_, ListError>(AlternativeOffer {
                    product: alt.clone(),
                    assessment: alt.assess(&self.references)?,
                })
            })
            .transpose()?;

        let now = self.clock.now();
        let mut updated = list.clone();
        let idx = match updated.match_scan(product) {
            Some(idx) => idx,
            None => updated.push_item(product.name.clone(), None),
        };
        let item = &mut updated.items[idx];
        item.checked = true;
        item.manual_check = false;
        item.scan_code = Some(code.to_string());
        item.linked_product = Some(product.product_id.clone());
        item.assessment = Some(assessment.clone());
        let item = item.clone();
        updated.updated_at = now;

        let event = self.event(&catalog, EventKind::Scan, owner, product, assessment.stars, now)?;
        let profile_slot = self.profiles.slot(owner);
        let mut profile = profile_slot.lock();
        let (new_profile, events) = self.apply_events(&profile, vec![event])?;

        let record = PurchaseRecord {
            product_id: product.product_id.clone(),
            at: now,
        };
        let mut history = self.history.lock();
        let user_history = history.entry(owner.clone()).or_default();
        let mut batch = Batch::default();
        batch
            .put_list(&updated)?
            .put_profile(&new_profile)?
            .append_history(owner, user_history.len() as u64, &record)?;
        self.store.commit(batch)?;

        user_history.push(record);
        *profile = new_profile;
        *list = updated;
        Ok(ScanOutcome {
            list_id: list_id.clone(),
            item,
            product: product.clone(),
            assessment,
            alternative,
            events,
        })
    }

    /// Swaps a scanned item for the catalog's lower-footprint alternative.
    pub fn accept_alternative(
        &self,
        owner: &UserId,
        list_id: &ListId,
        item_id: &str,
        expected: Option<&ProductId>,
    ) -> Result<AcceptOutcome, ListError> {
        let slot = self.slot(owner, list_id)?;
        let mut list = slot.lock();
        let catalog = self.catalog.snapshot();
        let mut updated = list.clone();
        let item = updated
            .items
            .iter_mut()
            .find(|i| i.item_id == item_id)
            .ok_or_else(|| ListError::ItemNotFound(item_id.to_string()))?;
        if item.replaced_product.is_some() {
            return Err(ListError::AlreadyAccepted(item_id.to_string()));
        }
        let current = match (&item.linked_product, item.checked) {
            (Some(id), true) => catalog
                .get(id)
                .ok_or_else(|| ListError::UnknownProductId(id.clone()))?,
            _ => return Err(ListError::NotChecked(item_id.to_string())),
        };
        let alternative = catalog
            .suggest_alternative(current, &self.references)?
            .ok_or_else(|| ListError::NoAlternative(item_id.to_string()))?;
        if let Some(expected) = expected {
            if *expected != alternative.product_id {
                return Err(ListError::AlternativeMismatch {
                    expected: alternative.product_id.clone(),
                    got: expected.clone(),
                });
            }
        }
        let assessment = alternative.assess(&self.references)?;
        let now = self.clock.now();
        item.replaced_product = Some(current.product_id.clone());
        item.linked_product = Some(alternative.product_id.clone());
        item.label = alternative.name.clone();
        item.assessment = Some(assessment.clone());
        let item = item.clone();
        updated.updated_at = now;

        let event = self.event(
            &catalog,
            EventKind::AcceptedAlternative,
            owner,
            alternative,
            assessment.stars,
            now,
        )?;
        let profile_slot = self.profiles.slot(owner);
        let mut profile = profile_slot.lock();
        let (new_profile, events) = self.apply_events(&profile, vec![event])?;

        let record = PurchaseRecord {
            product_id: alternative.product_id.clone(),
            at: now,
        };
        let mut history = self.history.lock();
        let user_history = history.entry(owner.clone()).or_default();
        let mut batch = Batch::default();
        batch
            .put_list(&updated)?
            .put_profile(&new_profile)?
            .append_history(owner, user_history.len() as u64, &record)?;
        self.store.commit(batch)?;

        user_history.push(record);
        *profile = new_profile;
        *list = updated;
        Ok(AcceptOutcome {
            list_id: list_id.clone(),
            item,
            events,
        })
    }

    pub fn share_recommendation(
        &self,
        owner: &UserId,
        product_id: &ProductId,
        note: Option<&str>,
    ) -> Result<ShareOutcome, ListError> {
        let catalog = self.catalog.snapshot();
        let product = catalog
            .get(product_id)
            .ok_or_else(|| ListError::UnknownProductId(product_id.clone()))?;
        let provenance = self
            .history
            .lock()
            .get(owner)
            .is_some_and(|h| h.iter().any(|r| r.product_id == *product_id));
        if !provenance {
            return Err(ListError::NoPurchaseProvenance(product_id.clone()));
        }
        let stars = product.stars(&self.references)?;

        let profile_slot = self.profiles.slot(owner);
        let mut profile = profile_slot.lock();
        let mut feed = self.feed.write();
        let now = self.clock.now();
        let recommendation = SharedRecommendation {
            seq: feed.last().map_or(1, |r| r.seq + 1),
            author: owner.clone(),
            product_id: product_id.clone(),
            stars,
            note: note.map(str::trim).filter(|n| !n.is_empty()).map(str::to_string),
            shared_at: now,
        };
        let event = self.event(
            &catalog,
            EventKind::SharedRecommendation,
            owner,
            product,
            stars,
            now,
        )?;
        let (new_profile, events) = self.apply_events(&profile, vec![event])?;
        let mut batch = Batch::default();
        batch.append_feed(&recommendation)?.put_profile(&new_profile)?;
        self.store.commit(batch)?;

        feed.push(recommendation.clone());
        *profile = new_profile;
        Ok(ShareOutcome {
            recommendation,
            events,
        })
    }

    /// Newest first. With `after`, only entries later than that cursor.
    pub fn community_feed(&self, limit: usize, after: Option<u64>) -> FeedPage {
        let feed = self.feed.read();
        let after = after.unwrap_or(0);
        FeedPage {
            entries: feed
                .iter()
                .rev()
                .take_while(|r| r.seq > after)
                .take(limit)
                .cloned()
                .collect(),
            cursor: feed.last().map_or(0, |r| r.seq),
        }
    }

    pub fn profile(&self, user: &UserId) -> PlayerProfile {
        self.profiles.get(user)
    }

    pub fn mission_progress(&self, user: &UserId) -> MissionProgressReport {
        gamify::mission_progress(&self.profiles.get(user), &self.rules.missions)
    }

    pub fn leaderboard(&self, limit: usize) -> Vec<LeaderboardEntry> {
        let profiles: Vec<PlayerProfile> = self
            .profiles
            .snapshot()
            .into_iter()
            .filter(|p| p.points > 0)
            .collect();
        gamify::leaderboard(&profiles, limit)
    }
}
