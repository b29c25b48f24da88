//! Embedded transactional persistence for lists, profiles, purchase history
//! and the community feed. Values are JSON documents; every batch commits in
//! one write transaction.

use std::collections::HashMap;
use std::path::Path;

use redb::{Database, ReadableTable, TableDefinition};
use serde::de::DeserializeOwned;
use thiserror::Error;

use super::{PurchaseRecord, SharedRecommendation, ShoppingList};
use crate::gamify::{PlayerProfile, UserId};

const LISTS: TableDefinition<&str, &[u8]> = TableDefinition::new("lists");
const PROFILES: TableDefinition<&str, &[u8]> = TableDefinition::new("profiles");
const HISTORY: TableDefinition<(&str, u64), &[u8]> = TableDefinition::new("history");
const FEED: TableDefinition<u64, &[u8]> = TableDefinition::new("feed");

#[derive(Debug, Error)]
pub enum StoreError {
    // Boxed: the database error is large and rides on every Result here.
    #[error("store: {0}")]
    Db(Box<redb::Error>),
    #[error("store document: {0}")]
    Encoding(#[from] serde_json::Error),
}

fn db_err<E: Into<redb::Error>>(e: E) -> StoreError {
    StoreError::Db(Box::new(e.into()))
}

pub struct Store {
    db: Database,
}

impl std::fmt::Debug for Store {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Store").finish_non_exhaustive()
    }
}

/// Writes that must land together.
#[derive(Debug, Default)]
pub struct Batch {
    lists: Vec<(String, Vec<u8>)>,
    profiles: Vec<(String, Vec<u8>)>,
    history: Vec<(String, u64, Vec<u8>)>,
    feed: Vec<(u64, Vec<u8>)>,
}

impl Batch {
    pub fn put_list(&mut self, list: &ShoppingList) -> Result<&mut Self, StoreError> {
        self.lists
            .push((list.list_id.as_str().to_string(), serde_json::to_vec(list)?));
        Ok(self)
    }

    pub fn put_profile(&mut self, profile: &PlayerProfile) -> Result<&mut Self, StoreError> {
        self.profiles
            .push((profile.user.as_str().to_string(), serde_json::to_vec(profile)?));
        Ok(self)
    }

    pub fn append_history(
        &mut self,
        user: &UserId,
        seq: u64,
        record: &PurchaseRecord,
    ) -> Result<&mut Self, StoreError> {
        self.history
            .push((user.as_str().to_string(), seq, serde_json::to_vec(record)?));
        Ok(self)
    }

    pub fn append_feed(&mut self, rec: &SharedRecommendation) -> Result<&mut Self, StoreError> {
        self.feed.push((rec.seq, serde_json::to_vec(rec)?));
        Ok(self)
    }
}

#[derive(Debug, Default)]
pub struct StoredState {
    pub lists: Vec<ShoppingList>,
    pub profiles: Vec<PlayerProfile>,
    pub history: HashMap<UserId, Vec<PurchaseRecord>>,
    pub feed: Vec<SharedRecommendation>,
}

fn decode<T: DeserializeOwned>(bytes: &[u8]) -> Result<T, StoreError> {
    Ok(serde_json::from_slice(bytes)?)
}

impl Store {
    /// Opens or creates `<dir>/greenbasket.redb`.
    pub fn open(dir: &Path) -> Result<Self, StoreError> {
        std::fs::create_dir_all(dir).map_err(db_err)?;
        let db = Database::create(dir.join("greenbasket.redb")).map_err(db_err)?;
        Self::init(db)
    }

    pub fn in_memory() -> Result<Self, StoreError> {
        let db = Database::builder()
            .create_with_backend(redb::backends::InMemoryBackend::new())
            .map_err(db_err)?;
        Self::init(db)
    }

    fn init(db: Database) -> Result<Self, StoreError> {
        let txn = db.begin_write().map_err(db_err)?;
        txn.open_table(LISTS).map_err(db_err)?;
        txn.open_table(PROFILES).map_err(db_err)?;
        txn.open_table(HISTORY).map_err(db_err)?;
        txn.open_table(FEED).map_err(db_err)?;
        txn.commit().map_err(db_err)?;
        Ok(Self { db })
    }

    pub fn commit(&self, batch: Batch) -> Result<(), StoreError> {
        let txn = self.db.begin_write().map_err(db_err)?;
        {
            let mut lists = txn.open_table(LISTS).map_err(db_err)?;
            for (k, v) in &batch.lists {
                lists.insert(k.as_str(), v.as_slice()).map_err(db_err)?;
            }
            let mut profiles = txn.open_table(PROFILES).map_err(db_err)?;
            for (k, v) in &batch.profiles {
                profiles.insert(k.as_str(), v.as_slice()).map_err(db_err)?;
            }
            let mut history = txn.open_table(HISTORY).map_err(db_err)?;
            for (user, seq, v) in &batch.history {
                history
                    .insert((user.as_str(), *seq), v.as_slice())
                    .map_err(db_err)?;
            }
            let mut feed = txn.open_table(FEED).map_err(db_err)?;
            for (seq, v) in &batch.feed {
                feed.insert(*seq, v.as_slice()).map_err(db_err)?;
            }
        }
        txn.commit().map_err(db_err)
    }

    pub fn load(&self) -> Result<StoredState, StoreError> {
        let txn = self.db.begin_read().map_err(db_err)?;
        let mut state = StoredState::default();

        let lists = txn.open_table(LISTS).map_err(db_err)?;
        for entry in lists.iter().map_err(db_err)? {
            let (_, v) = entry.map_err(db_err)?;
            state.lists.push(decode(v.value())?);
        }
        let profiles = txn.open_table(PROFILES).map_err(db_err)?;
        for entry in profiles.iter().map_err(db_err)? {
            let (_, v) = entry.map_err(db_err)?;
            state.profiles.push(decode(v.value())?);
        }
        // Keys sort by (user, seq), so each user's records come back in append order.
        let history = txn.open_table(HISTORY).map_err(db_err)?;
        for entry in history.iter().map_err(db_err)? {
            let (k, v) = entry.map_err(db_err)?;
            let (user, _) = k.value();
            state
                .history
                .entry(UserId::new(user))
                .or_default()
                .push(decode(v.value())?);
        }
        let feed = txn.open_table(FEED).map_err(db_err)?;
        for entry in feed.iter().map_err(db_err)? {
            let (_, v) = entry.map_err(db_err)?;
            state.feed.push(decode(v.value())?);
        }
        Ok(state)
    }
}
