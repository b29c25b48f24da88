use std::collections::HashMap;
use std::sync::Arc;

use parking_lot::{Mutex, RwLock};

use super::{PlayerProfile, UserId};

/// In-memory profiles with one lock per user.
#[derive(Debug, Default)]
pub struct ProfileRegistry {
    profiles: RwLock<HashMap<UserId, Arc<Mutex<PlayerProfile>>>>,
}

impl ProfileRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_profiles(profiles: impl IntoIterator<Item = PlayerProfile>) -> Self {
        let map = profiles
            .into_iter()
            .map(|p| (p.user.clone(), Arc::new(Mutex::new(p))))
            .collect();
        Self {
            profiles: RwLock::new(map),
        }
    }

    /// The user's profile slot, created empty on first use.
    pub fn slot(&self, user: &UserId) -> Arc<Mutex<PlayerProfile>> {
        if let Some(slot) = self.profiles.read().get(user) {
            return slot.clone();
        }
        self.profiles
            .write()
            .entry(user.clone())
            .or_insert_with(|| Arc::new(Mutex::new(PlayerProfile::new(user.clone()))))
            .clone()
    }

    pub fn get(&self, user: &UserId) -> PlayerProfile {
        self.slot(user).lock().clone()
    }

    /// Copies every profile while holding all of their locks.
    pub fn snapshot(&self) -> Vec<PlayerProfile> {
        let map = self.profiles.read();
        let mut slots: Vec<(&UserId, &Arc<Mutex<PlayerProfile>>)> = map.iter().collect();
        slots.sort_by(|a, b| a.0.cmp(b.0));
        let guards: Vec<_> = slots.iter().map(|(_, s)| s.lock()).collect();
        guards.iter().map(|g| (**g).clone()).collect()
    }
}
