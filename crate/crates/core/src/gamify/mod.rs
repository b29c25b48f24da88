//! Points, levels, missions, badges and the leaderboard.
//!
//! Events come from shopping-list operations. Each distinct event is applied
//! once; replays are ignored. Scans of one product by one user earn points a
//! limited number of times per calendar day.

mod config;
mod registry;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::ProductId;

pub use config::{AntiGaming, ConfigError, GamifyConfig, LevelCurve, Mission, MissionRule, PointSchedule};
pub use registry::ProfileRegistry;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UserId(String);

impl UserId {
    pub fn new(id: impl Into<String>) -> Self {
        UserId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Scan,
    AcceptedAlternative,
    SharedRecommendation,
}

impl EventKind {
    pub const ALL: [EventKind; 3] = [
        EventKind::Scan,
        EventKind::AcceptedAlternative,
        EventKind::SharedRecommendation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Scan => "scan",
            EventKind::AcceptedAlternative => "accepted_alternative",
            EventKind::SharedRecommendation => "shared_recommendation",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GamificationEvent {
    pub kind: EventKind,
    pub user: UserId,
    pub product_id: ProductId,
    pub category: String,
    pub stars: f64,
    /// Median star rating of the product's category when the event happened.
    pub category_median_stars: Option<f64>,
    pub timestamp: DateTime<Utc>,
}

impl GamificationEvent {
    fn replay_key(&self) -> String {
        format!(
            "{}|{}|{}",
            self.kind.as_str(),
            self.product_id,
            self.timestamp.to_rfc3339_opts(chrono::SecondsFormat::Nanos, true)
        )
    }

    fn daily_key(&self) -> String {
        format!("{}|{}", self.timestamp.date_naive(), self.product_id)
    }
}

impl Mission {
    pub fn matches(&self, event: &GamificationEvent) -> bool {
        if self.kind != event.kind {
            return false;
        }
        if let Some(category) = &self.category {
            if *category != event.category {
                return false;
            }
        }
        match self.rule {
            None => true,
            Some(MissionRule::AboveCategoryMedian) => event
                .category_median_stars
                .is_some_and(|median| event.stars > median),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GamifyError {
    #[error("event for {event} applied to profile of {profile}")]
    UserMismatch { profile: UserId, event: UserId },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerProfile {
    pub user: UserId,
    pub points: u64,
    pub level: u64,
    pub badges: BTreeSet<String>,
    pub mission_progress: BTreeMap<String, u32>,
    /// Latest timestamp among events that changed the point total.
    pub points_reached_at: Option<DateTime<Utc>>,
    seen_events: BTreeSet<String>,
    daily_scans: BTreeMap<String, u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EventOutcome {
    pub replayed: bool,
    /// False when the daily scan cap swallowed the event.
    pub earned: bool,
    pub points_awarded: u64,
    pub new_badges: Vec<String>,
    pub completed_missions: Vec<String>,
}

pub fn level_for_points(points: u64, curve: &LevelCurve) -> u64 {
    (points / curve.points_per_level_unit.max(1)).isqrt()
}

impl PlayerProfile {
    pub fn new(user: UserId) -> Self {
        Self {
            user,
            points: 0,
            level: 0,
            badges: BTreeSet::new(),
            mission_progress: BTreeMap::new(),
            points_reached_at: None,
            seen_events: BTreeSet::new(),
            daily_scans: BTreeMap::new(),
        }
    }

    pub fn apply_event(
        &mut self,
        event: &GamificationEvent,
        rules: &GamifyConfig,
    ) -> Result<EventOutcome, GamifyError> {
        if event.user != self.user {
            return Err(GamifyError::UserMismatch {
                profile: self.user.clone(),
                event: event.user.clone(),
            });
        }
        if !self.seen_events.insert(event.replay_key()) {
            return Ok(EventOutcome {
                replayed: true,
                ..Default::default()
            });
        }

        if event.kind == EventKind::Scan {
            let count = self.daily_scans.entry(event.daily_key()).or_default();
            *count += 1;
            if *count > rules.anti_gaming.max_scans_per_product_per_day {
                return Ok(EventOutcome::default());
            }
        }

        let mut outcome = EventOutcome {
            earned: true,
            points_awarded: rules.points.for_kind(event.kind),
            ..Default::default()
        };
        for mission in rules.missions.iter().filter(|m| m.matches(event)) {
            let progress = self.mission_progress.entry(mission.id.clone()).or_default();
            if *progress >= mission.minimum {
                continue;
            }
            *progress += 1;
            if *progress == mission.minimum {
                outcome.completed_missions.push(mission.id.clone());
                outcome.points_awarded += mission.reward_points;
                if self.badges.insert(mission.reward_badge.clone()) {
                    outcome.new_badges.push(mission.reward_badge.clone());
                }
            }
        }

        if outcome.points_awarded > 0 {
            self.points += outcome.points_awarded;
            self.points_reached_at = Some(match self.points_reached_at {
                Some(t) => t.max(event.timestamp),
                None => event.timestamp,
            });
        }
        self.level = level_for_points(self.points, &rules.levels);
        Ok(outcome)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionStatus {
    pub mission_id: String,
    pub title: String,
    pub current: u32,
    pub required: u32,
    pub completed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionProgressReport {
    pub missions: Vec<MissionStatus>,
    /// Counters in the profile for missions no longer configured.
    pub unknown_missions: Vec<String>,
}

pub fn mission_progress(profile: &PlayerProfile, missions: &[Mission]) -> MissionProgressReport {
    let statuses = missions
        .iter()
        .map(|m| {
            let current = profile
                .mission_progress
                .get(&m.id)
                .copied()
                .unwrap_or(0)
                .min(m.minimum);
            MissionStatus {
                mission_id: m.id.clone(),
                title: m.title.clone(),
                current,
                required: m.minimum,
                completed: current >= m.minimum,
            }
        })
        .collect();
    let unknown: Vec<String> = profile
        .mission_progress
        .keys()
        .filter(|id| !missions.iter().any(|m| &m.id == *id))
        .cloned()
        .collect();
    if !unknown.is_empty() {
        tracing::warn!(user = %profile.user, ?unknown, "profile tracks unconfigured missions");
    }
    MissionProgressReport {
        missions: statuses,
        unknown_missions: unknown,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeaderboardEntry {
    pub rank: usize,
    pub user: UserId,
    pub points: u64,
    pub level: u64,
}

/// Points descending, then whoever reached their total first, then user id.
pub fn leaderboard_order(a: &PlayerProfile, b: &PlayerProfile) -> Ordering {
    b.points
        .cmp(&a.points)
        .then_with(|| match (a.points_reached_at, b.points_reached_at) {
            (Some(x), Some(y)) => x.cmp(&y),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => Ordering::Equal,
        })
        .then_with(|| a.user.cmp(&b.user))
}

pub fn leaderboard(profiles: &[PlayerProfile], limit: usize) -> Vec<LeaderboardEntry> {
    let mut sorted: Vec<&PlayerProfile> = profiles.iter().collect();
    sorted.sort_by(|a, b| leaderboard_order(a, b));
    sorted
        .into_iter()
        .take(limit)
        .enumerate()
        .map(|(i, p)| LeaderboardEntry {
            rank: i + 1,
            user: p.user.clone(),
            points: p.points,
            level: p.level,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn at(secs: i64) -> DateTime<Utc> {
        Utc.timestamp_opt(1_700_000_000 + secs, 0).unwrap()
    }

    fn event(kind: EventKind, user: &str, product: &str, stars: f64, secs: i64) -> GamificationEvent {
        GamificationEvent {
            kind,
            user: UserId::new(user),
            product_id: ProductId::from(product),
            category: "soft-drinks".into(),
            stars,
            category_median_stars: Some(1.5),
            timestamp: at(secs),
        }
    }

    #[test]
    fn level_formula_boundaries() {
        let curve = LevelCurve {
            points_per_level_unit: 100,
        };
        assert_eq!(level_for_points(0, &curve), 0);
        assert_eq!(level_for_points(99, &curve), 0);
        assert_eq!(level_for_points(100, &curve), 1);
        assert_eq!(level_for_points(399, &curve), 1);
        assert_eq!(level_for_points(400, &curve), 2);
        assert_eq!(level_for_points(900, &curve), 3);
    }

    #[test]
    fn first_scan_earns_ten() {
        let rules = GamifyConfig::default();
        let mut p = PlayerProfile::new(UserId::new("u"));
        let out = p.apply_event(&event(EventKind::Scan, "u", "a", 1.0, 0), &rules).unwrap();
        assert_eq!(out.points_awarded, 10);
        assert_eq!(p.points, 10);
        assert_eq!(p.level, 0);
    }

    #[test]
    fn replay_is_ignored() {
        let rules = GamifyConfig::default();
        let mut p = PlayerProfile::new(UserId::new("u"));
        let e = event(EventKind::Scan, "u", "a", 2.0, 0);
        p.apply_event(&e, &rules).unwrap();
        let snapshot = p.clone();
        let out = p.apply_event(&e, &rules).unwrap();
        assert!(out.replayed);
        assert_eq!(p, snapshot);
    }

    #[test]
    fn user_mismatch_is_an_error() {
        let rules = GamifyConfig::default();
        let mut p = PlayerProfile::new(UserId::new("u"));
        let e = event(EventKind::Scan, "v", "a", 2.0, 0);
        assert!(matches!(p.apply_event(&e, &rules), Err(GamifyError::UserMismatch { .. })));
    }

    #[test]
    fn schedule_per_kind() {
        let rules = GamifyConfig::default();
        let mut p = PlayerProfile::new(UserId::new("u"));
        p.apply_event(&event(EventKind::AcceptedAlternative, "u", "a", 1.0, 0), &rules).unwrap();
        p.apply_event(&event(EventKind::SharedRecommendation, "u", "a", 1.0, 1), &rules).unwrap();
        assert_eq!(p.points, 20);
    }

    #[test]
    fn daily_scan_cap() {
        let rules = GamifyConfig::default();
        let mut p = PlayerProfile::new(UserId::new("u"));
        for i in 0..5 {
            p.apply_event(&event(EventKind::Scan, "u", "a", 1.0, i), &rules).unwrap();
        }
        assert_eq!(p.points, 30);
        // Next calendar day resets the cap.
        p.apply_event(&event(EventKind::Scan, "u", "a", 1.0, 86_400), &rules).unwrap();
        assert_eq!(p.points, 40);
    }

    #[test]
    fn mission_awards_badge_once_at_fifth() {
        let rules = GamifyConfig::default();
        let mut p = PlayerProfile::new(UserId::new("u"));
        for i in 0..4 {
            let out = p
                .apply_event(&event(EventKind::Scan, "u", &format!("p{i}"), 2.5, i), &rules)
                .unwrap();
            assert!(out.new_badges.is_empty());
        }
        let below_median = event(EventKind::Scan, "u", "meh", 1.0, 10);
        p.apply_event(&below_median, &rules).unwrap();
        assert!(p.badges.is_empty());
        let out = p.apply_event(&event(EventKind::Scan, "u", "p4", 2.5, 11), &rules).unwrap();
        assert_eq!(out.new_badges, vec!["soft-drink-scout".to_string()]);
        assert_eq!(p.points, 6 * 10 + 50);
        let out = p.apply_event(&event(EventKind::Scan, "u", "p5", 2.5, 12), &rules).unwrap();
        assert!(out.new_badges.is_empty());
        assert_eq!(p.mission_progress["soft-drink-scout"], 5);
    }

    #[test]
    fn mission_progress_projection() {
        let rules = GamifyConfig::default();
        let mut p = PlayerProfile::new(UserId::new("u"));
        let report = mission_progress(&p, &rules.missions);
        assert_eq!((report.missions[0].current, report.missions[0].completed), (0, false));
        for i in 0..3 {
            p.apply_event(&event(EventKind::Scan, "u", &format!("p{i}"), 2.5, i), &rules).unwrap();
        }
        let s = &mission_progress(&p, &rules.missions).missions[0];
        assert_eq!((s.current, s.required, s.completed), (3, 5, false));
        for i in 3..9 {
            p.apply_event(&event(EventKind::Scan, "u", &format!("p{i}"), 2.5, i), &rules).unwrap();
        }
        let s = &mission_progress(&p, &rules.missions).missions[0];
        assert_eq!((s.current, s.required, s.completed), (5, 5, true));

        p.mission_progress.insert("retired".into(), 2);
        assert_eq!(mission_progress(&p, &rules.missions).unknown_missions, vec!["retired"]);
    }

    #[test]
    fn leaderboard_orders_by_points_then_time_then_user() {
        let mk = |user: &str, points, reached: Option<i64>| {
            let mut p = PlayerProfile::new(UserId::new(user));
            p.points = points;
            p.points_reached_at = reached.map(at);
            p
        };
        assert!(leaderboard(&[], 10).is_empty());
        let board = leaderboard(
            &[mk("carol", 100, Some(5)), mk("bob", 100, Some(3)), mk("alice", 200, Some(9))],
            10,
        );
        let order: Vec<_> = board.iter().map(|e| (e.rank, e.user.as_str())).collect();
        assert_eq!(order, [(1, "alice"), (2, "bob"), (3, "carol")]);
        let board = leaderboard(&[mk("b", 0, None), mk("a", 0, None)], 1);
        assert_eq!(board.len(), 1);
        assert_eq!(board[0].user.as_str(), "a");
    }
}
