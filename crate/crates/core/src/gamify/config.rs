//! Gamification rules document.
//!
//! ```toml
//! [points]
//! scan = 10
//! accepted_alternative = 15
//! shared_recommendation = 5
//!
//! [levels]
//! points_per_level_unit = 100
//!
//! [anti_gaming]
//! max_scans_per_product_per_day = 3
//!
//! [[missions]]
//! id = "soft-drink-scout"
//! title = "Find five greener soft drinks"
//! kind = "scan"
//! category = "soft-drinks"
//! rule = "above_category_median"
//! minimum = 5
//! reward_badge = "soft-drink-scout"
//! reward_points = 50
//! ```

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::EventKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointSchedule {
    pub scan: u64,
    pub accepted_alternative: u64,
    pub shared_recommendation: u64,
}

impl PointSchedule {
    pub fn for_kind(&self, kind: EventKind) -> u64 {
        match kind {
            EventKind::Scan => self.scan,
            EventKind::AcceptedAlternative => self.accepted_alternative,
            EventKind::SharedRecommendation => self.shared_recommendation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelCurve {
    /// level = floor(sqrt(points / points_per_level_unit))
    pub points_per_level_unit: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AntiGaming {
    pub max_scans_per_product_per_day: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissionRule {
    /// The event's product rates strictly above its category median.
    AboveCategoryMedian,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mission {
    pub id: String,
    pub title: String,
    pub kind: EventKind,
    #[serde(default)]
    pub category: Option<String>,
    #[serde(default)]
    pub rule: Option<MissionRule>,
    pub minimum: u32,
    pub reward_badge: String,
    #[serde(default)]
    pub reward_points: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GamifyConfig {
    pub points: PointSchedule,
    pub levels: LevelCurve,
    pub anti_gaming: AntiGaming,
    #[serde(default)]
    pub missions: Vec<Mission>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("mission {mission}: {message}")]
    Mission { mission: String, message: String },
    #[error("levels.points_per_level_unit must be positive")]
    LevelUnit,
}

impl Default for GamifyConfig {
    fn default() -> Self {
        Self {
            points: PointSchedule {
                scan: 10,
                accepted_alternative: 15,
                shared_recommendation: 5,
            },
            levels: LevelCurve {
                points_per_level_unit: 100,
            },
            anti_gaming: AntiGaming {
                max_scans_per_product_per_day: 3,
            },
            missions: vec![Mission {
                id: "soft-drink-scout".into(),
                title: "Identify five soft drinks with a smaller footprint".into(),
                kind: EventKind::Scan,
                category: Some("soft-drinks".into()),
                rule: Some(MissionRule::AboveCategoryMedian),
                minimum: 5,
                reward_badge: "soft-drink-scout".into(),
                reward_points: 50,
            }],
        }
    }
}

impl GamifyConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let config: GamifyConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
            line: e
                .span()
                .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
                .unwrap_or(0),
            message: e.message().to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.levels.points_per_level_unit == 0 {
            return Err(ConfigError::LevelUnit);
        }
        let mut ids = BTreeSet::new();
        let mut badges = BTreeSet::new();
        for m in &self.missions {
            let fail = |message: &str| ConfigError::Mission {
                mission: m.id.clone(),
                message: message.into(),
            };
            if m.minimum < 1 {
                return Err(fail("minimum must be at least 1"));
            }
            if !ids.insert(m.id.as_str()) {
                return Err(fail("duplicate mission id"));
            }
            if !badges.insert(m.reward_badge.as_str()) {
                return Err(fail("reward badge already used by another mission"));
            }
        }
        Ok(())
    }

    pub fn mission(&self, id: &str) -> Option<&Mission> {
        self.missions.iter().find(|m| m.id == id)
    }
}
