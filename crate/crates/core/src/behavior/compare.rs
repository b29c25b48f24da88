use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::StationaryDistribution;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDelta {
    pub state: String,
    pub before: f64,
    pub after: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WatchedState {
    pub state: String,
    pub increased: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub states: Vec<StateDelta>,
    pub watched: Vec<WatchedState>,
}

impl ComparisonReport {
    pub fn all_watched_increased(&self) -> bool {
        self.watched.iter().all(|w| w.increased)
    }

    pub fn delta(&self, state: &str) -> Option<&StateDelta> {
        self.states.iter().find(|d| d.state == state)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompareError {
    #[error("state sets differ: before has {before:?}, after has {after:?}")]
    LabelMismatch {
        before: Vec<String>,
        after: Vec<String>,
    },
    #[error("watched state {0} is not in either distribution")]
    UnknownWatch(String),
}

/// Per-state change from `before` to `after`, in the order of `before`'s labels.
pub fn compare<S: AsRef<str>>(
    before: &StationaryDistribution,
    after: &StationaryDistribution,
    watch: &[S],
) -> Result<ComparisonReport, CompareError> {
    let mut a: Vec<&String> = before.labels.iter().collect();
    let mut b: Vec<&String> = after.labels.iter().collect();
    a.sort();
    b.sort();
    if a != b {
        return Err(CompareError::LabelMismatch {
            before: before.labels.clone(),
            after: after.labels.clone(),
        });
    }

    let states: Vec<StateDelta> = before
        .labels
        .iter()
        .zip(&before.probabilities)
        .map(|(label, &p_before)| {
            let p_after = after.get(label).expect("label sets checked equal");
            StateDelta {
                state: label.clone(),
                before: p_before,
                after: p_after,
                delta: p_after - p_before,
            }
        })
        .collect();

    let watched = watch
        .iter()
        .map(|w| {
            let w = w.as_ref();
            let d = states
                .iter()
                .find(|d| d.state == w)
                .ok_or_else(|| CompareError::UnknownWatch(w.to_string()))?;
            Ok(WatchedState {
                state: w.to_string(),
                increased: d.after > d.before,
            })
        })
        .collect::<Result<_, _>>()?;

    Ok(ComparisonReport { states, watched })
}
