//! Markov model of consumer behaviour while shopping.
//!
//! Fifteen states grouped in six macro-states describe one shopping trip,
//! from list preparation to sharing recommendations. Persona baselines and
//! adoption transforms live in data files; this module validates them,
//! applies transforms, solves for stationary distributions and compares
//! before/after results.

mod compare;
mod files;
mod matrix;
mod stationary;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use compare::{compare, ComparisonReport, CompareError, StateDelta, WatchedState};
pub use files::{
    load_matrix, load_transform, parse_matrix, parse_transform, MatrixFileError,
};
pub use matrix::{
    apply_transform, validate_behavior_matrix, validate_matrix, AdoptionTransform, MatrixReport,
    MatrixViolation, TransitionMatrix, ROW_SUM_TOLERANCE,
};
pub use stationary::{
    check_structure, stationary, ChainError, StationaryConfig, StationaryDistribution,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MacroState {
    Preparation,
    Support,
    InfluenceOnPurchases,
    PurchaseAttention,
    ItemComparison,
    Sharing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BehaviorState {
    S1,
    S2,
    S3,
    S4,
    S5,
    S6,
    S7,
    S8,
    S9,
    S10,
    S11,
    S12,
    S13,
    S14,
    S15,
}

use BehaviorState::*;

impl BehaviorState {
    pub const ALL: [BehaviorState; 15] = [
        S1, S2, S3, S4, S5, S6, S7, S8, S9, S10, S11, S12, S13, S14, S15,
    ];

    /// States whose likelihood adoption of the app is expected to raise.
    pub const ADOPTION_WATCH: [BehaviorState; 4] = [S6, S9, S12, S14];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        const LABELS: [&str; 15] = [
            "S1", "S2", "S3", "S4", "S5", "S6", "S7", "S8", "S9", "S10", "S11", "S12", "S13",
            "S14", "S15",
        ];
        LABELS[self.index()]
    }

    pub fn macro_state(self) -> MacroState {
        match self {
            S1 | S2 => MacroState::Preparation,
            S3 | S4 | S5 => MacroState::Support,
            S6 | S7 | S8 => MacroState::InfluenceOnPurchases,
            S9 | S10 => MacroState::PurchaseAttention,
            S11 | S12 | S13 => MacroState::ItemComparison,
            S14 | S15 => MacroState::Sharing,
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            S1 => "Prepares the shopping list",
            S2 => "Does not prepare a shopping list",
            S3 => "Prepares the shopping list using the application",
            S4 => "Prepares the shopping list with a generic checklist",
            S5 => "Prepares the shopping list with pen and paper",
            S6 => "Exposure to recommendations of low environmental impact products by other users",
            S7 => "Habitual purchases",
            S8 => "Other influences",
            S9 => "Reads product labels",
            S10 => "Does not read product labels",
            S11 => "Compares products based on price",
            S12 => "Compares products based on environmental impact",
            S13 => "Compares products based on other characteristics",
            S14 => "Shares recommendations on low environmental impact products",
            S15 => "Does not share recommendations on low environmental impact products",
        }
    }
}

impl fmt::Display for BehaviorState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for BehaviorState {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|st| st.label() == s)
            .ok_or_else(|| format!("unknown behaviour state {s:?}"))
    }
}
