//! Core of the greenbasket shopping assistant.
//!
//! - [`footprint`]: weight, sustainability and daily-value footprints plus the star rating.
//! - [`behavior`]: the Markov model of shopping behaviour and its stationary analysis.
//! - [`catalog`]: product catalog ingestion, lookup and lower-footprint alternatives.
//! - [`gamify`]: points, levels, missions, badges and the leaderboard.
//! - [`lists`]: shopping lists, scan check-off, purchase history and the community feed.

pub mod behavior;
pub mod catalog;
pub mod clock;
pub mod footprint;
pub mod gamify;
pub mod lists;
