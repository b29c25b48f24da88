use std::cmp::Reverse;
use std::collections::{HashMap, HashSet};

use chrono::{DateTime, Utc};

use super::PurchaseRecord;
use crate::catalog::{Product, ProductId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HistoryStats {
    pub count: usize,
    pub last_at: DateTime<Utc>,
}

pub fn history_stats(history: &[PurchaseRecord]) -> HashMap<ProductId, HistoryStats> {
    let mut stats: HashMap<ProductId, HistoryStats> = HashMap::new();
    for r in history {
        stats
            .entry(r.product_id.clone())
            .and_modify(|s| {
                s.count += 1;
                s.last_at = s.last_at.max(r.at);
            })
            .or_insert(HistoryStats {
                count: 1,
                last_at: r.at,
            });
    }
    stats
}

/// Purchase count descending, then most recent purchase, then name, then id.
/// Never-bought products rank after all bought ones. Duplicates are dropped.
pub fn rank_candidates<'a>(
    candidates: Vec<&'a Product>,
    stats: &HashMap<ProductId, HistoryStats>,
) -> Vec<&'a Product> {
    let mut seen = HashSet::new();
    let mut out: Vec<&Product> = candidates
        .into_iter()
        .filter(|p| seen.insert(p.product_id.clone()))
        .collect();
    out.sort_by_cached_key(|p| {
        let s = stats.get(&p.product_id);
        (
            Reverse(s.map_or(0, |s| s.count)),
            Reverse(s.map(|s| s.last_at)),
            p.name.to_lowercase(),
            p.product_id.clone(),
        )
    });
    out
}
