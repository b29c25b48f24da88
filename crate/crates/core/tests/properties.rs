mod common;

use chrono::Duration;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

use common::*;
use greenbasket_core::behavior::{apply_transform, AdoptionTransform};
use greenbasket_core::catalog::{ingest, ProductId};
use greenbasket_core::footprint::{
    daily_value, footprint_weight, star_rating, Dimension, FootprintFactor, PerDimension,
};
use greenbasket_core::gamify::{
    leaderboard, leaderboard_order, level_for_points, EventKind, GamificationEvent, GamifyConfig,
    PlayerProfile, UserId,
};

fn dvs() -> impl Strategy<Value = [f64; 3]> {
    [0.0..3.0f64, 0.0..3.0f64, 0.0..3.0f64]
}

fn per(v: [f64; 3]) -> PerDimension<f64> {
    PerDimension {
        carbon: v[0],
        nitrogen: v[1],
        water: v[2],
    }
}

proptest! {
    #[test]
    fn weight_footprint_is_homogeneous(w in 0.0..50.0f64, k in 0.0..20.0f64, f in 0.0..100.0f64) {
        let factor = FootprintFactor::new(Dimension::Water, f).unwrap();
        let scaled = footprint_weight(k * w, &factor).unwrap().amount;
        let base = k * footprint_weight(w, &factor).unwrap().amount;
        prop_assert!((scaled - base).abs() <= 1e-12 * base.abs().max(f64::MIN_POSITIVE));
    }

    #[test]
    fn stars_are_bounded_and_monotone(a in dvs(), bump in 0.0..1.0f64, dim in 0usize..3, s in proptest::option::of(0.0..=1.0f64)) {
        let stars = star_rating(&per(a), s).unwrap();
        prop_assert!((0.0..=3.0).contains(&stars));
        let mut worse = a;
        worse[dim] += bump;
        prop_assert!(star_rating(&per(worse), s).unwrap() <= stars);
    }

    #[test]
    fn assess_is_the_composed_pipeline(w in 0.01..5.0f64, c in 0.0..20.0f64, n in 0.0..0.1f64, wa in 0.0..5000.0f64) {
        let refs = refs();
        let p = product("x", "x", "x", [c, n, wa], w);
        let manual = PerDimension::from_fn(|d| {
            daily_value(footprint_weight(w, &p.factors[d]).unwrap(), refs.get(d)).unwrap()
        });
        let a = p.assess(&refs).unwrap();
        prop_assert_eq!(a.per_dimension_dv, manual);
        prop_assert_eq!(a.stars, star_rating(&manual, None).unwrap());
    }

    #[test]
    fn transform_is_idempotent(seed in any::<u64>(), n in 3usize..=15, row in 0usize..15) {
        let mut rng = StdRng::seed_from_u64(seed);
        let base = random_chain(&mut rng, n);
        let donor = random_chain(&mut rng, n);
        let label = base.labels()[row % n].clone();
        let t = AdoptionTransform::new("t").with_row(label.clone(), donor.rows()[row % n].clone());
        let once = apply_transform(&base, &t).unwrap();
        let twice = apply_transform(&once, &t).unwrap();
        prop_assert_eq!(&once, &twice);
        for other in base.labels().iter().filter(|l| **l != label) {
            prop_assert_eq!(once.row(other), base.row(other));
        }
    }

    #[test]
    fn code_index_is_consistent(seed in any::<u64>(), size in 0usize..40) {
        let mut rng = StdRng::seed_from_u64(seed);
        let catalog = random_catalog(&mut rng, size);
        for p in catalog.products() {
            prop_assert_eq!(catalog.lookup_by_code(&p.code), Some(p));
        }
        prop_assert!(catalog.lookup_by_code("absent").is_none());
        let indexed: usize = catalog.categories().map(|(_, ids)| ids.len()).sum();
        prop_assert_eq!(indexed, size);
    }

    #[test]
    fn levels_are_monotone(a in 0u64..1_000_000, b in 0u64..1_000_000) {
        let curve = GamifyConfig::default().levels;
        let (lo, hi) = (a.min(b), a.max(b));
        prop_assert!(level_for_points(lo, &curve) <= level_for_points(hi, &curve));
    }

    #[test]
    fn leaderboard_order_is_total(points in proptest::collection::vec((0u64..4, proptest::option::of(0i64..3), 0u8..4), 1..12)) {
        let profiles: Vec<PlayerProfile> = points
            .iter()
            .enumerate()
            .map(|(i, (pts, at, _))| {
                let mut p = PlayerProfile::new(UserId::new(format!("u{i}")));
                p.points = pts * 100;
                p.points_reached_at = at.map(|h| start() + Duration::hours(h));
                p
            })
            .collect();
        for a in &profiles {
            for b in &profiles {
                let ab = leaderboard_order(a, b);
                prop_assert_eq!(ab, leaderboard_order(b, a).reverse());
                prop_assert_eq!(ab.is_eq(), a.user == b.user);
                for c in &profiles {
                    if ab.is_lt() && leaderboard_order(b, c).is_lt() {
                        prop_assert!(leaderboard_order(a, c).is_lt());
                    }
                }
            }
        }
        let board = leaderboard(&profiles, profiles.len());
        prop_assert_eq!(board.iter().map(|e| e.rank).collect::<Vec<_>>(), (1..=profiles.len()).collect::<Vec<_>>());
    }

    #[test]
    fn points_never_decrease_and_replays_are_ignored(kinds in proptest::collection::vec((0usize..3, 0u8..4, 0i64..48), 1..30)) {
        let rules = GamifyConfig::default();
        let user = UserId::new("p");
        let mut profile = PlayerProfile::new(user.clone());
        for (k, product, hour) in kinds {
            let event = GamificationEvent {
                kind: EventKind::ALL[k],
                user: user.clone(),
                product_id: ProductId::for_code(&product.to_string()),
                category: "soft-drinks".into(),
                stars: 2.0 + product as f64 / 4.0,
                category_median_stars: Some(2.4),
                timestamp: start() + Duration::hours(hour),
            };
            let before = profile.clone();
            profile.apply_event(&event, &rules).unwrap();
            prop_assert!(profile.points >= before.points);
            prop_assert!(profile.badges.is_superset(&before.badges));
            prop_assert_eq!(profile.level, level_for_points(profile.points, &rules.levels));
            let settled = profile.clone();
            let replay = profile.apply_event(&event, &rules).unwrap();
            prop_assert!(replay.replayed);
            prop_assert_eq!(&profile, &settled);
        }
    }

    #[test]
    fn ingest_is_deterministic(rows in proptest::collection::vec((0u8..20, "[a-z ]{0,6}", -1.0..3.0f64, 0.0..5.0f64), 0..60)) {
        let mut doc = String::from("code,name,category,unit_weight_kg,carbon_factor,nitrogen_factor,water_factor\n");
        for (code, name, weight, factor) in &rows {
            doc.push_str(&format!("{code},{name},cat,{weight},{factor},0.001,100\n"));
        }
        let (c1, r1) = ingest(doc.as_bytes()).unwrap();
        let (c2, r2) = ingest(doc.as_bytes()).unwrap();
        prop_assert_eq!(c1.products(), c2.products());
        prop_assert_eq!(serde_json::to_string(&r1).unwrap(), serde_json::to_string(&r2).unwrap());
        prop_assert_eq!(r1.accepted + r1.rejected.len(), rows.len());
    }
}
