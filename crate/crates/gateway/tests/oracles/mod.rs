//! Independent reference implementations and generators for the acceptance run.

use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::Rng;

use greenbasket_core::behavior::{validate_matrix, TransitionMatrix};
use greenbasket_core::catalog::{Catalog, Product, ProductId};
use greenbasket_core::footprint::{
    Dimension, FootprintFactor, PerDimension, References, SustainabilityChecklist,
};

/// Irreducible and aperiodic: a ring through every state, a self-loop on the
/// first, and random extra edges.
pub fn random_chain(rng: &mut StdRng, n: usize) -> TransitionMatrix {
    let mut rows = vec![vec![0.0; n]; n];
    for (i, row) in rows.iter_mut().enumerate() {
        row[(i + 1) % n] = rng.gen_range(0.2..1.0);
        if i == 0 {
            row[0] = rng.gen_range(0.2..1.0);
        }
        for x in row.iter_mut() {
            if *x == 0.0 && rng.gen_bool(0.4) {
                *x = rng.gen_range(0.0..1.0);
            }
        }
        let total: f64 = row.iter().sum();
        row.iter_mut().for_each(|x| *x /= total);
    }
    let labels = (0..n).map(|i| format!("s{i}")).collect();
    validate_matrix(labels, rows).unwrap()
}

/// Solves (I − Mᵀ + 11ᵀ) π = 1 by LU decomposition.
pub fn linear_solve_stationary(m: &TransitionMatrix) -> Vec<f64> {
    let n = m.len();
    let a = DMatrix::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id - m.rows()[j][i] + 1.0
    });
    let pi = a.lu().solve(&DVector::from_element(n, 1.0)).expect("singular system");
    pi.iter().copied().collect()
}

pub fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

pub fn product(code: &str, name: &str, category: &str, factors: [f64; 3], weight: f64) -> Product {
    Product {
        product_id: ProductId::for_code(code),
        name: name.into(),
        category: category.into(),
        code: code.into(),
        unit_weight_kg: weight,
        factors: PerDimension::from_fn(|d| {
            let v = match d {
                Dimension::Carbon => factors[0],
                Dimension::Nitrogen => factors[1],
                Dimension::Water => factors[2],
            };
            FootprintFactor::new(d, v).unwrap()
        }),
        checklist: None,
        image_ref: None,
    }
}

const SYLLABLES: [&str; 8] = ["mil", "ko", "la", "oat", "ri", "ce", "bar", "na"];

fn random_name(rng: &mut StdRng) -> String {
    let mut s: String = (0..rng.gen_range(1..=3))
        .map(|_| SYLLABLES[rng.gen_range(0..SYLLABLES.len())])
        .collect();
    if rng.gen_bool(0.5) {
        s[..1].make_ascii_uppercase();
    }
    s
}

/// Few categories and coarse factors, so star ties are common.
pub fn random_catalog(rng: &mut StdRng, size: usize) -> Catalog {
    let categories = ["a", "b", "c"];
    let mut catalog = Catalog::new();
    for i in 0..size {
        let coarse = |rng: &mut StdRng, max: f64| rng.gen_range(0..5) as f64 * max / 4.0;
        let mut p = product(
            &format!("c{i:04}"),
            &random_name(rng),
            categories[rng.gen_range(0..categories.len())],
            [coarse(rng, 6.0), coarse(rng, 0.04), coarse(rng, 4000.0)],
            [0.5, 1.0][rng.gen_range(0..2)],
        );
        if rng.gen_bool(0.3) {
            let possible = ["m1", "m2", "m3", "m4"];
            let applied = &possible[..rng.gen_range(0..=4)];
            p.checklist = Some(SustainabilityChecklist::new(applied.iter().copied(), possible).unwrap());
        }
        catalog.insert(p).unwrap();
    }
    catalog
}

/// Full category scan: keep strictly better stars, then take the highest
/// stars, lowest carbon weight footprint, smallest id.
pub fn brute_force_alternative<'a>(
    catalog: &'a Catalog,
    product: &Product,
    refs: &References,
) -> Option<&'a Product> {
    let own = product.assess(refs).unwrap().stars;
    let mut best: Option<(&Product, f64, f64)> = None;
    for p in catalog.products().iter().filter(|p| p.category == product.category) {
        let stars = p.assess(refs).unwrap().stars;
        if stars <= own {
            continue;
        }
        let c = (p, stars, p.unit_weight_kg * p.factors.carbon.value());
        best = match best {
            None => Some(c),
            Some(b) => {
                let better = c.1 > b.1
                    || (c.1 == b.1 && c.2 < b.2)
                    || (c.1 == b.1 && c.2 == b.2 && c.0.product_id < b.0.product_id);
                Some(if better { c } else { b })
            }
        };
    }
    best.map(|b| b.0)
}

/// Frequency, then recency (later scan index), then case-insensitive name.
/// Empty text ranks only products bought before.
pub fn brute_force_typing_rank(
    catalog: &Catalog,
    scans: &[ProductId],
    text: &str,
    limit: usize,
) -> Vec<ProductId> {
    let text = text.trim().to_lowercase();
    let mut pool: Vec<(&Product, usize, Option<usize>)> = Vec::new();
    for p in catalog.products() {
        let count = scans.iter().filter(|id| **id == p.product_id).count();
        let last = scans.iter().rposition(|id| *id == p.product_id);
        let matched = if text.is_empty() {
            count > 0
        } else {
            p.name.to_lowercase().contains(&text)
        };
        if matched {
            pool.push((p, count, last));
        }
    }
    let wins = |a: &(&Product, usize, Option<usize>), b: &(&Product, usize, Option<usize>)| {
        if a.1 != b.1 {
            return a.1 > b.1;
        }
        if a.2 != b.2 {
            return match (a.2, b.2) {
                (Some(x), Some(y)) => x > y,
                (Some(_), None) => true,
                _ => false,
            };
        }
        let (na, nb) = (a.0.name.to_lowercase(), b.0.name.to_lowercase());
        if na != nb {
            return na < nb;
        }
        a.0.product_id < b.0.product_id
    };
    let mut out = Vec::new();
    while !pool.is_empty() && out.len() < limit {
        let mut best = 0;
        for i in 1..pool.len() {
            if wins(&pool[i], &pool[best]) {
                best = i;
            }
        }
        out.push(pool.swap_remove(best).0.product_id.clone());
    }
    out
}
