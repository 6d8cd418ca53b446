//! Reference arcs and arc generators.
//!
//! Every constructor re-verifies its output with [`verify_arc`] before
//! returning it.

use std::sync::Arc;

use log::{debug, warn};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::arc::{profile, verify_arc, ArcError, ArcMultiset};
use crate::geometry::Geometry;

pub mod search;

pub use search::{brute_force_max_arc, search_max_arc, SearchMode, SearchOptions, SearchResult};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstructionError {
    #[error("construction needs a plane (k = 3), got k = {0}")]
    NotAPlane(usize),
    #[error("Denniston arcs need characteristic 2, got p = {0}")]
    OddCharacteristic(u32),
    #[error("degree {degree} is not a proper power-of-two divisor of q = {q}")]
    BadDegree { degree: usize, q: usize },
    #[error("construction failed verification: {0}")]
    VerificationFailed(String),
    #[error(transparent)]
    Arc(#[from] ArcError),
}

/// The conic y^2 = xz: {(1, t, t^2)} together with (0, 0, 1).
pub fn conic(geometry: &Arc<Geometry>) -> Result<ArcMultiset, ConstructionError> {
    if geometry.k() != 3 {
        return Err(ConstructionError::NotAPlane(geometry.k()));
    }
    let f = geometry.field();
    let mut pts: Vec<usize> = (0..f.q())
        .map(|t| {
            geometry
                .index_of(&[1, t, f.mul(t, t)])
                .expect("valid point")
        })
        .collect();
    pts.push(geometry.index_of(&[0, 0, 1]).expect("valid point"));
    let arc = ArcMultiset::from_points(geometry.clone(), &pts)?;
    let diag = verify_arc(&arc, 2)?;
    if !diag.pass {
        return Err(ConstructionError::VerificationFailed(format!(
            "{:?}",
            diag.violation
        )));
    }
    Ok(arc)
}

/// Maximal arc of the given degree in PG(2, 2^h): the points (x, y, 1) with
/// x^2 + bxy + y^2 in an additive subgroup of order `degree`.
///
/// b is the smallest-coded element making x^2 + bx + 1 irreducible; the
/// subgroup is spanned by the first log2(degree) polynomial basis elements,
/// i.e. it is the set of codes below `degree`. If the result fails the
/// 0-or-degree line check the next admissible b is tried.
pub fn denniston(
    geometry: &Arc<Geometry>,
    degree: usize,
) -> Result<ArcMultiset, ConstructionError> {
    const MAX_ATTEMPTS: usize = 8;
    if geometry.k() != 3 {
        return Err(ConstructionError::NotAPlane(geometry.k()));
    }
    let f = geometry.field();
    if f.p() != 2 {
        return Err(ConstructionError::OddCharacteristic(f.p()));
    }
    let q = f.q() as usize;
    if !degree.is_power_of_two() || degree < 2 || degree >= q {
        return Err(ConstructionError::BadDegree { degree, q });
    }
    let expected = (degree - 1) * (q + 1) + 1;
    let irreducible = |b: u32| (0..f.q()).all(|t| f.add(f.add(f.mul(t, t), f.mul(b, t)), 1) != 0);

    let mut attempts = 0;
    for b in (0..f.q()).filter(|&b| irreducible(b)) {
        if attempts == MAX_ATTEMPTS {
            break;
        }
        attempts += 1;
        let mut pts = Vec::with_capacity(expected);
        for x in 0..f.q() {
            for y in 0..f.q() {
                let v = f.add(f.add(f.mul(x, x), f.mul(b, f.mul(x, y))), f.mul(y, y));
                if (v as usize) < degree {
                    pts.push(geometry.index_of(&[x, y, 1]).expect("valid point"));
                }
            }
        }
        let arc = ArcMultiset::from_points(geometry.clone(), &pts)?;
        let prof = profile(&arc);
        let pattern_ok = prof
            .histogram
            .keys()
            .all(|&c| c == 0 || c as usize == degree);
        if arc.n() == expected && pattern_ok {
            debug!("denniston q={q} degree={degree}: b={b} verified after {attempts} attempt(s)");
            return Ok(arc);
        }
        warn!(
            "denniston q={q} degree={degree}: b={b} gave {} points, histogram {:?}; trying next b",
            arc.n(),
            prof.histogram
        );
    }
    Err(ConstructionError::VerificationFailed(format!(
        "no verified Denniston arc for q={q}, degree={degree} after {attempts} choice(s) of b"
    )))
}

/// Removes one copy of each listed point.
pub fn delete_points(arc: &ArcMultiset, indices: &[usize]) -> Result<ArcMultiset, ArcError> {
    let mut out = arc.clone();
    for &p in indices {
        out = out.without_point(p)?;
    }
    Ok(out)
}

/// Greedy insertion in a seeded random order, keeping every hyperplane at
/// most r, until `target_n` points or no point fits.
pub fn random_arc(
    geometry: &Arc<Geometry>,
    r: u32,
    target_n: usize,
    seed: u64,
) -> Result<ArcMultiset, ArcError> {
    let min = geometry.k() as u32 - 1;
    if r < min {
        return Err(ArcError::MalformedQuery { r, min });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..geometry.num_points()).collect();
    order.shuffle(&mut rng);
    let mut counts = vec![0u32; geometry.num_hyperplanes()];
    let mut chosen = Vec::new();
    for p in order {
        if chosen.len() >= target_n {
            break;
        }
        let through = geometry.hyperplanes_through_point(p);
        if through.iter().all(|&h| counts[h as usize] < r) {
            for &h in through {
                counts[h as usize] += 1;
            }
            chosen.push(p);
        }
    }
    ArcMultiset::from_points(geometry.clone(), &chosen)
}

/// Like [`random_arc`] but draws points with replacement, so repeated points
/// (multi-arcs) can appear. `repeat_bias` is the probability of redrawing a
/// point already chosen.
pub fn random_multiset(
    geometry: &Arc<Geometry>,
    r: u32,
    target_n: usize,
    seed: u64,
    repeat_bias: f64,
) -> Result<ArcMultiset, ArcError> {
    let min = geometry.k() as u32 - 1;
    if r < min {
        return Err(ArcError::MalformedQuery { r, min });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u32; geometry.num_hyperplanes()];
    let mut chosen: Vec<usize> = Vec::new();
    let max_draws = 8 * geometry.num_points() + 8 * target_n;
    for _ in 0..max_draws {
        if chosen.len() >= target_n {
            break;
        }
        let p = if !chosen.is_empty() && rng.gen_bool(repeat_bias) {
            chosen[rng.gen_range(0..chosen.len())]
        } else {
            rng.gen_range(0..geometry.num_points())
        };
        let through = geometry.hyperplanes_through_point(p);
        if through.iter().all(|&h| counts[h as usize] < r) {
            for &h in through {
                counts[h as usize] += 1;
            }
            chosen.push(p);
        }
    }
    ArcMultiset::from_points(geometry.clone(), &chosen)
}
