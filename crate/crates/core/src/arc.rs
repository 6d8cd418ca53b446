//! (n, r)-arcs and multi-arcs: hyperplane census, arc verification, the
//! maximality bound, the flat cap check and completeness.
//!
//! Intersection counts always include multiplicity. The paper's convention
//! is used for hyperplane classes: a hyperplane is a secant when it meets the
//! arc in exactly r points, a tangent when it meets it in 1..r-1 points
//! (not only in one point) and external when it misses it.

use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bits::{and_count, BitSet};
use crate::geometry::{Flat, Geometry, GeometryError};
use crate::linalg::Echelon;

/// Label for the hyperplane classification used in reports.
pub const TANGENT_CONVENTION: &str = "tangent = hyperplane meeting the arc in 1..r-1 points";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArcError {
    #[error("an arc needs at least one point")]
    Empty,
    #[error("multiplicity vector has length {got}, geometry has {expected} points")]
    LengthMismatch { got: usize, expected: usize },
    #[error("r = {r} is below the dimension floor k - 1 = {min}")]
    MalformedQuery { r: u32, min: u32 },
    #[error("the flat cap check needs k >= 3, got k = {0}")]
    DimensionTooSmall(usize),
    #[error("point {0} is not in the arc")]
    Absent(usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// A multiset of points of a fixed geometry.
#[derive(Clone)]
pub struct ArcMultiset {
    geometry: Arc<Geometry>,
    mult: Vec<u32>,
}

impl std::fmt::Debug for ArcMultiset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let pts: Vec<(usize, u32)> = self.entries().collect();
        f.debug_struct("ArcMultiset")
            .field("geometry", &self.geometry)
            .field("points", &pts)
            .finish()
    }
}

impl PartialEq for ArcMultiset {
    fn eq(&self, other: &Self) -> bool {
        self.mult == other.mult
            && self.geometry.k() == other.geometry.k()
            && self.geometry.field() == other.geometry.field()
    }
}

impl ArcMultiset {
    /// Points may repeat; repeats become multiplicities.
    pub fn from_points(geometry: Arc<Geometry>, points: &[usize]) -> Result<Self, ArcError> {
        let mut mult = vec![0u32; geometry.num_points()];
        for &p in points {
            geometry.check_point(p)?;
            mult[p] += 1;
        }
        Self::from_multiplicities(geometry, mult)
    }

    pub fn from_multiplicities(geometry: Arc<Geometry>, mult: Vec<u32>) -> Result<Self, ArcError> {
        if mult.len() != geometry.num_points() {
            return Err(ArcError::LengthMismatch {
                got: mult.len(),
                expected: geometry.num_points(),
            });
        }
        if mult.iter().all(|&m| m == 0) {
            return Err(ArcError::Empty);
        }
        Ok(ArcMultiset { geometry, mult })
    }

    pub fn geometry(&self) -> &Arc<Geometry> {
        &self.geometry
    }

    pub fn n(&self) -> usize {
        self.mult.iter().map(|&m| m as usize).sum()
    }

    pub fn multiplicity(&self, p: usize) -> u32 {
        self.mult[p]
    }

    pub fn multiplicities(&self) -> &[u32] {
        &self.mult
    }

    /// Distinct points with their multiplicities, in index order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.mult
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0)
            .map(|(p, &m)| (p, m))
    }

    pub fn support(&self) -> Vec<usize> {
        self.entries().map(|(p, _)| p).collect()
    }

    /// Points repeated by multiplicity, in index order.
    pub fn points_with_multiplicity(&self) -> Vec<usize> {
        self.entries()
            .flat_map(|(p, m)| std::iter::repeat_n(p, m as usize))
            .collect()
    }

    pub fn is_set(&self) -> bool {
        self.mult.iter().all(|&m| m <= 1)
    }

    pub fn support_bits(&self) -> BitSet {
        let mut b = BitSet::new(self.geometry.num_points());
        for (p, _) in self.entries() {
            b.set(p);
        }
        b
    }

    pub fn with_point(&self, p: usize) -> Result<Self, ArcError> {
        self.geometry.check_point(p)?;
        let mut out = self.clone();
        out.mult[p] += 1;
        Ok(out)
    }

    pub fn without_point(&self, p: usize) -> Result<Self, ArcError> {
        self.geometry.check_point(p)?;
        if self.mult[p] == 0 {
            return Err(ArcError::Absent(p));
        }
        let mut mult = self.mult.clone();
        mult[p] -= 1;
        Self::from_multiplicities(self.geometry.clone(), mult)
    }

    /// |H ∩ K| with multiplicity.
    pub fn hyperplane_count(&self, h: usize) -> u32 {
        self.entries()
            .filter(|&(p, _)| self.geometry.incident(p, h))
            .map(|(_, m)| m)
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ArcProfile {
    pub n: usize,
    pub k: usize,
    pub q: usize,
    /// Largest hyperplane intersection.
    pub r: u32,
    /// Defect parameter r - (k - 1); negative when r is below the floor.
    pub s: i64,
    #[serde(skip)]
    pub counts: Vec<u32>,
    pub histogram: BTreeMap<u32, usize>,
    pub secants: Vec<usize>,
    pub tangents: Vec<usize>,
    pub externals: Vec<usize>,
}

/// Per-hyperplane intersection census.
pub fn profile(arc: &ArcMultiset) -> ArcProfile {
    let g = &arc.geometry;
    let counts: Vec<u32> = if arc.is_set() {
        let bits = arc.support_bits();
        (0..g.num_hyperplanes())
            .into_par_iter()
            .map(|h| and_count(g.row(h), bits.words()) as u32)
            .collect()
    } else {
        let mut c = vec![0u32; g.num_hyperplanes()];
        for (p, m) in arc.entries() {
            for &h in g.hyperplanes_through_point(p) {
                c[h as usize] += m;
            }
        }
        c
    };
    let r = counts.iter().copied().max().unwrap_or(0);
    let mut histogram = BTreeMap::new();
    let (mut secants, mut tangents, mut externals) = (Vec::new(), Vec::new(), Vec::new());
    for (h, &c) in counts.iter().enumerate() {
        *histogram.entry(c).or_insert(0) += 1;
        if c == 0 {
            externals.push(h);
        } else if c == r {
            secants.push(h);
        } else {
            tangents.push(h);
        }
    }
    ArcProfile {
        n: arc.n(),
        k: g.k(),
        q: g.q(),
        r,
        s: r as i64 - (g.k() as i64 - 1),
        counts,
        histogram,
        secants,
        tangents,
        externals,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ArcViolation {
    HyperplaneExceeds { hyperplane: usize, count: u32 },
    NoFullHyperplane { max: u32 },
    TooFewPoints { n: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ArcDiagnostics {
    pub pass: bool,
    pub n: usize,
    pub r: u32,
    pub observed_r: u32,
    pub violation: Option<ArcViolation>,
}

/// Checks that the arc is an (n, r)-arc: every hyperplane meets it in at most
/// r points, some hyperplane in exactly r, and n > r.
pub fn verify_arc(arc: &ArcMultiset, r: u32) -> Result<ArcDiagnostics, ArcError> {
    let min = arc.geometry.k() as u32 - 1;
    if r < min {
        return Err(ArcError::MalformedQuery { r, min });
    }
    let prof = profile(arc);
    let violation = if let Some(h) = prof.counts.iter().position(|&c| c > r) {
        Some(ArcViolation::HyperplaneExceeds {
            hyperplane: h,
            count: prof.counts[h],
        })
    } else if prof.r < r {
        Some(ArcViolation::NoFullHyperplane { max: prof.r })
    } else if prof.n <= r as usize {
        Some(ArcViolation::TooFewPoints { n: prof.n })
    } else {
        None
    };
    Ok(ArcDiagnostics {
        pass: violation.is_none(),
        n: prof.n,
        r,
        observed_r: prof.r,
        violation,
    })
}

/// (s+1)(q+1) + k - 2.
pub fn maximality_bound(s: i64, q: usize, k: usize) -> i64 {
    (s + 1) * (q as i64 + 1) + k as i64 - 2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum MaximalityStatus {
    BelowBound { gap: i64 },
    Maximal,
    AboveBound { excess: i64 },
}

impl ArcProfile {
    pub fn bound(&self) -> i64 {
        maximality_bound(self.s, self.q, self.k)
    }

    pub fn maximality(&self) -> MaximalityStatus {
        maximality_status(self)
    }

    /// s(q+1) + k - 1, the size above which the cap property is forced.
    pub fn cap_threshold(&self) -> i64 {
        self.s * (self.q as i64 + 1) + self.k as i64 - 1
    }
}

pub fn maximality_status(profile: &ArcProfile) -> MaximalityStatus {
    let bound = profile.bound();
    let n = profile.n as i64;
    match n.cmp(&bound) {
        std::cmp::Ordering::Less => MaximalityStatus::BelowBound { gap: bound - n },
        std::cmp::Ordering::Equal => MaximalityStatus::Maximal,
        std::cmp::Ordering::Greater => MaximalityStatus::AboveBound { excess: n - bound },
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatViolation {
    /// A flat of projective dimension at most k - 3 spanned by arc points.
    pub flat: Flat,
    pub points: Vec<usize>,
    pub count: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CapReport {
    NotApplicable {
        n: usize,
        threshold: i64,
    },
    Checked {
        threshold: i64,
        violations: Vec<FlatViolation>,
    },
}

impl CapReport {
    /// True when the check ran and found nothing.
    pub fn is_clean(&self) -> bool {
        matches!(self, CapReport::Checked { violations, .. } if violations.is_empty())
    }

    pub fn violations(&self) -> &[FlatViolation] {
        match self {
            CapReport::Checked { violations, .. } => violations,
            CapReport::NotApplicable { .. } => &[],
        }
    }
}

/// When n > s(q+1) + k - 1, every (k-3)-flat must hold at most k - 2 points
/// of the arc counted with multiplicity. Lists every flat spanned by arc
/// points that breaks this.
pub fn flat_cap_check(arc: &ArcMultiset) -> Result<CapReport, ArcError> {
    let g = &arc.geometry;
    let k = g.k();
    if k < 3 {
        return Err(ArcError::DimensionTooSmall(k));
    }
    let prof = profile(arc);
    let threshold = prof.cap_threshold();
    if prof.n as i64 <= threshold {
        return Ok(CapReport::NotApplicable {
            n: prof.n,
            threshold,
        });
    }
    let support: Vec<(usize, u32)> = arc.entries().collect();
    let mut seen = HashSet::new();
    let mut violations = Vec::new();

    struct Walk<'a> {
        g: &'a Geometry,
        support: &'a [(usize, u32)],
        max_rank: usize,
        limit: u32,
        seen: &'a mut HashSet<Flat>,
        violations: &'a mut Vec<FlatViolation>,
    }

    fn visit(w: &mut Walk<'_>, start: usize, span: &Echelon) {
        let f = w.g.field();
        for i in start..w.support.len() {
            let v = w.g.point(w.support[i].0);
            let mut next = span.clone();
            if !next.insert(f, v) {
                continue;
            }
            let flat = Flat::from_vectors(f, w.g.k(), next.rows().to_vec());
            if w.seen.insert(flat.clone()) {
                let inside: Vec<(usize, u32)> = w
                    .support
                    .iter()
                    .copied()
                    .filter(|&(p, _)| next.contains(f, w.g.point(p)))
                    .collect();
                let count: u32 = inside.iter().map(|&(_, m)| m).sum();
                if count > w.limit {
                    w.violations.push(FlatViolation {
                        flat,
                        points: inside.iter().map(|&(p, _)| p).collect(),
                        count,
                    });
                }
            }
            if next.rank() < w.max_rank {
                visit(w, i + 1, &next);
            }
        }
    }

    let mut walk = Walk {
        g,
        support: &support,
        max_rank: k - 2,
        limit: k as u32 - 2,
        seen: &mut seen,
        violations: &mut violations,
    };
    visit(&mut walk, 0, &Echelon::new());
    Ok(CapReport::Checked {
        threshold,
        violations,
    })
}

/// Points lying on no secant; adding any of them (even one already in the
/// arc) keeps every hyperplane at most r.
pub fn off_secant_points(arc: &ArcMultiset, prof: &ArcProfile) -> Vec<usize> {
    let g = &arc.geometry;
    let mut covered = BitSet::new(g.num_points());
    for &h in &prof.secants {
        covered.union_with(g.row(h));
    }
    (0..g.num_points()).filter(|&p| !covered.get(p)).collect()
}

/// True iff no point can be added without some hyperplane exceeding r.
pub fn is_complete(arc: &ArcMultiset) -> bool {
    let prof = profile(arc);
    off_secant_points(arc, &prof).is_empty()
}
