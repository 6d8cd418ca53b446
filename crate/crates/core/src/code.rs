//! Linear codes from projective systems.
//!
//! The columns of the generator matrix are the arc points (repeated by
//! multiplicity) in canonical order. The minimum distance is read off the
//! hyperplane census, `d = n - max |K ∩ H|`, and the dual distance is the
//! smallest t such that some t columns span a space of linear dimension t-1.

use serde::Serialize;
use thiserror::Error;

use crate::arc::{profile, ArcError, ArcMultiset};
use crate::extension::{extend_unique, ExtensionError};
use crate::geometry::Flat;
use crate::linalg::Echelon;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodeError {
    #[error("arc spans a space of rank {rank}, need {k}: the code is degenerate")]
    RankDeficient { rank: usize, k: usize },
    #[error("n = {n} > S(q+1)+k-1 = {threshold} but d_dual = {d_dual:?} < k = {k}")]
    ProjectivityViolated {
        n: usize,
        threshold: i64,
        d_dual: Option<usize>,
        k: usize,
    },
    #[error("extended code check failed: {0}")]
    ExtensionCheck(String),
    #[error(transparent)]
    Extension(#[from] ExtensionError),
    #[error(transparent)]
    Arc(#[from] ArcError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CodeFlags {
    pub projective: bool,
    /// The Singleton defect S; 0 means MDS.
    pub as_mds_level: i64,
    pub mds: bool,
    pub length_maximal: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearCodeView {
    /// k rows, n columns.
    pub generator: Vec<Vec<u32>>,
    pub n: usize,
    pub k: usize,
    pub q: usize,
    pub d: usize,
    /// `None` when n = k: the dual code is zero.
    pub d_dual: Option<usize>,
    pub defect: i64,
    pub flags: CodeFlags,
}

impl LinearCodeView {
    pub fn projective(&self) -> bool {
        self.flags.projective
    }

    pub fn length_maximal(&self) -> bool {
        self.flags.length_maximal
    }
}

pub fn to_code(arc: &ArcMultiset) -> Result<LinearCodeView, CodeError> {
    let g = arc.geometry();
    let k = g.k();
    let columns = arc.points_with_multiplicity();
    let rank = Flat::from_vectors(
        g.field(),
        k,
        arc.support()
            .into_iter()
            .map(|p| g.point(p).to_vec())
            .collect(),
    )
    .rank();
    if rank < k {
        return Err(CodeError::RankDeficient { rank, k });
    }
    let generator: Vec<Vec<u32>> = (0..k)
        .map(|row| columns.iter().map(|&p| g.point(p)[row]).collect())
        .collect();
    let prof = profile(arc);
    let n = prof.n;
    let d = n - prof.r as usize;
    let defect = n as i64 - k as i64 + 1 - d as i64;
    let mut view = LinearCodeView {
        generator,
        n,
        k,
        q: g.q(),
        d,
        d_dual: dual_distance(arc),
        defect,
        flags: CodeFlags {
            projective: false,
            as_mds_level: defect,
            mds: false,
            length_maximal: false,
        },
    };
    view.flags = classify(&view)?;
    Ok(view)
}

/// Smallest number of columns whose span has linear dimension one less than
/// their count. Found as one more than the smallest independent set of arc
/// points whose span contains a further arc point.
pub fn dual_distance(arc: &ArcMultiset) -> Option<usize> {
    if !arc.is_set() {
        return Some(2);
    }
    let g = arc.geometry();
    let pts = arc.support();

    fn level(
        g: &crate::geometry::Geometry,
        pts: &[usize],
        chosen: &mut Vec<usize>,
        span: &Echelon,
        start: usize,
        size: usize,
    ) -> bool {
        let f = g.field();
        if chosen.len() == size {
            return pts
                .iter()
                .any(|p| !chosen.contains(p) && span.contains(f, g.point(*p)));
        }
        for i in start..pts.len() {
            let mut next = span.clone();
            if !next.insert(f, g.point(pts[i])) {
                continue;
            }
            chosen.push(pts[i]);
            let hit = level(g, pts, chosen, &next, i + 1, size);
            chosen.pop();
            if hit {
                return true;
            }
        }
        false
    }

    (1..=g.k())
        .find(|&m| level(g, &pts, &mut Vec::new(), &Echelon::new(), 0, m))
        .map(|m| m + 1)
}

/// Code-theoretic flags. Also enforces that a code longer than S(q+1)+k-1
/// has dual distance at least k.
pub fn classify(view: &LinearCodeView) -> Result<CodeFlags, CodeError> {
    let s = view.defect;
    let q = view.q as i64;
    let k = view.k as i64;
    let projective = view.d_dual.is_none_or(|dd| dd > 2);
    let threshold = s * (q + 1) + k - 1;
    if view.n as i64 > threshold && view.d_dual.is_some_and(|dd| dd < view.k) {
        return Err(CodeError::ProjectivityViolated {
            n: view.n,
            threshold,
            d_dual: view.d_dual,
            k: view.k,
        });
    }
    Ok(CodeFlags {
        projective,
        as_mds_level: s,
        mds: s == 0,
        length_maximal: view.n as i64 == (s + 1) * (q + 1) + k - 2,
    })
}

/// Appends the unique extension point as a new column; the result must be
/// length-maximal with the same Singleton defect.
pub fn extend_code(arc: &ArcMultiset) -> Result<(ArcMultiset, LinearCodeView), CodeError> {
    let before = to_code(arc)?;
    let cert = extend_unique(arc)?;
    let extended = arc.with_point(cert.candidates[0])?;
    let view = to_code(&extended)?;
    if !view.flags.length_maximal {
        return Err(CodeError::ExtensionCheck(format!(
            "[{}, {}, {}] is not length-maximal",
            view.n, view.k, view.d
        )));
    }
    if view.defect != before.defect {
        return Err(CodeError::ExtensionCheck(format!(
            "defect changed from {} to {}",
            before.defect, view.defect
        )));
    }
    Ok((extended, view))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    use crate::constructions::{conic, delete_points, denniston};
    use crate::field::FieldSpec;
    use crate::geometry::Geometry;

    fn pg(p: u32, e: u32, k: usize) -> Arc<Geometry> {
        Arc::new(Geometry::build(Arc::new(FieldSpec::new(p, e, None).unwrap()), k).unwrap())
    }

    #[test]
    fn conic_q8_is_mds() {
        let v = to_code(&conic(&pg(2, 3, 3)).unwrap()).unwrap();
        assert_eq!((v.n, v.k, v.d, v.defect), (9, 3, 7, 0));
        assert_eq!(v.d_dual, Some(4));
        assert!(v.flags.mds && v.flags.projective);
    }

    #[test]
    fn conic_q5_not_length_maximal() {
        let v = to_code(&conic(&pg(5, 1, 3)).unwrap()).unwrap();
        assert_eq!((v.n, v.k, v.d, v.defect), (6, 3, 4, 0));
        assert!(!v.flags.length_maximal);
    }

    #[test]
    fn denniston_codes() {
        let g = pg(2, 3, 3);
        let d = denniston(&g, 4).unwrap();
        let v = to_code(&d).unwrap();
        assert_eq!((v.n, v.k, v.d, v.defect), (28, 3, 24, 2));
        assert_eq!(v.d_dual, Some(3));
        assert!(v.flags.length_maximal);
        let minus = delete_points(&d, &d.support()[..1]).unwrap();
        let v = to_code(&minus).unwrap();
        assert_eq!((v.n, v.k, v.d, v.defect), (27, 3, 23, 2));
        let (ext, view) = extend_code(&minus).unwrap();
        assert_eq!(ext, d);
        assert_eq!((view.n, view.d, view.defect), (28, 24, 2));
        assert!(matches!(extend_code(&d), Err(CodeError::Extension(_))));
    }

    #[test]
    fn repeated_column() {
        let g = pg(3, 1, 3);
        let a = ArcMultiset::from_points(g.clone(), &[0, 0, 1, 5]).unwrap();
        let v = to_code(&a).unwrap();
        assert_eq!(v.d_dual, Some(2));
        assert!(!v.flags.projective);
    }

    #[test]
    fn rank_deficient() {
        let g = pg(3, 1, 3);
        let line = g.points_on_hyperplane(0);
        let a = ArcMultiset::from_points(g, &line).unwrap();
        assert_eq!(
            to_code(&a).unwrap_err(),
            CodeError::RankDeficient { rank: 2, k: 3 }
        );
    }

    #[test]
    fn basis_code_has_no_dual() {
        let g = pg(2, 1, 3);
        let e: Vec<usize> = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
            .iter()
            .map(|v| g.index_of(v).unwrap())
            .collect();
        let a = ArcMultiset::from_points(g, &e).unwrap();
        assert_eq!(dual_distance(&a), None);
    }
}
