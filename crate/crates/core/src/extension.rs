//! One-point extensions of arcs.
//!
//! [`extension_candidates`] scans every point of the space and is valid for
//! any arc. [`extend_unique`] follows the quotient recursion: in the plane it
//! is the scan with a uniqueness requirement; in higher dimension each arc
//! point P is projected away, the quotient arc is extended recursively and
//! the extension point is lifted to a line through P. The common point of
//! two such lines is the candidate. Nothing produced by the recursion is
//! trusted; every emitted fact is re-checked with incidence tests in the
//! parent geometry.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::arc::{
    flat_cap_check, is_complete, maximality_status, off_secant_points, profile, verify_arc,
    ArcDiagnostics, ArcError, ArcMultiset, ArcProfile, CapReport, MaximalityStatus,
};
use crate::geometry::{Flat, GeometryError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExtensionError {
    #[error("input is not a valid arc: {0:?}")]
    NotAnArc(Box<ArcDiagnostics>),
    #[error("hypothesis violated: {name} ({detail})")]
    HypothesisViolation { name: &'static str, detail: String },
    #[error("quotient at point {point} is not an arc of the required kind: {reason}")]
    QuotientNotArc { point: usize, reason: String },
    #[error("lines through points {a} and {b} are skew")]
    LinesSkew { a: usize, b: usize },
    #[error("verification failed: {0}")]
    VerificationFailure(String),
    #[error(transparent)]
    Arc(#[from] ArcError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Scan,
    Constructive,
    Both,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl Check {
    fn new(name: impl Into<String>, pass: bool, witness: Option<String>) -> Self {
        Check {
            name: name.into(),
            pass,
            witness,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExtensionCertificate {
    pub method: Method,
    pub candidates: Vec<usize>,
    /// Arc point index to the line through it (higher-dimensional case).
    pub tangent_lines: Option<BTreeMap<usize, Flat>>,
    pub common_point: Option<usize>,
    pub checks: Vec<Check>,
}

impl ExtensionCertificate {
    pub fn unique(&self) -> bool {
        self.candidates.len() == 1
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn require_valid(arc: &ArcMultiset, prof: &ArcProfile) -> Result<(), ExtensionError> {
    let diag = verify_arc(arc, prof.r.max(arc.geometry().k() as u32 - 1))?;
    if diag.pass {
        Ok(())
    } else {
        Err(ExtensionError::NotAnArc(Box::new(diag)))
    }
}

/// Every point lying on no secant. Each one is re-verified by inserting it
/// and re-running the arc check.
pub fn extension_candidates(arc: &ArcMultiset) -> Result<ExtensionCertificate, ExtensionError> {
    let prof = profile(arc);
    require_valid(arc, &prof)?;
    let candidates = off_secant_points(arc, &prof);
    let g = arc.geometry();
    let mut checks = Vec::with_capacity(candidates.len());
    for &x in &candidates {
        let diag = verify_arc(&arc.with_point(x)?, prof.r)?;
        if !diag.pass {
            return Err(ExtensionError::VerificationFailure(format!(
                "adding point {x} breaks the arc: {:?}",
                diag.violation
            )));
        }
        checks.push(Check::new(
            format!(
                "adding {:?} keeps every hyperplane <= {}",
                g.point(x),
                prof.r
            ),
            true,
            None,
        ));
    }
    Ok(ExtensionCertificate {
        method: Method::Scan,
        candidates,
        tangent_lines: None,
        common_point: None,
        checks,
    })
}

fn violation(name: &'static str, detail: String) -> ExtensionError {
    ExtensionError::HypothesisViolation { name, detail }
}

/// k >= 3, 0 < s < q - 2, (s+2) | q, n = (s+1)(q+1) + k - 3, and the arc is a
/// set with a clean flat cap check.
pub fn check_hypotheses(arc: &ArcMultiset, prof: &ArcProfile) -> Result<(), ExtensionError> {
    let k = prof.k;
    let q = prof.q as i64;
    let s = prof.s;
    if k < 3 {
        return Err(violation("k >= 3", format!("k = {k}")));
    }
    if s <= 0 {
        return Err(violation("0 < s", format!("s = {s}")));
    }
    if s >= q - 2 {
        return Err(violation("s < q - 2", format!("s = {s}, q = {q}")));
    }
    if q % (s + 2) != 0 {
        return Err(violation(
            "(s+2) | q",
            format!("{} does not divide {q}", s + 2),
        ));
    }
    let want = (s + 1) * (q + 1) + k as i64 - 3;
    if prof.n as i64 != want {
        return Err(violation(
            "n",
            format!("n = {}, required (s+1)(q+1)+k-3 = {want}", prof.n),
        ));
    }
    require_valid(arc, prof)?;
    if !arc.is_set() {
        return Err(violation("set", "arc has repeated points".into()));
    }
    match flat_cap_check(arc)? {
        CapReport::Checked { violations, .. } if violations.is_empty() => Ok(()),
        CapReport::Checked { violations, .. } => Err(violation(
            "cap",
            format!(
                "{} flat(s) of dimension <= k-3 hold k-1 arc points",
                violations.len()
            ),
        )),
        CapReport::NotApplicable { .. } => Err(violation("cap", "cap check not applicable".into())),
    }
}

/// Projects the arc from point `p`, extends the quotient arc and lifts the
/// extension point back to a line through `p`. Only the quotient's own
/// hypotheses are enforced.
pub(crate) fn line_from_quotient(arc: &ArcMultiset, p: usize) -> Result<Flat, ExtensionError> {
    let g = arc.geometry();
    let qt = g.quotient(&g.span(&[p])?)?;
    let qg = qt.geometry().clone();
    let mut mult = vec![0u32; qg.num_points()];
    for (x, m) in arc.entries() {
        if let Some(y) = qt.map_point(x) {
            mult[y] += m;
        }
    }
    let quotient_arc =
        ArcMultiset::from_multiplicities(qg, mult).map_err(|e| ExtensionError::QuotientNotArc {
            point: p,
            reason: e.to_string(),
        })?;
    let cert = extend_unique(&quotient_arc).map_err(|e| ExtensionError::QuotientNotArc {
        point: p,
        reason: e.to_string(),
    })?;
    let x = cert.candidates[0];
    Ok(qt.lift_point(g, x))
}

/// The two defining properties of the line through an arc point `p`: it lies
/// in every tangent through `p` and in no secant through `p`.
fn line_checks(arc: &ArcMultiset, prof: &ArcProfile, p: usize, line: &Flat) -> Vec<Check> {
    let g = arc.geometry();
    let through_p =
        |hs: &[usize]| -> Vec<usize> { hs.iter().copied().filter(|&h| g.incident(p, h)).collect() };
    let missing_tangent = through_p(&prof.tangents)
        .into_iter()
        .find(|&h| !g.flat_in_hyperplane(line, h));
    let bad_secant = through_p(&prof.secants)
        .into_iter()
        .find(|&h| g.flat_in_hyperplane(line, h));
    vec![
        Check::new(
            format!("line at {p} passes through {p}"),
            g.flat_contains(line, p),
            None,
        ),
        Check::new(
            format!("line at {p} lies in every tangent through {p}"),
            missing_tangent.is_none(),
            missing_tangent.map(|h| format!("hyperplane {h}")),
        ),
        Check::new(
            format!("line at {p} meets every secant through {p} only in {p}"),
            bad_secant.is_none(),
            bad_secant.map(|h| format!("hyperplane {h}")),
        ),
    ]
}

fn fail_on(checks: &[Check]) -> Result<(), ExtensionError> {
    match checks.iter().find(|c| !c.pass) {
        None => Ok(()),
        Some(c) => Err(ExtensionError::VerificationFailure(match &c.witness {
            Some(w) => format!("{} (witness: {w})", c.name),
            None => c.name.clone(),
        })),
    }
}

/// The line at arc point `p` in dimension k >= 4, re-verified in the parent
/// geometry.
pub fn tangent_line_at(arc: &ArcMultiset, p: usize) -> Result<Flat, ExtensionError> {
    let prof = profile(arc);
    check_hypotheses(arc, &prof)?;
    if prof.k < 4 {
        return Err(violation(
            "k >= 4",
            format!("k = {}: the planar case has no lines", prof.k),
        ));
    }
    if arc.multiplicity(p) == 0 {
        return Err(ArcError::Absent(p).into());
    }
    let line = line_from_quotient(arc, p)?;
    fail_on(&line_checks(arc, &prof, p, &line))?;
    Ok(line)
}

/// Final checks on a candidate X: it lies on every tangent and on no secant,
/// and K + X is a maximal, complete arc with the same r.
fn point_checks(
    arc: &ArcMultiset,
    prof: &ArcProfile,
    x: usize,
) -> Result<Vec<Check>, ExtensionError> {
    let g = arc.geometry();
    let off_tangent = prof.tangents.iter().copied().find(|&h| !g.incident(x, h));
    let on_secant = prof.secants.iter().copied().find(|&h| g.incident(x, h));
    let extended = arc.with_point(x)?;
    let diag = verify_arc(&extended, prof.r)?;
    let ext_prof = profile(&extended);
    let status = maximality_status(&ext_prof);
    Ok(vec![
        Check::new(
            "X lies on every tangent",
            off_tangent.is_none(),
            off_tangent.map(|h| format!("hyperplane {h}")),
        ),
        Check::new(
            "X lies on no secant",
            on_secant.is_none(),
            on_secant.map(|h| format!("hyperplane {h}")),
        ),
        Check::new(
            format!("K + X is an ({}, {})-arc", extended.n(), prof.r),
            diag.pass,
            diag.violation.map(|v| format!("{v:?}")),
        ),
        Check::new(
            "K + X is maximal",
            status == MaximalityStatus::Maximal,
            Some(format!("{status:?}")),
        ),
        Check::new("K + X is complete", is_complete(&extended), None),
    ])
}

/// The unique extension point of an arc meeting the unique-extension
/// hypotheses, found by quotient recursion and verified directly.
pub fn extend_unique(arc: &ArcMultiset) -> Result<ExtensionCertificate, ExtensionError> {
    let prof = profile(arc);
    check_hypotheses(arc, &prof)?;
    let g = arc.geometry();

    if prof.k == 3 {
        let candidates = off_secant_points(arc, &prof);
        if candidates.len() != 1 {
            return Err(ExtensionError::VerificationFailure(format!(
                "expected exactly one point off all secants, found {}",
                candidates.len()
            )));
        }
        let x = candidates[0];
        let mut checks = vec![Check::new(
            "exactly one point lies on no secant",
            true,
            None,
        )];
        checks.extend(point_checks(arc, &prof, x)?);
        fail_on(&checks)?;
        return Ok(ExtensionCertificate {
            method: Method::Constructive,
            candidates,
            tangent_lines: None,
            common_point: Some(x),
            checks,
        });
    }

    let support = arc.support();
    let (p1, p2) = (support[0], support[1]);
    let l1 = line_from_quotient(arc, p1)?;
    let l2 = line_from_quotient(arc, p2)?;
    let f = g.field();
    let joined = l1.join(f, &l2);
    let x = match joined.rank() {
        4 => return Err(ExtensionError::LinesSkew { a: p1, b: p2 }),
        3 => {
            let meet = g.meet(&l1, &l2);
            debug_assert_eq!(meet.rank(), 1);
            g.flat_points(&meet)[0]
        }
        _ => {
            return Err(ExtensionError::VerificationFailure(format!(
                "lines at {p1} and {p2} coincide"
            )))
        }
    };

    let rest: Vec<Result<(usize, Flat), ExtensionError>> = support[2..]
        .par_iter()
        .map(|&p| line_from_quotient(arc, p).map(|l| (p, l)))
        .collect();
    let mut lines = BTreeMap::from([(p1, l1), (p2, l2)]);
    for item in rest {
        let (p, l) = item?;
        lines.insert(p, l);
    }

    let mut checks = Vec::new();
    for (&p, line) in &lines {
        checks.extend(line_checks(arc, &prof, p, line));
    }
    let off_line = lines
        .iter()
        .find(|(_, l)| !g.flat_contains(l, x))
        .map(|(&p, _)| p);
    checks.push(Check::new(
        "X lies on every line",
        off_line.is_none(),
        off_line.map(|p| format!("line at {p}")),
    ));
    let all_lines: Vec<(&usize, &Flat)> = lines.iter().collect();
    let mut repeated = None;
    'outer: for i in 0..all_lines.len() {
        for j in i + 1..all_lines.len() {
            if all_lines[i].1 == all_lines[j].1 {
                repeated = Some((*all_lines[i].0, *all_lines[j].0));
                break 'outer;
            }
        }
    }
    checks.push(Check::new(
        "lines are pairwise distinct",
        repeated.is_none(),
        repeated.map(|(a, b)| format!("lines at {a} and {b}")),
    ));
    checks.extend(point_checks(arc, &prof, x)?);
    fail_on(&checks)?;

    Ok(ExtensionCertificate {
        method: Method::Constructive,
        candidates: vec![x],
        tangent_lines: Some(lines),
        common_point: Some(x),
        checks,
    })
}

/// Runs both methods and records whether they agree.
pub fn extend_both(arc: &ArcMultiset) -> Result<ExtensionCertificate, ExtensionError> {
    let constructive = extend_unique(arc)?;
    let scan = extension_candidates(arc)?;
    let mut cert = constructive;
    cert.method = Method::Both;
    let agree = scan.candidates == cert.candidates;
    cert.checks.push(Check::new(
        "scan and constructive candidates agree",
        agree,
        (!agree).then(|| format!("scan found {:?}", scan.candidates)),
    ));
    cert.checks.extend(scan.checks);
    fail_on(&cert.checks)?;
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    use crate::constructions::{conic, delete_points, denniston, random_arc};
    use crate::field::FieldSpec;
    use crate::geometry::Geometry;

    fn pg(p: u32, e: u32, k: usize) -> Arc<Geometry> {
        Arc::new(Geometry::build(Arc::new(FieldSpec::new(p, e, None).unwrap()), k).unwrap())
    }

    #[test]
    fn conic_q8_has_the_nucleus_only() {
        let g = pg(2, 3, 3);
        let cert = extension_candidates(&conic(&g).unwrap()).unwrap();
        assert_eq!(cert.candidates, vec![g.index_of(&[0, 1, 0]).unwrap()]);
    }

    #[test]
    fn conic_q5_has_no_candidate() {
        let g = pg(5, 1, 3);
        assert!(extension_candidates(&conic(&g).unwrap())
            .unwrap()
            .candidates
            .is_empty());
    }

    #[test]
    fn denniston_deletion_recovers_point() {
        let g = pg(2, 3, 3);
        let d = denniston(&g, 4).unwrap();
        let p = d.support()[5];
        let k = delete_points(&d, &[p]).unwrap();
        let cert = extend_both(&k).unwrap();
        assert_eq!(cert.candidates, vec![p]);
        assert_eq!(cert.common_point, Some(p));
        assert!(cert.all_checks_pass());
    }

    #[test]
    fn divisibility_guard() {
        let g = pg(5, 1, 3);
        let a = random_arc(&g, 3, 11, 3).unwrap();
        assert_eq!(profile(&a).s, 1);
        match extend_unique(&a).unwrap_err() {
            ExtensionError::HypothesisViolation { name, .. } => assert_eq!(name, "(s+2) | q"),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn size_guards() {
        let g = pg(2, 3, 3);
        let d = denniston(&g, 4).unwrap();
        let name = |r: Result<ExtensionCertificate, ExtensionError>| match r.unwrap_err() {
            ExtensionError::HypothesisViolation { name, .. } => name,
            e => panic!("unexpected {e:?}"),
        };
        assert_eq!(name(extend_unique(&d)), "n");
        let two = delete_points(&d, &d.support()[..2]).unwrap();
        assert_eq!(name(extend_unique(&two)), "n");
        assert_eq!(name(extend_unique(&conic(&g).unwrap())), "0 < s");
    }

    #[test]
    fn k3_has_no_tangent_line() {
        let g = pg(2, 3, 3);
        let d = denniston(&g, 4).unwrap();
        let k = delete_points(&d, &d.support()[..1]).unwrap();
        match tangent_line_at(&k, k.support()[0]).unwrap_err() {
            ExtensionError::HypothesisViolation { name, .. } => assert_eq!(name, "k >= 4"),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn k4_size_guard() {
        let g = pg(2, 3, 4);
        let a = random_arc(&g, 5, 20, 11).unwrap();
        assert_eq!(profile(&a).s, 2);
        match extend_unique(&a).unwrap_err() {
            ExtensionError::HypothesisViolation { name, .. } => assert_eq!(name, "n"),
            e => panic!("unexpected {e:?}"),
        }
    }

    /// A cone-like arc in PG(3,8): a point P plus one lift of each point of a
    /// 27-point Denniston deletion in the quotient at P. The quotient step at
    /// P must return the lift of the deleted point.
    #[test]
    fn quotient_step_lifts_the_planar_extension() {
        let g = pg(2, 3, 4);
        let p = 0;
        let qt = g.quotient(&g.span(&[p]).unwrap()).unwrap();
        let plane = qt.geometry().clone();
        let d = denniston(&plane, 4).unwrap();
        let missing = d.support()[3];
        let d27 = delete_points(&d, &[missing]).unwrap();
        let mut pts = vec![p];
        for y in d27.support() {
            let x = (0..g.num_points())
                .find(|&x| qt.map_point(x) == Some(y))
                .unwrap();
            pts.push(x);
        }
        let k = ArcMultiset::from_points(g.clone(), &pts).unwrap();
        let line = line_from_quotient(&k, p).unwrap();
        assert_eq!(line.proj_dim(), 1);
        assert!(g.flat_contains(&line, p));
        for x in g.flat_points(&line) {
            assert!(x == p || qt.map_point(x) == Some(missing));
        }
    }
}
