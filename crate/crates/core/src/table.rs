//! Tables of m^s(k, q), the largest size of a complete (n, k+s-1)-arc.
//!
//! A cell only carries a value when this run proved it, either by exhaustive
//! search or by a verified construction meeting a proven upper bound.
//! Everything else is reported as a bound with its source.

use std::sync::Arc;
use std::time::Duration;

use log::info;
use serde::Serialize;
use thiserror::Error;

use crate::arc::{off_secant_points, profile, verify_arc, ArcError, ArcMultiset};
use crate::constructions::search::{search_max_arc, SearchError, SearchMode, SearchOptions};
use crate::constructions::{conic, denniston, ConstructionError};
use crate::field::{prime_power, FieldError, FieldSpec};
use crate::geometry::{Geometry, GeometryError};

pub const MAX_CELLS: usize = 512;

pub const SOURCE_COUNTING: &str = "counting bound n <= (s+1)(q+1)+k-2";
pub const SOURCE_PLANAR: &str =
    "planar bound n <= (s+1)(q+1)-1 for 0 < s < q-2 with (s+2, q) not both powers of 2";

#[derive(Debug, Error)]
pub enum TableError {
    #[error("q = {0} is not a prime power")]
    NotPrimePower(u32),
    #[error("k = {0} is below 3")]
    DimensionTooSmall(usize),
    #[error("{cells} cells requested, at most {max} allowed")]
    TooManyCells { cells: usize, max: usize },
    #[error("inconsistent cell (q={q}, s={s}, k={k}): {detail}")]
    Inconsistent {
        q: u32,
        s: u32,
        k: usize,
        detail: String,
    },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Construction(#[from] ConstructionError),
    #[error(transparent)]
    Arc(#[from] ArcError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ProvedBySearch,
    WitnessMeetsBound,
    UpperBoundOnly,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TableCell {
    pub q: u32,
    pub s: u32,
    pub k: usize,
    pub r: u32,
    /// Set only when proved in this run.
    pub value: Option<usize>,
    /// Size of the largest verified arc found.
    pub lower: Option<usize>,
    pub upper: usize,
    pub upper_source: &'static str,
    pub provenance: Provenance,
    pub witness_found: bool,
    pub witness: Option<&'static str>,
    pub search_nodes: Option<u64>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct TableOptions {
    /// Cells whose geometry has more points than this skip the search.
    pub max_search_points: usize,
    pub budget_per_cell: Option<Duration>,
    pub workers: usize,
}

impl Default for TableOptions {
    fn default() -> Self {
        TableOptions {
            max_search_points: 40,
            budget_per_cell: Some(Duration::from_secs(10)),
            workers: 0,
        }
    }
}

fn num_points(q: u64, k: usize) -> u64 {
    (q.pow(k as u32) - 1) / (q - 1)
}

/// All points (x, y, 1): every line meets it in 0 or q points.
fn affine_plane(g: &Arc<Geometry>) -> Result<ArcMultiset, ArcError> {
    let q = g.q() as u32;
    let pts: Vec<usize> = (0..q)
        .flat_map(|x| (0..q).map(move |y| [x, y, 1]))
        .map(|v| g.index_of(&v).expect("valid point"))
        .collect();
    ArcMultiset::from_points(g.clone(), &pts)
}

fn planar_witness(
    g: &Arc<Geometry>,
    q: u32,
    s: u32,
) -> Result<Option<(&'static str, ArcMultiset)>, TableError> {
    let even = q.is_power_of_two();
    if s == 0 {
        let c = conic(g)?;
        if !even {
            return Ok(Some(("conic", c)));
        }
        let nucleus = off_secant_points(&c, &profile(&c));
        return match nucleus.as_slice() {
            [x] => Ok(Some(("hyperoval", c.with_point(*x)?))),
            _ => Ok(Some(("conic", c))),
        };
    }
    let degree = s as usize + 2;
    if even && degree.is_power_of_two() {
        if degree < q as usize {
            return Ok(Some(("denniston", denniston(g, degree)?)));
        }
        if degree == q as usize {
            return Ok(Some(("affine plane", affine_plane(g)?)));
        }
    }
    Ok(None)
}

fn literal_hypothesis_note(q: u32, s: u32, k: usize) -> Option<String> {
    let (qi, si) = (q as i64, s as i64);
    if k < 4 || !(0 < si && si < qi - 2) || !q.is_multiple_of(s + 2) {
        return None;
    }
    let needed = (si + 1) * (qi + 1) + k as i64 - 3;
    let planar_max = if q.is_power_of_two() && (s + 2).is_power_of_two() {
        Some((si + 1) * (qi + 1) + 1)
    } else {
        None
    };
    let status = match planar_max {
        Some(m) if m >= needed => "holds",
        Some(_) => "fails",
        None => "fails (the planar bound applies)",
    };
    Some(format!(
        "condition m^s(3,q) >= (s+1)(q+1)+k-3 for the value (s+1)(q+1)+k-2 {status}; \
         no value is asserted without a witness"
    ))
}

pub fn cell(q: u32, s: u32, k: usize, opts: &TableOptions) -> Result<TableCell, TableError> {
    let (p, e) = prime_power(q).ok_or(TableError::NotPrimePower(q))?;
    if k < 3 {
        return Err(TableError::DimensionTooSmall(k));
    }
    let field = Arc::new(FieldSpec::new(p, e, None)?);
    let r = k as u32 - 1 + s;
    let (qi, si, ki) = (q as i64, s as i64, k as i64);
    let mut upper = ((si + 1) * (qi + 1) + ki - 2) as usize;
    let mut upper_source = SOURCE_COUNTING;
    let both_pow2 = q.is_power_of_two() && (s + 2).is_power_of_two();
    if k == 3 && 0 < si && si < qi - 2 && !both_pow2 {
        upper = ((si + 1) * (qi + 1) - 1) as usize;
        upper_source = SOURCE_PLANAR;
    }
    let mut out = TableCell {
        q,
        s,
        k,
        r,
        value: None,
        lower: None,
        upper,
        upper_source,
        provenance: Provenance::UpperBoundOnly,
        witness_found: false,
        witness: None,
        search_nodes: None,
        notes: Vec::new(),
    };
    let inconsistent = |detail: String| TableError::Inconsistent { q, s, k, detail };

    let hyperplane_points = num_points(q as u64, k - 1);
    if r as u64 > hyperplane_points {
        out.notes
            .push(format!("no hyperplane holds r = {r} points"));
        return Ok(out);
    }

    let points = num_points(q as u64, k);
    let needs_geometry = k == 3 || points <= opts.max_search_points as u64;
    let geometry = if needs_geometry {
        Some(Arc::new(Geometry::build(field, k)?))
    } else {
        None
    };

    let mut witnessed = None;
    if let (3, Some(g)) = (k, &geometry) {
        if let Some((name, arc)) = planar_witness(g, q, s)? {
            if verify_arc(&arc, r)?.pass {
                out.witness_found = true;
                out.witness = Some(name);
                out.lower = Some(arc.n());
                witnessed = Some(arc.n());
            } else {
                out.notes.push(format!(
                    "{name} construction failed to give a ({}, {r})-arc",
                    arc.n()
                ));
            }
        }
    }
    if let Some(n) = witnessed {
        if n > upper {
            return Err(inconsistent(format!(
                "witness of size {n} exceeds bound {upper}"
            )));
        }
        if n == upper {
            out.value = Some(n);
            out.provenance = Provenance::WitnessMeetsBound;
        }
    }

    if let Some(g) = geometry
        .as_ref()
        .filter(|g| g.num_points() <= opts.max_search_points)
    {
        let so = SearchOptions {
            workers: opts.workers,
            budget: opts.budget_per_cell,
            ..Default::default()
        };
        let res = search_max_arc(g, r, SearchMode::ProveMax, &so)?;
        out.search_nodes = Some(res.nodes_explored);
        let verified = res.witness_check.as_ref().is_some_and(|d| d.pass);
        if verified {
            out.lower = out.lower.max(Some(res.best_n));
            if out.witness.is_none() {
                out.witness_found = true;
                out.witness = Some("search");
            }
        }
        if res.proved_max && verified {
            if let Some(v) = out.value.filter(|&v| v != res.best_n) {
                return Err(inconsistent(format!(
                    "search proved {} but witness meets bound {v}",
                    res.best_n
                )));
            }
            if res.best_n > upper {
                return Err(inconsistent(format!(
                    "search found {} above bound {upper}",
                    res.best_n
                )));
            }
            out.value = Some(res.best_n);
            out.provenance = Provenance::ProvedBySearch;
        } else if res.budget_exhausted {
            out.notes.push("search budget exhausted".to_string());
        }
    }

    if let Some(note) = literal_hypothesis_note(q, s, k) {
        out.notes.push(note);
    }
    info!(
        "table cell q={q} s={s} k={k}: {:?} ({:?})",
        out.value, out.provenance
    );
    Ok(out)
}

pub fn m_table(
    qs: &[u32],
    ss: &[u32],
    ks: &[usize],
    opts: &TableOptions,
) -> Result<Vec<TableCell>, TableError> {
    let cells = qs.len() * ss.len() * ks.len();
    if cells > MAX_CELLS {
        return Err(TableError::TooManyCells {
            cells,
            max: MAX_CELLS,
        });
    }
    let mut out = Vec::with_capacity(cells);
    for &k in ks {
        for &q in qs {
            for &s in ss {
                out.push(cell(q, s, k, opts)?);
            }
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct CsvRow<'a> {
    q: u32,
    s: u32,
    k: usize,
    r: u32,
    value: Option<usize>,
    lower: Option<usize>,
    upper: usize,
    upper_source: &'a str,
    provenance: Provenance,
    witness: Option<&'a str>,
    notes: String,
}

pub fn to_csv(cells: &[TableCell]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for c in cells {
        w.serialize(CsvRow {
            q: c.q,
            s: c.s,
            k: c.k,
            r: c.r,
            value: c.value,
            lower: c.lower,
            upper: c.upper,
            upper_source: c.upper_source,
            provenance: c.provenance,
            witness: c.witness,
            notes: c.notes.join("; "),
        })
        .expect("in-memory csv write");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("csv is utf-8")
}
