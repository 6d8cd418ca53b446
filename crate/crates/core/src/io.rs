//! JSON file formats for arcs, certificates, search reports and codes.
//!
//! Arc files list points as coordinate vectors over the field's integer
//! codes. Writing always produces canonical form (normalized points in index
//! order, multiplicities only when some point repeats), so a load and save
//! round trip is byte-stable.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arc::{ArcDiagnostics, ArcError, ArcMultiset};
use crate::code::LinearCodeView;
use crate::constructions::search::{Round, SearchMode, SearchResult};
use crate::extension::{Check, ExtensionCertificate, Method};
use crate::field::{FieldDescriptor, FieldError, FieldSpec};
use crate::geometry::{Geometry, GeometryError};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("point {0:?} is listed more than once; give explicit multiplicities instead")]
    DuplicatePoint(Vec<u32>),
    #[error("{points} points but {mults} multiplicities")]
    MultiplicityLength { points: usize, mults: usize },
    #[error("multiplicity of point {0:?} is zero")]
    ZeroMultiplicity(Vec<u32>),
    #[error("bad point {point:?}: {source}")]
    BadPoint {
        point: Vec<u32>,
        source: GeometryError,
    },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Arc(#[from] ArcError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArcFile {
    pub field: FieldDescriptor,
    pub k: usize,
    pub points: Vec<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiplicities: Option<Vec<u32>>,
}

impl ArcFile {
    pub fn from_arc(arc: &ArcMultiset) -> Self {
        let g = arc.geometry();
        let entries: Vec<(usize, u32)> = arc.entries().collect();
        let multiplicities = if arc.is_set() {
            None
        } else {
            Some(entries.iter().map(|&(_, m)| m).collect())
        };
        ArcFile {
            field: g.field().descriptor(),
            k: g.k(),
            points: entries.iter().map(|&(p, _)| g.point(p).to_vec()).collect(),
            multiplicities,
        }
    }

    pub fn geometry(&self) -> Result<Arc<Geometry>, IoError> {
        let field = FieldSpec::from_descriptor(&self.field)?;
        Ok(Arc::new(Geometry::build(Arc::new(field), self.k)?))
    }

    pub fn to_arc(&self) -> Result<ArcMultiset, IoError> {
        self.to_arc_in(self.geometry()?)
    }

    /// Loads into an existing geometry, which must match the file's field
    /// and dimension.
    pub fn to_arc_in(&self, geometry: Arc<Geometry>) -> Result<ArcMultiset, IoError> {
        if geometry.field().descriptor() != self.field {
            return Err(IoError::Field(FieldError::MixedFields));
        }
        if let Some(m) = &self.multiplicities {
            if m.len() != self.points.len() {
                return Err(IoError::MultiplicityLength {
                    points: self.points.len(),
                    mults: m.len(),
                });
            }
        }
        let mut mult = vec![0u32; geometry.num_points()];
        for (i, v) in self.points.iter().enumerate() {
            let p = geometry.index_of(v).map_err(|source| IoError::BadPoint {
                point: v.clone(),
                source,
            })?;
            match &self.multiplicities {
                None if mult[p] > 0 => return Err(IoError::DuplicatePoint(v.clone())),
                None => mult[p] = 1,
                Some(m) if m[i] == 0 => return Err(IoError::ZeroMultiplicity(v.clone())),
                Some(m) => mult[p] += m[i],
            }
        }
        Ok(ArcMultiset::from_multiplicities(geometry, mult)?)
    }

    pub fn parse(text: &str) -> Result<Self, IoError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("arc file serializes");
        s.push('\n');
        s
    }
}

pub fn read_arc(text: &str) -> Result<ArcMultiset, IoError> {
    ArcFile::parse(text)?.to_arc()
}

pub fn write_arc(arc: &ArcMultiset) -> String {
    ArcFile::from_arc(arc).to_json()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LineEntry {
    pub point: Vec<u32>,
    pub basis: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CertificateFile {
    pub method: Method,
    pub candidates: Vec<Vec<u32>>,
    pub unique: bool,
    pub checks: Vec<Check>,
    pub common_point: Option<Vec<u32>>,
    pub tangent_lines: Option<Vec<LineEntry>>,
}

impl CertificateFile {
    pub fn new(geometry: &Geometry, cert: &ExtensionCertificate) -> Self {
        let coords = |p: usize| geometry.point(p).to_vec();
        CertificateFile {
            method: cert.method,
            candidates: cert.candidates.iter().map(|&p| coords(p)).collect(),
            unique: cert.unique(),
            checks: cert.checks.clone(),
            common_point: cert.common_point.map(coords),
            tangent_lines: cert.tangent_lines.as_ref().map(|lines| {
                lines
                    .iter()
                    .map(|(&p, flat)| LineEntry {
                        point: coords(p),
                        basis: flat.basis().to_vec(),
                    })
                    .collect()
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GeometryDescriptor {
    pub p: u32,
    pub e: u32,
    pub modulus: Vec<u32>,
    pub k: usize,
}

impl GeometryDescriptor {
    pub fn new(geometry: &Geometry) -> Self {
        let d = geometry.field().descriptor();
        GeometryDescriptor {
            p: d.p,
            e: d.e,
            modulus: d.modulus,
            k: geometry.k(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchReport {
    pub geometry: GeometryDescriptor,
    pub r: u32,
    #[serde(flatten)]
    pub mode: SearchMode,
    pub best_n: usize,
    pub found: bool,
    pub proved_max: bool,
    pub budget_exhausted: bool,
    pub nodes: u64,
    pub seconds: f64,
    pub rounds: Vec<Round>,
    pub pruning_rules: Vec<&'static str>,
    pub symmetry: Option<&'static str>,
    pub witness: Option<ArcFile>,
    pub witness_check: Option<ArcDiagnostics>,
}

impl SearchReport {
    pub fn new(geometry: &Geometry, res: &SearchResult) -> Self {
        SearchReport {
            geometry: GeometryDescriptor::new(geometry),
            r: res.r,
            mode: res.mode,
            best_n: res.best_n,
            found: res.found,
            proved_max: res.proved_max,
            budget_exhausted: res.budget_exhausted,
            nodes: res.nodes_explored,
            seconds: res.wall_time.as_secs_f64(),
            rounds: res.rounds.clone(),
            pruning_rules: res.pruning_rules.clone(),
            symmetry: res.symmetry,
            witness: res.best_arc.as_ref().map(ArcFile::from_arc),
            witness_check: res.witness_check.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CodeReport {
    pub n: usize,
    pub k: usize,
    pub q: usize,
    pub d: usize,
    pub d_dual: Option<usize>,
    pub defect: i64,
    pub mds: bool,
    pub projective: bool,
    pub length_maximal: bool,
    pub generator: Vec<Vec<u32>>,
}

impl From<&LinearCodeView> for CodeReport {
    fn from(v: &LinearCodeView) -> Self {
        CodeReport {
            n: v.n,
            k: v.k,
            q: v.q,
            d: v.d,
            d_dual: v.d_dual,
            defect: v.defect,
            mds: v.flags.mds,
            projective: v.flags.projective,
            length_maximal: v.flags.length_maximal,
            generator: v.generator.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::denniston;

    fn plane(p: u32, e: u32) -> Arc<Geometry> {
        Arc::new(Geometry::build(Arc::new(FieldSpec::new(p, e, None).unwrap()), 3).unwrap())
    }

    #[test]
    fn round_trip_is_byte_stable() {
        let g = plane(2, 3);
        let d = denniston(&g, 4).unwrap();
        let text = write_arc(&d);
        assert!(!text.contains("multiplicities"));
        let back = read_arc(&text).unwrap();
        assert_eq!(back, d);
        assert_eq!(write_arc(&back), text);
    }

    #[test]
    fn loader_normalizes() {
        let text =
            r#"{"field":{"p":5,"e":1,"modulus":[0,1]},"k":3,"points":[[0,2,4],[3,0,0],[0,0,1]]}"#;
        let a = read_arc(text).unwrap();
        let f = ArcFile::from_arc(&a);
        assert_eq!(f.points, vec![vec![0, 0, 1], vec![0, 1, 2], vec![1, 0, 0]]);
    }

    #[test]
    fn duplicates_need_multiplicities() {
        let dup = r#"{"field":{"p":3,"e":1,"modulus":[0,1]},"k":3,"points":[[1,0,0],[2,0,0]]}"#;
        assert!(matches!(read_arc(dup), Err(IoError::DuplicatePoint(_))));
        let ok = r#"{"field":{"p":3,"e":1,"modulus":[0,1]},"k":3,"points":[[1,0,0],[0,1,0]],"multiplicities":[2,1]}"#;
        let a = read_arc(ok).unwrap();
        assert_eq!(a.n(), 3);
        let text = write_arc(&a);
        assert!(text.contains("multiplicities"));
        assert_eq!(write_arc(&read_arc(&text).unwrap()), text);
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(read_arc("{"), Err(IoError::Json(_))));
        let zero = r#"{"field":{"p":3,"e":1,"modulus":[0,1]},"k":3,"points":[[0,0,0]]}"#;
        assert!(matches!(read_arc(zero), Err(IoError::BadPoint { .. })));
        let big = r#"{"field":{"p":3,"e":1,"modulus":[0,1]},"k":3,"points":[[1,5,0]]}"#;
        assert!(matches!(read_arc(big), Err(IoError::BadPoint { .. })));
        let len = r#"{"field":{"p":3,"e":1,"modulus":[0,1]},"k":3,"points":[[1,0,0]],"multiplicities":[1,1]}"#;
        assert!(matches!(
            read_arc(len),
            Err(IoError::MultiplicityLength { .. })
        ));
        let bad_field = r#"{"field":{"p":4,"e":1,"modulus":[0,1]},"k":3,"points":[]}"#;
        assert!(matches!(
            read_arc(bad_field),
            Err(IoError::Field(FieldError::NotPrime(4)))
        ));
    }
}
