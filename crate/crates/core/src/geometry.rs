//! Enumerated projective spaces PG(k-1, q), flats and quotient geometries.
//!
//! Points are normalized so that the first nonzero coordinate is 1 and are
//! indexed in lexicographic order of their coordinate codes. Hyperplanes use
//! the standard dot-product duality, so hyperplane `j` has the same
//! coordinate vector as point `j` and the incidence matrix is symmetric.

use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::bits::{iter_ones, words_for};
use crate::field::FieldSpec;
use crate::linalg::{reduce, rref};

/// Guard on q^k, the number of candidate coordinate vectors.
pub const MAX_CANDIDATE_VECTORS: u64 = 1 << 24;
/// Guard on the number of points; the dense incidence matrix is points^2 bits.
pub const MAX_POINTS: usize = 1 << 15;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("vector dimension k = {0} is below 2")]
    InvalidDimension(usize),
    #[error("PG({dim}, {q}) exceeds the size guard: {reason}")]
    TooLarge {
        dim: usize,
        q: u32,
        reason: &'static str,
    },
    #[error("point index {0} out of range")]
    InvalidPoint(usize),
    #[error("vector of length {got} given for a space with k = {k}")]
    WrongLength { got: usize, k: usize },
    #[error("the zero vector is not a projective point")]
    ZeroVector,
    #[error("coordinate {0} is not a field element")]
    BadCoordinate(u32),
    #[error("flat of projective dimension {dim} is too large here (at most {max})")]
    FlatTooLarge { dim: isize, max: isize },
}

/// A projective subspace, stored as a canonical reduced echelon basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Flat {
    k: usize,
    basis: Vec<Vec<u32>>,
    pivots: Vec<usize>,
}

impl Flat {
    pub fn empty(k: usize) -> Self {
        Flat {
            k,
            basis: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn from_vectors(f: &FieldSpec, k: usize, vectors: Vec<Vec<u32>>) -> Self {
        let (basis, pivots) = rref(f, vectors);
        Flat { k, basis, pivots }
    }

    /// Projective dimension; -1 for the empty flat.
    pub fn proj_dim(&self) -> isize {
        self.basis.len() as isize - 1
    }

    /// Vector-space dimension.
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn basis(&self) -> &[Vec<u32>] {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn contains_vector(&self, f: &FieldSpec, v: &[u32]) -> bool {
        reduce(f, &self.basis, &self.pivots, v)
            .iter()
            .all(|&x| x == 0)
    }

    pub fn join(&self, f: &FieldSpec, other: &Flat) -> Flat {
        let mut rows = self.basis.clone();
        rows.extend(other.basis.iter().cloned());
        Flat::from_vectors(f, self.k, rows)
    }

    pub fn contains_flat(&self, f: &FieldSpec, other: &Flat) -> bool {
        other.basis.iter().all(|v| self.contains_vector(f, v))
    }

    /// Whether every basis vector is orthogonal to the hyperplane's dual vector.
    pub fn lies_in_hyperplane(&self, f: &FieldSpec, dual: &[u32]) -> bool {
        self.basis.iter().all(|v| f.dot(v, dual) == 0)
    }
}

pub struct Geometry {
    field: Arc<FieldSpec>,
    k: usize,
    num_points: usize,
    coords: Vec<u32>,
    words: usize,
    incidence: Vec<u64>,
    through: Vec<Vec<u32>>,
}

impl std::fmt::Debug for Geometry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PG({}, {})", self.k as isize - 1, self.field.q())
    }
}

fn gaussian_count(q: u64, m: u32) -> u64 {
    (q.pow(m) - 1) / (q - 1)
}

impl Geometry {
    /// Builds PG(k-1, q) with incidence precomputed.
    pub fn build(field: Arc<FieldSpec>, k: usize) -> Result<Self, GeometryError> {
        if k < 2 {
            return Err(GeometryError::InvalidDimension(k));
        }
        Self::build_any(field, k)
    }

    /// Like [`Geometry::build`] but also allows k = 1 (a single point), which
    /// arises as the quotient at a hyperplane.
    pub(crate) fn build_any(field: Arc<FieldSpec>, k: usize) -> Result<Self, GeometryError> {
        let q = field.q() as u64;
        let dim = k.saturating_sub(1);
        let vectors = q.checked_pow(k as u32).unwrap_or(u64::MAX);
        if vectors > MAX_CANDIDATE_VECTORS {
            return Err(GeometryError::TooLarge {
                dim,
                q: field.q(),
                reason: "q^k > 2^24",
            });
        }
        let n = gaussian_count(q, k as u32) as usize;
        if n > MAX_POINTS {
            return Err(GeometryError::TooLarge {
                dim,
                q: field.q(),
                reason: "more than 2^15 points",
            });
        }

        let mut coords = Vec::with_capacity(n * k);
        for lead in (0..k).rev() {
            let tail_len = k - 1 - lead;
            let tails = q.pow(tail_len as u32);
            for t in 0..tails {
                let mut v = vec![0u32; k];
                v[lead] = 1;
                let mut rest = t;
                for j in (lead + 1..k).rev() {
                    v[j] = (rest % q) as u32;
                    rest /= q;
                }
                coords.extend_from_slice(&v);
            }
        }
        debug_assert_eq!(coords.len(), n * k);

        let words = words_for(n);
        let mut incidence = vec![0u64; n * words];
        incidence
            .par_chunks_mut(words.max(1))
            .enumerate()
            .for_each(|(h, row)| {
                let hv = &coords[h * k..(h + 1) * k];
                for p in 0..n {
                    if field.dot(hv, &coords[p * k..(p + 1) * k]) == 0 {
                        row[p / 64] |= 1 << (p % 64);
                    }
                }
            });
        let through = (0..n)
            .map(|p| {
                iter_ones(&incidence[p * words..(p + 1) * words])
                    .map(|h| h as u32)
                    .collect()
            })
            .collect();

        Ok(Geometry {
            field,
            k,
            num_points: n,
            coords,
            words,
            incidence,
            through,
        })
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn field_arc(&self) -> &Arc<FieldSpec> {
        &self.field
    }

    /// Vector dimension k of PG(k-1, q).
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn q(&self) -> usize {
        self.field.q() as usize
    }

    pub fn num_points(&self) -> usize {
        self.num_points
    }

    pub fn num_hyperplanes(&self) -> usize {
        self.num_points
    }

    /// (q^{k-1} - 1)/(q - 1); also the number of hyperplanes through a point.
    pub fn points_per_hyperplane(&self) -> usize {
        gaussian_count(self.q() as u64, self.k as u32 - 1) as usize
    }

    /// Words per incidence row.
    pub fn words(&self) -> usize {
        self.words
    }

    pub fn point(&self, i: usize) -> &[u32] {
        &self.coords[i * self.k..(i + 1) * self.k]
    }

    /// Dual coordinates of hyperplane `j`.
    pub fn hyperplane(&self, j: usize) -> &[u32] {
        self.point(j)
    }

    /// Incidence bit-row of hyperplane `h` over point indices. By symmetry
    /// this is also the set of hyperplanes through point `h`.
    #[inline]
    pub fn row(&self, h: usize) -> &[u64] {
        &self.incidence[h * self.words..(h + 1) * self.words]
    }

    #[inline]
    pub fn incident(&self, p: usize, h: usize) -> bool {
        self.row(h)[p / 64] >> (p % 64) & 1 == 1
    }

    pub fn hyperplanes_through_point(&self, p: usize) -> &[u32] {
        &self.through[p]
    }

    pub fn points_on_hyperplane(&self, h: usize) -> Vec<usize> {
        iter_ones(self.row(h)).collect()
    }

    pub fn check_point(&self, p: usize) -> Result<(), GeometryError> {
        if p < self.num_points {
            Ok(())
        } else {
            Err(GeometryError::InvalidPoint(p))
        }
    }

    /// Scales a nonzero vector so its first nonzero coordinate is 1.
    pub fn normalize(&self, v: &[u32]) -> Option<Vec<u32>> {
        let lead = v.iter().position(|&c| c != 0)?;
        let inv = self.field.inv(v[lead]);
        Some(v.iter().map(|&c| self.field.mul(c, inv)).collect())
    }

    /// Index of the point represented by any nonzero multiple of `v`.
    pub fn index_of(&self, v: &[u32]) -> Result<usize, GeometryError> {
        if v.len() != self.k {
            return Err(GeometryError::WrongLength {
                got: v.len(),
                k: self.k,
            });
        }
        if let Some(&c) = v.iter().find(|&&c| c >= self.field.q()) {
            return Err(GeometryError::BadCoordinate(c));
        }
        let n = self.normalize(v).ok_or(GeometryError::ZeroVector)?;
        Ok(self.index_of_normalized(&n))
    }

    fn index_of_normalized(&self, v: &[u32]) -> usize {
        let q = self.q() as u64;
        let lead = v.iter().position(|&c| c != 0).expect("nonzero");
        let offset = gaussian_count(q, (self.k - 1 - lead) as u32);
        let tail = v[lead + 1..]
            .iter()
            .fold(0u64, |acc, &c| acc * q + c as u64);
        (offset + tail) as usize
    }

    pub fn span(&self, points: &[usize]) -> Result<Flat, GeometryError> {
        let mut vs = Vec::with_capacity(points.len());
        for &p in points {
            self.check_point(p)?;
            vs.push(self.point(p).to_vec());
        }
        Ok(Flat::from_vectors(&self.field, self.k, vs))
    }

    pub fn flat_contains(&self, flat: &Flat, p: usize) -> bool {
        flat.contains_vector(&self.field, self.point(p))
    }

    /// All points of a flat, in index order.
    pub fn flat_points(&self, flat: &Flat) -> Vec<usize> {
        match flat.rank() {
            0 => Vec::new(),
            1 => vec![self.index_of_normalized(&flat.basis[0])],
            _ => (0..self.num_points)
                .filter(|&p| self.flat_contains(flat, p))
                .collect(),
        }
    }

    pub fn flat_in_hyperplane(&self, flat: &Flat, h: usize) -> bool {
        flat.lies_in_hyperplane(&self.field, self.hyperplane(h))
    }

    /// Hyperplanes containing the flat; there are (q^{k-1-d} - 1)/(q - 1) of
    /// them for a d-flat.
    pub fn hyperplanes_through_flat(&self, flat: &Flat) -> Result<Vec<usize>, GeometryError> {
        let max = self.k as isize - 2;
        if flat.proj_dim() > max {
            return Err(GeometryError::FlatTooLarge {
                dim: flat.proj_dim(),
                max,
            });
        }
        Ok((0..self.num_points)
            .filter(|&h| self.flat_in_hyperplane(flat, h))
            .collect())
    }

    /// Flat spanned by the points common to two flats.
    pub fn meet(&self, a: &Flat, b: &Flat) -> Flat {
        let common: Vec<Vec<u32>> = self
            .flat_points(a)
            .into_iter()
            .filter(|&p| self.flat_contains(b, p))
            .map(|p| self.point(p).to_vec())
            .collect();
        Flat::from_vectors(&self.field, self.k, common)
    }

    /// Quotient geometry at `flat`: PG(k-d-2, q) whose points are the
    /// (d+1)-flats through the given d-flat.
    pub fn quotient(&self, flat: &Flat) -> Result<Quotient, GeometryError> {
        let max = self.k as isize - 2;
        if flat.proj_dim() > max {
            return Err(GeometryError::FlatTooLarge {
                dim: flat.proj_dim(),
                max,
            });
        }
        let free: Vec<usize> = (0..self.k).filter(|c| !flat.pivots.contains(c)).collect();
        let geometry = Arc::new(Geometry::build_any(self.field.clone(), free.len())?);
        let point_map = (0..self.num_points)
            .map(|p| {
                let r = reduce(&self.field, &flat.basis, &flat.pivots, self.point(p));
                let qv: Vec<u32> = free.iter().map(|&c| r[c]).collect();
                if qv.iter().all(|&c| c == 0) {
                    None
                } else {
                    Some(geometry.index_of(&qv).expect("valid quotient vector") as u32)
                }
            })
            .collect();
        Ok(Quotient {
            flat: flat.clone(),
            free,
            geometry,
            point_map,
        })
    }
}

/// A quotient geometry together with the projection from its parent.
pub struct Quotient {
    flat: Flat,
    free: Vec<usize>,
    geometry: Arc<Geometry>,
    point_map: Vec<Option<u32>>,
}

impl Quotient {
    pub fn geometry(&self) -> &Arc<Geometry> {
        &self.geometry
    }

    pub fn flat(&self) -> &Flat {
        &self.flat
    }

    /// Image of a parent point; `None` for points of the flat itself.
    pub fn map_point(&self, p: usize) -> Option<usize> {
        self.point_map[p].map(|x| x as usize)
    }

    pub fn point_map(&self) -> &[Option<u32>] {
        &self.point_map
    }

    /// The parent flat spanned by the quotient flat and any preimage of the
    /// quotient point `qp`.
    pub fn lift_point(&self, parent: &Geometry, qp: usize) -> Flat {
        let mut v = vec![0u32; parent.k()];
        for (&c, &x) in self.free.iter().zip(self.geometry.point(qp)) {
            v[c] = x;
        }
        let mut rows = self.flat.basis.clone();
        rows.push(v);
        Flat::from_vectors(parent.field(), parent.k(), rows)
    }

    /// The parent hyperplane (containing the flat) that corresponds to
    /// quotient hyperplane `qh`.
    pub fn lift_hyperplane(&self, parent: &Geometry, qh: usize) -> usize {
        let f = parent.field();
        let dual = self.geometry.hyperplane(qh);
        let mut h = vec![0u32; parent.k()];
        for (&c, &x) in self.free.iter().zip(dual) {
            h[c] = x;
        }
        for (row, &pc) in self.flat.basis.iter().zip(&self.flat.pivots) {
            let s = self
                .free
                .iter()
                .zip(dual)
                .fold(0, |acc, (&c, &x)| f.add(acc, f.mul(x, row[c])));
            h[pc] = f.neg(s);
        }
        parent.index_of(&h).expect("nonzero dual vector")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pg(p: u32, e: u32, k: usize) -> Geometry {
        Geometry::build(Arc::new(FieldSpec::new(p, e, None).unwrap()), k).unwrap()
    }

    #[test]
    fn small_counts() {
        let g = pg(2, 1, 3);
        assert_eq!(g.num_points(), 7);
        assert!((0..7).all(|h| g.points_on_hyperplane(h).len() == 3));
        let g = pg(2, 3, 3);
        assert_eq!(g.num_points(), 73);
        assert!((0..73).all(|h| g.points_on_hyperplane(h).len() == 9));
        let g = pg(2, 1, 4);
        assert_eq!(g.num_points(), 15);
        assert!((0..15).all(|h| g.points_on_hyperplane(h).len() == 7));
    }

    #[test]
    fn ordering_is_lexicographic_and_indexable() {
        let g = pg(3, 1, 3);
        for i in 0..g.num_points() {
            assert_eq!(g.index_of(g.point(i)).unwrap(), i);
            if i > 0 {
                assert!(g.point(i - 1) < g.point(i));
            }
            let lead = g.point(i).iter().position(|&c| c != 0).unwrap();
            assert_eq!(g.point(i)[lead], 1);
        }
        assert_eq!(
            g.index_of(&[0, 2, 2]).unwrap(),
            g.index_of(&[0, 1, 1]).unwrap()
        );
        assert_eq!(g.index_of(&[0, 0, 0]), Err(GeometryError::ZeroVector));
        assert!(matches!(
            g.index_of(&[0, 1]),
            Err(GeometryError::WrongLength { .. })
        ));
        assert_eq!(g.index_of(&[0, 3, 1]), Err(GeometryError::BadCoordinate(3)));
    }

    #[test]
    fn guards() {
        let f = Arc::new(FieldSpec::new(2, 1, None).unwrap());
        assert_eq!(
            Geometry::build(f.clone(), 1).unwrap_err(),
            GeometryError::InvalidDimension(1)
        );
        assert!(matches!(
            Geometry::build(f, 25),
            Err(GeometryError::TooLarge { .. })
        ));
    }

    #[test]
    fn spans() {
        let g = pg(5, 1, 3);
        assert_eq!(g.span(&[]).unwrap().proj_dim(), -1);
        assert_eq!(g.span(&[0, 1]).unwrap().proj_dim(), 1);
        let line = g.points_on_hyperplane(10);
        assert_eq!(g.span(&line[..3]).unwrap().proj_dim(), 1);
        assert_eq!(g.span(&[99]), Err(GeometryError::InvalidPoint(99)));
        let flat = g.span(&line[..2]).unwrap();
        assert_eq!(g.flat_points(&flat), line);
    }

    #[test]
    fn hyperplanes_through_flats() {
        let g = pg(2, 3, 3);
        assert_eq!(
            g.hyperplanes_through_flat(&g.span(&[5]).unwrap())
                .unwrap()
                .len(),
            9
        );
        let g = pg(2, 3, 4);
        let line = g.span(&[0, 1]).unwrap();
        assert_eq!(g.hyperplanes_through_flat(&line).unwrap().len(), 9);
        let g = pg(2, 1, 4);
        assert_eq!(
            g.hyperplanes_through_flat(&Flat::empty(4)).unwrap().len(),
            15
        );
        let whole = g.span(&[0, 1, 3, 7]).unwrap();
        assert_eq!(whole.proj_dim(), 3);
        assert!(g.hyperplanes_through_flat(&whole).is_err());
    }

    #[test]
    fn quotient_sizes() {
        let g = pg(2, 1, 4);
        let qt = g.quotient(&g.span(&[3]).unwrap()).unwrap();
        assert_eq!(qt.geometry().num_points(), 7);
        assert_eq!(qt.map_point(3), None);
        let g = pg(5, 1, 3);
        let qt = g.quotient(&g.span(&[0]).unwrap()).unwrap();
        assert_eq!(qt.geometry().num_points(), 6);
        let g = pg(2, 1, 5);
        let qt = g.quotient(&g.span(&[0, 1]).unwrap()).unwrap();
        assert_eq!(qt.geometry().num_points(), 7);
        assert_eq!(qt.point_map().iter().filter(|m| m.is_none()).count(), 3);
    }

    #[test]
    fn quotient_lifts_are_consistent() {
        let g = pg(3, 1, 4);
        let flat = g.span(&[2]).unwrap();
        let qt = g.quotient(&flat).unwrap();
        let qg = qt.geometry();
        for qh in 0..qg.num_hyperplanes() {
            let h = qt.lift_hyperplane(&g, qh);
            assert!(g.flat_in_hyperplane(&flat, h));
            for p in 0..g.num_points() {
                if let Some(qp) = qt.map_point(p) {
                    assert_eq!(qg.incident(qp, qh), g.incident(p, h));
                }
            }
        }
        for qp in 0..qg.num_points() {
            let line = qt.lift_point(&g, qp);
            assert_eq!(line.proj_dim(), 1);
            for p in g.flat_points(&line) {
                assert!(p == 2 || qt.map_point(p) == Some(qp));
            }
        }
    }

    #[test]
    fn meet_of_lines() {
        let g = pg(2, 1, 4);
        let a = g.span(&[0, 1]).unwrap();
        let pts = g.flat_points(&a);
        let b = g.span(&[pts[2], 5]).unwrap();
        let m = g.meet(&a, &b);
        assert_eq!(m.proj_dim(), 0);
        assert_eq!(g.flat_points(&m), vec![pts[2]]);
    }
}
