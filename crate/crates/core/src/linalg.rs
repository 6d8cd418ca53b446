//! Row reduction over GF(q).

use crate::field::FieldSpec;

/// Reduced row echelon form. Zero rows are dropped; returns the rows and the
/// pivot column of each row.
pub fn rref(f: &FieldSpec, mut rows: Vec<Vec<u32>>) -> (Vec<Vec<u32>>, Vec<usize>) {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..ncols {
        let Some(sel) = (rank..rows.len()).find(|&i| rows[i][col] != 0) else {
            continue;
        };
        rows.swap(rank, sel);
        let inv = f.inv(rows[rank][col]);
        for x in rows[rank].iter_mut() {
            *x = f.mul(*x, inv);
        }
        let pivot_row = rows[rank].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == rank || row[col] == 0 {
                continue;
            }
            let factor = f.neg(row[col]);
            for (x, &y) in row.iter_mut().zip(&pivot_row) {
                *x = f.add(*x, f.mul(factor, y));
            }
        }
        pivots.push(col);
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rows.truncate(rank);
    (rows, pivots)
}

pub fn rank(f: &FieldSpec, rows: Vec<Vec<u32>>) -> usize {
    rref(f, rows).0.len()
}

/// Eliminates the pivot columns of `v` against an RREF basis. The result is
/// zero iff `v` lies in the row space.
pub fn reduce(f: &FieldSpec, basis: &[Vec<u32>], pivots: &[usize], v: &[u32]) -> Vec<u32> {
    let mut out = v.to_vec();
    for (row, &col) in basis.iter().zip(pivots) {
        let c = out[col];
        if c == 0 {
            continue;
        }
        let factor = f.neg(c);
        for (x, &y) in out.iter_mut().zip(row) {
            *x = f.add(*x, f.mul(factor, y));
        }
    }
    out
}

/// Incremental echelon basis used by searches that grow a span one vector at
/// a time.
#[derive(Debug, Clone, Default)]
pub struct Echelon {
    rows: Vec<Vec<u32>>,
    pivots: Vec<usize>,
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn contains(&self, f: &FieldSpec, v: &[u32]) -> bool {
        reduce(f, &self.rows, &self.pivots, v)
            .iter()
            .all(|&x| x == 0)
    }

    /// Adds `v` to the span. Returns false (and leaves the basis unchanged)
    /// when `v` is already in it.
    pub fn insert(&mut self, f: &FieldSpec, v: &[u32]) -> bool {
        let mut r = reduce(f, &self.rows, &self.pivots, v);
        let Some(col) = r.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = f.inv(r[col]);
        for x in r.iter_mut() {
            *x = f.mul(*x, inv);
        }
        for row in self.rows.iter_mut() {
            let c = row[col];
            if c != 0 {
                let factor = f.neg(c);
                for (x, &y) in row.iter_mut().zip(&r) {
                    *x = f.add(*x, f.mul(factor, y));
                }
            }
        }
        let at = self.pivots.partition_point(|&p| p < col);
        self.rows.insert(at, r);
        self.pivots.insert(at, col);
        true
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }
}
