//! Independent oracles shared by the integration and acceptance tests.
//!
//! Nothing here calls the library's elimination, search or code routines;
//! only field arithmetic and the raw point/incidence tables are reused.

#![allow(dead_code)]

use std::sync::Arc;

use pgarc::arc::ArcMultiset;
use pgarc::field::FieldSpec;
use pgarc::geometry::{Flat, Geometry};

pub fn field(p: u32, e: u32) -> Arc<FieldSpec> {
    Arc::new(FieldSpec::new(p, e, None).unwrap())
}

pub fn pg(p: u32, e: u32, k: usize) -> Arc<Geometry> {
    Arc::new(Geometry::build(field(p, e), k).unwrap())
}

/// (q^m - 1) / (q - 1).
pub fn theta(q: u64, m: u32) -> u64 {
    (q.pow(m) - 1) / (q - 1)
}

/// Rank by plain Gaussian elimination on a copy.
pub fn rank(f: &FieldSpec, rows: &[Vec<u32>]) -> usize {
    let mut m: Vec<Vec<u32>> = rows.to_vec();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..m.len()).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(rank, piv);
        let inv = f.inv(m[rank][c]);
        let pivot_row: Vec<u32> = m[rank].iter().map(|&x| f.mul(x, inv)).collect();
        for (i, row) in m.iter_mut().enumerate() {
            if i != rank && row[c] != 0 {
                let factor = row[c];
                for (x, &y) in row.iter_mut().zip(&pivot_row) {
                    *x = f.sub(*x, f.mul(factor, y));
                }
            }
        }
        m[rank] = pivot_row;
        rank += 1;
    }
    rank
}

/// Basis of { x : G x = 0 } for a k x n matrix G.
pub fn nullspace(f: &FieldSpec, g: &[Vec<u32>]) -> Vec<Vec<u32>> {
    let n = g[0].len();
    let mut m: Vec<Vec<u32>> = g.to_vec();
    let mut pivots = Vec::new();
    let mut rank = 0;
    for c in 0..n {
        let Some(piv) = (rank..m.len()).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(rank, piv);
        let inv = f.inv(m[rank][c]);
        let pivot_row: Vec<u32> = m[rank].iter().map(|&x| f.mul(x, inv)).collect();
        for (i, row) in m.iter_mut().enumerate() {
            if i != rank && row[c] != 0 {
                let factor = row[c];
                for (x, &y) in row.iter_mut().zip(&pivot_row) {
                    *x = f.sub(*x, f.mul(factor, y));
                }
            }
        }
        m[rank] = pivot_row;
        pivots.push(c);
        rank += 1;
    }
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![0u32; n];
            v[fc] = 1;
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = f.neg(m[i][fc]);
            }
            v
        })
        .collect()
}

/// Calls `visit` on every nonzero linear combination of `basis`.
fn for_each_combination(f: &FieldSpec, basis: &[Vec<u32>], mut visit: impl FnMut(&[u32])) {
    let q = f.q();
    let n = basis[0].len();
    let mut coeffs = vec![0u32; basis.len()];
    loop {
        let mut i = 0;
        while i < coeffs.len() {
            coeffs[i] += 1;
            if coeffs[i] < q {
                break;
            }
            coeffs[i] = 0;
            i += 1;
        }
        if i == coeffs.len() {
            return;
        }
        let mut word = vec![0u32; n];
        for (c, row) in coeffs.iter().zip(basis) {
            if *c != 0 {
                for (w, &x) in word.iter_mut().zip(row) {
                    *w = f.add(*w, f.mul(*c, x));
                }
            }
        }
        visit(&word);
    }
}

/// Minimum weight over all q^k - 1 nonzero codewords.
pub fn min_weight_exhaustive(f: &FieldSpec, generator: &[Vec<u32>]) -> usize {
    let mut best = usize::MAX;
    for_each_combination(f, generator, |w| {
        best = best.min(w.iter().filter(|&&x| x != 0).count());
    });
    best
}

/// Dual minimum distance by enumerating the dual code from a nullspace
/// basis. `None` for a zero dual.
pub fn dual_distance_enumerated(f: &FieldSpec, generator: &[Vec<u32>]) -> Option<usize> {
    let h = nullspace(f, generator);
    if h.is_empty() {
        return None;
    }
    Some(min_weight_exhaustive(f, &h))
}

fn next_subset(idx: &mut [usize], n: usize) -> bool {
    let t = idx.len();
    let mut i = t;
    while i > 0 {
        i -= 1;
        if idx[i] < n - t + i {
            idx[i] += 1;
            for j in i + 1..t {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Dual minimum distance as the least t such that some t coordinates
/// support a dual codeword, i.e. the parity-check columns outside them
/// lose rank.
pub fn dual_distance_by_supports(f: &FieldSpec, generator: &[Vec<u32>]) -> Option<usize> {
    let h = nullspace(f, generator);
    if h.is_empty() {
        return None;
    }
    let n = generator[0].len();
    let full = h.len();
    for t in 1..=n {
        let mut idx: Vec<usize> = (0..t).collect();
        loop {
            let rest: Vec<Vec<u32>> = h
                .iter()
                .map(|row| {
                    (0..n)
                        .filter(|c| !idx.contains(c))
                        .map(|c| row[c])
                        .collect()
                })
                .collect();
            if rest[0].is_empty() || rank(f, &rest) < full {
                return Some(t);
            }
            if !next_subset(&mut idx, n) {
                break;
            }
        }
    }
    None
}

/// Dual distance by enumeration when the dual is small enough, otherwise by
/// support ranks.
pub fn dual_distance_oracle(f: &FieldSpec, generator: &[Vec<u32>]) -> Option<usize> {
    let n = generator[0].len();
    let dual_dim = n.saturating_sub(generator.len()) as u32;
    if n <= 14 && (f.q() as u64).saturating_pow(dual_dim) <= 1 << 22 {
        dual_distance_enumerated(f, generator)
    } else {
        dual_distance_by_supports(f, generator)
    }
}

/// Hyperplane counts by direct dot products, not the incidence tables.
pub fn hyperplane_counts_direct(arc: &ArcMultiset) -> Vec<u32> {
    let g = arc.geometry();
    let f = g.field();
    (0..g.num_hyperplanes())
        .map(|h| {
            arc.entries()
                .filter(|&(p, _)| f.dot(g.hyperplane(h), g.point(p)) == 0)
                .map(|(_, m)| m)
                .sum()
        })
        .collect()
}

pub fn in_span(f: &FieldSpec, basis: &[Vec<u32>], v: &[u32]) -> bool {
    let mut rows = basis.to_vec();
    rows.push(v.to_vec());
    rank(f, &rows) == rank(f, basis)
}

/// Checks the quotient by a flat against incidences in the parent space.
pub fn quotient_soundness(g: &Geometry, flat: &Flat) -> Result<(), String> {
    let f = g.field();
    let t = flat.rank();
    let quo = g.quotient(flat).map_err(|e| e.to_string())?;
    let qg = quo.geometry();
    if qg.k() != g.k() - t {
        return Err(format!(
            "quotient has k = {}, expected {}",
            qg.k(),
            g.k() - t
        ));
    }
    let in_flat = |p: usize| in_span(f, flat.basis(), g.point(p));
    let mut preimages = vec![0u64; qg.num_points()];
    for p in 0..g.num_points() {
        match (in_flat(p), quo.map_point(p)) {
            (true, None) => {}
            (false, Some(x)) => preimages[x] += 1,
            (a, b) => return Err(format!("point {p}: in flat {a}, image {b:?}")),
        }
    }
    let expected = (g.q() as u64).pow(t as u32);
    if let Some(x) = preimages.iter().position(|&c| c != expected) {
        return Err(format!(
            "quotient point {x} has {} preimages, expected {expected}",
            preimages[x]
        ));
    }
    for x in 0..qg.num_points() {
        let lifted = quo.lift_point(g, x);
        let base_inside = flat.basis().iter().all(|b| in_span(f, lifted.basis(), b));
        if rank(f, lifted.basis()) != t + 1 || !base_inside {
            return Err(format!(
                "lift of quotient point {x} is not a flat of rank {} over the base",
                t + 1
            ));
        }
        for p in 0..g.num_points() {
            let inside = in_span(f, lifted.basis(), g.point(p));
            if !in_flat(p) && inside != (quo.map_point(p) == Some(x)) {
                return Err(format!(
                    "lift of quotient point {x} disagrees with the image of point {p}"
                ));
            }
        }
    }
    let mut seen = vec![false; g.num_hyperplanes()];
    for qh in 0..qg.num_hyperplanes() {
        let h = quo.lift_hyperplane(g, qh);
        if seen[h] {
            return Err(format!("hyperplane {h} lifted twice"));
        }
        seen[h] = true;
        if !flat.basis().iter().all(|b| f.dot(g.hyperplane(h), b) == 0) {
            return Err(format!("lifted hyperplane {h} misses the base flat"));
        }
        for p in 0..g.num_points() {
            if let Some(x) = quo.map_point(p) {
                let parent = f.dot(g.hyperplane(h), g.point(p)) == 0;
                let child = f.dot(qg.hyperplane(qh), qg.point(x)) == 0;
                if parent != child {
                    return Err(format!(
                        "point {p} and quotient hyperplane {qh} disagree on incidence"
                    ));
                }
            }
        }
    }
    let through = (0..g.num_hyperplanes())
        .filter(|&h| flat.basis().iter().all(|b| f.dot(g.hyperplane(h), b) == 0))
        .count();
    if through != qg.num_hyperplanes() {
        return Err(format!(
            "{through} hyperplanes contain the base, quotient has {}",
            qg.num_hyperplanes()
        ));
    }
    Ok(())
}

/// Flats of every rank 1..k-1 spanned by a few fixed points.
pub fn sample_flats(g: &Geometry) -> Vec<Flat> {
    let k = g.k();
    let unit = |i: usize| {
        let mut v = vec![0u32; k];
        v[i] = 1;
        v
    };
    let all_ones = vec![1u32; k];
    let mut out = Vec::new();
    for t in 1..k {
        out.push(Flat::from_vectors(g.field(), k, (0..t).map(unit).collect()));
        let mut vs: Vec<Vec<u32>> = (1..t).map(|i| unit(k - i)).collect();
        vs.push(all_ones.clone());
        out.push(Flat::from_vectors(g.field(), k, vs));
    }
    out
}
