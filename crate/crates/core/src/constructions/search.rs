//! Backtracking search for large (n, r)-arcs.
//!
//! Points are tried in increasing canonical index order. The search state is
//! the per-hyperplane count together with the set of points lying on a full
//! hyperplane (count = r), which can no longer be added. Subtrees below a
//! fixed split depth run independently and are reduced in canonical order,
//! so results and node counts do not depend on the worker count.
//!
//! `prove_max` raises the target one at a time: each round is a `find` for
//! one more point than the best witness so far, and the final, failing round
//! is an exhaustive proof that no larger arc exists.

use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::arc::{verify_arc, ArcDiagnostics, ArcError, ArcMultiset};
use crate::bits::{and_count, words_for};
use crate::geometry::Geometry;

/// prove_max is limited to geometries with at most this many points.
pub const PROVE_MAX_POINT_LIMIT: usize = 1 << 14;

const MAX_FRONTIER: u128 = 1 << 17;

pub const RULE_FULL_HYPERPLANE: &str =
    "a point on a hyperplane already holding r arc points is never added";
pub const RULE_COUNT_BOUND: &str =
    "prune when current size plus remaining admissible points is below the target";
pub const RULE_PENCIL_BOUND: &str = "prune when, for a (k-3)-flat L spanned by chosen points, \
     |U∩L| + sum over the q+1 hyperplanes H through L of min(r - |S∩L|, |U∩H\\L|) is below the \
     target (S = chosen, U = chosen plus admissible)";
pub const SYMMETRY_NOTE: &str = "first point fixed to index 0: the collineation group of \
     PG(k-1,q) is transitive on points, so every arc is equivalent to one containing point 0";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error("prove_max is limited to {limit} points, geometry has {points}")]
    GuardExceeded { points: usize, limit: usize },
    #[error("r = {r} is below the dimension floor k - 1 = {min}")]
    MalformedQuery { r: u32, min: u32 },
    #[error(transparent)]
    Arc(#[from] ArcError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SearchMode {
    Find { target: usize },
    ProveMax,
}

#[derive(Debug, Clone)]
pub struct SearchOptions {
    /// Worker threads; 0 uses the global rayon pool.
    pub workers: usize,
    pub budget: Option<Duration>,
    /// Largest number of chosen points at which the tree is split into
    /// independent subtrees; lowered when the frontier would be too big.
    pub split_depth: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            workers: 1,
            budget: None,
            split_depth: 3,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Round {
    pub target: usize,
    pub found: bool,
    pub nodes: u64,
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub r: u32,
    pub mode: SearchMode,
    pub best_arc: Option<ArcMultiset>,
    pub best_n: usize,
    pub target: Option<usize>,
    /// Find mode: the target was reached.
    pub found: bool,
    pub proved_max: bool,
    pub budget_exhausted: bool,
    pub nodes_explored: u64,
    pub wall_time: Duration,
    pub rounds: Vec<Round>,
    pub pruning_rules: Vec<&'static str>,
    pub symmetry: Option<&'static str>,
    pub witness_check: Option<ArcDiagnostics>,
}

#[derive(Clone)]
struct Pencil {
    flat: Vec<u64>,
    hyperplanes: Vec<u32>,
}

struct Shared<'a> {
    deadline: Option<Instant>,
    timed_out: &'a AtomicBool,
    first_found: &'a AtomicUsize,
}

struct Searcher<'a> {
    g: &'a Geometry,
    r: u32,
    target: usize,
    words: usize,
    shared: &'a Shared<'a>,
    subtree: usize,
    nodes: u64,
    chosen: Vec<usize>,
    chosen_bits: Vec<u64>,
    counts: Vec<u16>,
    blocked: Vec<u64>,
    saved_blocked: Vec<Vec<u64>>,
    pencils: Vec<Pencil>,
    pencil_marks: Vec<usize>,
    best: Vec<usize>,
    found: Option<Vec<usize>>,
    stop: bool,
    frontier_limit: Option<usize>,
    frontier: Vec<Vec<usize>>,
}

impl<'a> Searcher<'a> {
    fn new(g: &'a Geometry, r: u32, target: usize, shared: &'a Shared<'a>, subtree: usize) -> Self {
        let words = words_for(g.num_points());
        Searcher {
            g,
            r,
            target,
            words,
            shared,
            subtree,
            nodes: 0,
            chosen: Vec::new(),
            chosen_bits: vec![0; words],
            counts: vec![0; g.num_hyperplanes()],
            blocked: vec![0; words],
            saved_blocked: Vec::new(),
            pencils: Vec::new(),
            pencil_marks: Vec::new(),
            best: Vec::new(),
            found: None,
            stop: false,
            frontier_limit: None,
            frontier: Vec::new(),
        }
    }

    fn push(&mut self, p: usize) {
        self.saved_blocked.push(self.blocked.clone());
        for &h in self.g.hyperplanes_through_point(p) {
            let c = &mut self.counts[h as usize];
            *c += 1;
            if *c as u32 == self.r {
                for (b, &w) in self.blocked.iter_mut().zip(self.g.row(h as usize)) {
                    *b |= w;
                }
            }
        }
        self.chosen.push(p);
        self.chosen_bits[p / 64] |= 1 << (p % 64);
        self.pencil_marks.push(self.pencils.len());
        let base = self.g.k().saturating_sub(3);
        if self.g.k() >= 3 && self.chosen.len() > base {
            // hyperplanes through the first k-3 chosen points and p
            let mut hs = self.g.row(p).to_vec();
            for &b in &self.chosen[..base] {
                for (x, &y) in hs.iter_mut().zip(self.g.row(b)) {
                    *x &= y;
                }
            }
            let hyperplanes: Vec<u32> = crate::bits::iter_ones(&hs).map(|h| h as u32).collect();
            if hyperplanes.len() == self.g.q() + 1 {
                let (h0, h1) = (hyperplanes[0] as usize, hyperplanes[1] as usize);
                let flat = self
                    .g
                    .row(h0)
                    .iter()
                    .zip(self.g.row(h1))
                    .map(|(a, b)| a & b)
                    .collect();
                self.pencils.push(Pencil { flat, hyperplanes });
            }
        }
    }

    fn pop(&mut self) {
        let p = self.chosen.pop().expect("non-empty");
        self.chosen_bits[p / 64] &= !(1 << (p % 64));
        for &h in self.g.hyperplanes_through_point(p) {
            self.counts[h as usize] -= 1;
        }
        self.blocked = self.saved_blocked.pop().expect("saved");
        let mark = self.pencil_marks.pop().expect("mark");
        self.pencils.truncate(mark);
    }

    fn admissible(&self, start: usize) -> Vec<u64> {
        let mut a = vec![0u64; self.words];
        for (w, slot) in a.iter_mut().enumerate() {
            let lo = w * 64;
            let mask = if start <= lo {
                u64::MAX
            } else if start >= lo + 64 {
                0
            } else {
                u64::MAX << (start - lo)
            };
            *slot = mask & !self.blocked[w] & !self.chosen_bits[w];
        }
        let total = self.g.num_points();
        if !total.is_multiple_of(64) {
            a[self.words - 1] &= (1u64 << (total % 64)) - 1;
        }
        a
    }

    /// Smallest upper bound on the final size over all pencils.
    fn pencil_bound_below_target(&self, admissible: &[u64]) -> bool {
        let union: Vec<u64> = admissible
            .iter()
            .zip(&self.chosen_bits)
            .map(|(a, s)| a | s)
            .collect();
        for pencil in &self.pencils {
            let in_s = and_count(&self.chosen_bits, &pencil.flat) as u32;
            if in_s > self.r {
                return true;
            }
            let cap = (self.r - in_s) as usize;
            let mut bound = and_count(&union, &pencil.flat);
            for &h in &pencil.hyperplanes {
                let row = self.g.row(h as usize);
                let outside: usize = union
                    .iter()
                    .zip(row)
                    .zip(&pencil.flat)
                    .map(|((u, r), l)| (u & r & !l).count_ones() as usize)
                    .sum();
                bound += outside.min(cap);
                if bound >= self.target {
                    break;
                }
            }
            if bound < self.target {
                return true;
            }
        }
        false
    }

    fn check_stop(&mut self) {
        if self.stop {
            return;
        }
        if self.shared.timed_out.load(Ordering::Relaxed)
            || self.shared.first_found.load(Ordering::Relaxed) < self.subtree
        {
            self.stop = true;
            return;
        }
        if let Some(d) = self.shared.deadline {
            if Instant::now() >= d {
                self.shared.timed_out.store(true, Ordering::Relaxed);
                self.stop = true;
            }
        }
    }

    fn dfs(&mut self, start: usize) {
        if self.stop || self.found.is_some() {
            return;
        }
        if self.chosen.len() > self.best.len() {
            self.best = self.chosen.clone();
        }
        if self.chosen.len() >= self.target {
            self.found = Some(self.chosen.clone());
            return;
        }
        if self.frontier_limit == Some(self.chosen.len()) {
            self.frontier.push(self.chosen.clone());
            return;
        }
        self.nodes += 1;
        if self.nodes.is_multiple_of(4096) {
            self.check_stop();
            if self.stop {
                return;
            }
        }
        let admissible = self.admissible(start);
        let mut remaining: usize = admissible.iter().map(|w| w.count_ones() as usize).sum();
        if self.chosen.len() + remaining < self.target {
            return;
        }
        if self.pencil_bound_below_target(&admissible) {
            return;
        }
        let candidates: Vec<usize> = crate::bits::iter_ones(&admissible).collect();
        for p in candidates {
            if self.chosen.len() + remaining < self.target {
                break;
            }
            remaining -= 1;
            self.push(p);
            self.dfs(p + 1);
            self.pop();
            if self.stop || self.found.is_some() {
                return;
            }
        }
    }
}

struct FindOutcome {
    found: Option<Vec<usize>>,
    best: Vec<usize>,
    nodes: u64,
    timed_out: bool,
}

/// Deepest split level up to `max_depth` whose frontier holds at most
/// `MAX_FRONTIER` prefixes; always at least one level below the prefix.
fn split_depth(points: usize, prefix: usize, max_depth: usize) -> usize {
    let free = points.saturating_sub(prefix) as u128;
    let mut depth = prefix + 1;
    let mut size = free;
    while depth < max_depth {
        let next =
            size * free.saturating_sub((depth - prefix) as u128) / (depth - prefix + 1) as u128;
        if next > MAX_FRONTIER {
            break;
        }
        size = next;
        depth += 1;
    }
    depth
}

fn run_find(
    g: &Geometry,
    r: u32,
    target: usize,
    fixed_first: bool,
    opts: &SearchOptions,
    deadline: Option<Instant>,
) -> FindOutcome {
    let timed_out = AtomicBool::new(false);
    let first_found = AtomicUsize::new(usize::MAX);
    let shared = Shared {
        deadline,
        timed_out: &timed_out,
        first_found: &first_found,
    };

    let prefix: Vec<usize> = if fixed_first { vec![0] } else { Vec::new() };
    let mut gen = Searcher::new(g, r, target, &shared, 0);
    for &p in &prefix {
        gen.push(p);
    }
    gen.frontier_limit = Some(split_depth(g.num_points(), prefix.len(), opts.split_depth));
    gen.dfs(prefix.last().map_or(0, |&p| p + 1));
    if let Some(found) = gen.found.take() {
        return FindOutcome {
            best: found.clone(),
            found: Some(found),
            nodes: gen.nodes,
            timed_out: false,
        };
    }
    let frontier_nodes = gen.nodes;
    let mut best = gen.best.clone();
    let frontier = std::mem::take(&mut gen.frontier);
    drop(gen);

    let solve = |(i, pre): (usize, &Vec<usize>)| {
        if first_found.load(Ordering::Relaxed) < i || timed_out.load(Ordering::Relaxed) {
            return (None, Vec::new(), 0);
        }
        let mut s = Searcher::new(g, r, target, &shared, i);
        for &p in pre {
            s.push(p);
        }
        s.dfs(pre.last().map_or(0, |&p| p + 1));
        if s.found.is_some() {
            first_found.fetch_min(i, Ordering::Relaxed);
        }
        (s.found, s.best, s.nodes)
    };
    let results: Vec<(Option<Vec<usize>>, Vec<usize>, u64)> = if opts.workers == 0 {
        frontier.par_iter().enumerate().map(solve).collect()
    } else if opts.workers == 1 {
        frontier.iter().enumerate().map(solve).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.workers)
            .build()
            .expect("thread pool");
        pool.install(|| frontier.par_iter().enumerate().map(solve).collect())
    };

    let mut nodes = frontier_nodes;
    let mut found = None;
    for (sub_found, sub_best, sub_nodes) in results {
        nodes += sub_nodes;
        if sub_best.len() > best.len() {
            best = sub_best;
        }
        if let Some(f) = sub_found {
            found = Some(f);
            break;
        }
    }
    FindOutcome {
        found,
        best,
        nodes,
        timed_out: timed_out.load(Ordering::Relaxed),
    }
}

/// First-fit arc in canonical order.
fn greedy(g: &Geometry, r: u32) -> Vec<usize> {
    let mut counts = vec![0u32; g.num_hyperplanes()];
    let mut out = Vec::new();
    for p in 0..g.num_points() {
        let through = g.hyperplanes_through_point(p);
        if through.iter().all(|&h| counts[h as usize] < r) {
            for &h in through {
                counts[h as usize] += 1;
            }
            out.push(p);
        }
    }
    out
}

pub fn search_max_arc(
    geometry: &Arc<Geometry>,
    r: u32,
    mode: SearchMode,
    opts: &SearchOptions,
) -> Result<SearchResult, SearchError> {
    let min = geometry.k() as u32 - 1;
    if r < min {
        return Err(SearchError::MalformedQuery { r, min });
    }
    let started = Instant::now();
    let deadline = opts.budget.map(|b| started + b);
    let g = geometry.as_ref();

    let mut rounds = Vec::new();
    let (best, found, proved, timed_out, nodes, symmetry, target) = match mode {
        SearchMode::Find { target } => {
            let out = run_find(g, r, target, false, opts, deadline);
            rounds.push(Round {
                target,
                found: out.found.is_some(),
                nodes: out.nodes,
            });
            let best = out.found.clone().unwrap_or(out.best);
            (
                best,
                out.found.is_some(),
                false,
                out.timed_out,
                out.nodes,
                None,
                Some(target),
            )
        }
        SearchMode::ProveMax => {
            if g.num_points() > PROVE_MAX_POINT_LIMIT {
                return Err(SearchError::GuardExceeded {
                    points: g.num_points(),
                    limit: PROVE_MAX_POINT_LIMIT,
                });
            }
            let mut best = greedy(g, r);
            let mut nodes = 0;
            let mut proved = false;
            let mut timed_out = false;
            loop {
                let t = best.len() + 1;
                let out = run_find(g, r, t, true, opts, deadline);
                nodes += out.nodes;
                rounds.push(Round {
                    target: t,
                    found: out.found.is_some(),
                    nodes: out.nodes,
                });
                if let Some(f) = out.found {
                    best = f;
                    continue;
                }
                if out.timed_out {
                    timed_out = true;
                } else {
                    proved = true;
                }
                break;
            }
            (
                best,
                false,
                proved,
                timed_out,
                nodes,
                Some(SYMMETRY_NOTE),
                None,
            )
        }
    };

    let (best_arc, witness_check) = if best.is_empty() {
        (None, None)
    } else {
        let arc = ArcMultiset::from_points(geometry.clone(), &best)?;
        let diag = verify_arc(&arc, r)?;
        (Some(arc), Some(diag))
    };
    Ok(SearchResult {
        r,
        mode,
        best_n: best.len(),
        best_arc,
        target,
        found,
        proved_max: proved,
        budget_exhausted: timed_out,
        nodes_explored: nodes,
        wall_time: started.elapsed(),
        rounds,
        pruning_rules: vec![RULE_FULL_HYPERPLANE, RULE_COUNT_BOUND, RULE_PENCIL_BOUND],
        symmetry,
        witness_check,
    })
}

/// Exhaustive maximum with no bound pruning and no symmetry fixing; only
/// the hyperplane capacity is enforced. Intended as an independent check of
/// the pruned search on very small planes.
pub fn brute_force_max_arc(geometry: &Geometry, r: u32) -> usize {
    fn go(g: &Geometry, r: u32, start: usize, n: usize, counts: &mut [u32], best: &mut usize) {
        *best = (*best).max(n);
        for p in start..g.num_points() {
            let through = g.hyperplanes_through_point(p);
            if through.iter().all(|&h| counts[h as usize] < r) {
                for &h in through {
                    counts[h as usize] += 1;
                }
                go(g, r, p + 1, n + 1, counts, best);
                for &h in through {
                    counts[h as usize] -= 1;
                }
            }
        }
    }
    let mut counts = vec![0u32; geometry.num_hyperplanes()];
    let mut best = 0;
    go(geometry, r, 0, 0, &mut counts, &mut best);
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;

    fn pg(p: u32, e: u32, k: usize) -> Arc<Geometry> {
        Arc::new(Geometry::build(Arc::new(FieldSpec::new(p, e, None).unwrap()), k).unwrap())
    }

    #[test]
    fn oval_in_pg23() {
        let g = pg(3, 1, 3);
        let res = search_max_arc(&g, 2, SearchMode::ProveMax, &SearchOptions::default()).unwrap();
        assert_eq!(res.best_n, 4);
        assert!(res.proved_max);
        assert!(res.witness_check.unwrap().pass);
    }

    #[test]
    fn hyperoval_in_pg24() {
        let g = pg(2, 2, 3);
        let res = search_max_arc(&g, 2, SearchMode::ProveMax, &SearchOptions::default()).unwrap();
        assert_eq!(res.best_n, 6);
        assert!(res.proved_max);
    }

    #[test]
    fn pruned_search_matches_brute_force() {
        for (p, e, r) in [(2, 1, 2), (3, 1, 2), (3, 1, 3), (2, 2, 2)] {
            let g = pg(p, e, 3);
            let res =
                search_max_arc(&g, r, SearchMode::ProveMax, &SearchOptions::default()).unwrap();
            assert_eq!(res.best_n, brute_force_max_arc(&g, r), "q={} r={r}", g.q());
        }
    }

    #[test]
    fn find_mode_is_monotone() {
        let g = pg(5, 1, 3);
        let opts = SearchOptions::default();
        for t in 1..=6 {
            let res = search_max_arc(&g, 2, SearchMode::Find { target: t }, &opts).unwrap();
            assert!(res.found);
            assert_eq!(res.best_n, t);
        }
        let res = search_max_arc(&g, 2, SearchMode::Find { target: 7 }, &opts).unwrap();
        assert!(!res.found);
        assert!(res.best_n < 7);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let g = pg(2, 2, 3);
        let one = search_max_arc(&g, 3, SearchMode::ProveMax, &SearchOptions::default()).unwrap();
        let four = search_max_arc(
            &g,
            3,
            SearchMode::ProveMax,
            &SearchOptions {
                workers: 4,
                ..SearchOptions::default()
            },
        )
        .unwrap();
        assert_eq!(one.best_n, four.best_n);
        assert_eq!(one.nodes_explored, four.nodes_explored);
        assert_eq!(one.best_arc, four.best_arc);
    }

    #[test]
    fn guards() {
        let g = pg(2, 1, 3);
        assert_eq!(
            search_max_arc(&g, 1, SearchMode::ProveMax, &SearchOptions::default()).unwrap_err(),
            SearchError::MalformedQuery { r: 1, min: 2 }
        );
    }
}
