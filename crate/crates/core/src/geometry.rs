//! Brute-force geometry: the L2 kernel, exact kNN, and the EMST / RNG oracles
//! used to verify that pruned graphs keep the connectivity backbone.
//!
//! Everything here is quadratic or cubic and meant for verification at desk
//! scale. EMST and RNG refuse inputs above [`ORACLE_MAX_POINTS`].

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::dataset::VectorDataset;
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Largest input the all-pairs oracles accept.
pub const ORACLE_MAX_POINTS: usize = 5000;

/// Fixed-order sum of four 4-lane accumulators.
#[inline(always)]
fn reduce16(acc: &[f32; 16]) -> f32 {
    let mut lane = [0f32; 4];
    for l in 0..4 {
        lane[l] = (acc[l] + acc[4 + l]) + (acc[8 + l] + acc[12 + l]);
    }
    (lane[0] + lane[2]) + (lane[1] + lane[3])
}

/// Squared L2 distance. Sixteen independent accumulators keep the loop
/// vectorizable and the summation order fixed.
#[inline]
pub fn l2_sq(a: &[f32], b: &[f32]) -> f32 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0f32; 16];
    let ca = a.chunks_exact(16);
    let cb = b.chunks_exact(16);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        let x: &[f32; 16] = x.try_into().expect("chunk of 16");
        let y: &[f32; 16] = y.try_into().expect("chunk of 16");
        for i in 0..16 {
            let d = x[i] - y[i];
            acc[i] += d * d;
        }
    }
    let mut tail = 0f32;
    for (x, y) in ra.iter().zip(rb) {
        let d = x - y;
        tail += d * d;
    }
    reduce16(&acc) + tail
}

#[inline]
pub fn l2(a: &[f32], b: &[f32]) -> f32 {
    l2_sq(a, b).sqrt()
}

/// Checked Euclidean distance.
pub fn l2_distance(a: &[f32], b: &[f32]) -> Result<f32> {
    if a.len() != b.len() {
        return Err(Error::param(format!(
            "dimension mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::param("non-finite vector component"));
    }
    Ok(l2(a, b))
}

/// Total order on `(distance, id)` used for every tie-break in the crate.
#[inline]
pub(crate) fn cmp_hit(a: &(u32, f32), b: &(u32, f32)) -> std::cmp::Ordering {
    a.1.total_cmp(&b.1).then(a.0.cmp(&b.0))
}

/// The `k` base vectors closest to `q`, ascending by distance then id.
pub fn exact_knn(base: &VectorDataset, q: &[f32], k: usize) -> Result<Vec<(u32, f32)>> {
    if q.len() != base.dim() {
        return Err(Error::param(format!(
            "query dim {} != base dim {}",
            q.len(),
            base.dim()
        )));
    }
    if k == 0 || k > base.len() {
        return Err(Error::param(format!(
            "k = {k} must be in 1..={}",
            base.len()
        )));
    }
    let mut hits: Vec<(u32, f32)> = base
        .rows()
        .enumerate()
        .map(|(i, row)| (i as u32, l2(row, q)))
        .collect();
    if k < hits.len() {
        hits.select_nth_unstable_by(k - 1, cmp_hit);
        hits.truncate(k);
    }
    hits.sort_unstable_by(cmp_hit);
    Ok(hits)
}

/// Undirected edges over vertices `0..n`, stored canonically as `(min, max)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EdgeSet {
    n: usize,
    edges: BTreeSet<(u32, u32)>,
}

impl EdgeSet {
    pub fn new(n: usize) -> Self {
        EdgeSet {
            n,
            edges: BTreeSet::new(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    /// Insert `{u, v}`; self-loops and out-of-range ids are rejected.
    pub fn insert(&mut self, u: u32, v: u32) -> Result<bool> {
        if u == v {
            return Err(Error::param(format!("self-loop on {u}")));
        }
        if u as usize >= self.n || v as usize >= self.n {
            return Err(Error::param(format!(
                "edge {{{u}, {v}}} outside vertex set of {}",
                self.n
            )));
        }
        Ok(self.edges.insert((u.min(v), u.max(v))))
    }

    pub fn contains(&self, u: u32, v: u32) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.edges.iter().copied()
    }

    pub fn is_subset(&self, other: &EdgeSet) -> bool {
        self.edges.is_subset(&other.edges)
    }

    /// One `u v` line per edge, sorted.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.edges.len() * 10);
        for (u, v) in &self.edges {
            let _ = writeln!(s, "{u} {v}");
        }
        s
    }

    pub fn write_text(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    /// Number of connected components (union-find).
    pub fn component_count(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let mut components = self.n;
        for &(u, v) in &self.edges {
            let (a, b) = (find(&mut parent, u as usize), find(&mut parent, v as usize));
            if a != b {
                parent[a] = b;
                components -= 1;
            }
        }
        components
    }
}

fn check_oracle_size(points: &VectorDataset) -> Result<()> {
    if points.is_empty() {
        return Err(Error::param("oracle needs at least one point"));
    }
    if points.len() > ORACLE_MAX_POINTS {
        return Err(Error::param(format!(
            "{} points exceeds the oracle limit of {ORACLE_MAX_POINTS}",
            points.len()
        )));
    }
    Ok(())
}

fn distance_matrix(points: &VectorDataset) -> Vec<f32> {
    let n = points.len();
    let mut m = vec![0f32; n * n];
    m.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        let a = points.row(i);
        for (j, slot) in row.iter_mut().enumerate() {
            *slot = l2(a, points.row(j));
        }
    });
    m
}

/// Euclidean minimum spanning tree by Prim's algorithm over all pairs.
///
/// Among equal-weight candidate edges the lexicographically smallest
/// canonical pair wins, so the output is deterministic even with ties.
pub fn emst_edges(points: &VectorDataset) -> Result<EdgeSet> {
    check_oracle_size(points)?;
    let n = points.len();
    let mut tree = EdgeSet::new(n);
    if n == 1 {
        return Ok(tree);
    }
    // best[v] = (weight, canonical edge) of the cheapest link into the tree
    let mut best: Vec<(f32, (u32, u32))> = vec![(f32::INFINITY, (u32::MAX, u32::MAX)); n];
    let mut in_tree = vec![false; n];
    let mut current = 0usize;
    in_tree[0] = true;
    for _ in 1..n {
        let src = points.row(current);
        for v in 0..n {
            if in_tree[v] {
                continue;
            }
            let w = l2(src, points.row(v));
            let edge = (current.min(v) as u32, current.max(v) as u32);
            if (w, edge) < best[v] {
                best[v] = (w, edge);
            }
        }
        let next = (0..n)
            .filter(|&v| !in_tree[v])
            .min_by(|&a, &b| best[a].partial_cmp(&best[b]).unwrap())
            .unwrap();
        let (_, (a, b)) = best[next];
        tree.insert(a, b)?;
        in_tree[next] = true;
        current = next;
    }
    Ok(tree)
}

/// Relative neighborhood graph with an open lune: `{u, v}` is kept unless some
/// third point `w` has both `d(w, u) < d(u, v)` and `d(w, v) < d(u, v)`.
pub fn rng_edges(points: &VectorDataset) -> Result<EdgeSet> {
    rng_edges_with_ties(points).map(|(edges, _)| edges)
}

/// [`rng_edges`] plus the number of kept edges whose lune has a witness on its
/// boundary (a non-strict witness). Nonzero means the input is not in general
/// position and the open/closed lune choice matters.
pub fn rng_edges_with_ties(points: &VectorDataset) -> Result<(EdgeSet, usize)> {
    check_oracle_size(points)?;
    let n = points.len();
    let dist = distance_matrix(points);
    let pairs: Vec<(u32, u32, bool)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|u| {
            let dist = &dist;
            (u + 1..n).filter_map(move |v| {
                let duv = dist[u * n + v];
                let mut boundary = false;
                for w in 0..n {
                    if w == u || w == v {
                        continue;
                    }
                    let (dwu, dwv) = (dist[w * n + u], dist[w * n + v]);
                    if dwu < duv && dwv < duv {
                        return None;
                    }
                    if dwu <= duv && dwv <= duv {
                        boundary = true;
                    }
                }
                Some((u as u32, v as u32, boundary))
            })
        })
        .collect();
    let mut edges = EdgeSet::new(n);
    let mut ties = 0;
    for (u, v, boundary) in pairs {
        edges.insert(u, v)?;
        ties += boundary as usize;
    }
    Ok((edges, ties))
}

/// Outcome of [`check_inclusion`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InclusionReport {
    pub holds: bool,
    pub missing: Vec<(u32, u32)>,
}

/// Does every undirected edge of `inner` appear in `outer` in at least one direction?
pub fn check_inclusion(inner: &EdgeSet, outer: &Graph) -> Result<InclusionReport> {
    if inner.vertex_count() != outer.len() {
        return Err(Error::param(format!(
            "edge set over {} vertices vs graph over {}",
            inner.vertex_count(),
            outer.len()
        )));
    }
    let missing: Vec<(u32, u32)> = inner
        .iter()
        .filter(|&(u, v)| !outer.has_edge(u, v) && !outer.has_edge(v, u))
        .collect();
    Ok(InclusionReport {
        holds: missing.is_empty(),
        missing,
    })
}
