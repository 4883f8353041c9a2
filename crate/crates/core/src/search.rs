//! Best-first beam search over a proximity graph, plus the LID-adaptive variant.
//!
//! The candidate pool is kept sorted by `(distance, id)`; the search repeatedly
//! expands the closest unexpanded candidate among the first `width` entries and
//! stops once all of them are expanded. Every tie is broken by the smaller id,
//! so a single-threaded search is fully deterministic.
//!
//! Adaptive search runs a short pilot search, estimates the query's LID from
//! the pilot's nearest distances, and then continues the same search state at
//! width `L(q) = clamp(round(beam_min · exp(λ · (LID_q - μ))), beam_min, beam_max)`.

use crate::dataset::VectorDataset;
use crate::error::{Error, Result};
use crate::geometry::l2;
use crate::graph::Graph;
use crate::lid::{estimate_lid_mle, LidProfile};

/// Read access to a graph and its vectors, in memory or on disk.
pub trait GraphSource: Sync {
    fn node_count(&self) -> usize;

    fn dim(&self) -> usize;

    fn entry_point(&self) -> u32;

    /// Distance from `q` to node `u`'s vector.
    fn distance_to(&self, q: &[f32], u: u32) -> f32;

    /// Fetch `u`'s out-neighbors into `out` (replacing its contents). One call
    /// is one node read.
    fn read_neighbors(&self, u: u32, out: &mut Vec<u32>) -> Result<()>;
}

/// A [`Graph`] together with the vectors it indexes.
#[derive(Clone, Copy)]
pub struct MemoryIndex<'a> {
    pub graph: &'a Graph,
    pub base: &'a VectorDataset,
}

impl<'a> MemoryIndex<'a> {
    pub fn new(graph: &'a Graph, base: &'a VectorDataset) -> Result<Self> {
        if graph.len() != base.len() {
            return Err(Error::param(format!(
                "graph has {} nodes but dataset has {} vectors",
                graph.len(),
                base.len()
            )));
        }
        Ok(MemoryIndex { graph, base })
    }
}

impl GraphSource for MemoryIndex<'_> {
    fn node_count(&self) -> usize {
        self.graph.len()
    }

    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn entry_point(&self) -> u32 {
        self.graph.entry_point()
    }

    #[inline]
    fn distance_to(&self, q: &[f32], u: u32) -> f32 {
        l2(q, self.base.row(u as usize))
    }

    fn read_neighbors(&self, u: u32, out: &mut Vec<u32>) -> Result<()> {
        out.clear();
        out.extend_from_slice(self.graph.neighbors(u as usize));
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub distance_evals: u64,
    /// Expansions performed (one per node whose neighbor list was consumed).
    pub hops: u64,
    pub nodes_read: u64,
    /// Beam width the search finished with; `L(q)` for adaptive searches.
    pub beam_used: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult {
    pub ids: Vec<u32>,
    pub distances: Vec<f32>,
    pub stats: SearchStats,
    /// Query LID estimated by an adaptive search, if one was computed.
    pub query_lid: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchParams {
    pub beam: usize,
    pub k: usize,
    pub adaptive: bool,
    pub lambda: f64,
    pub beam_min: usize,
    pub beam_max: usize,
    pub pilot_beam: usize,
    pub pilot_k: usize,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            beam: 100,
            k: 10,
            adaptive: false,
            lambda: 0.25,
            beam_min: 10,
            beam_max: 400,
            pilot_beam: 10,
            pilot_k: 10,
        }
    }
}

impl SearchParams {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::param("k must be >= 1"));
        }
        if self.adaptive {
            if self.beam_min == 0 || self.pilot_beam == 0 {
                return Err(Error::param("beam_min and pilot_beam must be >= 1"));
            }
            if self.beam_min > self.beam_max {
                return Err(Error::param(format!(
                    "beam_min {} exceeds beam_max {}",
                    self.beam_min, self.beam_max
                )));
            }
            if self.pilot_k < 2 {
                return Err(Error::param("pilot_k must be >= 2"));
            }
            if self.k > self.beam_max {
                return Err(Error::param(format!(
                    "k = {} exceeds beam_max = {}",
                    self.k, self.beam_max
                )));
            }
            if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
                return Err(Error::param("lambda must be finite and >= 0"));
            }
        } else if self.k > self.beam {
            return Err(Error::param(format!(
                "k = {} exceeds beam = {}",
                self.k, self.beam
            )));
        }
        Ok(())
    }
}

/// Generation-stamped visited marks, reusable across searches without clearing.
#[derive(Clone, Debug, Default)]
pub(crate) struct VisitedSet {
    marks: Vec<u32>,
    epoch: u32,
}

impl VisitedSet {
    pub(crate) fn reset(&mut self, n: usize) {
        if self.marks.len() < n {
            self.marks.resize(n, 0);
        }
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.marks.iter_mut().for_each(|m| *m = 0);
            self.epoch = 1;
        }
    }

    /// Mark `u`; returns false if it was already marked.
    #[inline]
    pub(crate) fn insert(&mut self, u: u32) -> bool {
        let slot = &mut self.marks[u as usize];
        if *slot == self.epoch {
            false
        } else {
            *slot = self.epoch;
            true
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Candidate {
    dist: f32,
    id: u32,
    expanded: bool,
}

#[inline]
fn precedes(a_dist: f32, a_id: u32, b: &Candidate) -> bool {
    match a_dist.total_cmp(&b.dist) {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Equal => a_id < b.id,
        std::cmp::Ordering::Greater => false,
    }
}

/// Resumable search state: the sorted pool keeps up to `retain` candidates so
/// the width can later grow past the width it was run at.
pub(crate) struct BeamState {
    pool: Vec<Candidate>,
    retain: usize,
    cursor: usize,
    visited: VisitedSet,
    expanded: Vec<(u32, f32)>,
    scratch: Vec<u32>,
    stats: SearchStats,
}

impl BeamState {
    pub(crate) fn start<S: GraphSource + ?Sized>(
        src: &S,
        q: &[f32],
        retain: usize,
        mut visited: VisitedSet,
    ) -> Self {
        visited.reset(src.node_count());
        let entry = src.entry_point();
        visited.insert(entry);
        let dist = src.distance_to(q, entry);
        BeamState {
            pool: vec![Candidate {
                dist,
                id: entry,
                expanded: false,
            }],
            retain: retain.max(1),
            cursor: 0,
            visited,
            expanded: Vec::new(),
            scratch: Vec::new(),
            stats: SearchStats {
                distance_evals: 1,
                ..SearchStats::default()
            },
        }
    }

    fn insert(&mut self, dist: f32, id: u32) {
        let pos = self.pool.partition_point(|c| !precedes(dist, id, c));
        if pos >= self.retain {
            return;
        }
        self.pool.insert(
            pos,
            Candidate {
                dist,
                id,
                expanded: false,
            },
        );
        self.pool.truncate(self.retain);
        self.cursor = self.cursor.min(pos);
    }

    /// Expand until the first `width` candidates are all expanded.
    pub(crate) fn run<S: GraphSource + ?Sized>(
        &mut self,
        src: &S,
        q: &[f32],
        width: usize,
    ) -> Result<()> {
        let n = src.node_count();
        loop {
            let limit = width.min(self.pool.len());
            while self.cursor < limit && self.pool[self.cursor].expanded {
                self.cursor += 1;
            }
            if self.cursor >= limit {
                return Ok(());
            }
            let current = &mut self.pool[self.cursor];
            current.expanded = true;
            let (id, dist) = (current.id, current.dist);
            self.expanded.push((id, dist));
            self.stats.hops += 1;
            self.stats.nodes_read += 1;
            let mut neighbors = std::mem::take(&mut self.scratch);
            src.read_neighbors(id, &mut neighbors)?;
            for &nb in &neighbors {
                if nb as usize >= n {
                    return Err(Error::CorruptNode {
                        node: id as u64,
                        reason: format!("neighbor id {nb} out of range"),
                    });
                }
                if self.visited.insert(nb) {
                    let d = src.distance_to(q, nb);
                    self.stats.distance_evals += 1;
                    self.insert(d, nb);
                }
            }
            self.scratch = neighbors;
        }
    }

    fn pool_distances(&self, count: usize) -> impl Iterator<Item = f32> + '_ {
        self.pool.iter().take(count).map(|c| c.dist)
    }

    pub(crate) fn result(&self, k: usize, beam_used: usize, query_lid: Option<f64>) -> SearchResult {
        let top = &self.pool[..k.min(self.pool.len())];
        SearchResult {
            ids: top.iter().map(|c| c.id).collect(),
            distances: top.iter().map(|c| c.dist).collect(),
            stats: SearchStats {
                beam_used,
                ..self.stats
            },
            query_lid,
        }
    }

    /// Expanded nodes in expansion order, with their distances to the query.
    pub(crate) fn into_parts(self) -> (Vec<(u32, f32)>, VisitedSet) {
        (self.expanded, self.visited)
    }
}

fn check_query<S: GraphSource + ?Sized>(src: &S, q: &[f32]) -> Result<()> {
    if src.node_count() == 0 {
        return Err(Error::param("cannot search an empty graph"));
    }
    if q.len() != src.dim() {
        return Err(Error::param(format!(
            "query dim {} != index dim {}",
            q.len(),
            src.dim()
        )));
    }
    Ok(())
}

/// Static best-first beam search of width `beam`, returning the `k` closest
/// visited nodes.
pub fn beam_search<S: GraphSource + ?Sized>(
    src: &S,
    q: &[f32],
    beam: usize,
    k: usize,
) -> Result<SearchResult> {
    if k == 0 || k > beam {
        return Err(Error::param(format!("k = {k} must be in 1..={beam}")));
    }
    check_query(src, q)?;
    let mut state = BeamState::start(src, q, beam, VisitedSet::default());
    state.run(src, q, beam)?;
    Ok(state.result(k, beam, None))
}

/// LID of a query from its pilot neighborhood.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum QueryLid {
    Estimate(f64),
    /// The query coincides with an indexed vector; LID is undefined.
    ExactHit,
}

/// Feed the `pilot_k` smallest pilot distances (ascending) into the MLE.
pub fn estimate_query_lid(pilot_distances: &[f32], pilot_k: usize) -> Result<QueryLid> {
    if pilot_k < 2 || pilot_distances.len() < pilot_k {
        return Err(Error::param(format!(
            "need pilot_k >= 2 distances, have {} for pilot_k = {pilot_k}",
            pilot_distances.len()
        )));
    }
    let head = &pilot_distances[..pilot_k];
    if head.iter().any(|&d| d == 0.0) {
        return Ok(QueryLid::ExactHit);
    }
    let r: Vec<f64> = head.iter().map(|&d| d as f64).collect();
    estimate_lid_mle(&r).map(QueryLid::Estimate)
}

/// `clamp(round(beam_min · exp(λ · (lid - μ))), beam_min, beam_max)`.
pub fn adaptive_beam_width(lid: f64, mu: f64, params: &SearchParams) -> usize {
    let raw = params.beam_min as f64 * (params.lambda * (lid - mu)).exp();
    let lo = params.beam_min as f64;
    let hi = params.beam_max as f64;
    // NaN falls to beam_min
    if raw >= hi {
        params.beam_max
    } else if raw > lo {
        (raw.round() as usize).clamp(params.beam_min, params.beam_max)
    } else {
        params.beam_min
    }
}

/// Two-stage search whose beam width follows the query's estimated LID.
///
/// Without a profile it falls back to a static search of width `params.beam`.
pub fn adaptive_beam_search<S: GraphSource + ?Sized>(
    src: &S,
    q: &[f32],
    params: &SearchParams,
    profile: Option<&LidProfile>,
) -> Result<SearchResult> {
    let Some(profile) = profile else {
        log::warn!("no LID profile available; falling back to static beam {}", params.beam);
        return beam_search(src, q, params.beam, params.k);
    };
    let params = SearchParams {
        adaptive: true,
        ..*params
    };
    params.validate()?;
    check_query(src, q)?;

    let retain = params.beam_max.max(params.pilot_beam).max(params.k);
    let mut state = BeamState::start(src, q, retain, VisitedSet::default());
    state.run(src, q, params.pilot_beam)?;

    let head: Vec<f32> = state.pool_distances(params.pilot_k.min(params.pilot_beam)).collect();
    let lid = if head.len() >= 2 {
        estimate_query_lid(&head, head.len())
    } else {
        Err(Error::Degenerate("pilot found fewer than two neighbors".into()))
    };
    let (width, query_lid) = match lid {
        Ok(QueryLid::ExactHit) => return Ok(state.result(params.k, params.beam_min, None)),
        Ok(QueryLid::Estimate(l)) => (adaptive_beam_width(l, profile.mu(), &params), Some(l)),
        // equidistant or too-small pilot neighborhoods carry no LID signal
        Err(_) => (params.beam_min, None),
    };
    state.run(src, q, width)?;
    Ok(state.result(params.k, width, query_lid))
}

/// Dispatch on `params.adaptive`.
pub fn search<S: GraphSource + ?Sized>(
    src: &S,
    q: &[f32],
    params: &SearchParams,
    profile: Option<&LidProfile>,
) -> Result<SearchResult> {
    if params.adaptive {
        adaptive_beam_search(src, q, params, profile)
    } else {
        params.validate()?;
        beam_search(src, q, params.beam, params.k)
    }
}

/// `|ids[..k] ∩ truth[..k]| / k`.
pub fn recall_at_k(ids: &[u32], truth: &[u32], k: usize) -> Result<f64> {
    if k == 0 || k > ids.len() || k > truth.len() {
        return Err(Error::param(format!(
            "recall@{k} needs k in 1..=min({}, {})",
            ids.len(),
            truth.len()
        )));
    }
    let truth = &truth[..k];
    let hits = ids[..k].iter().filter(|id| truth.contains(id)).count();
    Ok(hits as f64 / k as f64)
}
