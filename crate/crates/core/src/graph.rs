//! Bounded-degree proximity graph and its refinement build.
//!
//! The build starts from a seeded random graph and runs `max_iter` refinement
//! passes. Each pass visits every node in a seeded order, searches the current
//! graph for it, prunes the visited set with the node's own α, and inserts the
//! reverse edges. The first of two or more passes uses α = 1.0.

use std::collections::VecDeque;
use std::sync::RwLock;

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dataset::VectorDataset;
use crate::error::{Error, Result};
use crate::geometry::{cmp_hit, l2};
use crate::lid::MappedAlphas;
use crate::search::{BeamState, GraphSource, VisitedSet};

/// Above this size the entry point is the medoid of a sample.
pub const EXACT_MEDOID_LIMIT: usize = 100_000;

pub const MEDOID_SAMPLE: usize = 10_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BuildMode {
    /// Deterministic for a given seed.
    #[default]
    Sequential,
    /// Node refinements run concurrently and may read stale lists.
    Parallel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BuildParams {
    pub max_degree: usize,
    pub beam_build: usize,
    pub max_iter: usize,
    pub seed: u64,
    pub degree_uncapped: bool,
    pub mode: BuildMode,
}

impl Default for BuildParams {
    fn default() -> Self {
        BuildParams {
            max_degree: 64,
            beam_build: 100,
            max_iter: 2,
            seed: 0,
            degree_uncapped: false,
            mode: BuildMode::Sequential,
        }
    }
}

impl BuildParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_degree == 0 || self.beam_build == 0 || self.max_iter == 0 {
            return Err(Error::param(
                "max_degree, beam_build and max_iter must all be >= 1",
            ));
        }
        Ok(())
    }

    fn cap(&self) -> usize {
        if self.degree_uncapped {
            usize::MAX
        } else {
            self.max_degree
        }
    }
}

/// Directed adjacency lists with an entry point.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    lists: Vec<Vec<u32>>,
    entry_point: u32,
    max_degree: usize,
    alphas: Option<MappedAlphas>,
}

impl Graph {
    /// Validate and wrap adjacency lists. `max_degree` bounds every list.
    pub fn from_lists(lists: Vec<Vec<u32>>, entry_point: u32, max_degree: usize) -> Result<Self> {
        let n = lists.len();
        if n > 0 && entry_point as usize >= n {
            return Err(Error::param(format!(
                "entry point {entry_point} out of range for {n} nodes"
            )));
        }
        for (u, list) in lists.iter().enumerate() {
            if list.len() > max_degree {
                return Err(Error::param(format!(
                    "node {u} has degree {} > {max_degree}",
                    list.len()
                )));
            }
            for (i, &v) in list.iter().enumerate() {
                if v as usize >= n {
                    return Err(Error::param(format!("node {u} links to {v} >= {n}")));
                }
                if v as usize == u {
                    return Err(Error::param(format!("node {u} has a self-edge")));
                }
                if list[..i].contains(&v) {
                    return Err(Error::param(format!("node {u} lists {v} twice")));
                }
            }
        }
        Ok(Graph {
            lists,
            entry_point,
            max_degree,
            alphas: None,
        })
    }

    pub fn with_alphas(mut self, alphas: MappedAlphas) -> Result<Self> {
        if alphas.len() != self.len() {
            return Err(Error::param(format!(
                "{} alphas for {} nodes",
                alphas.len(),
                self.len()
            )));
        }
        self.alphas = Some(alphas);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }

    pub fn entry_point(&self) -> u32 {
        self.entry_point
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn alphas(&self) -> Option<&MappedAlphas> {
        self.alphas.as_ref()
    }

    pub fn neighbors(&self, u: usize) -> &[u32] {
        &self.lists[u]
    }

    pub fn lists(&self) -> &[Vec<u32>] {
        &self.lists
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.lists
            .get(u as usize)
            .is_some_and(|l| l.contains(&v))
    }

    pub fn edge_count(&self) -> usize {
        self.lists.iter().map(Vec::len).sum()
    }

    pub fn mean_degree(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.edge_count() as f64 / self.len() as f64
        }
    }

    /// Nodes not reachable from the entry point along out-edges.
    pub fn unreachable_from_entry(&self) -> Vec<u32> {
        let n = self.len();
        if n == 0 {
            return Vec::new();
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([self.entry_point]);
        seen[self.entry_point as usize] = true;
        while let Some(u) = queue.pop_front() {
            for &v in &self.lists[u as usize] {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    queue.push_back(v);
                }
            }
        }
        (0..n as u32).filter(|&u| !seen[u as usize]).collect()
    }
}

/// The vector minimizing total distance to all others, ties to the smaller id.
pub fn exact_medoid(base: &VectorDataset, rows: &[usize]) -> u32 {
    let m = rows.len();
    let mut totals = vec![0f64; m];
    for i in 0..m {
        let a = base.row(rows[i]);
        for j in i + 1..m {
            let d = l2(a, base.row(rows[j])) as f64;
            totals[i] += d;
            totals[j] += d;
        }
    }
    let best = (0..m)
        .min_by(|&a, &b| totals[a].total_cmp(&totals[b]).then(a.cmp(&b)))
        .unwrap_or(0);
    rows.get(best).copied().unwrap_or(0) as u32
}

/// Medoid of the whole set, or of a seeded sample above [`EXACT_MEDOID_LIMIT`].
pub fn entry_medoid(base: &VectorDataset, seed: u64) -> u32 {
    let n = base.len();
    if n <= EXACT_MEDOID_LIMIT {
        let rows: Vec<usize> = (0..n).collect();
        exact_medoid(base, &rows)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6d65_6469);
        let mut rows = index::sample(&mut rng, n, MEDOID_SAMPLE).into_vec();
        rows.sort_unstable();
        exact_medoid(base, &rows)
    }
}

/// Seeded random graph: `min(R, n-1)` distinct non-self neighbors per node,
/// entry point at the medoid.
pub fn init_random_graph(base: &VectorDataset, params: &BuildParams) -> Result<Graph> {
    params.validate()?;
    let n = base.len();
    if n < 2 {
        return Err(Error::param(format!("need at least 2 points to build, got {n}")));
    }
    let degree = params.max_degree.min(n - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let lists = (0..n)
        .map(|u| {
            index::sample(&mut rng, n - 1, degree)
                .into_iter()
                .map(|x| if x >= u { x as u32 + 1 } else { x as u32 })
                .collect()
        })
        .collect();
    Ok(Graph {
        lists,
        entry_point: entry_medoid(base, params.seed),
        max_degree: degree.max(params.max_degree),
        alphas: None,
    })
}

/// Node visiting order for refinement pass `pass`.
pub fn pass_order(n: usize, seed: u64, pass: usize) -> Vec<u32> {
    let mut order: Vec<u32> = (0..n as u32).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x9e37_79b9_7f4a_7c15u64.wrapping_mul(pass as u64 + 1)));
    order.shuffle(&mut rng);
    order
}

fn search_visited<S: GraphSource>(
    src: &S,
    q: &[f32],
    u: u32,
    beam: usize,
    visited: VisitedSet,
) -> (Vec<(u32, f32)>, VisitedSet) {
    let mut state = BeamState::start(src, q, beam, visited);
    // in-memory sources never fail
    state
        .run(src, q, beam)
        .expect("in-memory graph read cannot fail");
    let (mut expanded, visited) = state.into_parts();
    expanded.retain(|&(id, _)| id != u);
    (expanded, visited)
}

/// Run the build search for node `u` and return every expanded node except
/// `u`, with its distance to `u`.
pub fn greedy_search_build(
    graph: &Graph,
    base: &VectorDataset,
    u: u32,
    beam: usize,
) -> Result<Vec<(u32, f32)>> {
    if beam == 0 {
        return Err(Error::param("beam must be >= 1"));
    }
    if graph.len() != base.len() || u as usize >= graph.len() {
        return Err(Error::param("graph, dataset and node id are inconsistent"));
    }
    let src = crate::search::MemoryIndex::new(graph, base)?;
    Ok(search_visited(&src, base.row(u as usize), u, beam, VisitedSet::default()).0)
}

fn prune_sorted(
    u: u32,
    sorted: &[(u32, f32)],
    alpha: f64,
    cap: usize,
    base: &VectorDataset,
) -> Vec<u32> {
    let mut selected: Vec<u32> = Vec::new();
    for &(v, d_uv) in sorted {
        if selected.len() >= cap {
            break;
        }
        if v == u {
            continue;
        }
        let vrow = base.row(v as usize);
        let occluded = selected
            .iter()
            .any(|&w| alpha * l2(base.row(w as usize), vrow) as f64 <= d_uv as f64);
        if !occluded {
            selected.push(v);
        }
    }
    selected
}

fn sort_candidates(candidates: &mut Vec<(u32, f32)>) {
    candidates.sort_by(cmp_hit);
    candidates.dedup_by_key(|c| c.0);
}

/// Occlusion pruning: scan candidates by ascending distance (ties by id) and
/// drop `v` when an already selected `w` has `α·d(w, v) <= d(u, v)`.
///
/// `max_degree = None` disables the cap.
pub fn adaptive_prune(
    u: u32,
    candidates: &[(u32, f32)],
    alpha: f64,
    max_degree: Option<usize>,
    base: &VectorDataset,
) -> Result<Vec<u32>> {
    if !(alpha >= 1.0) {
        return Err(Error::param(format!("alpha {alpha} must be >= 1.0")));
    }
    if let Some(&(bad, _)) = candidates.iter().find(|c| c.0 as usize >= base.len()) {
        return Err(Error::param(format!("candidate {bad} out of range")));
    }
    let mut sorted = candidates.to_vec();
    sort_candidates(&mut sorted);
    Ok(prune_sorted(u, &sorted, alpha, max_degree.unwrap_or(usize::MAX), base))
}

/// Per-node locked adjacency shared across refinement workers.
struct Adjacency {
    lists: Vec<RwLock<Vec<u32>>>,
    entry_point: u32,
    dim: usize,
}

struct LiveView<'a> {
    adj: &'a Adjacency,
    base: &'a VectorDataset,
}

impl GraphSource for LiveView<'_> {
    fn node_count(&self) -> usize {
        self.adj.lists.len()
    }

    fn dim(&self) -> usize {
        self.adj.dim
    }

    fn entry_point(&self) -> u32 {
        self.adj.entry_point
    }

    #[inline]
    fn distance_to(&self, q: &[f32], u: u32) -> f32 {
        l2(q, self.base.row(u as usize))
    }

    fn read_neighbors(&self, u: u32, out: &mut Vec<u32>) -> Result<()> {
        let list = self.adj.lists[u as usize].read().unwrap_or_else(|e| e.into_inner());
        out.clear();
        out.extend_from_slice(&list);
        Ok(())
    }
}

struct Pass<'a> {
    view: LiveView<'a>,
    beam: usize,
    cap: usize,
    /// `None` prunes every node at α = 1.0.
    alphas: Option<&'a [f64]>,
}

impl Pass<'_> {
    fn alpha(&self, u: u32) -> f64 {
        self.alphas.map_or(1.0, |a| a[u as usize])
    }

    fn refine(&self, u: u32, visited: VisitedSet) -> VisitedSet {
        let base = self.view.base;
        let urow = base.row(u as usize);
        let (mut pool, visited) = search_visited(&self.view, urow, u, self.beam, visited);
        let current = self.view.adj.lists[u as usize]
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .clone();
        pool.extend(current.iter().map(|&v| (v, l2(urow, base.row(v as usize)))));
        sort_candidates(&mut pool);
        let selected = prune_sorted(u, &pool, self.alpha(u), self.cap, base);
        *self.view.adj.lists[u as usize]
            .write()
            .unwrap_or_else(|e| e.into_inner()) = selected.clone();

        for &v in &selected {
            let mut list = self.view.adj.lists[v as usize]
                .write()
                .unwrap_or_else(|e| e.into_inner());
            if list.contains(&u) {
                continue;
            }
            if list.len() < self.cap {
                list.push(u);
            } else {
                let vrow = base.row(v as usize);
                let mut vpool: Vec<(u32, f32)> = list
                    .iter()
                    .chain(std::iter::once(&u))
                    .map(|&w| (w, l2(vrow, base.row(w as usize))))
                    .collect();
                sort_candidates(&mut vpool);
                *list = prune_sorted(v, &vpool, self.alpha(v), self.cap, base);
            }
        }
        visited
    }
}

/// Refine a random graph into a navigable one using per-node `alphas`.
pub fn build(base: &VectorDataset, params: &BuildParams, alphas: &MappedAlphas) -> Result<Graph> {
    params.validate()?;
    if alphas.len() != base.len() {
        return Err(Error::param(format!(
            "{} alphas for {} points",
            alphas.len(),
            base.len()
        )));
    }
    let init = init_random_graph(base, params)?;
    let n = base.len();
    let adj = Adjacency {
        entry_point: init.entry_point,
        dim: base.dim(),
        lists: init.lists.into_iter().map(RwLock::new).collect(),
    };
    for iter in 0..params.max_iter {
        let first_of_several = params.max_iter >= 2 && iter == 0;
        let pass = Pass {
            view: LiveView { adj: &adj, base },
            beam: params.beam_build,
            cap: params.cap(),
            alphas: (!first_of_several).then(|| alphas.as_slice()),
        };
        let order = pass_order(n, params.seed, iter);
        match params.mode {
            BuildMode::Sequential => {
                let mut visited = VisitedSet::default();
                for &u in &order {
                    visited = pass.refine(u, visited);
                }
            }
            BuildMode::Parallel => {
                order.par_iter().for_each_init(VisitedSet::default, |visited, &u| {
                    *visited = pass.refine(u, std::mem::take(visited));
                });
            }
        }
        log::debug!("refinement pass {} of {} done", iter + 1, params.max_iter);
    }
    let lists: Vec<Vec<u32>> = adj
        .lists
        .into_iter()
        .map(|l| l.into_inner().unwrap_or_else(|e| e.into_inner()))
        .collect();
    let max_degree = if params.degree_uncapped {
        lists.iter().map(Vec::len).max().unwrap_or(1).max(1)
    } else {
        params.max_degree
    };
    Graph {
        lists,
        entry_point: adj.entry_point,
        max_degree,
        alphas: None,
    }
    .with_alphas(alphas.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::ElementKind;
    use crate::geometry::{check_inclusion, emst_edges, rng_edges};
    use crate::synthetic::{generate_synthetic, SyntheticKind};
    use proptest::prelude::*;

    fn points(rows: &[&[f32]]) -> VectorDataset {
        VectorDataset::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn random(n: usize, d: usize, seed: u64) -> VectorDataset {
        generate_synthetic(SyntheticKind::UniformBall, n, d, d, seed, 0.0).unwrap()
    }

    #[test]
    fn from_lists_rejects_bad_lists() {
        assert!(Graph::from_lists(vec![vec![0], vec![]], 0, 2).is_err());
        assert!(Graph::from_lists(vec![vec![1, 1], vec![]], 0, 2).is_err());
        assert!(Graph::from_lists(vec![vec![2], vec![]], 0, 2).is_err());
        assert!(Graph::from_lists(vec![vec![1], vec![0]], 0, 0).is_err());
        assert!(Graph::from_lists(vec![vec![1], vec![0]], 5, 1).is_err());
        assert!(Graph::from_lists(vec![vec![1], vec![0]], 1, 1).is_ok());
    }

    #[test]
    fn init_two_points() {
        let base = random(2, 3, 1);
        let params = BuildParams {
            max_degree: 4,
            ..BuildParams::default()
        };
        let g = init_random_graph(&base, &params).unwrap();
        assert_eq!(g.neighbors(0), &[1]);
        assert_eq!(g.neighbors(1), &[0]);
    }

    #[test]
    fn init_is_deterministic_and_full() {
        let base = random(100, 4, 2);
        let params = BuildParams {
            max_degree: 16,
            seed: 9,
            ..BuildParams::default()
        };
        let a = init_random_graph(&base, &params).unwrap();
        assert_eq!(a, init_random_graph(&base, &params).unwrap());
        for u in 0..100 {
            let mut l = a.neighbors(u).to_vec();
            assert_eq!(l.len(), 16);
            assert!(!l.contains(&(u as u32)));
            l.sort();
            l.dedup();
            assert_eq!(l.len(), 16);
        }
        let one = random(1, 4, 2);
        assert!(init_random_graph(&one, &params).is_err());
    }

    #[test]
    fn medoid_is_central() {
        let base = points(&[&[0.0], &[1.0], &[2.0], &[10.0]]);
        assert_eq!(entry_medoid(&base, 0), 1);
    }

    #[test]
    fn build_search_on_path_graph() {
        let base = points(&[&[0.0], &[1.0], &[2.0]]);
        let g = Graph::from_lists(vec![vec![1], vec![2], vec![]], 0, 1).unwrap();
        let visited = greedy_search_build(&g, &base, 2, 3).unwrap();
        let ids: Vec<u32> = visited.iter().map(|v| v.0).collect();
        assert!(ids.contains(&0) && ids.contains(&1));
        assert!(!ids.contains(&2));

        let from_entry = greedy_search_build(&g, &base, 0, 3).unwrap();
        assert!(!from_entry.is_empty());
        assert!(from_entry.iter().all(|v| v.0 != 0));
    }

    #[test]
    fn build_search_grows_with_beam() {
        let base = random(10, 2, 3);
        let lists = (0..10u32).map(|u| vec![(u + 1) % 10, (u + 3) % 10]).collect();
        let g = Graph::from_lists(lists, 0, 2).unwrap();
        for u in 0..10u32 {
            let sizes: Vec<usize> = (1..=5)
                .map(|l| greedy_search_build(&g, &base, u, l).unwrap().len())
                .collect();
            assert!(sizes.windows(2).all(|w| w[0] <= w[1]), "{sizes:?}");
        }
    }

    #[test]
    fn prune_examples() {
        let base = points(&[&[0.0, 0.0], &[1.0, 0.0], &[2.0, 0.0], &[0.8, 0.9]]);
        let c = [(2, 2.0f32), (1, 1.0)];
        assert_eq!(adaptive_prune(0, &c, 1.0, Some(4), &base).unwrap(), vec![1]);

        let d2 = l2(base.row(0), base.row(3));
        assert!((d2 - 1.2042).abs() < 1e-4);
        let c = [(1, 1.0f32), (3, d2)];
        assert_eq!(adaptive_prune(0, &c, 1.0, Some(4), &base).unwrap(), vec![1]);
        assert_eq!(adaptive_prune(0, &c, 1.5, Some(4), &base).unwrap(), vec![1, 3]);

        assert!(adaptive_prune(0, &[], 1.0, Some(4), &base).unwrap().is_empty());
        assert!(adaptive_prune(0, &c, 0.99, Some(4), &base).is_err());
        assert_eq!(adaptive_prune(0, &c, 1.5, Some(1), &base).unwrap(), vec![1]);
    }

    fn all_candidates(base: &VectorDataset, u: u32) -> Vec<(u32, f32)> {
        (0..base.len() as u32)
            .filter(|&v| v != u)
            .map(|v| (v, l2(base.row(u as usize), base.row(v as usize))))
            .collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn larger_alpha_weakens_each_witness(seed in 0u64..10_000, alpha in 1.0f64..3.0) {
            let base = random(40, 3, seed);
            for u in 0..5u32 {
                let c = all_candidates(&base, u);
                // selection at α = 1.0 as a fixed witness set
                let witnesses = adaptive_prune(u, &c, 1.0, None, &base).unwrap();
                for &(v, d_uv) in &c {
                    let survives = |a: f64| {
                        witnesses
                            .iter()
                            .filter(|&&w| w != v)
                            .all(|&w| a * (l2(base.row(w as usize), base.row(v as usize)) as f64) > d_uv as f64)
                    };
                    prop_assert!(!survives(1.0) || survives(alpha));
                }
            }
        }

        #[test]
        fn uncapped_prune_keeps_rng_edges(seed in 0u64..10_000, n in 5usize..60, alpha in 1.0f64..2.5) {
            let base = random(n, 2, seed);
            let rng = rng_edges(&base).unwrap();
            for u in 0..n as u32 {
                let kept = adaptive_prune(u, &all_candidates(&base, u), alpha, None, &base).unwrap();
                for (a, b) in rng.iter() {
                    if a == u {
                        prop_assert!(kept.contains(&b));
                    } else if b == u {
                        prop_assert!(kept.contains(&a));
                    }
                }
            }
        }
    }

    #[test]
    fn greedy_selection_is_not_monotone_in_alpha() {
        // extra nodes kept at the larger α can occlude one kept at α = 1.0
        let base = points(&[
            &[0.9524674, 0.5777948],
            &[0.4591317, 0.2692795],
            &[0.5479963, 0.9571163],
            &[0.0057091, 0.7836552],
            &[0.8204859, 0.8861796],
            &[0.7405034, 0.8091399],
            &[0.5186783, 0.5613579],
            &[0.4260907, 0.0561233],
        ]);
        let c = all_candidates(&base, 0);
        let tight = adaptive_prune(0, &c, 1.0, None, &base).unwrap();
        let loose = adaptive_prune(0, &c, 1.87, None, &base).unwrap();
        assert_eq!(tight, vec![5, 1]);
        assert_eq!(loose, vec![5, 6, 7, 3]);
    }

    #[test]
    fn build_is_deterministic_and_bounded() {
        let base = random(300, 8, 4);
        let params = BuildParams {
            max_degree: 12,
            beam_build: 24,
            seed: 5,
            ..BuildParams::default()
        };
        let alphas = MappedAlphas::uniform(300, 1.2).unwrap();
        let a = build(&base, &params, &alphas).unwrap();
        let b = build(&base, &params, &alphas).unwrap();
        assert_eq!(a, b);
        assert!(a.lists().iter().all(|l| l.len() <= 12));
        assert!(Graph::from_lists(a.lists().to_vec(), a.entry_point(), 12).is_ok());
        assert!(a.unreachable_from_entry().is_empty());
    }

    #[test]
    fn parallel_build_keeps_invariants() {
        let base = random(400, 6, 6);
        let params = BuildParams {
            max_degree: 10,
            beam_build: 20,
            mode: BuildMode::Parallel,
            ..BuildParams::default()
        };
        let alphas = MappedAlphas::uniform(400, 1.3).unwrap();
        let g = build(&base, &params, &alphas).unwrap();
        assert!(Graph::from_lists(g.lists().to_vec(), g.entry_point(), 10).is_ok());
    }

    #[test]
    fn uncapped_build_contains_emst_and_reaches_all() {
        for seed in 0..3 {
            let base = random(200, 2, 100 + seed);
            let params = BuildParams {
                max_degree: 8,
                beam_build: 32,
                seed,
                degree_uncapped: true,
                ..BuildParams::default()
            };
            let alphas = MappedAlphas::uniform(200, 1.2).unwrap();
            let g = build(&base, &params, &alphas).unwrap();
            let emst = emst_edges(&base).unwrap();
            let report = check_inclusion(&emst, &g).unwrap();
            assert!(report.holds, "missing {:?}", report.missing);
            assert!(g.unreachable_from_entry().is_empty());
        }
    }

    #[test]
    fn build_rejects_mismatched_alphas() {
        let base = random(10, 2, 1);
        let alphas = MappedAlphas::uniform(9, 1.0).unwrap();
        assert!(build(&base, &BuildParams::default(), &alphas).is_err());
        let tiny = VectorDataset::new(2, ElementKind::F32, vec![0.0, 0.0]).unwrap();
        let one = MappedAlphas::uniform(1, 1.0).unwrap();
        assert!(build(&tiny, &BuildParams::default(), &one).is_err());
    }
}
