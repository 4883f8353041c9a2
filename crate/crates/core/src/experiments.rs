//! Benchmark drivers: recall/QPS sweeps, connectivity verification against the
//! geometric oracles, and the greedy routing-difficulty measurement.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dataset::{GroundTruth, VectorDataset};
use crate::error::{Error, Result};
use crate::geometry::{check_inclusion, emst_edges, exact_knn, rng_edges_with_ties, ORACLE_MAX_POINTS};
use crate::graph::{build, BuildParams, Graph};
use crate::lid::{calibrate, compute_alphas, LidProfile, MappedAlphas, MappingConfig};
use crate::search::{beam_search, search, GraphSource, MemoryIndex, SearchParams, SearchResult};
use crate::synthetic::{generate_synthetic, SyntheticKind};

/// Largest input `verify_connectivity` accepts.
pub const VERIFY_MAX_POINTS: usize = 500;

pub const SWEEP_CSV_HEADER: &str =
    "L,recall_at_10,qps,mean_latency_ms,p99_latency_ms,mean_distance_evals,mean_nodes_read";

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub beam: usize,
    pub recall_at_10: f64,
    pub qps: f64,
    pub mean_latency_ms: f64,
    pub p99_latency_ms: f64,
    pub mean_distance_evals: f64,
    pub mean_nodes_read: f64,
    pub mean_beam_used: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(SWEEP_CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&format!(
                "{},{:.4},{:.1},{:.4},{:.4},{:.1},{:.1}\n",
                r.beam,
                r.recall_at_10,
                r.qps,
                r.mean_latency_ms,
                r.p99_latency_ms,
                r.mean_distance_evals,
                r.mean_nodes_read
            ));
        }
        s
    }
}

/// Run every query once; results are in query order.
pub fn run_queries<S: GraphSource>(
    src: &S,
    queries: &VectorDataset,
    params: &SearchParams,
    profile: Option<&LidProfile>,
) -> Result<Vec<SearchResult>> {
    queries
        .rows()
        .map(|q| search(src, q, params, profile))
        .collect()
}

fn percentile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let rank = ((p * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

/// Sweep beam widths (`beam_min` when `params.adaptive`) over a query set.
///
/// Each width gets one untimed warm-up pass, then a timed pass on a pool of
/// `threads` workers.
pub fn run_sweep<S: GraphSource>(
    src: &S,
    queries: &VectorDataset,
    truth: &GroundTruth,
    beams: &[usize],
    params: &SearchParams,
    profile: Option<&LidProfile>,
    threads: usize,
) -> Result<SweepReport> {
    const K: usize = 10;
    if truth.query_count() != queries.len() {
        return Err(Error::param(format!(
            "ground truth has {} rows for {} queries",
            truth.query_count(),
            queries.len()
        )));
    }
    if truth.k() < K || queries.is_empty() {
        return Err(Error::param("sweep needs ground truth with k >= 10 and at least one query"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::param(format!("thread pool: {e}")))?;
    let mut rows = Vec::with_capacity(beams.len());
    for &beam in beams {
        let p = if params.adaptive {
            SearchParams {
                beam_min: beam,
                beam_max: params.beam_max.max(beam),
                beam,
                k: K,
                ..*params
            }
        } else {
            SearchParams { beam, k: K, ..*params }
        };
        p.validate()?;
        run_queries(src, queries, &p, profile)?;
        let started = Instant::now();
        let timed: Vec<(SearchResult, f64)> = pool.install(|| {
            (0..queries.len())
                .into_par_iter()
                .map(|i| {
                    let t = Instant::now();
                    let r = search(src, queries.row(i), &p, profile)?;
                    Ok((r, t.elapsed().as_secs_f64() * 1e3))
                })
                .collect::<Result<Vec<_>>>()
        })?;
        let wall = started.elapsed().as_secs_f64();
        let nq = queries.len() as f64;
        let mut recall = 0.0;
        for (i, (r, _)) in timed.iter().enumerate() {
            recall += crate::search::recall_at_k(&r.ids, truth.row(i), K)?;
        }
        let mut lat: Vec<f64> = timed.iter().map(|t| t.1).collect();
        lat.sort_by(f64::total_cmp);
        let mean = |f: &dyn Fn(&SearchResult) -> f64| timed.iter().map(|t| f(&t.0)).sum::<f64>() / nq;
        rows.push(SweepRow {
            beam,
            recall_at_10: recall / nq,
            qps: nq / wall.max(1e-9),
            mean_latency_ms: lat.iter().sum::<f64>() / nq,
            p99_latency_ms: percentile(&lat, 0.99),
            mean_distance_evals: mean(&|r| r.stats.distance_evals as f64),
            mean_nodes_read: mean(&|r| r.stats.nodes_read as f64),
            mean_beam_used: mean(&|r| r.stats.beam_used as f64),
        });
    }
    Ok(SweepReport { rows })
}

/// Calibrate and map α, falling back to the range midpoint on degenerate data.
pub fn calibrated_alphas(
    base: &VectorDataset,
    k_lid: usize,
    cfg: &MappingConfig,
) -> Result<(Option<LidProfile>, MappedAlphas)> {
    if cfg.is_fixed() {
        return Ok((None, MappedAlphas::uniform(base.len(), cfg.midpoint())?));
    }
    let k = k_lid.min(base.len().saturating_sub(1));
    if k < 2 {
        log::warn!(
            "{} points are too few to calibrate LID; using uniform alpha {}",
            base.len(),
            cfg.midpoint()
        );
        return Ok((None, MappedAlphas::uniform(base.len(), cfg.midpoint())?));
    }
    let profile = match calibrate(base, k) {
        Ok(c) => c.profile,
        Err(Error::Degenerate(msg)) => {
            log::warn!("LID calibration degenerate ({msg}); using uniform alpha {}", cfg.midpoint());
            return Ok((None, MappedAlphas::uniform(base.len(), cfg.midpoint())?));
        }
        Err(e) => return Err(e),
    };
    match compute_alphas(&profile, cfg) {
        Ok(a) => Ok((Some(profile), a)),
        Err(Error::Degenerate(msg)) => {
            log::warn!("LID spread degenerate ({msg}); using uniform alpha {}", cfg.midpoint());
            let a = MappedAlphas::uniform(base.len(), cfg.midpoint())?;
            Ok((Some(profile), a))
        }
        Err(e) => Err(e),
    }
}

/// Outcome of checking one graph against the EMST/RNG oracles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConnectivityReport {
    pub n: usize,
    pub capped: bool,
    pub emst_missing: Vec<(u32, u32)>,
    pub rng_missing: Vec<(u32, u32)>,
    /// RNG candidate pairs decided by an exact tie on the lune boundary.
    pub rng_ties: usize,
    pub unreachable: Vec<u32>,
}

impl ConnectivityReport {
    pub fn emst_holds(&self) -> bool {
        self.emst_missing.is_empty()
    }

    pub fn rng_holds(&self) -> bool {
        self.rng_missing.is_empty()
    }

    pub fn reachable(&self) -> bool {
        self.unreachable.is_empty()
    }

    /// Whether every asserted property holds. Capped graphs are reported
    /// only; missing edges there are the degree-cap caveat, not failures.
    pub fn passed(&self) -> bool {
        self.capped || (self.emst_holds() && self.rng_holds() && self.reachable())
    }
}

/// Compare `graph` with the EMST and RNG of `base` and run BFS from the entry.
pub fn check_connectivity(base: &VectorDataset, graph: &Graph, capped: bool) -> Result<ConnectivityReport> {
    if base.len() > VERIFY_MAX_POINTS.min(ORACLE_MAX_POINTS) {
        return Err(Error::param(format!(
            "verification is limited to n <= {VERIFY_MAX_POINTS}, got {}",
            base.len()
        )));
    }
    let emst = emst_edges(base)?;
    let (rng, ties) = rng_edges_with_ties(base)?;
    Ok(ConnectivityReport {
        n: base.len(),
        capped,
        emst_missing: check_inclusion(&emst, graph)?.missing,
        rng_missing: check_inclusion(&rng, graph)?.missing,
        rng_ties: ties,
        unreachable: graph.unreachable_from_entry(),
    })
}

/// Build with `params` and check the result. `n < 2` passes trivially.
pub fn verify_connectivity(
    base: &VectorDataset,
    params: &BuildParams,
    alphas: &MappedAlphas,
) -> Result<ConnectivityReport> {
    if base.len() > VERIFY_MAX_POINTS {
        return Err(Error::param(format!(
            "verification is limited to n <= {VERIFY_MAX_POINTS}, got {}",
            base.len()
        )));
    }
    if base.len() < 2 {
        return Ok(ConnectivityReport {
            n: base.len(),
            capped: !params.degree_uncapped,
            emst_missing: Vec::new(),
            rng_missing: Vec::new(),
            rng_ties: 0,
            unreachable: Vec::new(),
        });
    }
    let graph = build(base, params, alphas)?;
    check_connectivity(base, &graph, !params.degree_uncapped)
}

#[derive(Clone, Debug)]
pub struct RoutingConfig {
    pub dims: Vec<usize>,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    /// Ambient dimension; at least the largest entry of `dims`.
    pub ambient_dim: usize,
    pub build: BuildParams,
    pub k_lid: usize,
}

impl Default for RoutingConfig {
    fn default() -> Self {
        RoutingConfig {
            dims: vec![2, 4, 8, 16],
            n: 2000,
            trials: 200,
            seed: 0,
            ambient_dim: 16,
            build: BuildParams::default(),
            k_lid: 20,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoutingRow {
    pub intrinsic_dim: usize,
    pub success_rate: f64,
    pub mean_distance_evals: f64,
}

pub const ROUTING_CSV_HEADER: &str = "d,success_rate,mean_distance_evals";

pub fn routing_csv(rows: &[RoutingRow]) -> String {
    let mut s = String::from(ROUTING_CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&format!(
            "{},{:.4},{:.2}\n",
            r.intrinsic_dim, r.success_rate, r.mean_distance_evals
        ));
    }
    s
}

/// For each intrinsic dimension: build an index over a uniform ball, route
/// greedily (beam 1) from the entry point toward random targets, and record
/// how often the true nearest neighbor is reached and what it cost.
pub fn routing_difficulty_experiment(cfg: &RoutingConfig) -> Result<Vec<RoutingRow>> {
    if cfg.trials == 0 {
        return Err(Error::param("trials must be >= 1"));
    }
    let mut rows = Vec::with_capacity(cfg.dims.len());
    for (i, &d) in cfg.dims.iter().enumerate() {
        if d > cfg.ambient_dim {
            return Err(Error::param(format!(
                "intrinsic dim {d} exceeds ambient dim {}",
                cfg.ambient_dim
            )));
        }
        let seed = cfg.seed.wrapping_add(1000 * i as u64);
        let base = generate_synthetic(SyntheticKind::UniformBall, cfg.n, cfg.ambient_dim, d, seed, 0.0)?;
        let targets = generate_synthetic(
            SyntheticKind::UniformBall,
            cfg.trials,
            cfg.ambient_dim,
            d,
            seed ^ 0x7a12_9e37,
            0.0,
        )?;
        let (_, alphas) = calibrated_alphas(&base, cfg.k_lid, &MappingConfig::default())?;
        let graph = build(&base, &BuildParams { seed, ..cfg.build }, &alphas)?;
        let index = MemoryIndex::new(&graph, &base)?;
        let mut hits = 0usize;
        let mut evals = 0u64;
        for t in targets.rows() {
            let r = beam_search(&index, t, 1, 1)?;
            let nn = exact_knn(&base, t, 1)?[0].0;
            hits += (r.ids[0] == nn) as usize;
            evals += r.stats.distance_evals;
        }
        rows.push(RoutingRow {
            intrinsic_dim: d,
            success_rate: hits as f64 / cfg.trials as f64,
            mean_distance_evals: evals as f64 / cfg.trials as f64,
        });
    }
    Ok(rows)
}

/// Seeded Gaussian point cloud for connectivity checks.
pub fn gaussian_points(n: usize, dim: usize, seed: u64) -> Result<VectorDataset> {
    use rand_distr::{Distribution, StandardNormal};
    if dim == 0 {
        return Err(Error::param("dim must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..n * dim)
        .map(|_| {
            let x: f64 = StandardNormal.sample(&mut rng);
            x as f32
        })
        .collect();
    VectorDataset::new(dim, crate::ElementKind::F32, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::compute_ground_truth;

    #[test]
    fn sweep_rows_and_csv() {
        let data = generate_synthetic(SyntheticKind::UniformBall, 600, 8, 8, 1, 0.0).unwrap();
        let (base, queries, _) = crate::synthetic::split_queries(&data, 40, 2).unwrap();
        let truth = compute_ground_truth(&base, &queries, 10).unwrap();
        let params = BuildParams {
            max_degree: 16,
            beam_build: 32,
            ..BuildParams::default()
        };
        let g = build(&base, &params, &MappedAlphas::uniform(base.len(), 1.2).unwrap()).unwrap();
        let idx = MemoryIndex::new(&g, &base).unwrap();
        let report = run_sweep(&idx, &queries, &truth, &[10, 20, 40], &SearchParams::default(), None, 1).unwrap();
        assert_eq!(report.rows.len(), 3);
        for w in report.rows.windows(2) {
            assert!(w[0].recall_at_10 <= w[1].recall_at_10);
        }
        for r in &report.rows {
            assert!((0.0..=1.0).contains(&r.recall_at_10));
            assert!(r.mean_latency_ms > 0.0 && r.p99_latency_ms > 0.0);
            assert!(r.mean_distance_evals >= r.mean_nodes_read);
        }
        let csv = report.to_csv();
        assert!(csv.starts_with(SWEEP_CSV_HEADER));
        assert_eq!(csv.lines().count(), 4);

        let short = GroundTruth::new(5, truth.row(0)[..5].to_vec()).unwrap();
        assert!(run_sweep(&idx, &queries, &short, &[10], &SearchParams::default(), None, 1).is_err());
    }

    #[test]
    fn percentile_picks_nearest_rank() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(percentile(&v, 0.99), 99.0);
        assert_eq!(percentile(&v[..10], 0.99), 10.0);
    }

    #[test]
    fn verify_small_cases() {
        let one = gaussian_points(1, 3, 0).unwrap();
        let r = verify_connectivity(&one, &BuildParams::default(), &MappedAlphas::uniform(1, 1.0).unwrap()).unwrap();
        assert!(r.passed());

        let big = gaussian_points(501, 2, 0).unwrap();
        let a = MappedAlphas::uniform(501, 1.0).unwrap();
        assert!(verify_connectivity(&big, &BuildParams::default(), &a).is_err());

        let pts = gaussian_points(120, 2, 4).unwrap();
        let params = BuildParams {
            degree_uncapped: true,
            max_degree: 8,
            beam_build: 120,
            ..BuildParams::default()
        };
        let (_, alphas) = calibrated_alphas(&pts, 10, &MappingConfig::default()).unwrap();
        let r = verify_connectivity(&pts, &params, &alphas).unwrap();
        assert!(r.passed(), "{r:?}");

        let capped = BuildParams {
            degree_uncapped: false,
            max_degree: 2,
            ..params
        };
        let r = verify_connectivity(&pts, &capped, &alphas).unwrap();
        assert!(r.capped && r.passed());
    }

    #[test]
    fn routing_rows_per_dim() {
        let cfg = RoutingConfig {
            dims: vec![1, 4],
            n: 300,
            trials: 30,
            ambient_dim: 4,
            ..RoutingConfig::default()
        };
        let rows = routing_difficulty_experiment(&cfg).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| (0.0..=1.0).contains(&r.success_rate)));
        let bad = RoutingConfig { dims: vec![5], ..cfg };
        assert!(routing_difficulty_experiment(&bad).is_err());
        assert!(routing_csv(&rows).starts_with(ROUTING_CSV_HEADER));
    }

    #[test]
    fn routing_on_a_line_is_reliable() {
        let cfg = RoutingConfig {
            dims: vec![1],
            n: 500,
            ambient_dim: 1,
            ..RoutingConfig::default()
        };
        let rows = routing_difficulty_experiment(&cfg).unwrap();
        assert!(rows[0].success_rate >= 0.95, "{rows:?}");
    }
}
