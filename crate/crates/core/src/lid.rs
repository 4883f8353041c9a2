//! Local Intrinsic Dimensionality calibration.
//!
//! Each node's LID is estimated by maximum likelihood from the distances to its
//! `k` nearest neighbors, `LID = -(1/k · Σ ln(r_i / r_k))^-1`. The population
//! mean and standard deviation then feed a logistic mapping from LID to the
//! node's pruning parameter:
//!
//! ```text
//! z(u)     = (LID(u) - μ) / σ
//! α(u)     = α_min + (α_max - α_min) / (1 + e^z(u))
//! ```
//!
//! so nodes in high-LID regions get an α close to `α_min` and low-LID regions
//! get an α close to `α_max`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dataset::VectorDataset;
use crate::error::{Error, Result};
use crate::geometry::l2;

/// Above this many points calibration finds neighbors within a seeded sample.
pub const EXACT_CALIBRATION_MAX: usize = 100_000;

/// Mapped α values are kept at least this far inside `(α_min, α_max)`.
pub const ALPHA_CLAMP_EPS: f64 = 1e-12;

const SAMPLE_SEED: u64 = 0x4c49_4453_414d_504c;
const PROFILE_MAGIC: &[u8; 4] = b"MCGL";
const PROFILE_VERSION: u32 = 1;
const PROFILE_HEADER_LEN: usize = 4 + 4 + 8 + 4 + 8 + 8;

/// MLE (Hill-type) LID estimate from ascending neighbor distances.
///
/// The `1/k` normalization includes the `i = k` term, which contributes zero.
pub fn estimate_lid_mle(sorted_distances: &[f64]) -> Result<f64> {
    let k = sorted_distances.len();
    if k < 2 {
        return Err(Error::param(format!("LID estimation needs k >= 2, got {k}")));
    }
    if sorted_distances.iter().any(|&r| !(r > 0.0) || !r.is_finite()) {
        return Err(Error::Degenerate("duplicate or coincident point".into()));
    }
    if sorted_distances.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::param("neighbor distances must be sorted ascending"));
    }
    let rk = sorted_distances[k - 1];
    let sum: f64 = sorted_distances.iter().map(|&r| (r / rk).ln()).sum();
    if sum == 0.0 {
        return Err(Error::Degenerate("zero-variance neighborhood".into()));
    }
    Ok(-(k as f64) / sum)
}

/// Per-node LID estimates with their population statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct LidProfile {
    lids: Vec<f32>,
    mu: f64,
    sigma: f64,
    k_lid: usize,
}

fn mean_and_std(values: &[f32]) -> (f64, f64) {
    let n = values.len() as f64;
    let mu = values.iter().map(|&v| v as f64).sum::<f64>() / n;
    let var = values
        .iter()
        .map(|&v| {
            let d = v as f64 - mu;
            d * d
        })
        .sum::<f64>()
        / n;
    (mu, var.sqrt())
}

impl LidProfile {
    /// Build a profile from per-node estimates; μ and σ (population) are derived.
    pub fn from_lids(lids: Vec<f32>, k_lid: usize) -> Result<Self> {
        if lids.is_empty() {
            return Err(Error::param("LID profile needs at least one node"));
        }
        if let Some(i) = lids.iter().position(|&l| !(l > 0.0) || !l.is_finite()) {
            return Err(Error::param(format!(
                "LID of node {i} is {} (must be finite and > 0)",
                lids[i]
            )));
        }
        let (mu, sigma) = mean_and_std(&lids);
        Ok(LidProfile {
            lids,
            mu,
            sigma,
            k_lid,
        })
    }

    pub fn lids(&self) -> &[f32] {
        &self.lids
    }

    pub fn len(&self) -> usize {
        self.lids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lids.is_empty()
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn k_lid(&self) -> usize {
        self.k_lid
    }

    /// Sidecar bytes: `"MCGL"`, version, N, k_lid, μ, σ, then N `f32` LIDs,
    /// all little-endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(PROFILE_HEADER_LEN + 4 * self.lids.len());
        out.extend_from_slice(PROFILE_MAGIC);
        out.extend_from_slice(&PROFILE_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.lids.len() as u64).to_le_bytes());
        out.extend_from_slice(&(self.k_lid as u32).to_le_bytes());
        out.extend_from_slice(&self.mu.to_le_bytes());
        out.extend_from_slice(&self.sigma.to_le_bytes());
        for l in &self.lids {
            out.extend_from_slice(&l.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < PROFILE_HEADER_LEN {
            return Err(Error::format(format!(
                "profile truncated at byte offset {} (header needs {PROFILE_HEADER_LEN})",
                bytes.len()
            )));
        }
        if &bytes[0..4] != PROFILE_MAGIC {
            return Err(Error::format("bad profile magic"));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let version = u32_at(4);
        if version != PROFILE_VERSION {
            return Err(Error::format(format!("unsupported profile version {version}")));
        }
        let n = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
        let k_lid = u32_at(16) as usize;
        let mu = f64::from_le_bytes(bytes[20..28].try_into().unwrap());
        let sigma = f64::from_le_bytes(bytes[28..36].try_into().unwrap());
        let expected = PROFILE_HEADER_LEN + 4 * n;
        if bytes.len() != expected {
            return Err(Error::format(format!(
                "profile for {n} nodes needs {expected} bytes, found {}",
                bytes.len()
            )));
        }
        let lids: Vec<f32> = bytes[PROFILE_HEADER_LEN..]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let profile = LidProfile::from_lids(lids, k_lid).map_err(|e| Error::format(e.to_string()))?;
        if profile.mu.to_bits() != mu.to_bits() || profile.sigma.to_bits() != sigma.to_bits() {
            return Err(Error::format(
                "stored mean/std do not match the stored LID values",
            ));
        }
        Ok(profile)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }

    /// `node,lid` rows for inspection.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("node,lid\n");
        for (i, l) in self.lids.iter().enumerate() {
            let _ = writeln!(s, "{i},{l}");
        }
        s
    }
}

/// Nodes whose LID could not be estimated, with the reason.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CalibrationReport {
    pub failed: Vec<(u32, String)>,
    /// Candidate pool size per node (N - 1 when exact).
    pub candidates: usize,
}

#[derive(Clone, Debug)]
pub struct Calibration {
    pub profile: LidProfile,
    pub report: CalibrationReport,
}

/// Distances from `u` to its `k` nearest non-coincident candidates, ascending
/// (ties by smaller id), or `None` if fewer than `k` exist.
fn neighbor_distances(base: &VectorDataset, u: usize, pool: &[u32], k: usize) -> Option<Vec<f64>> {
    let q = base.row(u);
    let mut hits: Vec<(u32, f32)> = pool
        .iter()
        .filter(|&&c| c as usize != u)
        .map(|&c| (c, l2(q, base.row(c as usize))))
        .filter(|&(_, d)| d > 0.0)
        .collect();
    if hits.len() < k {
        return None;
    }
    let cmp = |a: &(u32, f32), b: &(u32, f32)| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0));
    if k < hits.len() {
        hits.select_nth_unstable_by(k - 1, cmp);
        hits.truncate(k);
    }
    hits.sort_unstable_by(cmp);
    Some(hits.into_iter().map(|(_, d)| d as f64).collect())
}

/// Estimate every node's LID from its `k_lid` nearest neighbors.
///
/// Coincident neighbors are skipped. Nodes that still cannot be estimated are
/// listed in the report and assigned the mean of the successful estimates.
/// Above [`EXACT_CALIBRATION_MAX`] points, neighbors are searched within a
/// fixed-seed uniform sample of `10 · k_lid · √N` candidates.
pub fn calibrate(base: &VectorDataset, k_lid: usize) -> Result<Calibration> {
    let n = base.len();
    if k_lid < 2 {
        return Err(Error::param(format!("k_lid must be >= 2, got {k_lid}")));
    }
    if k_lid + 1 > n {
        return Err(Error::param(format!(
            "k_lid = {k_lid} needs at least {} points, dataset has {n}",
            k_lid + 1
        )));
    }
    let pool: Vec<u32> = if n <= EXACT_CALIBRATION_MAX {
        (0..n as u32).collect()
    } else {
        let m = ((10 * k_lid) as f64 * (n as f64).sqrt()).ceil() as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
        let mut s: Vec<u32> = index::sample(&mut rng, n, m.min(n))
            .into_iter()
            .map(|i| i as u32)
            .collect();
        s.sort_unstable();
        s
    };

    let estimates: Vec<std::result::Result<f64, String>> = (0..n)
        .into_par_iter()
        .map(|u| match neighbor_distances(base, u, &pool, k_lid) {
            None => Err(format!("fewer than {k_lid} non-coincident neighbors")),
            Some(r) => estimate_lid_mle(&r).map_err(|e| e.to_string()),
        })
        .collect();

    let ok: Vec<f64> = estimates.iter().filter_map(|e| e.as_ref().ok().copied()).collect();
    let failed: Vec<(u32, String)> = estimates
        .iter()
        .enumerate()
        .filter_map(|(i, e)| e.as_ref().err().map(|m| (i as u32, m.clone())))
        .collect();
    if ok.is_empty() {
        return Err(Error::Degenerate(format!(
            "no node could be calibrated ({} failures, first: {})",
            failed.len(),
            failed[0].1
        )));
    }
    let fill = (ok.iter().sum::<f64>() / ok.len() as f64) as f32;
    let lids: Vec<f32> = estimates
        .iter()
        .map(|e| e.as_ref().map(|&l| l as f32).unwrap_or(fill))
        .collect();
    Ok(Calibration {
        profile: LidProfile::from_lids(lids, k_lid)?,
        report: CalibrationReport {
            failed,
            candidates: pool.len() - usize::from(n <= EXACT_CALIBRATION_MAX),
        },
    })
}

/// Standardized LID, `(lid - μ) / σ`.
pub fn z_score(lid: f64, profile: &LidProfile) -> Result<f64> {
    if !(profile.sigma > 0.0) {
        return Err(Error::Degenerate("zero geometric variance".into()));
    }
    Ok((lid - profile.mu) / profile.sigma)
}

/// Operational α range. `alpha_min == alpha_max` is the fixed-α configuration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MappingConfig {
    alpha_min: f64,
    alpha_max: f64,
}

impl MappingConfig {
    pub fn new(alpha_min: f64, alpha_max: f64) -> Result<Self> {
        if !alpha_min.is_finite() || !alpha_max.is_finite() {
            return Err(Error::param("α bounds must be finite"));
        }
        if alpha_min < 1.0 {
            return Err(Error::param(format!(
                "alpha_min = {alpha_min} must be >= 1.0"
            )));
        }
        if alpha_max < alpha_min {
            return Err(Error::param(format!(
                "alpha_max = {alpha_max} must be >= alpha_min = {alpha_min}"
            )));
        }
        Ok(MappingConfig {
            alpha_min,
            alpha_max,
        })
    }

    pub fn alpha_min(&self) -> f64 {
        self.alpha_min
    }

    pub fn alpha_max(&self) -> f64 {
        self.alpha_max
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.alpha_min + self.alpha_max)
    }

    pub fn is_fixed(&self) -> bool {
        self.alpha_min == self.alpha_max
    }
}

impl Default for MappingConfig {
    fn default() -> Self {
        MappingConfig {
            alpha_min: 1.0,
            alpha_max: 1.5,
        }
    }
}

/// `1 / (1 + e^z)` without overflow on either tail.
#[inline]
fn logistic_complement(z: f64) -> f64 {
    if z > 0.0 {
        let e = (-z).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + z.exp())
    }
}

/// `α_min + (α_max - α_min) / (1 + e^z)`, kept [`ALPHA_CLAMP_EPS`] inside the range.
pub fn map_alpha(z: f64, cfg: &MappingConfig) -> Result<f64> {
    if !z.is_finite() {
        return Err(Error::param(format!("z-score {z} is not finite")));
    }
    let span = cfg.alpha_max - cfg.alpha_min;
    if span <= 2.0 * ALPHA_CLAMP_EPS {
        return Ok(cfg.midpoint());
    }
    let alpha = cfg.alpha_min + span * logistic_complement(z);
    Ok(alpha.clamp(cfg.alpha_min + ALPHA_CLAMP_EPS, cfg.alpha_max - ALPHA_CLAMP_EPS))
}

/// Per-node pruning parameters, each >= 1.0.
#[derive(Clone, Debug, PartialEq)]
pub struct MappedAlphas {
    alphas: Vec<f64>,
}

impl MappedAlphas {
    pub fn new(alphas: Vec<f64>) -> Result<Self> {
        if let Some(i) = alphas.iter().position(|&a| !(a >= 1.0) || !a.is_finite()) {
            return Err(Error::param(format!(
                "α of node {i} is {} (must be finite and >= 1.0)",
                alphas[i]
            )));
        }
        Ok(MappedAlphas { alphas })
    }

    pub fn uniform(n: usize, alpha: f64) -> Result<Self> {
        Self::new(vec![alpha; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.alphas
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    #[inline]
    pub fn get(&self, u: usize) -> f64 {
        self.alphas[u]
    }

    /// Counts over `bins` equal-width buckets spanning `[lo, hi]`.
    pub fn histogram(&self, lo: f64, hi: f64, bins: usize) -> Vec<usize> {
        let mut counts = vec![0usize; bins.max(1)];
        let width = (hi - lo) / counts.len() as f64;
        for &a in &self.alphas {
            let b = if width > 0.0 {
                (((a - lo) / width) as isize).clamp(0, counts.len() as isize - 1) as usize
            } else {
                0
            };
            counts[b] += 1;
        }
        counts
    }
}

/// Map every node's LID through [`z_score`] and [`map_alpha`].
///
/// A fixed-α config (`alpha_min == alpha_max`) yields that constant for every
/// node without consulting σ.
pub fn compute_alphas(profile: &LidProfile, cfg: &MappingConfig) -> Result<MappedAlphas> {
    if cfg.is_fixed() {
        return MappedAlphas::uniform(profile.len(), cfg.alpha_min);
    }
    let alphas = profile
        .lids
        .iter()
        .map(|&l| map_alpha(z_score(l as f64, profile)?, cfg))
        .collect::<Result<Vec<f64>>>()?;
    MappedAlphas::new(alphas)
}
