//! Seeded synthetic datasets with a known intrinsic dimension.
//!
//! All generators are pure functions of their arguments: the same call yields
//! bit-identical matrices.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dataset::{ElementKind, VectorDataset};
use crate::error::{Error, Result};

/// Distance between the two block centers of [`SyntheticKind::MixedLid`].
pub const MIXED_BLOCK_OFFSET: f32 = 3.0;

/// Within-cluster standard deviation of [`SyntheticKind::GaussianClusters`].
pub const CLUSTER_SPREAD: f32 = 0.15;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SyntheticKind {
    /// Uniform in the unit `d`-ball, occupying the first `d` coordinates.
    UniformBall,
    /// Gaussian blobs, each spread along its own random `d`-dimensional subspace.
    GaussianClusters { clusters: usize },
    /// Uniform `d`-ball mapped into the ambient space by a random orthonormal map.
    EmbeddedManifold,
    /// Two embedded-manifold blocks, the first with `intrinsic_dim` and the
    /// second with `second_dim`, centered [`MIXED_BLOCK_OFFSET`] apart.
    /// Rows `0..n/2` belong to the first block.
    MixedLid { second_dim: usize },
}

impl SyntheticKind {
    /// Parse a CLI name. `clusters` and `second_dim` fill the variant payloads.
    pub fn parse(name: &str, clusters: usize, second_dim: usize) -> Result<Self> {
        match name {
            "uniform-ball" => Ok(SyntheticKind::UniformBall),
            "gaussian-clusters" => Ok(SyntheticKind::GaussianClusters { clusters }),
            "embedded-manifold" => Ok(SyntheticKind::EmbeddedManifold),
            "mixed-lid" => Ok(SyntheticKind::MixedLid { second_dim }),
            other => Err(Error::param(format!("unknown generator kind '{other}'"))),
        }
    }
}

fn gaussian_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Uniform sample from the unit `d`-ball: Gaussian direction, radius `U^(1/d)`.
fn ball_point(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let g = gaussian_vec(rng, d);
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            let r = rng.random::<f64>().powf(1.0 / d as f64);
            return g.into_iter().map(|x| x * r / norm).collect();
        }
    }
}

/// `d` orthonormal columns in `ambient` dimensions (Gram-Schmidt on Gaussian
/// columns). Returned column-major: `basis[c]` is column `c`.
fn orthonormal_basis(rng: &mut ChaCha8Rng, ambient: usize, d: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d);
    while basis.len() < d {
        let mut v = gaussian_vec(rng, ambient);
        for b in &basis {
            let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
        }
    }
    basis
}

fn embed(basis: &[Vec<f64>], local: &[f64], out: &mut [f64]) {
    for (c, &coef) in basis.iter().zip(local) {
        out.iter_mut().zip(c).for_each(|(o, b)| *o += coef * b);
    }
}

/// Generate `n` points in `ambient_dim` dimensions with intrinsic dimension
/// `intrinsic_dim`, plus isotropic Gaussian noise of scale `noise`.
pub fn generate_synthetic(
    kind: SyntheticKind,
    n: usize,
    ambient_dim: usize,
    intrinsic_dim: usize,
    seed: u64,
    noise: f64,
) -> Result<VectorDataset> {
    if ambient_dim == 0 {
        return Err(Error::param("ambient dim must be >= 1"));
    }
    if intrinsic_dim == 0 || intrinsic_dim > ambient_dim {
        return Err(Error::param(format!(
            "intrinsic dim {intrinsic_dim} must be in 1..={ambient_dim}"
        )));
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Error::param("noise must be a finite non-negative scale"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = vec![0f64; n * ambient_dim];
    match kind {
        SyntheticKind::UniformBall => {
            for row in values.chunks_exact_mut(ambient_dim) {
                let p = ball_point(&mut rng, intrinsic_dim);
                row[..intrinsic_dim].copy_from_slice(&p);
            }
        }
        SyntheticKind::EmbeddedManifold => {
            let basis = orthonormal_basis(&mut rng, ambient_dim, intrinsic_dim);
            for row in values.chunks_exact_mut(ambient_dim) {
                let p = ball_point(&mut rng, intrinsic_dim);
                embed(&basis, &p, row);
            }
        }
        SyntheticKind::GaussianClusters { clusters } => {
            if clusters == 0 {
                return Err(Error::param("gaussian-clusters needs at least one cluster"));
            }
            let centers: Vec<Vec<f64>> = (0..clusters)
                .map(|_| (0..ambient_dim).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect();
            let bases: Vec<Vec<Vec<f64>>> = (0..clusters)
                .map(|_| orthonormal_basis(&mut rng, ambient_dim, intrinsic_dim))
                .collect();
            for row in values.chunks_exact_mut(ambient_dim) {
                let c = rng.random_range(0..clusters);
                row.copy_from_slice(&centers[c]);
                let local: Vec<f64> = gaussian_vec(&mut rng, intrinsic_dim)
                    .into_iter()
                    .map(|x| x * CLUSTER_SPREAD as f64)
                    .collect();
                embed(&bases[c], &local, row);
            }
        }
        SyntheticKind::MixedLid { second_dim } => {
            if second_dim == 0 || second_dim > ambient_dim {
                return Err(Error::param(format!(
                    "second intrinsic dim {second_dim} must be in 1..={ambient_dim}"
                )));
            }
            let first = orthonormal_basis(&mut rng, ambient_dim, intrinsic_dim);
            let second = orthonormal_basis(&mut rng, ambient_dim, second_dim);
            let mut offset = gaussian_vec(&mut rng, ambient_dim);
            let norm = offset.iter().map(|x| x * x).sum::<f64>().sqrt();
            offset
                .iter_mut()
                .for_each(|x| *x *= MIXED_BLOCK_OFFSET as f64 / norm);
            let split = n / 2;
            for (i, row) in values.chunks_exact_mut(ambient_dim).enumerate() {
                if i < split {
                    let p = ball_point(&mut rng, intrinsic_dim);
                    embed(&first, &p, row);
                } else {
                    row.copy_from_slice(&offset);
                    let p = ball_point(&mut rng, second_dim);
                    embed(&second, &p, row);
                }
            }
        }
    }
    if noise > 0.0 {
        for v in values.iter_mut() {
            *v += noise * rng.sample::<f64, _>(StandardNormal);
        }
    }
    VectorDataset::new(
        ambient_dim,
        ElementKind::F32,
        values.into_iter().map(|v| v as f32).collect(),
    )
}

/// Hold out `query_count` seeded-random rows as queries.
///
/// Returns `(base, queries, source_rows)` where `source_rows[i]` is the row of
/// `data` that became query `i`; the base keeps the remaining rows in order.
pub fn split_queries(
    data: &VectorDataset,
    query_count: usize,
    seed: u64,
) -> Result<(VectorDataset, VectorDataset, Vec<usize>)> {
    if query_count >= data.len() {
        return Err(Error::param(format!(
            "cannot hold out {query_count} queries from {} rows",
            data.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0f_9e7);
    let picked = index::sample(&mut rng, data.len(), query_count).into_vec();
    let mut is_query = vec![false; data.len()];
    picked.iter().for_each(|&i| is_query[i] = true);
    let base_rows: Vec<usize> = (0..data.len()).filter(|&i| !is_query[i]).collect();
    Ok((data.select(&base_rows), data.select(&picked), picked))
}
