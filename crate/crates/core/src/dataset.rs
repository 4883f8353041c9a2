//! Vector datasets and the TEXMEX `.fvecs` / `.bvecs` / `.ivecs` formats.
//!
//! Every record is a 4-byte little-endian signed dimension `d` followed by `d`
//! elements: little-endian `f32` for fvecs, `u8` for bvecs, little-endian `i32`
//! for ivecs. All records in a file share the same `d`.
//!
//! `u8` datasets are widened to `f32` on load so that a single distance kernel
//! serves both kinds; the element tag is kept so they can be written back.

use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry;

/// Storage kind of a dataset's elements on disk.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ElementKind {
    F32,
    U8,
}

impl ElementKind {
    pub fn size(self) -> usize {
        match self {
            ElementKind::F32 => 4,
            ElementKind::U8 => 1,
        }
    }

    pub(crate) fn tag(self) -> u8 {
        match self {
            ElementKind::F32 => 0,
            ElementKind::U8 => 1,
        }
    }

    pub(crate) fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(ElementKind::F32),
            1 => Some(ElementKind::U8),
            _ => None,
        }
    }

    /// Guess the kind from a file extension (`bvecs` → `U8`, anything else → `F32`).
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("bvecs") => ElementKind::U8,
            _ => ElementKind::F32,
        }
    }
}

/// Row-major `count × dim` matrix of vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorDataset {
    dim: usize,
    elements: ElementKind,
    values: Vec<f32>,
}

impl VectorDataset {
    /// Wrap a row-major value buffer. Values must be finite; `U8` datasets
    /// must hold integers in `0..=255`.
    pub fn new(dim: usize, elements: ElementKind, values: Vec<f32>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::param("dim must be >= 1"));
        }
        if values.len() % dim != 0 {
            return Err(Error::param(format!(
                "value buffer of length {} is not a multiple of dim {}",
                values.len(),
                dim
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::param(format!(
                "non-finite value in row {}",
                pos / dim
            )));
        }
        if elements == ElementKind::U8 {
            if let Some(pos) = values
                .iter()
                .position(|&v| v < 0.0 || v > 255.0 || v.fract() != 0.0)
            {
                return Err(Error::param(format!(
                    "row {} holds a value not representable as u8",
                    pos / dim
                )));
            }
        }
        Ok(VectorDataset {
            dim,
            elements,
            values,
        })
    }

    pub fn from_rows(rows: &[Vec<f32>]) -> Result<Self> {
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        if let Some(i) = rows.iter().position(|r| r.len() != dim) {
            return Err(Error::param(format!("row {i} has a different dimension")));
        }
        Self::new(dim, ElementKind::F32, rows.concat())
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn elements(&self) -> ElementKind {
        self.elements
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f32] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f32> {
        self.values.chunks_exact(self.dim)
    }

    /// New dataset holding the given rows, in the given order.
    pub fn select(&self, ids: &[usize]) -> VectorDataset {
        let mut values = Vec::with_capacity(ids.len() * self.dim);
        for &i in ids {
            values.extend_from_slice(self.row(i));
        }
        VectorDataset {
            dim: self.dim,
            elements: self.elements,
            values,
        }
    }

    /// Append the rows of `other`, which must match in dim and element kind.
    pub fn concat(&self, other: &VectorDataset) -> Result<VectorDataset> {
        if self.dim != other.dim || self.elements != other.elements {
            return Err(Error::param("cannot concatenate datasets of different shape"));
        }
        let mut values = self.values.clone();
        values.extend_from_slice(&other.values);
        Ok(VectorDataset {
            dim: self.dim,
            elements: self.elements,
            values,
        })
    }
}

/// Exact top-k answers for a query set, row `q` sorted by ascending distance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundTruth {
    k: usize,
    ids: Vec<u32>,
}

impl GroundTruth {
    pub fn new(k: usize, ids: Vec<u32>) -> Result<Self> {
        if k == 0 {
            return Err(Error::param("ground truth k must be >= 1"));
        }
        if ids.len() % k != 0 {
            return Err(Error::param("ground truth buffer is not a multiple of k"));
        }
        Ok(GroundTruth { k, ids })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn query_count(&self) -> usize {
        self.ids.len() / self.k
    }

    pub fn row(&self, q: usize) -> &[u32] {
        &self.ids[q * self.k..(q + 1) * self.k]
    }

    /// Check ids against a base of `base_count` vectors: in range and distinct per row.
    pub fn validate(&self, base_count: usize) -> Result<()> {
        for q in 0..self.query_count() {
            let row = self.row(q);
            if let Some(&bad) = row.iter().find(|&&id| id as usize >= base_count) {
                return Err(Error::param(format!(
                    "ground truth row {q} references id {bad} outside base of {base_count}"
                )));
            }
            let mut sorted = row.to_vec();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::param(format!("ground truth row {q} repeats an id")));
            }
        }
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let (k, raw) = parse_records(&fs::read(path.as_ref())?, 4)?;
        let mut ids = Vec::with_capacity(raw.len() / 4);
        for (i, chunk) in raw.chunks_exact(4).enumerate() {
            let v = i32::from_le_bytes(chunk.try_into().unwrap());
            if v < 0 {
                return Err(Error::parse(format!(
                    "negative id {v} in record {}",
                    i / k
                )));
            }
            ids.push(v as u32);
        }
        GroundTruth::new(k, ids)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        if self.ids.is_empty() {
            return Err(Error::param("refusing to write empty ground truth"));
        }
        let mut out = Vec::with_capacity(self.query_count() * (4 + 4 * self.k));
        for row in self.ids.chunks_exact(self.k) {
            out.extend_from_slice(&(self.k as i32).to_le_bytes());
            for &id in row {
                out.extend_from_slice(&(id as i32).to_le_bytes());
            }
        }
        fs::write(path, out)?;
        Ok(())
    }
}

/// Split a TEXMEX byte stream into `(dim, element bytes)`, checking that every
/// record shares one dimension and that nothing is truncated.
fn parse_records(bytes: &[u8], elem_size: usize) -> Result<(usize, Vec<u8>)> {
    if bytes.is_empty() {
        return Err(Error::parse("empty file"));
    }
    let mut out = Vec::with_capacity(bytes.len());
    let mut dim: Option<usize> = None;
    let mut offset = 0usize;
    let mut record = 0usize;
    while offset < bytes.len() {
        if offset + 4 > bytes.len() {
            return Err(Error::parse(format!(
                "truncated dimension field of record {record} at byte offset {offset}"
            )));
        }
        let d = i32::from_le_bytes(bytes[offset..offset + 4].try_into().unwrap());
        if d <= 0 {
            return Err(Error::parse(format!(
                "record {record} declares non-positive dimension {d} at byte offset {offset}"
            )));
        }
        let d = d as usize;
        match dim {
            None => dim = Some(d),
            Some(expected) if expected != d => {
                return Err(Error::parse(format!(
                    "record {record} has dimension {d}, expected {expected}"
                )));
            }
            Some(_) => {}
        }
        let body = offset + 4;
        let end = body + d * elem_size;
        if end > bytes.len() {
            return Err(Error::parse(format!(
                "truncated record {record} at byte offset {offset}: needs {} bytes, {} remain",
                4 + d * elem_size,
                bytes.len() - offset
            )));
        }
        out.extend_from_slice(&bytes[body..end]);
        offset = end;
        record += 1;
    }
    Ok((dim.unwrap(), out))
}

/// Parse an in-memory vecs file.
pub fn parse_vecs(bytes: &[u8], elements: ElementKind) -> Result<VectorDataset> {
    let (dim, raw) = parse_records(bytes, elements.size())?;
    let values: Vec<f32> = match elements {
        ElementKind::F32 => raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect(),
        ElementKind::U8 => raw.iter().map(|&b| b as f32).collect(),
    };
    VectorDataset::new(dim, elements, values).map_err(|e| match e {
        Error::Param(msg) => Error::Parse(msg),
        other => other,
    })
}

pub fn read_vecs(path: impl AsRef<Path>, elements: ElementKind) -> Result<VectorDataset> {
    parse_vecs(&fs::read(path.as_ref())?, elements)
}

/// Read a `.fvecs` / `.bvecs` file, picking the element kind from its extension.
pub fn read_vecs_auto(path: impl AsRef<Path>) -> Result<VectorDataset> {
    let path = path.as_ref();
    read_vecs(path, ElementKind::from_path(path))
}

pub fn encode_vecs(dataset: &VectorDataset) -> Result<Vec<u8>> {
    if dataset.is_empty() {
        return Err(Error::param("refusing to write empty dataset"));
    }
    let dim = dataset.dim();
    let mut out = Vec::with_capacity(dataset.len() * (4 + dim * dataset.elements().size()));
    for row in dataset.rows() {
        out.extend_from_slice(&(dim as i32).to_le_bytes());
        match dataset.elements() {
            ElementKind::F32 => row
                .iter()
                .for_each(|v| out.extend_from_slice(&v.to_le_bytes())),
            ElementKind::U8 => out.extend(row.iter().map(|&v| v as u8)),
        }
    }
    Ok(out)
}

/// Write in the format matching the dataset's element kind.
pub fn write_vecs(dataset: &VectorDataset, path: impl AsRef<Path>) -> Result<()> {
    let bytes = encode_vecs(dataset)?;
    fs::write(path, bytes)?;
    Ok(())
}

/// Exact k nearest base vectors for every query (ties by smaller id).
pub fn compute_ground_truth(
    base: &VectorDataset,
    queries: &VectorDataset,
    k: usize,
) -> Result<GroundTruth> {
    if base.dim() != queries.dim() {
        return Err(Error::param(format!(
            "base dim {} != query dim {}",
            base.dim(),
            queries.dim()
        )));
    }
    if base.elements() != queries.elements() {
        return Err(Error::param("base and queries have different element kinds"));
    }
    if k == 0 || k > base.len() {
        return Err(Error::param(format!(
            "k = {k} must be in 1..={}",
            base.len()
        )));
    }
    let rows: Vec<Vec<u32>> = (0..queries.len())
        .into_par_iter()
        .map(|q| {
            geometry::exact_knn(base, queries.row(q), k)
                .map(|hits| hits.into_iter().map(|(id, _)| id).collect())
        })
        .collect::<Result<_>>()?;
    GroundTruth::new(k, rows.concat())
}
