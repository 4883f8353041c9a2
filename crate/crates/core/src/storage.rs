//! Block-aligned index files and the disk-resident read path.
//!
//! Layout (little-endian throughout):
//!
//! ```text
//! block 0        header, zero padded to block_size
//!   0  magic "MCGI"        4  version u32       8  n u64
//!  16  dim u32            20  element tag u8   21  has_alphas u8
//!  22  reserved u16       24  max_degree u32   28  block_size u32
//!  32  entry_point u64    40  crc32 of bytes 0..40
//! block 1 + u    record of node u, zero padded to block_size
//!   0  degree u32          4  crc32 of bytes 0..4 and 8..record_size
//!   8  alpha f64          16  max_degree u64 neighbor slots (unused = u64::MAX)
//!  16 + 8R  vector, dim elements (f32 or u8)
//! ```
//!
//! Node `u`'s record starts at `block_size * (1 + u)`, so a single aligned read
//! returns both its vector and its neighbor list.

use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::dataset::{ElementKind, VectorDataset};
use crate::error::{Error, Result};
use crate::geometry::l2;
use crate::graph::Graph;
use crate::lid::MappedAlphas;
use crate::search::GraphSource;

pub const MAGIC: &[u8; 4] = b"MCGI";
pub const FORMAT_VERSION: u32 = 1;
pub const DEFAULT_BLOCK_SIZE: usize = 4096;
pub const HEADER_LEN: usize = 44;
pub const EMPTY_SLOT: u64 = u64::MAX;

const RECORD_PREFIX: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IndexHeader {
    pub version: u32,
    pub n: u64,
    pub dim: u32,
    pub elements: ElementKind,
    pub has_alphas: bool,
    pub max_degree: u32,
    pub block_size: u32,
    pub entry_point: u64,
}

impl IndexHeader {
    pub fn record_size(&self) -> usize {
        record_size(self.max_degree as usize, self.dim as usize, self.elements)
    }

    fn encode(&self) -> [u8; HEADER_LEN] {
        let mut b = [0u8; HEADER_LEN];
        b[0..4].copy_from_slice(MAGIC);
        b[4..8].copy_from_slice(&self.version.to_le_bytes());
        b[8..16].copy_from_slice(&self.n.to_le_bytes());
        b[16..20].copy_from_slice(&self.dim.to_le_bytes());
        b[20] = self.elements.tag();
        b[21] = self.has_alphas as u8;
        b[24..28].copy_from_slice(&self.max_degree.to_le_bytes());
        b[28..32].copy_from_slice(&self.block_size.to_le_bytes());
        b[32..40].copy_from_slice(&self.entry_point.to_le_bytes());
        let crc = crc32fast::hash(&b[..40]);
        b[40..44].copy_from_slice(&crc.to_le_bytes());
        b
    }

    fn decode(b: &[u8]) -> Result<Self> {
        if b.len() < HEADER_LEN {
            return Err(Error::format(format!(
                "file truncated at byte {} inside the {HEADER_LEN}-byte header",
                b.len()
            )));
        }
        if &b[0..4] != MAGIC {
            return Err(Error::format("bad magic: not an index file"));
        }
        let version = u32_at(b, 4);
        if version != FORMAT_VERSION {
            return Err(Error::format(format!(
                "unsupported format version {version} (expected {FORMAT_VERSION})"
            )));
        }
        if crc32fast::hash(&b[..40]) != u32_at(b, 40) {
            return Err(Error::format("header checksum mismatch"));
        }
        let elements = ElementKind::from_tag(b[20])
            .ok_or_else(|| Error::format(format!("unknown element tag {}", b[20])))?;
        let h = IndexHeader {
            version,
            n: u64_at(b, 8),
            dim: u32_at(b, 16),
            elements,
            has_alphas: b[21] != 0,
            max_degree: u32_at(b, 24),
            block_size: u32_at(b, 28),
            entry_point: u64_at(b, 32),
        };
        if h.dim == 0 || h.n == 0 {
            return Err(Error::format("header declares an empty index"));
        }
        if !h.block_size.is_power_of_two() || (h.block_size as usize) < HEADER_LEN {
            return Err(Error::format(format!("invalid block size {}", h.block_size)));
        }
        if h.record_size() > h.block_size as usize {
            return Err(Error::format(format!(
                "record size {} exceeds block size {}",
                h.record_size(),
                h.block_size
            )));
        }
        if h.entry_point >= h.n {
            return Err(Error::format(format!(
                "entry point {} out of range for {} nodes",
                h.entry_point, h.n
            )));
        }
        Ok(h)
    }

    fn file_len(&self) -> u64 {
        (self.n + 1) * self.block_size as u64
    }
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().unwrap())
}

fn u64_at(b: &[u8], at: usize) -> u64 {
    u64::from_le_bytes(b[at..at + 8].try_into().unwrap())
}

/// Serialized bytes of one node record (before padding).
pub fn record_size(max_degree: usize, dim: usize, elements: ElementKind) -> usize {
    RECORD_PREFIX + 8 * max_degree + dim * elements.size()
}

/// Smallest power-of-two block that holds a record.
pub fn required_block_size(max_degree: usize, dim: usize, elements: ElementKind) -> usize {
    record_size(max_degree, dim, elements)
        .max(HEADER_LEN)
        .next_power_of_two()
}

fn record_crc(rec: &[u8]) -> u32 {
    let mut h = crc32fast::Hasher::new();
    h.update(&rec[0..4]);
    h.update(&rec[8..]);
    h.finalize()
}

/// Write `graph` (with its alphas, if attached) and `base` to `path`.
pub fn save_index(
    graph: &Graph,
    base: &VectorDataset,
    path: impl AsRef<Path>,
    block_size: usize,
) -> Result<()> {
    if graph.is_empty() {
        return Err(Error::param("refusing to save an empty graph"));
    }
    if graph.len() != base.len() {
        return Err(Error::param(format!(
            "graph has {} nodes but dataset has {} vectors",
            graph.len(),
            base.len()
        )));
    }
    if !block_size.is_power_of_two() || block_size < HEADER_LEN {
        return Err(Error::param(format!(
            "block size {block_size} must be a power of two >= {HEADER_LEN}"
        )));
    }
    let r = graph.max_degree();
    let rec_len = record_size(r, base.dim(), base.elements());
    if rec_len > block_size {
        return Err(Error::RecordTooLarge {
            record_size: rec_len,
            block_size,
            required: required_block_size(r, base.dim(), base.elements()),
        });
    }
    let header = IndexHeader {
        version: FORMAT_VERSION,
        n: graph.len() as u64,
        dim: base.dim() as u32,
        elements: base.elements(),
        has_alphas: graph.alphas().is_some(),
        max_degree: r as u32,
        block_size: block_size as u32,
        entry_point: graph.entry_point() as u64,
    };
    let mut out = BufWriter::new(File::create(path)?);
    let mut block = vec![0u8; block_size];
    block[..HEADER_LEN].copy_from_slice(&header.encode());
    out.write_all(&block)?;
    for u in 0..graph.len() {
        block.iter_mut().for_each(|b| *b = 0);
        let nbrs = graph.neighbors(u);
        block[0..4].copy_from_slice(&(nbrs.len() as u32).to_le_bytes());
        let alpha = graph.alphas().map_or(0.0, |a| a.get(u));
        block[8..16].copy_from_slice(&alpha.to_le_bytes());
        for slot in 0..r {
            let id = nbrs.get(slot).map_or(EMPTY_SLOT, |&v| v as u64);
            let at = RECORD_PREFIX + 8 * slot;
            block[at..at + 8].copy_from_slice(&id.to_le_bytes());
        }
        let vec_at = RECORD_PREFIX + 8 * r;
        match base.elements() {
            ElementKind::F32 => {
                for (i, x) in base.row(u).iter().enumerate() {
                    block[vec_at + 4 * i..vec_at + 4 * i + 4].copy_from_slice(&x.to_le_bytes());
                }
            }
            ElementKind::U8 => {
                for (i, x) in base.row(u).iter().enumerate() {
                    block[vec_at + i] = *x as u8;
                }
            }
        }
        let crc = record_crc(&block[..rec_len]);
        block[4..8].copy_from_slice(&crc.to_le_bytes());
        out.write_all(&block)?;
    }
    out.flush()?;
    Ok(())
}

/// A decoded node record.
struct Record {
    neighbors: Vec<u32>,
    alpha: f64,
}

fn decode_record(
    h: &IndexHeader,
    node: u64,
    rec: &[u8],
    vector_out: Option<&mut Vec<f32>>,
) -> Result<Record> {
    let corrupt = |reason: String| Error::CorruptNode { node, reason };
    if record_crc(rec) != u32_at(rec, 4) {
        return Err(corrupt("checksum mismatch".into()));
    }
    let degree = u32_at(rec, 0) as usize;
    let r = h.max_degree as usize;
    if degree > r {
        return Err(corrupt(format!("degree {degree} exceeds max degree {r}")));
    }
    let mut neighbors = Vec::with_capacity(degree);
    for slot in 0..r {
        let id = u64_at(rec, RECORD_PREFIX + 8 * slot);
        if slot < degree {
            if id >= h.n || id == node {
                return Err(corrupt(format!("neighbor slot {slot} holds invalid id {id}")));
            }
            neighbors.push(id as u32);
        } else if id != EMPTY_SLOT {
            return Err(corrupt(format!("unused slot {slot} is not the sentinel")));
        }
    }
    let alpha = f64::from_le_bytes(rec[8..16].try_into().unwrap());
    if let Some(out) = vector_out {
        let at = RECORD_PREFIX + 8 * r;
        let dim = h.dim as usize;
        match h.elements {
            ElementKind::F32 => out.extend(
                rec[at..at + 4 * dim]
                    .chunks_exact(4)
                    .map(|c| f32::from_le_bytes(c.try_into().unwrap())),
            ),
            ElementKind::U8 => out.extend(rec[at..at + dim].iter().map(|&x| x as f32)),
        }
    }
    Ok(Record { neighbors, alpha })
}

/// Everything in an index file, decoded in one sequential pass.
fn read_all(path: &Path) -> Result<(IndexHeader, Graph, VectorDataset)> {
    let mut file = File::open(path)?;
    let file_len = file.metadata()?.len();
    let mut head = vec![0u8; HEADER_LEN.min(file_len as usize)];
    file.read_exact(&mut head)?;
    let h = IndexHeader::decode(&head)?;
    if file_len < h.file_len() {
        return Err(Error::format(format!(
            "file truncated at byte {file_len}; expected {} bytes",
            h.file_len()
        )));
    }
    let bs = h.block_size as usize;
    let mut reader = std::io::BufReader::new(file);
    let mut skip = vec![0u8; bs - HEADER_LEN];
    reader.read_exact(&mut skip)?;
    let rec_len = h.record_size();
    let mut block = vec![0u8; bs];
    let mut values = Vec::with_capacity(h.n as usize * h.dim as usize);
    let mut lists = Vec::with_capacity(h.n as usize);
    let mut alphas = Vec::with_capacity(h.n as usize);
    for u in 0..h.n {
        reader.read_exact(&mut block)?;
        let rec = decode_record(&h, u, &block[..rec_len], Some(&mut values))?;
        lists.push(rec.neighbors);
        alphas.push(rec.alpha);
    }
    let base = VectorDataset::new(h.dim as usize, h.elements, values)?;
    let mut graph = Graph::from_lists(lists, h.entry_point as u32, h.max_degree as usize)?;
    if h.has_alphas {
        graph = graph.with_alphas(MappedAlphas::new(alphas)?)?;
    }
    Ok((h, graph, base))
}

/// Reconstruct the graph (alphas attached when stored) and the vectors.
pub fn load_index(path: impl AsRef<Path>) -> Result<(Graph, VectorDataset)> {
    let (_, graph, base) = read_all(path.as_ref())?;
    Ok((graph, base))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ReadMode {
    /// Reads go through the OS page cache.
    #[default]
    Buffered,
    /// Reads bypass the page cache (O_DIRECT) where the platform permits.
    Unbuffered,
}

/// Heap buffer aligned to its own (power-of-two) length, as direct IO needs.
struct AlignedBuf {
    ptr: *mut u8,
    layout: std::alloc::Layout,
}

impl AlignedBuf {
    fn new(len: usize) -> Self {
        let layout = std::alloc::Layout::from_size_align(len, len.max(512)).expect("valid layout");
        // SAFETY: layout has non-zero size
        let ptr = unsafe { std::alloc::alloc_zeroed(layout) };
        if ptr.is_null() {
            std::alloc::handle_alloc_error(layout);
        }
        AlignedBuf { ptr, layout }
    }

    fn as_mut_slice(&mut self) -> &mut [u8] {
        // SAFETY: ptr is a live allocation of layout.size() bytes owned by self
        unsafe { std::slice::from_raw_parts_mut(self.ptr, self.layout.size()) }
    }
}

impl Drop for AlignedBuf {
    fn drop(&mut self) {
        // SAFETY: allocated in new() with the same layout
        unsafe { std::alloc::dealloc(self.ptr, self.layout) }
    }
}

thread_local! {
    static READ_BUF: std::cell::RefCell<Option<AlignedBuf>> = const { std::cell::RefCell::new(None) };
}

#[cfg(target_os = "linux")]
fn open_direct(path: &Path) -> std::io::Result<File> {
    use std::os::unix::fs::OpenOptionsExt;
    OpenOptions::new()
        .read(true)
        .custom_flags(libc::O_DIRECT)
        .open(path)
}

#[cfg(not(target_os = "linux"))]
fn open_direct(_path: &Path) -> std::io::Result<File> {
    Err(std::io::Error::new(
        std::io::ErrorKind::Unsupported,
        "direct IO is only wired up on linux",
    ))
}

fn read_block(file: &File, offset: u64, buf: &mut [u8]) -> std::io::Result<()> {
    use std::os::unix::fs::FileExt;
    file.read_exact_at(buf, offset)
}

/// Disk-resident index: one block read per expanded node.
///
/// Distances to candidates are computed against an in-memory copy of the
/// vectors loaded at open time; adjacency is always fetched from disk.
pub struct DiskIndex {
    file: File,
    header: IndexHeader,
    routing: VectorDataset,
    alphas: Option<MappedAlphas>,
    mode: ReadMode,
    block_reads: AtomicU64,
}

impl DiskIndex {
    pub fn header(&self) -> &IndexHeader {
        &self.header
    }

    /// Read mode actually in effect (after any fallback).
    pub fn mode(&self) -> ReadMode {
        self.mode
    }

    pub fn alphas(&self) -> Option<&MappedAlphas> {
        self.alphas.as_ref()
    }

    pub fn vectors(&self) -> &VectorDataset {
        &self.routing
    }

    /// Blocks read since open (or the last reset), across all threads.
    pub fn block_reads(&self) -> u64 {
        self.block_reads.load(Ordering::Relaxed)
    }

    pub fn reset_block_reads(&self) {
        self.block_reads.store(0, Ordering::Relaxed);
    }

    fn fetch(&self, u: u32) -> Result<Record> {
        let bs = self.header.block_size as usize;
        let offset = bs as u64 * (1 + u as u64);
        READ_BUF.with(|cell| {
            let mut slot = cell.borrow_mut();
            if slot.as_ref().is_none_or(|b| b.layout.size() != bs) {
                *slot = Some(AlignedBuf::new(bs));
            }
            let buf = slot.as_mut().unwrap().as_mut_slice();
            read_block(&self.file, offset, buf)?;
            self.block_reads.fetch_add(1, Ordering::Relaxed);
            decode_record(&self.header, u as u64, &buf[..self.header.record_size()], None)
        })
    }
}

/// Open an index for disk-resident search. Unbuffered mode falls back to
/// buffered reads, with a warning, when direct IO is unavailable.
pub fn open_disk_index(path: impl AsRef<Path>, mode: ReadMode) -> Result<DiskIndex> {
    let path = path.as_ref();
    let (header, graph, routing) = read_all(path)?;
    let alphas = graph.alphas().cloned();
    let buffered = || File::open(path);
    let (file, mode) = match mode {
        ReadMode::Buffered => (buffered()?, ReadMode::Buffered),
        ReadMode::Unbuffered => {
            let probe = open_direct(path).and_then(|f| {
                let mut buf = AlignedBuf::new(header.block_size as usize);
                read_block(&f, header.block_size as u64, buf.as_mut_slice()).map(|_| f)
            });
            match probe {
                Ok(f) => (f, ReadMode::Unbuffered),
                Err(e) => {
                    log::warn!(
                        "unbuffered reads unavailable for {} ({e}); using buffered reads",
                        path.display()
                    );
                    (buffered()?, ReadMode::Buffered)
                }
            }
        }
    };
    Ok(DiskIndex {
        file,
        header,
        routing,
        alphas,
        mode,
        block_reads: AtomicU64::new(0),
    })
}

impl GraphSource for DiskIndex {
    fn node_count(&self) -> usize {
        self.header.n as usize
    }

    fn dim(&self) -> usize {
        self.header.dim as usize
    }

    fn entry_point(&self) -> u32 {
        self.header.entry_point as u32
    }

    #[inline]
    fn distance_to(&self, q: &[f32], u: u32) -> f32 {
        l2(q, self.routing.row(u as usize))
    }

    fn read_neighbors(&self, u: u32, out: &mut Vec<u32>) -> Result<()> {
        let rec = self.fetch(u)?;
        *out = rec.neighbors;
        Ok(())
    }
}
