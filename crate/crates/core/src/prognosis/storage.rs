//! On-disk exemplar library.
//!
//! Binary layout, all integers and floats little-endian:
//!
//! | offset | size | content |
//! |--------|------|---------|
//! | 0 | 8 | magic `UFPGLIB\0` |
//! | 8 | 4 | `u32` format version (currently 1) |
//! | 12 | 4 | `u32` header length `H` |
//! | 16 | H | UTF-8 JSON [`LibraryHeader`] |
//! | 16+H | 8·120·n | `f64` signature matrix, row-major, one row per exemplar |
//! | … | 4·n | `u32` RUL per exemplar |
//! | … | 16·n | `(u64 run_id, u64 cycle)` per exemplar |
//! | end−32 | 32 | SHA-256 of every preceding byte |
//!
//! `n` is `header.n_exemplars`. The text export writes one exemplar per
//! line as `run_id,cycle,rul,v000,...,v119` after `#`-prefixed header lines.

use std::io::Write;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::library::{BuildMetadata, ExemplarLibrary};
use crate::error::{Error, Result};
use crate::fuzzy::{FuzzyPartition, SIGNATURE_LEN, WINDOW_LENGTH};

pub const MAGIC: &[u8; 8] = b"UFPGLIB\0";
pub const FORMAT_VERSION: u32 = 1;
const CHECKSUM_LEN: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LibraryHeader {
    pub window_length: usize,
    pub signature_len: usize,
    pub n_exemplars: usize,
    pub hi_partition: FuzzyPartition,
    pub dhi_partition: FuzzyPartition,
    pub metadata: BuildMetadata,
}

pub fn encode_library(library: &ExemplarLibrary) -> Result<Vec<u8>> {
    let header = LibraryHeader {
        window_length: library.window_length(),
        signature_len: library.dims(),
        n_exemplars: library.len(),
        hi_partition: library.hi_partition,
        dhi_partition: library.dhi_partition,
        metadata: library.metadata.clone(),
    };
    let header_json = serde_json::to_vec(&header)?;
    let n = library.len();
    let mut buf = Vec::with_capacity(16 + header_json.len() + n * (SIGNATURE_LEN * 8 + 20) + 32);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    let header_len = u32::try_from(header_json.len())
        .map_err(|_| Error::Format("library header too large".into()))?;
    buf.extend_from_slice(&header_len.to_le_bytes());
    buf.extend_from_slice(&header_json);
    for v in library.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for r in library.ruls() {
        buf.extend_from_slice(&r.to_le_bytes());
    }
    for &(run, cycle) in library.provenance_rows() {
        buf.extend_from_slice(&(run as u64).to_le_bytes());
        buf.extend_from_slice(&(cycle as u64).to_le_bytes());
    }
    let checksum = Sha256::digest(&buf);
    buf.extend_from_slice(&checksum);
    Ok(buf)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::Format("library file truncated".into()))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut out = [0u8; N];
        out.copy_from_slice(self.take(N)?);
        Ok(out)
    }
}

pub fn decode_library(bytes: &[u8]) -> Result<ExemplarLibrary> {
    if bytes.len() < MAGIC.len() + 8 + CHECKSUM_LEN || &bytes[..MAGIC.len()] != MAGIC {
        return Err(Error::Format("not an exemplar library file".into()));
    }
    let (body, checksum) = bytes.split_at(bytes.len() - CHECKSUM_LEN);
    if Sha256::digest(body).as_slice() != checksum {
        return Err(Error::Format("library checksum mismatch".into()));
    }
    let mut cur = Cursor { bytes: body, pos: MAGIC.len() };
    let version = u32::from_le_bytes(cur.array()?);
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "library format version {version} unsupported (expected {FORMAT_VERSION})"
        )));
    }
    let header_len = u32::from_le_bytes(cur.array()?) as usize;
    let header: LibraryHeader = serde_json::from_slice(cur.take(header_len)?)?;
    if header.window_length != WINDOW_LENGTH || header.signature_len != SIGNATURE_LEN {
        return Err(Error::Format(format!(
            "library built for window {} / width {}, this build uses {} / {}",
            header.window_length, header.signature_len, WINDOW_LENGTH, SIGNATURE_LEN
        )));
    }
    let n = header.n_exemplars;
    let expected = n
        .checked_mul(SIGNATURE_LEN * 8 + 4 + 16)
        .ok_or_else(|| Error::Format("exemplar count overflows".into()))?;
    if body.len() - cur.pos != expected {
        return Err(Error::Format(format!(
            "library body has {} bytes, header implies {expected}",
            body.len() - cur.pos
        )));
    }
    let values = (0..n * SIGNATURE_LEN)
        .map(|_| cur.array().map(f64::from_le_bytes))
        .collect::<Result<Vec<_>>>()?;
    let ruls = (0..n)
        .map(|_| cur.array().map(u32::from_le_bytes))
        .collect::<Result<Vec<_>>>()?;
    let provenance = (0..n)
        .map(|_| {
            let run = u64::from_le_bytes(cur.array()?) as usize;
            let cycle = u64::from_le_bytes(cur.array()?) as usize;
            Ok((run, cycle))
        })
        .collect::<Result<Vec<_>>>()?;
    ExemplarLibrary::from_parts(
        values,
        ruls,
        provenance,
        header.hi_partition,
        header.dhi_partition,
        header.metadata,
    )
}

pub fn write_library_file(library: &ExemplarLibrary, path: &std::path::Path) -> Result<()> {
    let bytes = encode_library(library)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_library_file(path: &std::path::Path) -> Result<ExemplarLibrary> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_library(&bytes)
}

/// Audit-friendly text dump, one exemplar per line.
pub fn export_text<W: Write>(library: &ExemplarLibrary, mut out: W) -> Result<()> {
    let io = |e| Error::io("<library text export>", e);
    let h = &library.hi_partition;
    let d = &library.dhi_partition;
    writeln!(out, "# exemplar library, {} exemplars", library.len()).map_err(io)?;
    writeln!(out, "# config_digest {}", library.metadata.config_digest).map_err(io)?;
    writeln!(out, "# window_length {}", library.window_length()).map_err(io)?;
    writeln!(out, "# hi_partition centers {:?} sigma {}", h.centers, h.sigma).map_err(io)?;
    writeln!(out, "# dhi_partition centers {:?} sigma {}", d.centers, d.sigma).map_err(io)?;
    let mut header = String::from("run_id,cycle,rul");
    for p in 0..SIGNATURE_LEN {
        header.push_str(&format!(",v{p:03}"));
    }
    writeln!(out, "{header}").map_err(io)?;
    for i in 0..library.len() {
        let (run, cycle) = library.provenance(i);
        let mut line = format!("{run},{cycle},{}", library.rul(i));
        for v in library.row(i) {
            line.push(',');
            line.push_str(&v.to_string());
        }
        writeln!(out, "{line}").map_err(io)?;
    }
    Ok(())
}
