//! Canonical binary snapshot of a parsed dataset.
//!
//! Written once after ingestion so downstream stages never re-parse raw
//! files. Layout: an 8-byte magic, a length-prefixed JSON header (schema
//! version, config hash, dimensions, rating scale), then little-endian
//! columnar payloads: id string tables, the row-compressed rating arrays
//! and the item catalog.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{ItemCatalog, RatingMatrix, RatingScale};

pub const SNAPSHOT_SCHEMA_VERSION: u32 = 1;
const MAGIC: &[u8; 8] = b"FRSNAP01";

#[derive(Serialize, Deserialize)]
struct SnapshotHeader {
    schema_version: u32,
    config_hash: String,
    n_users: u64,
    n_items: u64,
    n_entries: u64,
    scale_min: f64,
    scale_max: f64,
    duplicates_dropped: u64,
}

struct Sink<W: Write> {
    w: W,
}

impl<W: Write> Sink<W> {
    fn u32(&mut self, v: u32) -> std::io::Result<()> {
        self.w.write_all(&v.to_le_bytes())
    }
    fn u64(&mut self, v: u64) -> std::io::Result<()> {
        self.w.write_all(&v.to_le_bytes())
    }
    fn i64(&mut self, v: i64) -> std::io::Result<()> {
        self.w.write_all(&v.to_le_bytes())
    }
    fn f32(&mut self, v: f32) -> std::io::Result<()> {
        self.w.write_all(&v.to_le_bytes())
    }
    fn strings(&mut self, items: &[String]) -> std::io::Result<()> {
        self.u32(items.len() as u32)?;
        for s in items {
            let b = s.as_bytes();
            self.u32(b.len() as u32)?;
            self.w.write_all(b)?;
        }
        Ok(())
    }
}

struct Source<R: Read> {
    r: R,
}

impl<R: Read> Source<R> {
    fn u32(&mut self) -> std::io::Result<u32> {
        let mut b = [0u8; 4];
        self.r.read_exact(&mut b)?;
        Ok(u32::from_le_bytes(b))
    }
    fn u64(&mut self) -> std::io::Result<u64> {
        let mut b = [0u8; 8];
        self.r.read_exact(&mut b)?;
        Ok(u64::from_le_bytes(b))
    }
    fn i64(&mut self) -> std::io::Result<i64> {
        let mut b = [0u8; 8];
        self.r.read_exact(&mut b)?;
        Ok(i64::from_le_bytes(b))
    }
    fn f32(&mut self) -> std::io::Result<f32> {
        let mut b = [0u8; 4];
        self.r.read_exact(&mut b)?;
        Ok(f32::from_le_bytes(b))
    }
    fn strings(&mut self) -> std::io::Result<Vec<String>> {
        let n = self.u32()? as usize;
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let len = self.u32()? as usize;
            let mut buf = vec![0u8; len];
            self.r.read_exact(&mut buf)?;
            out.push(String::from_utf8(buf).map_err(|e| {
                std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string())
            })?);
        }
        Ok(out)
    }
}

pub fn write_snapshot(
    path: impl AsRef<Path>,
    matrix: &RatingMatrix,
    catalog: &ItemCatalog,
    config_hash: &str,
) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut sink = Sink {
        w: BufWriter::new(file),
    };
    let io = |e: std::io::Error| Error::io(path, e);

    let header = SnapshotHeader {
        schema_version: SNAPSHOT_SCHEMA_VERSION,
        config_hash: config_hash.to_string(),
        n_users: matrix.n_users() as u64,
        n_items: matrix.n_items() as u64,
        n_entries: matrix.n_entries() as u64,
        scale_min: matrix.scale().min,
        scale_max: matrix.scale().max,
        duplicates_dropped: matrix.duplicates_dropped() as u64,
    };
    let header_bytes = serde_json::to_vec(&header).expect("header serializes");

    sink.w.write_all(MAGIC).map_err(io)?;
    sink.u32(header_bytes.len() as u32).map_err(io)?;
    sink.w.write_all(&header_bytes).map_err(io)?;

    sink.strings(matrix.user_ids()).map_err(io)?;
    sink.strings(matrix.item_ids()).map_err(io)?;

    let (offsets, items, ratings, times, seqs) = matrix.csr_parts();
    for &o in offsets {
        sink.u64(o as u64).map_err(io)?;
    }
    for &i in items {
        sink.u32(i).map_err(io)?;
    }
    for &r in ratings {
        sink.f32(r).map_err(io)?;
    }
    for &t in times {
        sink.i64(t).map_err(io)?;
    }
    for &s in seqs {
        sink.u32(s).map_err(io)?;
    }

    sink.strings(&catalog.titles).map_err(io)?;
    // label pool + per-item references keep repeated labels compact
    let mut pool: Vec<String> = Vec::new();
    let mut pool_index: std::collections::HashMap<&str, u32> = std::collections::HashMap::new();
    let mut refs: Vec<Vec<u32>> = Vec::with_capacity(catalog.labels.len());
    for labels in &catalog.labels {
        let mut row = Vec::with_capacity(labels.len());
        for l in labels {
            let id = match pool_index.get(l.as_str()) {
                Some(&id) => id,
                None => {
                    pool.push(l.clone());
                    let id = (pool.len() - 1) as u32;
                    pool_index.insert(pool.last().unwrap().as_str(), id);
                    id
                }
            };
            row.push(id);
        }
        refs.push(row);
    }
    // `pool_index` borrows `pool`; drop it before the pool moves into the sink
    drop(pool_index);
    sink.strings(&pool).map_err(io)?;
    sink.u32(refs.len() as u32).map_err(io)?;
    for row in &refs {
        sink.u32(row.len() as u32).map_err(io)?;
        for &id in row {
            sink.u32(id).map_err(io)?;
        }
    }
    sink.w.flush().map_err(io)?;
    Ok(())
}

/// Load a snapshot. When `expected_hash` is given, a mismatching artifact
/// is rejected rather than silently reused.
pub fn read_snapshot(
    path: impl AsRef<Path>,
    expected_hash: Option<&str>,
) -> Result<(RatingMatrix, ItemCatalog, String)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut src = Source {
        r: BufReader::new(file),
    };
    let io = |e: std::io::Error| Error::io(path, e);
    let bad = |reason: &str| Error::Format {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };

    let mut magic = [0u8; 8];
    src.r.read_exact(&mut magic).map_err(io)?;
    if &magic != MAGIC {
        return Err(bad("not a dataset snapshot (bad magic)"));
    }
    let header_len = src.u32().map_err(io)? as usize;
    let mut header_bytes = vec![0u8; header_len];
    src.r.read_exact(&mut header_bytes).map_err(io)?;
    let header: SnapshotHeader =
        serde_json::from_slice(&header_bytes).map_err(|e| bad(&format!("bad header: {e}")))?;
    if header.schema_version != SNAPSHOT_SCHEMA_VERSION {
        return Err(bad(&format!(
            "unsupported schema version {} (expected {})",
            header.schema_version, SNAPSHOT_SCHEMA_VERSION
        )));
    }
    if let Some(expected) = expected_hash {
        if header.config_hash != expected {
            return Err(Error::HashMismatch {
                path: path.to_path_buf(),
                found: header.config_hash,
                expected: expected.to_string(),
            });
        }
    }

    let user_ids = src.strings().map_err(io)?;
    let item_ids = src.strings().map_err(io)?;
    if user_ids.len() as u64 != header.n_users || item_ids.len() as u64 != header.n_items {
        return Err(bad("id table sizes disagree with header"));
    }
    let n_entries = header.n_entries as usize;
    let mut offsets = Vec::with_capacity(user_ids.len() + 1);
    for _ in 0..=user_ids.len() {
        offsets.push(src.u64().map_err(io)? as usize);
    }
    let mut items = Vec::with_capacity(n_entries);
    for _ in 0..n_entries {
        items.push(src.u32().map_err(io)?);
    }
    let mut ratings = Vec::with_capacity(n_entries);
    for _ in 0..n_entries {
        ratings.push(src.f32().map_err(io)?);
    }
    let mut times = Vec::with_capacity(n_entries);
    for _ in 0..n_entries {
        times.push(src.i64().map_err(io)?);
    }
    let mut seqs = Vec::with_capacity(n_entries);
    for _ in 0..n_entries {
        seqs.push(src.u32().map_err(io)?);
    }

    let titles = src.strings().map_err(io)?;
    let pool = src.strings().map_err(io)?;
    let n_label_rows = src.u32().map_err(io)? as usize;
    if titles.len() != item_ids.len() || n_label_rows != item_ids.len() {
        return Err(bad("catalog sizes disagree with item table"));
    }
    let mut labels = Vec::with_capacity(n_label_rows);
    for _ in 0..n_label_rows {
        let n = src.u32().map_err(io)? as usize;
        let mut row = Vec::with_capacity(n);
        for _ in 0..n {
            let id = src.u32().map_err(io)? as usize;
            let label = pool.get(id).ok_or_else(|| bad("label reference out of range"))?;
            row.push(label.clone());
        }
        labels.push(row);
    }

    let scale = RatingScale::new(header.scale_min, header.scale_max)?;
    let matrix = RatingMatrix::from_csr(
        user_ids,
        item_ids,
        scale,
        offsets,
        items,
        ratings,
        times,
        seqs,
        header.duplicates_dropped as usize,
    )?;
    let n_ratings = (0..matrix.n_items() as u32)
        .map(|i| matrix.item_rating_count(i) as u32)
        .collect();
    let global = matrix.global_mean().unwrap_or(0.0);
    let mean_rating = (0..matrix.n_items() as u32)
        .map(|i| matrix.item_mean(i).unwrap_or(global))
        .collect();
    let catalog = ItemCatalog {
        titles,
        labels,
        n_ratings,
        mean_rating,
    };
    Ok((matrix, catalog, header.config_hash))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_catalog, build_rating_matrix, Interaction};

    #[test]
    fn snapshot_round_trip() {
        let interactions = vec![
            Interaction {
                user_id: "a".into(),
                item_id: "x".into(),
                rating: 4.0,
                timestamp: 10,
            },
            Interaction {
                user_id: "a".into(),
                item_id: "y".into(),
                rating: 2.5,
                timestamp: 20,
            },
            Interaction {
                user_id: "b".into(),
                item_id: "x".into(),
                rating: 5.0,
                timestamp: 30,
            },
        ];
        let matrix = build_rating_matrix(&interactions, RatingScale::half_stars()).unwrap();
        let mut sidecar = crate::corpus::LabelSidecar::new();
        sidecar.insert(
            "x".into(),
            crate::corpus::SidecarEntry {
                title: Some("X item".into()),
                labels: vec!["toys".into(), "games".into()],
            },
        );
        let catalog = build_catalog(&matrix, Some(&sidecar));

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snap.bin");
        write_snapshot(&path, &matrix, &catalog, "deadbeef").unwrap();
        let (m2, c2, hash) = read_snapshot(&path, Some("deadbeef")).unwrap();

        assert_eq!(hash, "deadbeef");
        assert_eq!(m2.n_users(), matrix.n_users());
        assert_eq!(m2.n_items(), matrix.n_items());
        assert_eq!(m2.n_entries(), matrix.n_entries());
        for u in 0..matrix.n_users() as u32 {
            assert_eq!(m2.user_items(u), matrix.user_items(u));
            assert_eq!(m2.user_ratings(u), matrix.user_ratings(u));
            assert_eq!(m2.user_times(u), matrix.user_times(u));
        }
        assert_eq!(c2.titles, catalog.titles);
        assert_eq!(c2.labels, catalog.labels);
        assert_eq!(c2.mean_rating, catalog.mean_rating);
    }

    #[test]
    fn snapshot_hash_mismatch_rejected() {
        let interactions = vec![Interaction {
            user_id: "a".into(),
            item_id: "x".into(),
            rating: 4.0,
            timestamp: 0,
        }];
        let matrix = build_rating_matrix(&interactions, RatingScale::half_stars()).unwrap();
        let catalog = build_catalog(&matrix, None);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snap.bin");
        write_snapshot(&path, &matrix, &catalog, "aaaa").unwrap();
        assert!(matches!(
            read_snapshot(&path, Some("bbbb")),
            Err(Error::HashMismatch { .. })
        ));
    }
}
