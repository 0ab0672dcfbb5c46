//! Source-by-target score tables, dense or sparse, with the two on-disk
//! interchange formats:
//!
//! * `.simsp` — sparse text: header `#SIMSP v1 rows=<n> cols=<m>`, then
//!   `row_idx<TAB>col_idx<TAB>score` lines, plus `<path>.rows` /
//!   `<path>.cols` sidecars listing entity surfaces in order.
//! * `.easim` — dense binary: magic `EASIM\x01`, little-endian u32 row
//!   and col counts, length-prefixed UTF-8 surface tables, then
//!   rows x cols little-endian f32 scores in row-major order.
//!
//! Sparse cells that are absent mean "no evidence gathered", not an
//! observed zero; consumers decide how to treat them.

use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{io_err, Error, Result};

pub const EASIM_MAGIC: &[u8; 6] = b"EASIM\x01";
pub const SIMSP_VERSION: &str = "v1";

/// What the scores mean: raw encoder output on an arbitrary scale, or
/// values guaranteed to lie in [0,1] and usable as belief frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreDomain {
    Raw,
    FrequencyNormalized,
}

#[derive(Debug, Clone)]
enum Storage {
    /// Row-major, rows x cols entries.
    Dense(Vec<f64>),
    /// Sorted by (row, col), unique keys.
    Sparse(Vec<(u32, u32, f64)>),
}

/// A (source entity x target entity) score table. Row and column
/// identities are entity surface strings, kept in order.
#[derive(Debug, Clone)]
pub struct SimilarityMatrix {
    rows: Vec<String>,
    cols: Vec<String>,
    storage: Storage,
    domain: ScoreDomain,
}

impl SimilarityMatrix {
    pub fn new_dense(
        rows: Vec<String>,
        cols: Vec<String>,
        scores: Vec<f64>,
        domain: ScoreDomain,
    ) -> Result<Self> {
        if scores.len() != rows.len() * cols.len() {
            return Err(Error::Internal(format!(
                "dense storage needs {} scores, got {}",
                rows.len() * cols.len(),
                scores.len()
            )));
        }
        Ok(SimilarityMatrix {
            rows,
            cols,
            storage: Storage::Dense(scores),
            domain,
        })
    }

    /// Builds a sparse matrix; entries are sorted and must have unique
    /// (row, col) keys.
    pub fn new_sparse(
        rows: Vec<String>,
        cols: Vec<String>,
        mut entries: Vec<(u32, u32, f64)>,
        domain: ScoreDomain,
    ) -> Result<Self> {
        entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 && w[0].1 == w[1].1 {
                return Err(Error::Internal(format!(
                    "duplicate sparse entry at ({}, {})",
                    w[0].0, w[0].1
                )));
            }
        }
        for &(r, c, _) in &entries {
            if r as usize >= rows.len() || c as usize >= cols.len() {
                return Err(Error::Internal(format!(
                    "sparse entry ({r}, {c}) out of range"
                )));
            }
        }
        Ok(SimilarityMatrix {
            rows,
            cols,
            storage: Storage::Sparse(entries),
            domain,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn row_surfaces(&self) -> &[String] {
        &self.rows
    }

    pub fn col_surfaces(&self) -> &[String] {
        &self.cols
    }

    pub fn domain(&self) -> ScoreDomain {
        self.domain
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, Storage::Dense(_))
    }

    pub fn is_empty(&self) -> bool {
        match &self.storage {
            Storage::Dense(s) => s.is_empty(),
            Storage::Sparse(e) => e.is_empty(),
        }
    }

    /// Score at (row, col); absent sparse cells read as None.
    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        match &self.storage {
            Storage::Dense(s) => Some(s[row * self.cols.len() + col]),
            Storage::Sparse(e) => e
                .binary_search_by_key(&(row as u32, col as u32), |&(r, c, _)| (r, c))
                .ok()
                .map(|i| e[i].2),
        }
    }

    /// Score with absent-as-zero semantics (used for ranking).
    pub fn score_or_zero(&self, row: usize, col: usize) -> f64 {
        self.get(row, col).unwrap_or(0.0)
    }

    pub fn sparse_entries(&self) -> Option<&[(u32, u32, f64)]> {
        match &self.storage {
            Storage::Sparse(e) => Some(e),
            Storage::Dense(_) => None,
        }
    }

    /// Sparse entries of one row, as (col, score) pairs.
    pub fn sparse_row(&self, row: usize) -> &[(u32, u32, f64)] {
        match &self.storage {
            Storage::Sparse(e) => {
                let start = e.partition_point(|&(r, _, _)| r < row as u32);
                let end = e.partition_point(|&(r, _, _)| r <= row as u32);
                &e[start..end]
            }
            Storage::Dense(_) => &[],
        }
    }

    pub fn row_index(&self, surface: &str) -> Option<usize> {
        self.rows.iter().position(|s| s == surface)
    }

    /// Applies a monotone cellwise transform to stored scores.
    fn map_scores(mut self, f: impl Fn(f64) -> f64, domain: ScoreDomain) -> Self {
        match &mut self.storage {
            Storage::Dense(s) => s.iter_mut().for_each(|v| *v = f(*v)),
            Storage::Sparse(e) => e.iter_mut().for_each(|(_, _, v)| *v = f(*v)),
        }
        self.domain = domain;
        self
    }

    /// Global affine rescale of stored scores to [0,1]. A constant
    /// matrix maps to all 0.5. For sparse storage only the stored
    /// entries rescale; absent cells stay absent.
    pub fn minmax_to_frequency(self) -> Result<Self> {
        if self.is_empty() {
            return Err(Error::EmptyMatrix);
        }
        let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
        let mut visit = |v: f64| {
            min = min.min(v);
            max = max.max(v);
        };
        match &self.storage {
            Storage::Dense(s) => s.iter().copied().for_each(&mut visit),
            Storage::Sparse(e) => e.iter().map(|&(_, _, v)| v).for_each(&mut visit),
        }
        if max > min {
            let span = max - min;
            Ok(self.map_scores(|v| (v - min) / span, ScoreDomain::FrequencyNormalized))
        } else {
            Ok(self.map_scores(|_| 0.5, ScoreDomain::FrequencyNormalized))
        }
    }

    /// Per-row argmax (ties to the smaller column index); None for a
    /// sparse row with no entries.
    pub fn row_argmax(&self, row: usize) -> Option<(usize, f64)> {
        match &self.storage {
            Storage::Dense(s) => {
                let base = row * self.cols.len();
                let slice = &s[base..base + self.cols.len()];
                let mut best: Option<(usize, f64)> = None;
                for (c, &v) in slice.iter().enumerate() {
                    if best.is_none_or(|(_, bv)| v > bv) {
                        best = Some((c, v));
                    }
                }
                best
            }
            Storage::Sparse(_) => {
                let mut best: Option<(usize, f64)> = None;
                for &(_, c, v) in self.sparse_row(row) {
                    if best.is_none_or(|(_, bv)| v > bv) {
                        best = Some((c as usize, v));
                    }
                }
                best
            }
        }
    }

    /// Reindexes onto the given row/col surface orders, matching by
    /// surface. Surfaces absent from `self` contribute no entries
    /// (sparse) or 0.0 (dense).
    pub fn project_onto(&self, rows: &[String], cols: &[String]) -> SimilarityMatrix {
        use std::collections::HashMap;
        let row_of: HashMap<&str, u32> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i as u32))
            .collect();
        let col_of: HashMap<&str, u32> = self
            .cols
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i as u32))
            .collect();
        match &self.storage {
            Storage::Dense(_) => {
                let mut scores = vec![0.0; rows.len() * cols.len()];
                for (ri, rs) in rows.iter().enumerate() {
                    if let Some(&or) = row_of.get(rs.as_str()) {
                        for (ci, cs) in cols.iter().enumerate() {
                            if let Some(&oc) = col_of.get(cs.as_str()) {
                                scores[ri * cols.len() + ci] =
                                    self.get(or as usize, oc as usize).unwrap();
                            }
                        }
                    }
                }
                SimilarityMatrix {
                    rows: rows.to_vec(),
                    cols: cols.to_vec(),
                    storage: Storage::Dense(scores),
                    domain: self.domain,
                }
            }
            Storage::Sparse(entries) => {
                let new_row: HashMap<u32, u32> = rows
                    .iter()
                    .enumerate()
                    .filter_map(|(i, s)| row_of.get(s.as_str()).map(|&o| (o, i as u32)))
                    .collect();
                let new_col: HashMap<u32, u32> = cols
                    .iter()
                    .enumerate()
                    .filter_map(|(i, s)| col_of.get(s.as_str()).map(|&o| (o, i as u32)))
                    .collect();
                let mut out = Vec::new();
                for &(r, c, v) in entries {
                    if let (Some(&nr), Some(&nc)) = (new_row.get(&r), new_col.get(&c)) {
                        out.push((nr, nc, v));
                    }
                }
                out.sort_unstable_by_key(|&(r, c, _)| (r, c));
                SimilarityMatrix {
                    rows: rows.to_vec(),
                    cols: cols.to_vec(),
                    storage: Storage::Sparse(out),
                    domain: self.domain,
                }
            }
        }
    }

    /// Swaps rows and columns; used for reverse-direction ranking.
    pub fn transposed(&self) -> SimilarityMatrix {
        match &self.storage {
            Storage::Dense(s) => {
                let (nr, nc) = (self.rows.len(), self.cols.len());
                let mut t = vec![0.0; s.len()];
                for r in 0..nr {
                    for c in 0..nc {
                        t[c * nr + r] = s[r * nc + c];
                    }
                }
                SimilarityMatrix {
                    rows: self.cols.clone(),
                    cols: self.rows.clone(),
                    storage: Storage::Dense(t),
                    domain: self.domain,
                }
            }
            Storage::Sparse(e) => {
                let mut t: Vec<(u32, u32, f64)> = e.iter().map(|&(r, c, v)| (c, r, v)).collect();
                t.sort_unstable_by_key(|&(r, c, _)| (r, c));
                SimilarityMatrix {
                    rows: self.cols.clone(),
                    cols: self.rows.clone(),
                    storage: Storage::Sparse(t),
                    domain: self.domain,
                }
            }
        }
    }

    /// True when every stored score lies in [0,1].
    pub fn scores_in_unit_interval(&self) -> bool {
        let ok = |v: f64| (0.0..=1.0).contains(&v);
        match &self.storage {
            Storage::Dense(s) => s.iter().all(|&v| ok(v)),
            Storage::Sparse(e) => e.iter().all(|&(_, _, v)| ok(v)),
        }
    }
}

// ---------------------------------------------------------------------
// Sparse text format (.simsp + .rows/.cols sidecars)
// ---------------------------------------------------------------------

fn sidecar_paths(path: &Path) -> (std::path::PathBuf, std::path::PathBuf) {
    let mut rows = path.as_os_str().to_owned();
    rows.push(".rows");
    let mut cols = path.as_os_str().to_owned();
    cols.push(".cols");
    (rows.into(), cols.into())
}

/// Writes a sparse matrix and its two surface sidecars. Entries are
/// emitted sorted by (row, col); scores print in shortest round-trip
/// form so reading back reproduces the exact f64 values.
pub fn write_simsp(m: &SimilarityMatrix, path: &Path) -> Result<()> {
    let entries = m
        .sparse_entries()
        .ok_or_else(|| Error::Internal("write_simsp needs sparse storage".into()))?;
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut out = BufWriter::new(file);
    writeln!(
        out,
        "#SIMSP {} rows={} cols={}",
        SIMSP_VERSION,
        m.n_rows(),
        m.n_cols()
    )
    .map_err(io_err(path))?;
    for &(r, c, v) in entries {
        writeln!(out, "{r}\t{c}\t{v}").map_err(io_err(path))?;
    }
    out.flush().map_err(io_err(path))?;

    let (rows_path, cols_path) = sidecar_paths(path);
    crate::kg::write_lines(&rows_path, m.row_surfaces())?;
    crate::kg::write_lines(&cols_path, m.col_surfaces())
}

/// Reads a `.simsp` file plus sidecars. Scores must be finite; all
/// scores in [0,1] tag the matrix frequency-normalized, otherwise raw.
pub fn read_simsp(path: &Path) -> Result<SimilarityMatrix> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::MatrixHeader {
        path: path.to_owned(),
        reason: "empty file".into(),
    })?;
    let bad_header = |reason: &str| Error::MatrixHeader {
        path: path.to_owned(),
        reason: reason.to_string(),
    };
    let parts: Vec<&str> = header.split(' ').collect();
    if parts.len() != 4 || parts[0] != "#SIMSP" || parts[1] != SIMSP_VERSION {
        return Err(bad_header("expected `#SIMSP v1 rows=<n> cols=<m>`"));
    }
    let n_rows: usize = parts[2]
        .strip_prefix("rows=")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad_header("bad rows field"))?;
    let n_cols: usize = parts[3]
        .strip_prefix("cols=")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad_header("bad cols field"))?;

    let mut entries = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let entry_err = |reason: String| Error::SparseEntry {
            path: path.to_owned(),
            line: i + 1,
            reason,
        };
        if fields.len() != 3 {
            return Err(entry_err(format!(
                "expected 3 fields, found {}",
                fields.len()
            )));
        }
        let r: u32 = fields[0]
            .parse()
            .map_err(|_| entry_err("bad row index".into()))?;
        let c: u32 = fields[1]
            .parse()
            .map_err(|_| entry_err("bad col index".into()))?;
        let v: f64 = fields[2]
            .parse()
            .map_err(|_| entry_err("bad score".into()))?;
        if !v.is_finite() {
            return Err(entry_err("non-finite score".into()));
        }
        if r as usize >= n_rows || c as usize >= n_cols {
            return Err(entry_err(format!(
                "index ({r}, {c}) out of declared bounds"
            )));
        }
        entries.push((r, c, v));
    }

    let (rows_path, cols_path) = sidecar_paths(path);
    let rows = read_surface_lines(&rows_path)?;
    let cols = read_surface_lines(&cols_path)?;
    if rows.len() != n_rows {
        return Err(Error::DimensionMismatch {
            path: path.to_owned(),
            reason: format!(
                "header declares {} rows, sidecar lists {}",
                n_rows,
                rows.len()
            ),
        });
    }
    if cols.len() != n_cols {
        return Err(Error::DimensionMismatch {
            path: path.to_owned(),
            reason: format!(
                "header declares {} cols, sidecar lists {}",
                n_cols,
                cols.len()
            ),
        });
    }

    let mut m = SimilarityMatrix::new_sparse(rows, cols, entries, ScoreDomain::Raw)?;
    if m.scores_in_unit_interval() {
        m.domain = ScoreDomain::FrequencyNormalized;
    }
    Ok(m)
}

fn read_surface_lines(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    Ok(text.lines().map(str::to_owned).collect())
}

// ---------------------------------------------------------------------
// Dense binary format (.easim)
// ---------------------------------------------------------------------

/// Writes the dense binary interchange format. Scores are stored as
/// f32; an in-memory f64 matrix is truncated to f32 on write.
pub fn write_easim(m: &SimilarityMatrix, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut out = BufWriter::new(file);
    let mut w = |bytes: &[u8]| out.write_all(bytes).map_err(io_err(path));
    w(EASIM_MAGIC)?;
    w(&(m.n_rows() as u32).to_le_bytes())?;
    w(&(m.n_cols() as u32).to_le_bytes())?;
    for s in m.row_surfaces().iter().chain(m.col_surfaces()) {
        w(&(s.len() as u32).to_le_bytes())?;
        w(s.as_bytes())?;
    }
    for r in 0..m.n_rows() {
        for c in 0..m.n_cols() {
            w(&(m.score_or_zero(r, c) as f32).to_le_bytes())?;
        }
    }
    out.flush().map_err(io_err(path))
}

/// Reads the dense binary format; header errors, dimension mismatches,
/// and truncation are reported distinctly.
pub fn read_easim(path: &Path) -> Result<SimilarityMatrix> {
    let data = fs::read(path).map_err(io_err(path))?;
    let mut cursor = std::io::Cursor::new(&data);
    let header_err = |reason: &str| Error::MatrixHeader {
        path: path.to_owned(),
        reason: reason.to_string(),
    };

    let mut magic = [0u8; 6];
    cursor
        .read_exact(&mut magic)
        .map_err(|_| header_err("file shorter than magic"))?;
    if &magic != EASIM_MAGIC {
        return Err(header_err("bad magic"));
    }
    let mut u32buf = [0u8; 4];
    let mut read_u32 = |cursor: &mut std::io::Cursor<&Vec<u8>>, what: &str| {
        cursor
            .read_exact(&mut u32buf)
            .map_err(|_| header_err(&format!("truncated {what}")))?;
        Ok(u32::from_le_bytes(u32buf))
    };
    let n_rows = read_u32(&mut cursor, "row count")? as usize;
    let n_cols = read_u32(&mut cursor, "col count")? as usize;

    let read_surfaces =
        |cursor: &mut std::io::Cursor<&Vec<u8>>, count: usize, what: &str| -> Result<Vec<String>> {
            let mut out = Vec::with_capacity(count);
            for _ in 0..count {
                let mut lenbuf = [0u8; 4];
                cursor
                    .read_exact(&mut lenbuf)
                    .map_err(|_| Error::DimensionMismatch {
                        path: path.to_owned(),
                        reason: format!("surface table shorter than declared {what} count"),
                    })?;
                let len = u32::from_le_bytes(lenbuf) as usize;
                let mut buf = vec![0u8; len];
                cursor
                    .read_exact(&mut buf)
                    .map_err(|_| Error::DimensionMismatch {
                        path: path.to_owned(),
                        reason: format!("truncated {what} surface entry"),
                    })?;
                out.push(String::from_utf8(buf).map_err(|_| Error::MatrixHeader {
                    path: path.to_owned(),
                    reason: format!("non-UTF-8 {what} surface"),
                })?);
            }
            Ok(out)
        };
    let rows = read_surfaces(&mut cursor, n_rows, "row")?;
    let cols = read_surfaces(&mut cursor, n_cols, "col")?;

    let expected = (n_rows as u64) * (n_cols as u64) * 4;
    let offset = cursor.position();
    let found = data.len() as u64 - offset;
    if found != expected {
        return Err(Error::TruncatedPayload {
            path: path.to_owned(),
            expected,
            found,
        });
    }
    let mut scores = Vec::with_capacity(n_rows * n_cols);
    let payload = &data[offset as usize..];
    for (i, chunk) in payload.chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
        if !v.is_finite() {
            return Err(Error::NonFiniteScore {
                row: i / n_cols.max(1),
                col: i % n_cols.max(1),
            });
        }
        scores.push(v as f64);
    }

    SimilarityMatrix::new_dense(rows, cols, scores, ScoreDomain::Raw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::TempDir;

    fn surfaces(prefix: &str, n: usize) -> Vec<String> {
        (0..n).map(|i| format!("{prefix}{i}")).collect()
    }

    #[test]
    fn minmax_rescales_and_keeps_argmax() {
        let m = SimilarityMatrix::new_dense(
            surfaces("s", 1),
            surfaces("t", 3),
            vec![-1.0, 0.0, 1.0],
            ScoreDomain::Raw,
        )
        .unwrap();
        let before = m.row_argmax(0).unwrap().0;
        let m = m.minmax_to_frequency().unwrap();
        assert_eq!(m.get(0, 0), Some(0.0));
        assert_eq!(m.get(0, 1), Some(0.5));
        assert_eq!(m.get(0, 2), Some(1.0));
        assert_eq!(m.row_argmax(0).unwrap().0, before);
        assert_eq!(m.domain(), ScoreDomain::FrequencyNormalized);
    }

    #[test]
    fn constant_matrix_maps_to_half() {
        let m = SimilarityMatrix::new_dense(
            surfaces("s", 2),
            surfaces("t", 2),
            vec![3.0; 4],
            ScoreDomain::Raw,
        )
        .unwrap();
        let m = m.minmax_to_frequency().unwrap();
        for r in 0..2 {
            for c in 0..2 {
                assert_eq!(m.get(r, c), Some(0.5));
            }
        }
    }

    #[test]
    fn easim_round_trip_is_bit_exact() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("m.easim");
        let scores = vec![1.0f32, 0.0, 0.25, -3.5]
            .into_iter()
            .map(f64::from)
            .collect();
        let m = SimilarityMatrix::new_dense(
            surfaces("src/", 2),
            surfaces("tgt/", 2),
            scores,
            ScoreDomain::Raw,
        )
        .unwrap();
        write_easim(&m, &path).unwrap();
        let m2 = read_easim(&path).unwrap();
        assert_eq!(m2.row_surfaces(), m.row_surfaces());
        assert_eq!(m2.col_surfaces(), m.col_surfaces());
        for r in 0..2 {
            for c in 0..2 {
                assert_eq!(
                    m.get(r, c).unwrap().to_bits(),
                    m2.get(r, c).unwrap().to_bits()
                );
            }
        }
        let bytes1 = std::fs::read(&path).unwrap();
        let path2 = dir.path().join("m2.easim");
        write_easim(&m2, &path2).unwrap();
        assert_eq!(bytes1, std::fs::read(&path2).unwrap());
    }

    #[test]
    fn easim_truncation_detected() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("m.easim");
        let m = SimilarityMatrix::new_dense(
            surfaces("s", 2),
            surfaces("t", 2),
            vec![0.0; 4],
            ScoreDomain::Raw,
        )
        .unwrap();
        write_easim(&m, &path).unwrap();
        let mut bytes = fs::read(&path).unwrap();
        bytes.truncate(bytes.len() - 3);
        fs::write(&path, &bytes).unwrap();
        match read_easim(&path) {
            Err(Error::TruncatedPayload { .. }) => {}
            other => panic!("expected truncation error, got {other:?}"),
        }
    }

    #[test]
    fn easim_surface_table_shorter_than_declared() {
        // Header declares 3 rows but only 2 surfaces follow.
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("m.easim");
        let mut bytes = Vec::new();
        bytes.extend_from_slice(EASIM_MAGIC);
        bytes.extend_from_slice(&3u32.to_le_bytes());
        bytes.extend_from_slice(&1u32.to_le_bytes());
        for s in ["s0", "s1"] {
            bytes.extend_from_slice(&(s.len() as u32).to_le_bytes());
            bytes.extend_from_slice(s.as_bytes());
        }
        fs::write(&path, &bytes).unwrap();
        match read_easim(&path) {
            Err(Error::DimensionMismatch { .. }) => {}
            other => panic!("expected dimension mismatch, got {other:?}"),
        }
    }

    #[test]
    fn easim_bad_magic_is_header_error() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("m.easim");
        fs::write(&path, b"NOTEAS\x01rest").unwrap();
        match read_easim(&path) {
            Err(Error::MatrixHeader { .. }) => {}
            other => panic!("expected header error, got {other:?}"),
        }
    }

    #[test]
    fn simsp_round_trip_preserves_exact_scores() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("m.simsp");
        let entries = vec![(0, 1, 0.1 + 0.2), (1, 0, 1.0 / 3.0), (0, 0, 1.0)];
        let m = SimilarityMatrix::new_sparse(
            surfaces("s", 2),
            surfaces("t", 2),
            entries.clone(),
            ScoreDomain::FrequencyNormalized,
        )
        .unwrap();
        write_simsp(&m, &path).unwrap();
        let m2 = read_simsp(&path).unwrap();
        for (r, c, v) in entries {
            assert_eq!(m2.get(r as usize, c as usize), Some(v));
        }
        assert_eq!(m2.domain(), ScoreDomain::FrequencyNormalized);
    }

    #[test]
    fn simsp_header_mismatch_vs_sidecar() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("m.simsp");
        let m = SimilarityMatrix::new_sparse(
            surfaces("s", 3),
            surfaces("t", 2),
            vec![(0, 0, 0.5)],
            ScoreDomain::FrequencyNormalized,
        )
        .unwrap();
        write_simsp(&m, &path).unwrap();
        // Drop one surface from the rows sidecar.
        let rows_path = dir.path().join("m.simsp.rows");
        fs::write(&rows_path, "s0\ns1\n").unwrap();
        match read_simsp(&path) {
            Err(Error::DimensionMismatch { .. }) => {}
            other => panic!("expected dimension mismatch, got {other:?}"),
        }
    }

    #[test]
    fn projection_matches_by_surface() {
        let m = SimilarityMatrix::new_sparse(
            surfaces("s", 3),
            surfaces("t", 3),
            vec![(0, 0, 0.9), (1, 2, 0.4), (2, 1, 0.7)],
            ScoreDomain::FrequencyNormalized,
        )
        .unwrap();
        let rows = vec!["s2".to_string(), "s0".to_string(), "sX".to_string()];
        let cols = vec!["t1".to_string(), "t0".to_string()];
        let p = m.project_onto(&rows, &cols);
        assert_eq!(p.get(0, 0), Some(0.7)); // s2 x t1
        assert_eq!(p.get(1, 1), Some(0.9)); // s0 x t0
        assert_eq!(p.get(0, 1), None);
        assert_eq!(p.get(2, 0), None); // unknown surface row is empty
    }
}
