//! Sparse symmetric matrices and Matrix Market coordinate i/o.
//!
//! All system matrices in this crate are square, symmetric, and stored with
//! their full pattern in CSR so that matrix-vector products and quadratic
//! forms are cheap. Assembly and file i/o go through [`CooMatrix`].

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Relative asymmetry above which a matrix is rejected instead of symmetrized.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Square matrix in triplet form, used for assembly and file exchange.
#[derive(Debug, Clone)]
pub struct CooMatrix {
    dim: usize,
    triplets: Vec<(usize, usize, f64)>,
}

impl CooMatrix {
    pub fn new(dim: usize) -> Self {
        CooMatrix {
            dim,
            triplets: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Adds `value` at `(row, col)`. Duplicates accumulate.
    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.dim && col < self.dim);
        self.triplets.push((row, col, value));
    }

    /// Adds `value` at `(row, col)` and, when off-diagonal, at `(col, row)`.
    pub fn push_sym(&mut self, row: usize, col: usize, value: f64) {
        self.push(row, col, value);
        if row != col {
            self.push(col, row, value);
        }
    }

    pub fn triplets(&self) -> &[(usize, usize, f64)] {
        &self.triplets
    }
}

/// Symmetric sparse matrix in CSR with the full (both triangles) pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSymMatrix {
    /// Builds from triplet data, summing duplicates.
    ///
    /// The input must be symmetric to within [`SYMMETRY_TOL`] relative
    /// asymmetry; small asymmetries are removed by averaging `A` with its
    /// transpose, larger ones are an error naming `field`.
    pub fn from_coo(coo: &CooMatrix, field: &str) -> Result<Self> {
        let n = coo.dim;
        // Dedup triplets into a sorted map per row.
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(i, j, v) in &coo.triplets {
            if i >= n || j >= n {
                return Err(Error::DimensionMismatch {
                    context: format!("{field} triplet index"),
                    expected: n,
                    got: i.max(j),
                });
            }
            if !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name: field.to_string(),
                    reason: format!("non-finite entry at ({i}, {j})"),
                });
            }
            rows[i].push((j, v));
        }
        for row in rows.iter_mut() {
            row.sort_unstable_by_key(|&(j, _)| j);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for &(j, v) in row.iter() {
                match merged.last_mut() {
                    Some(last) if last.0 == j => last.1 += v,
                    _ => merged.push((j, v)),
                }
            }
            *row = merged;
        }

        // Measure asymmetry and symmetrize in place: store (a_ij + a_ji) / 2.
        let entry = |rows: &Vec<Vec<(usize, f64)>>, i: usize, j: usize| -> f64 {
            match rows[i].binary_search_by_key(&j, |&(c, _)| c) {
                Ok(pos) => rows[i][pos].1,
                Err(_) => 0.0,
            }
        };
        let mut max_entry: f64 = 0.0;
        let mut max_asym: f64 = 0.0;
        for i in 0..n {
            for &(j, v) in &rows[i] {
                max_entry = max_entry.max(v.abs());
                if j != i {
                    let vt = entry(&rows, j, i);
                    max_asym = max_asym.max((v - vt).abs());
                }
            }
        }
        let scale = if max_entry > 0.0 { max_entry } else { 1.0 };
        if max_asym > SYMMETRY_TOL * scale {
            return Err(Error::NotSymmetric {
                field: field.to_string(),
                asymmetry: max_asym / scale,
            });
        }

        // Union pattern of A and A^T with averaged values.
        let mut sym_rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for i in 0..n {
            for &(j, v) in &rows[i] {
                let avg = 0.5 * (v + entry(&rows, j, i));
                sym_rows[i].push((j, avg));
                if entry(&rows, j, i) == 0.0 && i != j {
                    sym_rows[j].push((i, avg));
                }
            }
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for row in sym_rows.iter_mut() {
            row.sort_unstable_by_key(|&(j, _)| j);
            row.dedup_by(|a, b| {
                if a.0 == b.0 {
                    b.1 = a.1;
                    true
                } else {
                    false
                }
            });
            for &(j, v) in row.iter() {
                col_idx.push(j);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Ok(SparseSymMatrix {
            dim: n,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Identity scaled by `s`.
    pub fn scaled_identity(dim: usize, s: f64) -> Self {
        SparseSymMatrix {
            dim,
            row_ptr: (0..=dim).collect(),
            col_idx: (0..dim).collect(),
            values: vec![s; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Iterates over stored entries `(row, col, value)`, both triangles.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (i, self.col_idx[k], self.values[k]))
        })
    }

    /// `out = A v`.
    pub fn mul_vec(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        for i in 0..self.dim {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * v[self.col_idx[k]];
            }
            out[i] = acc;
        }
    }

    /// `out += coef * A v`.
    pub fn mul_vec_add(&self, coef: f64, v: &[f64], out: &mut [f64]) {
        for i in 0..self.dim {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * v[self.col_idx[k]];
            }
            out[i] += coef * acc;
        }
    }

    /// Quadratic form `v^T A v`.
    pub fn quad_form(&self, v: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.dim {
            let mut row = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                row += self.values[k] * v[self.col_idx[k]];
            }
            acc += v[i] * row;
        }
        acc
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Maximum over rows of `row - min column index in that row`; the
    /// half-bandwidth used by the banded Cholesky factorization.
    pub fn lower_bandwidth(&self) -> usize {
        let mut bw = 0;
        for i in 0..self.dim {
            if self.row_ptr[i] < self.row_ptr[i + 1] {
                let jmin = self.col_idx[self.row_ptr[i]];
                if jmin < i {
                    bw = bw.max(i - jmin);
                }
            }
        }
        bw
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (i, j, v) in self.iter() {
            m[(i, j)] = v;
        }
        m
    }

    /// `dense += coef * A`.
    pub fn add_scaled_to_dense(&self, coef: f64, dense: &mut DMatrix<f64>) {
        for (i, j, v) in self.iter() {
            dense[(i, j)] += coef * v;
        }
    }

    /// Entry lookup; zero for positions outside the pattern.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        match self.col_idx[lo..hi].binary_search(&j) {
            Ok(pos) => self.values[lo + pos],
            Err(_) => 0.0,
        }
    }
}

/// Reads a real Matrix Market coordinate file (general or symmetric).
pub fn read_matrix_market(path: &Path) -> Result<CooMatrix> {
    let display = path.display().to_string();
    let file = File::open(path).map_err(|e| Error::Io {
        path: display.clone(),
        source: e,
    })?;
    let reader = BufReader::new(file);
    let err = |line: usize, reason: &str| Error::MatrixMarket {
        path: display.clone(),
        line,
        reason: reason.to_string(),
    };

    let mut lines = reader.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| err(1, "empty file"))?
        .1
        .map_err(|e| Error::Io {
            path: display.clone(),
            source: e,
        })
        .map(|h| (0usize, h))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() < 5 || fields[0] != "%%MatrixMarket" || fields[1] != "matrix" {
        return Err(err(1, "header must start with '%%MatrixMarket matrix'"));
    }
    if fields[2] != "coordinate" {
        return Err(err(1, "only coordinate format is supported"));
    }
    if fields[3] != "real" {
        return Err(err(1, "only real-valued matrices are supported"));
    }
    let symmetric = match fields[4] {
        "general" => false,
        "symmetric" => true,
        _ => return Err(err(1, "qualifier must be 'general' or 'symmetric'")),
    };

    let mut coo: Option<CooMatrix> = None;
    let mut expected_nnz = 0usize;
    let mut seen_nnz = 0usize;
    for (idx, line) in lines {
        let line = line.map_err(|e| Error::Io {
            path: display.clone(),
            source: e,
        })?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let mut parts = trimmed.split_whitespace();
        if coo.is_none() {
            let rows: usize = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| err(lineno, "bad row count"))?;
            let cols: usize = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| err(lineno, "bad column count"))?;
            expected_nnz = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| err(lineno, "bad entry count"))?;
            if rows != cols {
                return Err(err(lineno, "matrix must be square"));
            }
            coo = Some(CooMatrix::new(rows));
            continue;
        }
        let coo_ref = coo.as_mut().unwrap();
        let i: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| err(lineno, "bad row index"))?;
        let j: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| err(lineno, "bad column index"))?;
        let v: f64 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| err(lineno, "bad value"))?;
        if i == 0 || j == 0 || i > coo_ref.dim || j > coo_ref.dim {
            return Err(err(lineno, "index out of range (indices are 1-based)"));
        }
        if symmetric && j > i {
            return Err(err(lineno, "symmetric files must store the lower triangle"));
        }
        seen_nnz += 1;
        if symmetric {
            coo_ref.push_sym(i - 1, j - 1, v);
        } else {
            coo_ref.push(i - 1, j - 1, v);
        }
    }
    let coo = coo.ok_or_else(|| err(1, "missing size line"))?;
    if seen_nnz != expected_nnz {
        return Err(Error::MatrixMarket {
            path: display,
            line: 0,
            reason: format!("expected {expected_nnz} entries, found {seen_nnz}"),
        });
    }
    Ok(coo)
}

/// Writes the lower triangle of a symmetric matrix in Matrix Market
/// coordinate format. Values use Rust's shortest round-trip float notation,
/// so read-after-write reproduces every entry bit-exactly.
pub fn write_matrix_market(matrix: &SparseSymMatrix, path: &Path) -> Result<()> {
    let display = path.display().to_string();
    let file = File::create(path).map_err(|e| Error::Io {
        path: display.clone(),
        source: e,
    })?;
    let mut w = BufWriter::new(file);
    let mut lower: Vec<(usize, usize, f64)> = matrix.iter().filter(|&(i, j, _)| j <= i).collect();
    lower.sort_unstable_by_key(|&(i, j, _)| (i, j));
    let mut out = String::new();
    out.push_str("%%MatrixMarket matrix coordinate real symmetric\n");
    out.push_str(&format!("{} {} {}\n", matrix.dim(), matrix.dim(), lower.len()));
    for (i, j, v) in lower {
        out.push_str(&format!("{} {} {}\n", i + 1, j + 1, v));
    }
    w.write_all(out.as_bytes()).map_err(|e| Error::Io {
        path: display,
        source: e,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn small_sym() -> SparseSymMatrix {
        let mut coo = CooMatrix::new(3);
        coo.push_sym(0, 0, 2.0);
        coo.push_sym(1, 1, 3.0);
        coo.push_sym(2, 2, 4.0);
        coo.push_sym(1, 0, -1.0);
        coo.push_sym(2, 1, 0.5);
        SparseSymMatrix::from_coo(&coo, "test").unwrap()
    }

    #[test]
    fn matvec_and_quad_form_match_dense() {
        let a = small_sym();
        let d = a.to_dense();
        let v = vec![1.0, -2.0, 0.5];
        let mut out = vec![0.0; 3];
        a.mul_vec(&v, &mut out);
        let dv = &d * nalgebra::DVector::from_column_slice(&v);
        for i in 0..3 {
            assert!((out[i] - dv[i]).abs() < 1e-14);
        }
        let q = a.quad_form(&v);
        let qd = nalgebra::DVector::from_column_slice(&v).dot(&dv);
        assert!((q - qd).abs() < 1e-14);
    }

    #[test]
    fn duplicates_accumulate() {
        let mut coo = CooMatrix::new(2);
        coo.push(0, 0, 1.0);
        coo.push(0, 0, 2.5);
        let a = SparseSymMatrix::from_coo(&coo, "dup").unwrap();
        assert_eq!(a.get(0, 0), 3.5);
    }

    #[test]
    fn asymmetric_input_rejected() {
        let mut coo = CooMatrix::new(2);
        coo.push(0, 1, 1.0);
        coo.push(1, 0, 0.5);
        let err = SparseSymMatrix::from_coo(&coo, "f_1").unwrap_err();
        match err {
            Error::NotSymmetric { field, .. } => assert_eq!(field, "f_1"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn tiny_asymmetry_is_averaged() {
        let mut coo = CooMatrix::new(2);
        coo.push(0, 1, 1.0);
        coo.push(1, 0, 1.0 + 1e-15);
        let a = SparseSymMatrix::from_coo(&coo, "f_1").unwrap();
        assert!((a.get(0, 1) - a.get(1, 0)).abs() == 0.0);
    }

    #[test]
    fn matrix_market_round_trip_is_exact() {
        let a = small_sym();
        let dir = tempdir().unwrap();
        let path = dir.path().join("a.mtx");
        write_matrix_market(&a, &path).unwrap();
        let coo = read_matrix_market(&path).unwrap();
        let b = SparseSymMatrix::from_coo(&coo, "roundtrip").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn matrix_market_rejects_bad_header() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.mtx");
        std::fs::write(&path, "%%MatrixMarket matrix array real general\n1 1\n1.0\n").unwrap();
        assert!(read_matrix_market(&path).is_err());
    }

    #[test]
    fn matrix_market_reads_general_files() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("g.mtx");
        std::fs::write(
            &path,
            "%%MatrixMarket matrix coordinate real general\n% comment\n2 2 3\n1 1 2.0\n1 2 1.0\n2 1 1.0\n",
        )
        .unwrap();
        let coo = read_matrix_market(&path).unwrap();
        let a = SparseSymMatrix::from_coo(&coo, "g").unwrap();
        assert_eq!(a.get(0, 1), 1.0);
        assert_eq!(a.get(0, 0), 2.0);
    }

    #[test]
    fn bandwidth_reflects_pattern() {
        let a = small_sym();
        assert_eq!(a.lower_bandwidth(), 1);
    }
}
