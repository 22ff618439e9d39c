//! Row-oriented matrices consumed by the clustering code.
//!
//! Clusterers are generic over [`Points`], so the same k-means and EM code runs
//! on the sparse TF-IDF matrix and on dense review embeddings.

use serde::{Deserialize, Serialize};

/// A borrowed matrix row.
#[derive(Debug, Clone, Copy)]
pub enum Row<'a> {
    Sparse { indices: &'a [usize], values: &'a [f64] },
    Dense(&'a [f64]),
}

impl<'a> Row<'a> {
    pub fn nnz(&self) -> usize {
        match self {
            Row::Sparse { indices, .. } => indices.len(),
            Row::Dense(v) => v.len(),
        }
    }

    /// Calls `f(column, value)` for every stored entry.
    #[inline]
    pub fn for_each(&self, mut f: impl FnMut(usize, f64)) {
        match *self {
            Row::Sparse { indices, values } => {
                for (&j, &v) in indices.iter().zip(values) {
                    f(j, v);
                }
            }
            Row::Dense(values) => {
                for (j, &v) in values.iter().enumerate() {
                    f(j, v);
                }
            }
        }
    }

    pub fn sq_norm(&self) -> f64 {
        let mut s = 0.0;
        self.for_each(|_, v| s += v * v);
        s
    }

    pub fn dot(&self, dense: &[f64]) -> f64 {
        let mut s = 0.0;
        self.for_each(|j, v| s += v * dense[j]);
        s
    }

    /// Squared Euclidean distance to a dense vector whose squared norm is
    /// `dense_sq_norm`. Dense rows are compared elementwise; sparse rows only
    /// touch their stored entries.
    pub fn sq_dist(&self, dense: &[f64], dense_sq_norm: f64) -> f64 {
        match *self {
            Row::Dense(values) => values.iter().zip(dense).map(|(a, b)| (a - b) * (a - b)).sum(),
            Row::Sparse { indices, values } => {
                let mut s = dense_sq_norm;
                for (&j, &v) in indices.iter().zip(values) {
                    let c = dense[j];
                    s += (v - c) * (v - c) - c * c;
                }
                s.max(0.0)
            }
        }
    }

    /// Exact squared distance, visiting every column of `dense`.
    pub fn sq_dist_exact(&self, dense: &[f64]) -> f64 {
        match *self {
            Row::Dense(values) => values.iter().zip(dense).map(|(a, b)| (a - b) * (a - b)).sum(),
            Row::Sparse { indices, values } => {
                let mut s = 0.0;
                let mut next = 0;
                for (j, &c) in dense.iter().enumerate() {
                    let x = if next < indices.len() && indices[next] == j {
                        next += 1;
                        values[next - 1]
                    } else {
                        0.0
                    };
                    s += (x - c) * (x - c);
                }
                s
            }
        }
    }

    pub fn add_scaled_to(&self, acc: &mut [f64], weight: f64) {
        self.for_each(|j, v| acc[j] += weight * v);
    }

    pub fn to_dense(&self, dim: usize) -> Vec<f64> {
        let mut out = vec![0.0; dim];
        self.for_each(|j, v| out[j] = v);
        out
    }

    /// Value at column `j` (zero when not stored).
    pub fn get(&self, j: usize) -> f64 {
        match *self {
            Row::Dense(values) => values[j],
            Row::Sparse { indices, values } => indices.binary_search(&j).map(|pos| values[pos]).unwrap_or(0.0),
        }
    }
}

/// Row access for clustering.
pub trait Points: Sync {
    fn n_rows(&self) -> usize;
    fn dim(&self) -> usize;
    fn row(&self, i: usize) -> Row<'_>;

    /// Rows that take part in fitting. Inactive rows still receive an assignment.
    fn is_active(&self, _i: usize) -> bool {
        true
    }

    fn active_rows(&self) -> Vec<usize> {
        (0..self.n_rows()).filter(|&i| self.is_active(i)).collect()
    }
}

/// Sparse row-major matrix (CSR).
///
/// As produced by TF-IDF featurization every stored value is finite and
/// positive, and every nonempty row has unit Euclidean norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
    row_norms: Vec<f64>,
}

impl FeatureMatrix {
    /// Builds a matrix from per-row `(column, value)` lists. Zeros are dropped
    /// and columns sorted; values are stored as given.
    pub fn from_rows(cols: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        let mut row_norms = Vec::with_capacity(rows.len());
        indptr.push(0);
        for mut row in rows {
            row.retain(|&(_, v)| v != 0.0);
            row.sort_by_key(|&(j, _)| j);
            let mut sq = 0.0;
            for (j, v) in row {
                assert!(j < cols, "column {j} out of range for {cols} columns");
                indices.push(j);
                values.push(v);
                sq += v * v;
            }
            row_norms.push(sq.sqrt());
            indptr.push(indices.len());
        }
        FeatureMatrix {
            rows: indptr.len() - 1,
            cols,
            indptr,
            indices,
            values,
            row_norms,
        }
    }

    /// Builds a sparse matrix from dense rows, dropping zeros.
    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let sparse = rows.iter().map(|r| r.iter().copied().enumerate().collect()).collect();
        Self::from_rows(cols, sparse)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_norm(&self, i: usize) -> f64 {
        self.row_norms[i]
    }

    pub fn row_indices(&self, i: usize) -> &[usize] {
        &self.indices[self.indptr[i]..self.indptr[i + 1]]
    }

    pub fn row_values(&self, i: usize) -> &[f64] {
        &self.values[self.indptr[i]..self.indptr[i + 1]]
    }

    pub fn is_empty_row(&self, i: usize) -> bool {
        self.indptr[i] == self.indptr[i + 1]
    }

    pub fn empty_rows(&self) -> Vec<usize> {
        (0..self.rows).filter(|&i| self.is_empty_row(i)).collect()
    }

    pub fn row_dense(&self, i: usize) -> Vec<f64> {
        self.row(i).to_dense(self.cols)
    }

    /// `(row, value)` pairs stored in column `j`, in row order.
    pub fn column(&self, j: usize) -> Vec<(usize, f64)> {
        (0..self.rows)
            .filter_map(|i| {
                let idx = self.row_indices(i);
                idx.binary_search(&j).ok().map(|pos| (i, self.row_values(i)[pos]))
            })
            .collect()
    }
}

impl Points for FeatureMatrix {
    fn n_rows(&self) -> usize {
        self.rows
    }

    fn dim(&self) -> usize {
        self.cols
    }

    fn row(&self, i: usize) -> Row<'_> {
        Row::Sparse {
            indices: self.row_indices(i),
            values: self.row_values(i),
        }
    }

    fn is_active(&self, i: usize) -> bool {
        !self.is_empty_row(i)
    }
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    /// Rows excluded from fitting (for instance zero embeddings).
    #[serde(default)]
    inactive: Vec<bool>,
}

impl DenseMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged dense rows");
            data.extend_from_slice(r);
        }
        DenseMatrix {
            rows: rows.len(),
            cols,
            data,
            inactive: vec![false; rows.len()],
        }
    }

    pub fn set_inactive(&mut self, i: usize, inactive: bool) {
        self.inactive[i] = inactive;
    }

    pub fn row_slice(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

impl Points for DenseMatrix {
    fn n_rows(&self) -> usize {
        self.rows
    }

    fn dim(&self) -> usize {
        self.cols
    }

    fn row(&self, i: usize) -> Row<'_> {
        Row::Dense(self.row_slice(i))
    }

    fn is_active(&self, i: usize) -> bool {
        !self.inactive[i]
    }
}

pub fn sq_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}
