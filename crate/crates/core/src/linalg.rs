//! Dense real matrices and vectors plus the handful of primitives the
//! estimators need: row selection, mixed `lp,q` norms, column normalization
//! and row-support extraction.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Default relative threshold for [`row_support`].
pub const DEFAULT_SUPPORT_TOL: f64 = 1e-4;

/// Row-major dense matrix with at least one row and one column.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Parameter(format!(
                "matrix must be at least 1x1, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "non-finite entry at ({}, {})",
                pos / cols,
                pos % cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Self::from_row_major(rows.len(), ncols, rows.concat())
    }

    /// Builds a matrix whose columns are the given equal-length vectors.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let ncols = columns.len();
        let nrows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != nrows) {
            return Err(Error::Dimension("columns differ in length".into()));
        }
        let mut data = Vec::with_capacity(nrows * ncols);
        for i in 0..nrows {
            data.extend(columns.iter().map(|c| c[i]));
        }
        Self::from_row_major(nrows, ncols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::from_row_major(rows, cols, vec![0.0; rows * cols])
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n, n)?;
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// `A x` with a fixed left-to-right summation order per row.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "matvec dimension");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `Aᵀ v`.
    pub fn t_matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.rows, "t_matvec dimension");
        let mut out = vec![0.0; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            if vi != 0.0 {
                axpy(vi, self.row(i), &mut out);
            }
        }
        out
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            data.extend((0..self.rows).map(|i| self.get(i, j)));
        }
        DenseMatrix {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    /// Euclidean norm of every row.
    pub fn row_norms(&self) -> Vec<f64> {
        (0..self.rows).map(|i| norm2(self.row(i))).collect()
    }

    pub fn column_norms(&self) -> Vec<f64> {
        let mut sq = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (s, v) in sq.iter_mut().zip(self.row(i)) {
                *s += v * v;
            }
        }
        sq.into_iter().map(f64::sqrt).collect()
    }

    /// Largest row `l1` norm, `‖A‖∞,1`.
    pub fn max_row_l1(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Column-wise mean, summed in column order.
    pub fn column_mean(&self) -> Vec<f64> {
        let k = self.cols as f64;
        (0..self.rows)
            .map(|i| self.row(i).iter().sum::<f64>() / k)
            .collect()
    }

    pub fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<f64>) -> Result<Self> {
        let mut data = Vec::with_capacity(m.nrows() * m.ncols());
        for i in 0..m.nrows() {
            data.extend(m.row(i).iter().copied());
        }
        Self::from_row_major(m.nrows(), m.ncols(), data)
    }
}

/// Dense vector with at least one entry.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseVector(Vec<f64>);

impl DenseVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Parameter("vector must have at least one entry".into()));
        }
        if let Some(pos) = entries.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite entry at {pos}")));
        }
        Ok(Self(entries))
    }

    pub fn zeros(len: usize) -> Result<Self> {
        Self::new(vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn norm2(&self) -> f64 {
        norm2(&self.0)
    }

    pub fn norm1(&self) -> f64 {
        self.0.iter().map(|v| v.abs()).sum()
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn select(&self, indices: &[usize]) -> Result<DenseVector> {
        let out = indices
            .iter()
            .map(|&i| {
                self.0
                    .get(i)
                    .copied()
                    .ok_or(Error::Index { index: i, len: self.0.len() })
            })
            .collect::<Result<Vec<_>>>()?;
        DenseVector::new(out)
    }
}

impl std::ops::Index<usize> for DenseVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Diagonal matrix `Q(M)` of reciprocal column norms, so that `M Q(M)` has unit columns.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationMatrix {
    diag: Vec<f64>,
}

impl NormalizationMatrix {
    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    /// Undoes the normalization: `normalized · Q⁻¹`.
    pub fn restore(&self, normalized: &DenseMatrix) -> Result<DenseMatrix> {
        if normalized.cols() != self.diag.len() {
            return Err(Error::Dimension(format!(
                "matrix has {} columns, normalization has {}",
                normalized.cols(),
                self.diag.len()
            )));
        }
        let mut data = normalized.as_slice().to_vec();
        for row in data.chunks_mut(normalized.cols()) {
            for (v, q) in row.iter_mut().zip(&self.diag) {
                *v /= q;
            }
        }
        DenseMatrix::from_row_major(normalized.rows(), normalized.cols(), data)
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[inline]
pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Mixed norm `‖X‖p,q = (Σ_i ‖row_i‖_q^p)^(1/p)` for `p, q ∈ {1, 2}`.
pub fn mixed_norm(x: &DenseMatrix, p: f64, q: f64) -> Result<f64> {
    let supported = |v: f64| v == 1.0 || v == 2.0;
    if !supported(p) || !supported(q) {
        return Err(Error::Parameter(format!(
            "mixed norm supports p, q in {{1, 2}}, got p={p}, q={q}"
        )));
    }
    let row_norm = |r: &[f64]| -> f64 {
        if q == 1.0 {
            r.iter().map(|v| v.abs()).sum()
        } else {
            norm2(r)
        }
    };
    let rows = (0..x.rows()).map(|i| row_norm(x.row(i)));
    Ok(if p == 1.0 {
        rows.sum()
    } else {
        rows.map(|v| v * v).sum::<f64>().sqrt()
    })
}

/// Stacks `a[indices[0]], a[indices[1]], …` in order; repeated indices repeat rows.
pub fn select_rows(a: &DenseMatrix, indices: &[usize]) -> Result<DenseMatrix> {
    if indices.is_empty() {
        return Err(Error::Parameter("row selection must be nonempty".into()));
    }
    let mut data = Vec::with_capacity(indices.len() * a.cols());
    for &i in indices {
        if i >= a.rows() {
            return Err(Error::Index { index: i, len: a.rows() });
        }
        data.extend_from_slice(a.row(i));
    }
    DenseMatrix::from_row_major(indices.len(), a.cols(), data)
}

/// Scales every column of `m` to unit Euclidean norm, returning the scaled
/// matrix and the diagonal normalization used.
pub fn normalize_columns(m: &DenseMatrix) -> Result<(DenseMatrix, NormalizationMatrix)> {
    let norms = m.column_norms();
    if let Some(j) = norms.iter().position(|&v| v == 0.0) {
        return Err(Error::DegenerateColumn(j));
    }
    let diag: Vec<f64> = norms.iter().map(|v| 1.0 / v).collect();
    let mut data = m.as_slice().to_vec();
    for row in data.chunks_mut(m.cols()) {
        for (v, n) in row.iter_mut().zip(&norms) {
            *v /= n;
        }
    }
    Ok((
        DenseMatrix::from_row_major(m.rows(), m.cols(), data)?,
        NormalizationMatrix { diag },
    ))
}

/// Indices of rows whose Euclidean norm exceeds `rel_tol` times the largest row norm.
pub fn row_support(x: &DenseMatrix, rel_tol: f64) -> Vec<usize> {
    let norms = x.row_norms();
    let max = norms.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return Vec::new();
    }
    let threshold = rel_tol * max;
    norms
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > threshold)
        .map(|(i, _)| i)
        .collect()
}

/// Support of a single vector, using the same relative rule as [`row_support`].
pub fn vector_support(x: &[f64], rel_tol: f64) -> Vec<usize> {
    let max = x.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    if max == 0.0 {
        return Vec::new();
    }
    x.iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > rel_tol * max)
        .map(|(i, _)| i)
        .collect()
}
