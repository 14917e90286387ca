use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Row pointers and strictly increasing column indices. Shared between every
/// matrix assembled on the same pair of spaces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsityPattern {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
}

impl SparsityPattern {
    /// Builds a pattern from per-row column lists (unsorted, duplicates allowed).
    pub fn from_rows(ncols: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        let nrows = rows.len();
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        for mut r in rows {
            r.sort_unstable();
            r.dedup();
            if let Some(&last) = r.last() {
                if last >= ncols {
                    return Err(Error::DimensionMismatch(format!("column {last} out of range {ncols}")));
                }
            }
            col_idx.extend_from_slice(&r);
            row_ptr.push(col_idx.len());
        }
        Ok(SparsityPattern { nrows, ncols, row_ptr, col_idx })
    }

    pub fn identity(n: usize) -> Self {
        SparsityPattern { nrows: n, ncols: n, row_ptr: (0..=n).collect(), col_idx: (0..n).collect() }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn row_range(&self, i: usize) -> core::ops::Range<usize> {
        self.row_ptr[i]..self.row_ptr[i + 1]
    }

    /// Position of entry `(i, j)` in the value array.
    pub fn find(&self, i: usize, j: usize) -> Option<usize> {
        let r = self.row_range(i);
        self.col_idx[r.clone()].binary_search(&j).ok().map(|k| r.start + k)
    }
}

/// Compressed sparse row matrix whose sparsity pattern is frozen once built;
/// only the values change afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pattern: Arc<SparsityPattern>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(pattern: Arc<SparsityPattern>) -> Self {
        let values = vec![0.0; pattern.nnz()];
        CsrMatrix { pattern, values }
    }

    pub fn from_parts(pattern: Arc<SparsityPattern>, values: Vec<f64>) -> Result<Self> {
        if values.len() != pattern.nnz() {
            return Err(Error::DimensionMismatch(format!("{} values for {} entries", values.len(), pattern.nnz())));
        }
        Ok(CsrMatrix { pattern, values })
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix { pattern: Arc::new(SparsityPattern::identity(n)), values: vec![1.0; n] }
    }

    /// Builds a matrix from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut rows = vec![Vec::new(); nrows];
        for &(i, j, _) in triplets {
            if i >= nrows {
                return Err(Error::DimensionMismatch(format!("row {i} out of range {nrows}")));
            }
            rows[i].push(j);
        }
        let pattern = Arc::new(SparsityPattern::from_rows(ncols, rows)?);
        let mut m = CsrMatrix::zeros(pattern);
        for &(i, j, v) in triplets {
            let k = m.pattern.find(i, j).expect("entry in pattern");
            m.values[k] += v;
        }
        Ok(m)
    }

    /// Dense row-major array (oracle and test use).
    pub fn from_dense(nrows: usize, ncols: usize, dense: &[f64]) -> Self {
        let triplets: Vec<_> = (0..nrows)
            .flat_map(|i| (0..ncols).map(move |j| (i, j)))
            .filter(|&(i, j)| dense[i * ncols + j] != 0.0)
            .map(|(i, j)| (i, j, dense[i * ncols + j]))
            .collect();
        Self::from_triplets(nrows, ncols, &triplets).expect("indices in range")
    }

    pub fn pattern(&self) -> &Arc<SparsityPattern> {
        &self.pattern
    }

    pub fn nrows(&self) -> usize {
        self.pattern.nrows
    }

    pub fn ncols(&self) -> usize {
        self.pattern.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.pattern.find(i, j).map_or(0.0, |k| self.values[k])
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.pattern.row_range(i);
        (&self.pattern.col_idx[r.clone()], &self.values[r])
    }

    pub fn same_pattern(&self, other: &CsrMatrix) -> bool {
        Arc::ptr_eq(&self.pattern, &other.pattern) || *self.pattern == *other.pattern
    }

    pub fn set_zero(&mut self) {
        self.values.iter_mut().for_each(|v| *v = 0.0);
    }

    /// `y = A x`
    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        if x.len() != self.ncols() || y.len() != self.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix with x of length {} and y of length {}",
                self.nrows(),
                self.ncols(),
                x.len(),
                y.len()
            )));
        }
        let p = &*self.pattern;
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in p.row_ptr[i]..p.row_ptr[i + 1] {
                s += self.values[k] * x[p.col_idx[k]];
            }
            *yi = s;
        }
        Ok(())
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.nrows()];
        self.matvec_into(x, &mut y)?;
        Ok(y)
    }

    /// `y += alpha A x`
    pub fn matvec_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) -> Result<()> {
        if x.len() != self.ncols() || y.len() != self.nrows() {
            return Err(Error::DimensionMismatch(format!("matvec_add on {}x{}", self.nrows(), self.ncols())));
        }
        let p = &*self.pattern;
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in p.row_ptr[i]..p.row_ptr[i + 1] {
                s += self.values[k] * x[p.col_idx[k]];
            }
            *yi += alpha * s;
        }
        Ok(())
    }

    /// `y = A^T x`
    pub fn transpose_matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.nrows() {
            return Err(Error::DimensionMismatch(format!("transpose matvec on {}x{}", self.nrows(), self.ncols())));
        }
        let mut y = vec![0.0; self.ncols()];
        let p = &*self.pattern;
        for (i, &xi) in x.iter().enumerate() {
            for k in p.row_ptr[i]..p.row_ptr[i + 1] {
                y[p.col_idx[k]] += self.values[k] * xi;
            }
        }
        Ok(y)
    }

    /// `A += alpha B` on identical patterns. The pattern is never widened.
    pub fn axpy(&mut self, alpha: f64, b: &CsrMatrix) -> Result<()> {
        if !self.same_pattern(b) {
            return Err(Error::PatternMismatch(format!(
                "axpy needs identical patterns ({} vs {} entries)",
                self.nnz(),
                b.nnz()
            )));
        }
        let nnz = self.nnz();
        for (a, &bv) in self.values.iter_mut().zip(&b.values) {
            *a += alpha * bv;
        }
        debug_assert_eq!(nnz, self.nnz());
        Ok(())
    }

    pub fn scale(&mut self, alpha: f64) {
        self.values.iter_mut().for_each(|v| *v *= alpha);
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows().min(self.ncols())).map(|i| self.get(i, i)).collect()
    }

    /// Row-sum lumping.
    pub fn lump(&self) -> Vec<f64> {
        (0..self.nrows()).map(|i| self.row(i).1.iter().sum()).collect()
    }

    /// Zeroes rows `rows` and puts 1 on their diagonal (row-only Dirichlet).
    pub fn set_identity_rows(&mut self, rows: &[usize]) -> Result<()> {
        for &i in rows {
            let r = self.pattern.row_range(i);
            let d = self
                .pattern
                .find(i, i)
                .ok_or_else(|| Error::PatternMismatch(format!("row {i} has no diagonal entry")))?;
            self.values[r].iter_mut().for_each(|v| *v = 0.0);
            self.values[d] = 1.0;
        }
        Ok(())
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut triplets = Vec::with_capacity(self.nnz());
        for i in 0..self.nrows() {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                triplets.push((j, i, v));
            }
        }
        CsrMatrix::from_triplets(self.ncols(), self.nrows(), &triplets).expect("transpose indices in range")
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.ncols();
        let mut d = vec![0.0; self.nrows() * n];
        for i in 0..self.nrows() {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                d[i * n + j] = v;
            }
        }
        d
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}
