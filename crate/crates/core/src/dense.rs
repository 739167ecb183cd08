//! Dense matrices sized for sketches.
//!
//! Row-major storage with the kernels the samplers and solvers need:
//! multiplication, thin Householder QR, column-pivoted QR for rank detection
//! and triangular solves. Everything here is cubic-or-better and meant for
//! matrices of at most a few thousand per side.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            values: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.values[i * n + i] = 1.0;
        }
        m
    }

    /// Builds from row-major values, rejecting non-finite entries.
    pub fn from_values(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} values for {}x{}",
                values.len(),
                rows,
                cols
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(DenseMatrix { rows, cols, values })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                values.push(f(i, j));
            }
        }
        DenseMatrix { rows, cols, values }
    }

    pub fn diag(entries: &[f64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in entries.iter().enumerate() {
            m.values[i * n + i] = v;
        }
        m
    }

    /// Independent standard normal entries.
    pub fn gaussian(rows: usize, cols: usize, rng: &mut impl Rng) -> Self {
        let values = (0..rows * cols)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        DenseMatrix { rows, cols, values }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.values[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.values[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.values[j * self.rows + i] = self.values[i * self.cols + j];
            }
        }
        t
    }

    pub fn matmul(&self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul dims {}x{} * {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = &mut out.values[i * rhs.cols..(i + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.values[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                let rhs_row = &rhs.values[k * rhs.cols..(k + 1) * rhs.cols];
                for (o, r) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * r;
                }
            }
        }
        out
    }

    pub fn mat_vec(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(out.len(), self.rows);
        for i in 0..self.rows {
            let row = self.row(i);
            out[i] = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.values {
            *v *= s;
        }
    }

    pub fn sub(&self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.rows, rhs.rows);
        assert_eq!(self.cols, rhs.cols);
        let values = self
            .values
            .iter()
            .zip(&rhs.values)
            .map(|(a, b)| a - b)
            .collect();
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            values,
        }
    }

    pub fn frob_norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn frob_norm(&self) -> f64 {
        self.frob_norm_sq().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn select_columns(&self, cols: &[usize]) -> DenseMatrix {
        let mut out = Self::zeros(self.rows, cols.len());
        for i in 0..self.rows {
            for (p, &j) in cols.iter().enumerate() {
                out.values[i * cols.len() + p] = self.get(i, j);
            }
        }
        out
    }

    pub fn select_rows(&self, rows: &[usize]) -> DenseMatrix {
        let mut out = Self::zeros(rows.len(), self.cols);
        for (p, &i) in rows.iter().enumerate() {
            out.row_mut(p).copy_from_slice(self.row(i));
        }
        out
    }

    /// Thin Householder QR: `self = Q R` with `Q` of shape m x min(m,n) having
    /// orthonormal columns and `R` upper trapezoidal of shape min(m,n) x n.
    pub fn qr_thin(&self) -> (DenseMatrix, DenseMatrix) {
        let m = self.rows;
        let n = self.cols;
        let kdim = m.min(n);
        let mut work = self.clone();
        // Householder vectors stored per step.
        let mut vs: Vec<Vec<f64>> = Vec::with_capacity(kdim);
        for j in 0..kdim {
            let mut v = vec![0.0; m - j];
            for i in j..m {
                v[i - j] = work.get(i, j);
            }
            let alpha = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let alpha = if v[0] >= 0.0 { -alpha } else { alpha };
            if alpha == 0.0 {
                vs.push(Vec::new());
                continue;
            }
            v[0] -= alpha;
            let vnorm_sq: f64 = v.iter().map(|x| x * x).sum();
            if vnorm_sq == 0.0 {
                vs.push(Vec::new());
                continue;
            }
            // Apply I - 2 v vᵀ / (vᵀv) to the trailing block.
            for c in j..n {
                let mut dot = 0.0;
                for i in j..m {
                    dot += v[i - j] * work.get(i, c);
                }
                let f = 2.0 * dot / vnorm_sq;
                for i in j..m {
                    let w = work.get(i, c) - f * v[i - j];
                    work.set(i, c, w);
                }
            }
            vs.push(v);
        }
        let mut r = DenseMatrix::zeros(kdim, n);
        for i in 0..kdim {
            for j in i..n {
                r.set(i, j, work.get(i, j));
            }
        }
        // Accumulate Q = H_0 H_1 ... H_{k-1} applied to the first kdim columns
        // of the identity.
        let mut q = DenseMatrix::zeros(m, kdim);
        for c in 0..kdim {
            let mut e = vec![0.0; m];
            e[c] = 1.0;
            for j in (0..kdim).rev() {
                let v = &vs[j];
                if v.is_empty() {
                    continue;
                }
                let vnorm_sq: f64 = v.iter().map(|x| x * x).sum();
                let mut dot = 0.0;
                for i in j..m {
                    dot += v[i - j] * e[i];
                }
                let f = 2.0 * dot / vnorm_sq;
                for i in j..m {
                    e[i] -= f * v[i - j];
                }
            }
            for i in 0..m {
                q.set(i, c, e[i]);
            }
        }
        (q, r)
    }

    /// Column-pivoted QR used for rank detection and independent-column
    /// selection. Returns the pivot order and the numerical rank, judging
    /// `|R_jj| <= max(m,n) * |R_00| * 1e-12` as zero.
    pub fn qr_column_pivoted(&self) -> PivotedQr {
        let m = self.rows;
        let n = self.cols;
        let kdim = m.min(n);
        let mut work = self.clone();
        let mut pivots: Vec<usize> = (0..n).collect();
        let mut col_norms: Vec<f64> = (0..n)
            .map(|j| (0..m).map(|i| work.get(i, j).powi(2)).sum())
            .collect();
        let mut rdiag = Vec::with_capacity(kdim);
        for j in 0..kdim {
            // Recompute trailing norms rather than downdating them.
            for c in j..n {
                col_norms[c] = (j..m).map(|i| work.get(i, c).powi(2)).sum();
            }
            let best = (j..n)
                .max_by(|&a, &b| col_norms[a].total_cmp(&col_norms[b]))
                .unwrap();
            if best != j {
                for i in 0..m {
                    let t = work.get(i, j);
                    work.set(i, j, work.get(i, best));
                    work.set(i, best, t);
                }
                pivots.swap(j, best);
                col_norms.swap(j, best);
            }
            let mut v = vec![0.0; m - j];
            for i in j..m {
                v[i - j] = work.get(i, j);
            }
            let alpha = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let alpha = if v[0] >= 0.0 { -alpha } else { alpha };
            rdiag.push(alpha.abs());
            if alpha == 0.0 {
                continue;
            }
            v[0] -= alpha;
            let vnorm_sq: f64 = v.iter().map(|x| x * x).sum();
            if vnorm_sq == 0.0 {
                continue;
            }
            for c in j..n {
                let mut dot = 0.0;
                for i in j..m {
                    dot += v[i - j] * work.get(i, c);
                }
                let f = 2.0 * dot / vnorm_sq;
                for i in j..m {
                    let w = work.get(i, c) - f * v[i - j];
                    work.set(i, c, w);
                }
            }
            work.set(j, j, alpha);
        }
        let tol = m.max(n) as f64 * rdiag.first().copied().unwrap_or(0.0) * 1e-12;
        let rank = rdiag.iter().take_while(|&&d| d > tol).count();
        PivotedQr {
            pivots,
            rdiag,
            rank,
        }
    }

    /// Solves `self x = b` for symmetric positive definite `self` by
    /// Cholesky factorization.
    pub fn cholesky_solve(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        let n = self.rows;
        if self.cols != n || b.rows != n {
            return Err(Error::DimensionMismatch(
                "cholesky solve shapes".to_string(),
            ));
        }
        // Lower factor L with self = L Lᵀ.
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = self.get(i, j);
                for t in 0..j {
                    s -= l[i * n + t] * l[j * n + t];
                }
                if i == j {
                    if s <= 0.0 {
                        return Err(Error::RankDeficient);
                    }
                    l[i * n + i] = s.sqrt();
                } else {
                    l[i * n + j] = s / l[j * n + j];
                }
            }
        }
        let mut x = b.clone();
        for c in 0..b.cols {
            // Forward then backward substitution.
            for i in 0..n {
                let mut s = x.get(i, c);
                for t in 0..i {
                    s -= l[i * n + t] * x.get(t, c);
                }
                x.set(i, c, s / l[i * n + i]);
            }
            for i in (0..n).rev() {
                let mut s = x.get(i, c);
                for t in i + 1..n {
                    s -= l[t * n + i] * x.get(t, c);
                }
                x.set(i, c, s / l[i * n + i]);
            }
        }
        Ok(x)
    }

    /// Solves `R x = b` column by column for upper-triangular square `R`.
    pub fn solve_upper_triangular(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        let n = self.rows;
        if self.cols != n || b.rows != n {
            return Err(Error::DimensionMismatch(
                "triangular solve shapes".to_string(),
            ));
        }
        let mut x = b.clone();
        for c in 0..b.cols {
            for i in (0..n).rev() {
                let mut s = x.get(i, c);
                for j in i + 1..n {
                    s -= self.get(i, j) * x.get(j, c);
                }
                let d = self.get(i, i);
                if d.abs() == 0.0 {
                    return Err(Error::RankDeficient);
                }
                x.set(i, c, s / d);
            }
        }
        Ok(x)
    }
}

pub struct PivotedQr {
    pub pivots: Vec<usize>,
    pub rdiag: Vec<f64>,
    pub rank: usize,
}

/// Read access to a matrix by entry iteration, implemented by both the dense
/// type and the dynamic sparse sampler so sketching kernels can run on either.
pub trait MatrixView {
    fn view_rows(&self) -> usize;
    fn view_cols(&self) -> usize;
    fn view_nnz(&self) -> usize;
    fn for_each_entry(&self, f: &mut dyn FnMut(usize, usize, f64));
    fn for_each_row_entry(&self, i: usize, f: &mut dyn FnMut(usize, f64));

    /// `out = A_{i,*} W` for a dense `W`; used by rejection samplers.
    fn row_times(&self, i: usize, w: &DenseMatrix, out: &mut [f64]) {
        debug_assert_eq!(out.len(), w.cols());
        out.fill(0.0);
        self.for_each_row_entry(i, &mut |j, v| {
            let wr = w.row(j);
            for (o, x) in out.iter_mut().zip(wr) {
                *o += v * x;
            }
        });
    }
}

impl MatrixView for DenseMatrix {
    fn view_rows(&self) -> usize {
        self.rows
    }

    fn view_cols(&self) -> usize {
        self.cols
    }

    fn view_nnz(&self) -> usize {
        self.values.iter().filter(|v| **v != 0.0).count()
    }

    fn for_each_entry(&self, f: &mut dyn FnMut(usize, usize, f64)) {
        for i in 0..self.rows {
            for j in 0..self.cols {
                let v = self.values[i * self.cols + j];
                if v != 0.0 {
                    f(i, j, v);
                }
            }
        }
    }

    fn for_each_row_entry(&self, i: usize, f: &mut dyn FnMut(usize, f64)) {
        for (j, &v) in self.row(i).iter().enumerate() {
            if v != 0.0 {
                f(j, v);
            }
        }
    }
}

/// A column-subset view remapping selected columns onto `0..cols.len()`.
pub struct ColumnSubsetView<'a, M: MatrixView> {
    base: &'a M,
    cols: Vec<usize>,
    positions: std::collections::HashMap<usize, usize>,
}

impl<'a, M: MatrixView> ColumnSubsetView<'a, M> {
    pub fn new(base: &'a M, cols: &[usize]) -> Self {
        let positions = cols.iter().enumerate().map(|(p, &j)| (j, p)).collect();
        ColumnSubsetView {
            base,
            cols: cols.to_vec(),
            positions,
        }
    }
}

impl<M: MatrixView> MatrixView for ColumnSubsetView<'_, M> {
    fn view_rows(&self) -> usize {
        self.base.view_rows()
    }

    fn view_cols(&self) -> usize {
        self.cols.len()
    }

    fn view_nnz(&self) -> usize {
        let mut count = 0;
        self.base.for_each_entry(&mut |_, j, _| {
            if self.positions.contains_key(&j) {
                count += 1;
            }
        });
        count
    }

    fn for_each_entry(&self, f: &mut dyn FnMut(usize, usize, f64)) {
        self.base.for_each_entry(&mut |i, j, v| {
            if let Some(&p) = self.positions.get(&j) {
                f(i, p, v);
            }
        });
    }

    fn for_each_row_entry(&self, i: usize, f: &mut dyn FnMut(usize, f64)) {
        self.base.for_each_row_entry(i, &mut |j, v| {
            if let Some(&p) = self.positions.get(&j) {
                f(p, v);
            }
        });
    }
}

/// Materializes any view as a dense matrix.
pub fn materialize<M: MatrixView>(a: &M) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(a.view_rows(), a.view_cols());
    a.for_each_entry(&mut |i, j, v| out.set(i, j, v));
    out
}
