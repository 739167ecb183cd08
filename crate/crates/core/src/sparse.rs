//! Coordinate sparse matrix with set-style turnstile updates. Zero writes
//! delete the entry, so the map only ever stores nonzeros.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::BuildHasherDefault;

use crate::dense::DenseMatrix;
use crate::{Error, Result};

/// Deterministically seeded map: iteration order depends only on the
/// insertion sequence, so runs with the same seed reproduce bit-identical
/// results.
type EntryMap = HashMap<(usize, usize), f64, BuildHasherDefault<DefaultHasher>>;

#[derive(Clone, Debug, Default)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    entries: EntryMap,
}

impl SparseMatrix {
    pub fn new(n_rows: usize, n_cols: usize) -> Self {
        SparseMatrix {
            n_rows,
            n_cols,
            entries: EntryMap::default(),
        }
    }

    /// Builds from coordinate triplets, summing duplicates.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut m = Self::new(n_rows, n_cols);
        for (i, j, v) in triplets {
            m.check_bounds(i, j)?;
            if !v.is_finite() {
                return Err(Error::NonFinite);
            }
            let slot = m.entries.entry((i, j)).or_insert(0.0);
            *slot += v;
            if *slot == 0.0 {
                m.entries.remove(&(i, j));
            }
        }
        Ok(m)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries.get(&(i, j)).copied().unwrap_or(0.0)
    }

    /// Sets `A_ij = v`; zero deletes. Returns the previous value.
    pub fn set(&mut self, i: usize, j: usize, v: f64) -> Result<f64> {
        self.check_bounds(i, j)?;
        if !v.is_finite() {
            return Err(Error::NonFinite);
        }
        let old = if v == 0.0 {
            self.entries.remove(&(i, j)).unwrap_or(0.0)
        } else {
            self.entries.insert((i, j), v).unwrap_or(0.0)
        };
        Ok(old)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.entries.iter().map(|(&(i, j), &v)| (i, j, v))
    }

    pub fn frob_norm_sq(&self) -> f64 {
        self.entries.values().map(|v| v * v).sum()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.n_rows, self.n_cols);
        for (&(i, j), &v) in &self.entries {
            m.set(i, j, v);
        }
        m
    }

    pub fn check_bounds(&self, i: usize, j: usize) -> Result<()> {
        if i >= self.n_rows || j >= self.n_cols {
            return Err(Error::IndexOutOfBounds {
                row: i,
                col: j,
                rows: self.n_rows,
                cols: self.n_cols,
            });
        }
        Ok(())
    }
}
