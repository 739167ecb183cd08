//! The dynamic sampling structure: a sparse matrix kept consistent with one
//! weighted tree per nonempty row (over entry values) and a length tree over
//! row norms. Supports turnstile updates in O(log(nd)) and length-squared
//! row, entry and column-of-SA sampling.

use rand::Rng;

use crate::dense::{DenseMatrix, MatrixView};
use crate::sparse::SparseMatrix;
use crate::tree::WeightedTree;
use crate::{Error, Result};

/// One sampled index with the probability it was drawn under and the
/// rescaling `1/sqrt(p * m)` that makes the sketch unbiased.
#[derive(Clone, Copy, Debug)]
pub struct SamplePick {
    pub index: usize,
    pub probability: f64,
    pub scale: f64,
}

/// Explicit row sampling matrix `S`: row `t` of `S` is `e_{i_t}ᵀ * scale_t`.
#[derive(Clone, Debug)]
pub struct RowSampler {
    pub picks: Vec<SamplePick>,
}

/// Explicit column sampling matrix `R`: column `t` is `e_{j_t} * scale_t`.
#[derive(Clone, Debug)]
pub struct ColSampler {
    pub picks: Vec<SamplePick>,
}

fn identity_picks(n: usize) -> Vec<SamplePick> {
    // All indices once with p = 1/n and scale 1: the sketch equals the
    // original matrix exactly and the scale identity scale²·p·m = 1 holds.
    (0..n)
        .map(|index| SamplePick {
            index,
            probability: 1.0 / n as f64,
            scale: 1.0,
        })
        .collect()
}

impl RowSampler {
    pub fn m(&self) -> usize {
        self.picks.len()
    }

    /// Exact pass-through: every row once, unscaled.
    pub fn identity(n: usize) -> Self {
        RowSampler {
            picks: identity_picks(n),
        }
    }

    /// `S B` for dense `B`.
    pub fn sketch_dense(&self, b: &DenseMatrix) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.m(), b.cols());
        for (t, pick) in self.picks.iter().enumerate() {
            for (j, &v) in b.row(pick.index).iter().enumerate() {
                out.set(t, j, pick.scale * v);
            }
        }
        out
    }
}

impl ColSampler {
    pub fn m(&self) -> usize {
        self.picks.len()
    }

    pub fn identity(d: usize) -> Self {
        ColSampler {
            picks: identity_picks(d),
        }
    }

    /// `B R` for dense `B`.
    pub fn sketch_dense(&self, b: &DenseMatrix) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(b.rows(), self.m());
        for i in 0..b.rows() {
            let row = b.row(i);
            for (t, pick) in self.picks.iter().enumerate() {
                out.set(i, t, pick.scale * row[pick.index]);
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct DynSamp {
    matrix: SparseMatrix,
    /// Lazily created per-row trees over entry values; kept as zero-weight
    /// tombstones when a row empties so turnstile streams can revisit.
    row_trees: Vec<Option<WeightedTree>>,
    /// Tree over squared row norms; leaf i holds `‖A_{i,*}‖²`.
    length_tree: WeightedTree,
}

impl DynSamp {
    pub fn new(n_rows: usize, n_cols: usize) -> Self {
        DynSamp {
            matrix: SparseMatrix::new(n_rows, n_cols),
            row_trees: (0..n_rows).map(|_| None).collect(),
            length_tree: WeightedTree::with_capacity(n_rows),
        }
    }

    /// Builds the trees for an existing matrix in O(nnz log(nd)).
    pub fn from_matrix(matrix: SparseMatrix) -> Self {
        let mut ds = Self::new(matrix.n_rows(), matrix.n_cols());
        for (i, j, v) in matrix.iter() {
            let tree = ds.row_trees[i].get_or_insert_with(WeightedTree::new);
            tree.upsert(j, v).expect("finite entries");
        }
        for i in 0..matrix.n_rows() {
            if let Some(tree) = &ds.row_trees[i] {
                ds.length_tree
                    .upsert_weight(i, tree.total())
                    .expect("finite totals");
            }
        }
        ds.matrix = matrix;
        ds
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn n_rows(&self) -> usize {
        self.matrix.n_rows()
    }

    pub fn n_cols(&self) -> usize {
        self.matrix.n_cols()
    }

    pub fn nnz(&self) -> usize {
        self.matrix.nnz()
    }

    /// `‖A‖_F²`, maintained at the length-tree root.
    pub fn frob_norm_sq(&self) -> f64 {
        self.length_tree.total()
    }

    pub fn row_norm_sq(&self, i: usize) -> f64 {
        self.length_tree.weight(i).unwrap_or(0.0)
    }

    /// Turnstile set: entry map, row tree and length tree stay consistent;
    /// zero deletes the entry.
    pub fn update_entry(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        self.matrix.check_bounds(i, j)?;
        if !value.is_finite() {
            return Err(Error::NonFinite);
        }
        self.matrix.set(i, j, value)?;
        let tree = self.row_trees[i].get_or_insert_with(WeightedTree::new);
        tree.upsert(j, value)?;
        self.length_tree.upsert_weight(i, tree.total())?;
        Ok(())
    }

    pub fn get_entry(&self, i: usize, j: usize) -> Result<f64> {
        self.matrix.check_bounds(i, j)?;
        Ok(self.matrix.get(i, j))
    }

    /// The tree over squared row norms, for inspection.
    pub fn length_tree(&self) -> &WeightedTree {
        &self.length_tree
    }

    /// The per-row tree over entry values, if the row was ever touched.
    pub fn row_tree(&self, i: usize) -> Option<&WeightedTree> {
        self.row_trees.get(i).and_then(|t| t.as_ref())
    }

    /// Nonzero entries of row `i` in leaf order.
    pub fn row_entries(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.row_trees[i]
            .iter()
            .flat_map(|tree| tree.iter())
            .filter_map(move |(j, w)| {
                if w > 0.0 {
                    Some((j, self.matrix.get(i, j)))
                } else {
                    None
                }
            })
    }

    /// Row `i` with probability `‖A_{i,*}‖² / ‖A‖_F²`.
    pub fn sample_row(&self, rng: &mut impl Rng) -> Result<usize> {
        self.length_tree.sample(rng)
    }

    /// Column `j` with probability `A_{ij}² / ‖A_{i,*}‖²` within row `i`.
    pub fn sample_entry_in_row(&self, i: usize, rng: &mut impl Rng) -> Result<usize> {
        if i >= self.n_rows() {
            return Err(Error::IndexOutOfBounds {
                row: i,
                col: 0,
                rows: self.n_rows(),
                cols: self.n_cols(),
            });
        }
        let tree = self.row_trees[i].as_ref().ok_or(Error::EmptyRow(i))?;
        tree.sample(rng).map_err(|_| Error::EmptyRow(i))
    }

    /// `m_s` independent length-squared row draws with replacement; each pick
    /// records its draw probability and the scale `1/sqrt(p m_s)`.
    pub fn len_sq_sample_rows(&self, m_s: usize, rng: &mut impl Rng) -> Result<RowSampler> {
        if m_s == 0 {
            return Err(Error::InvalidParameter("sample size must be >= 1".into()));
        }
        let total = self.frob_norm_sq();
        if total <= 0.0 {
            return Err(Error::ZeroMatrix);
        }
        let mut picks = Vec::with_capacity(m_s);
        for _ in 0..m_s {
            let index = self.sample_row(rng)?;
            let probability = self.row_norm_sq(index) / total;
            picks.push(SamplePick {
                index,
                probability,
                scale: 1.0 / (probability * m_s as f64).sqrt(),
            });
        }
        Ok(RowSampler { picks })
    }

    /// Length-squared column sampling of `SA` by the two-stage scheme: pick a
    /// sampled row with probability proportional to its share of `‖SA‖_F²`,
    /// then an entry within it. The marginal on columns is
    /// `‖(SA)_{*,j}‖² / ‖SA‖_F²`, recorded exactly per pick by touching the
    /// m_S sampled rows.
    pub fn len_sq_sample_cols_of_sa(
        &self,
        s: &RowSampler,
        m_r: usize,
        rng: &mut impl Rng,
    ) -> Result<ColSampler> {
        if m_r == 0 {
            return Err(Error::InvalidParameter("sample size must be >= 1".into()));
        }
        let mut stage = WeightedTree::with_capacity(s.m());
        let mut total = 0.0;
        for (t, pick) in s.picks.iter().enumerate() {
            let w = pick.scale * pick.scale * self.row_norm_sq(pick.index);
            stage.upsert_weight(t, w)?;
            total += w;
        }
        if total <= 0.0 {
            return Err(Error::ZeroMatrix);
        }
        let mut picks = Vec::with_capacity(m_r);
        for _ in 0..m_r {
            let t = stage.sample(rng)?;
            let row = s.picks[t].index;
            let col = self.sample_entry_in_row(row, rng)?;
            let probability = self.sa_column_norm_sq(s, col) / stage.total();
            picks.push(SamplePick {
                index: col,
                probability,
                scale: 1.0 / (probability * m_r as f64).sqrt(),
            });
        }
        Ok(ColSampler { picks })
    }

    /// `‖(SA)_{*,j}‖²` over the sampler's picked rows.
    pub fn sa_column_norm_sq(&self, s: &RowSampler, j: usize) -> f64 {
        s.picks
            .iter()
            .map(|p| {
                let v = p.scale * self.matrix.get(p.index, j);
                v * v
            })
            .sum()
    }

    /// Materializes `SA` as a dense `m_S x d` matrix.
    pub fn sketch_rows(&self, s: &RowSampler) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(s.m(), self.n_cols());
        for (t, pick) in s.picks.iter().enumerate() {
            for (j, v) in self.row_entries(pick.index) {
                out.set(t, j, pick.scale * v);
            }
        }
        out
    }

    /// Materializes `SAR` as a dense `m_S x m_R` matrix by entry lookups.
    pub fn sketch_rows_cols(&self, s: &RowSampler, r: &ColSampler) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(s.m(), r.m());
        for (t, rp) in s.picks.iter().enumerate() {
            for (u, cp) in r.picks.iter().enumerate() {
                out.set(
                    t,
                    u,
                    rp.scale * cp.scale * self.matrix.get(rp.index, cp.index),
                );
            }
        }
        out
    }
}

impl MatrixView for DynSamp {
    fn view_rows(&self) -> usize {
        self.n_rows()
    }

    fn view_cols(&self) -> usize {
        self.n_cols()
    }

    fn view_nnz(&self) -> usize {
        self.nnz()
    }

    fn for_each_entry(&self, f: &mut dyn FnMut(usize, usize, f64)) {
        for (i, j, v) in self.matrix.iter() {
            f(i, j, v);
        }
    }

    fn for_each_row_entry(&self, i: usize, f: &mut dyn FnMut(usize, f64)) {
        for (j, v) in self.row_entries(i) {
            f(j, v);
        }
    }
}
