//! Oblivious subspace embedding realized as a sparse-sign sketch: each input
//! row is hashed to a single output row with a random sign, so applying the
//! sketch costs one pass over the nonzeros. For a rank-k target the row count
//! `ceil(c_emb * k * ln(k+1) / eps0²)` makes the sketch an eps0-subspace
//! embedding with good probability.

use crate::dense::{DenseMatrix, MatrixView};
use crate::stats::splitmix64;

pub const DEFAULT_EPS0: f64 = 1.0 / 3.0;
pub const DEFAULT_C_EMB: f64 = 8.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmbeddingKind {
    SparseSign,
}

#[derive(Clone, Copy, Debug)]
pub struct ObliviousEmbedding {
    m_rows: usize,
    seed: u64,
    pub kind: EmbeddingKind,
}

impl ObliviousEmbedding {
    /// Sized for embedding a rank-`k` column span at distortion `eps0`.
    pub fn for_rank(k: usize, eps0: f64, c_emb: f64, seed: u64) -> Self {
        let k = k.max(1);
        let rows = (c_emb * k as f64 * ((k + 1) as f64).ln() / (eps0 * eps0)).ceil() as usize;
        Self::with_rows(rows.max(1), seed)
    }

    pub fn with_rows(m_rows: usize, seed: u64) -> Self {
        ObliviousEmbedding {
            m_rows,
            seed,
            kind: EmbeddingKind::SparseSign,
        }
    }

    pub fn m_rows(&self) -> usize {
        self.m_rows
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Bucket and sign for input row `i`; deterministic in the seed.
    #[inline]
    pub fn bucket_sign(&self, i: usize) -> (usize, f64) {
        let h = splitmix64(self.seed ^ (i as u64).wrapping_mul(0x9e3779b97f4a7c15));
        let bucket = (h >> 1) as usize % self.m_rows;
        let sign = if h & 1 == 0 { 1.0 } else { -1.0 };
        (bucket, sign)
    }

    /// `S A` in one pass over the nonzeros of `a`.
    pub fn apply<M: MatrixView>(&self, a: &M) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.m_rows, a.view_cols());
        a.for_each_entry(&mut |i, j, v| {
            let (bucket, sign) = self.bucket_sign(i);
            out.set(bucket, j, out.get(bucket, j) + sign * v);
        });
        out
    }
}
