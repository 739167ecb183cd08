//! Leverage-score sampling by rejection.
//!
//! The sampler state holds a sketch `SA`, triangular factors from its QR, and
//! a weighted tree over the rows of `Z = AΛ(C⁻¹G)` for a small Gaussian `G`.
//! Row norms of `Z` are cheap proposals whose ratio to the true
//! `‖A_{i,*}W‖²` distribution is bounded, so accepted indices follow the
//! target distribution exactly conditioned on the embedding event.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::dense::{ColumnSubsetView, DenseMatrix, MatrixView};
use crate::embed::{ObliviousEmbedding, DEFAULT_C_EMB, DEFAULT_EPS0};
use crate::sampler::{RowSampler, SamplePick};
use crate::svd::rank_tolerance;
use crate::tree::WeightedTree;
use crate::{Error, Result};

/// Columns of the proposal Gaussian per unit of the trade-off parameter.
const C_MG: f64 = 3.0;
/// Columns of the query Gaussian `G'` per unit of `ln n`.
const C_GPRIME: f64 = 192.0;

/// `rows x cols` Gaussian with `N(0, 1/cols)` entries, for right-multiplying.
pub fn gaussian_sketch_right(rows: usize, cols: usize, rng: &mut impl Rng) -> DenseMatrix {
    let std = 1.0 / (cols as f64).sqrt();
    DenseMatrix::from_fn(rows, cols, |_, _| {
        std * rng.sample::<f64, _>(StandardNormal)
    })
}

/// `rows x cols` Gaussian with `N(0, 1/rows)` entries, for left-multiplying.
pub fn gaussian_sketch_left(rows: usize, cols: usize, rng: &mut impl Rng) -> DenseMatrix {
    let std = 1.0 / (rows as f64).sqrt();
    DenseMatrix::from_fn(rows, cols, |_, _| {
        std * rng.sample::<f64, _>(StandardNormal)
    })
}

/// Sampler state over a fixed matrix and column selection.
pub struct SampState {
    /// Embedded matrix `SA`.
    pub sa: DenseMatrix,
    /// Triangular factor of `QR(SA)`; `‖C₀W‖_F` estimates `‖AW‖_F`.
    pub c_full: DenseMatrix,
    /// Invertible triangular factor of `QR(SAΛ)`.
    pub c_basis: DenseMatrix,
    /// Tree over `‖Z_{i,*}‖²` for the proposal distribution.
    pub z_tree: WeightedTree,
    pub g_cols: usize,
    pub lambda_s: f64,
    columns: Vec<usize>,
}

impl SampState {
    pub fn columns(&self) -> &[usize] {
        &self.columns
    }

    /// `C⁻¹ G` by triangular solve.
    pub fn basis_inverse_times(&self, g: &DenseMatrix) -> Result<DenseMatrix> {
        self.c_basis.solve_upper_triangular(g)
    }
}

/// Builds the sampler state: embed, factor, and grow the proposal tree over
/// `Z = AΛ(C⁻¹G)`, multiplying right-to-left so the pass over `A` happens
/// once.
pub fn build_samp<M: MatrixView>(
    a: &M,
    col_selector: &[usize],
    lambda_s: f64,
    rng: &mut impl Rng,
) -> Result<SampState> {
    let k = col_selector.len();
    if k == 0 {
        return Err(Error::RankDeficient);
    }
    if lambda_s < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "lambda_s must be >= 1, got {lambda_s}"
        )));
    }
    let n = a.view_rows();
    let emb = ObliviousEmbedding::for_rank(k, DEFAULT_EPS0, DEFAULT_C_EMB, rng.gen());
    let sa = emb.apply(a);
    let (_, c_full) = sa.qr_thin();
    let sa_basis = sa.select_columns(col_selector);
    let (_, c_basis) = sa_basis.qr_thin();
    // Rank check on the triangular diagonal.
    let max_diag = (0..k).map(|i| c_basis.get(i, i).abs()).fold(0.0, f64::max);
    let tol = rank_tolerance(sa.rows(), k, max_diag);
    if (0..k).any(|i| c_basis.get(i, i).abs() <= tol) {
        return Err(Error::RankDeficient);
    }

    let g_cols = ((C_MG * lambda_s).ceil() as usize).max(2);
    let g = gaussian_sketch_right(k, g_cols, rng);
    let cg = c_basis.solve_upper_triangular(&g)?;

    // Z = (AΛ)(C⁻¹G) accumulated in one sparse pass.
    let positions: std::collections::HashMap<usize, usize> = col_selector
        .iter()
        .enumerate()
        .map(|(p, &j)| (j, p))
        .collect();
    let mut z = DenseMatrix::zeros(n, g_cols);
    a.for_each_entry(&mut |i, j, v| {
        if let Some(&p) = positions.get(&j) {
            let zr = z.row_mut(i);
            for (o, &c) in zr.iter_mut().zip(cg.row(p)) {
                *o += v * c;
            }
        }
    });
    let mut z_tree = WeightedTree::with_capacity(n);
    for i in 0..n {
        let w: f64 = z.row(i).iter().map(|x| x * x).sum();
        z_tree.upsert_weight(i, w)?;
    }
    Ok(SampState {
        sa,
        c_full,
        c_basis,
        z_tree,
        g_cols,
        lambda_s,
        columns: col_selector.to_vec(),
    })
}

/// Output of the rejection sampler: the accepted draws plus bookkeeping the
/// harness uses to count embedding-event failures and rejection cost.
pub struct MatVecDraws {
    pub sampler: RowSampler,
    /// Set when the sketched norm `N` vanished and draws fell back to the
    /// uniform distribution.
    pub uniform_fallback: bool,
    pub proposals: u64,
}

/// Default normalizer for direct matvec sampling.
pub fn default_nu(k: usize, n: usize, lambda_s: f64) -> f64 {
    1.0 / (6.0 * k as f64 * (n as f64).powf(1.0 / lambda_s))
}

/// Draws `v` indices with probability `(1 ± eps0) ‖A_{i,*}W‖² / ‖AW‖_F²` by
/// rejection from the `Z` row-norm proposal. A proposal is accepted with
/// probability `nu q̃_i / p_i`; if that ratio ever exceeds one the embedding
/// event failed and the call errors out rather than clipping.
pub fn matvec_sampler<M: MatrixView>(
    a: &M,
    samp: &SampState,
    w: &DenseMatrix,
    v: usize,
    nu: f64,
    rng: &mut impl Rng,
) -> Result<MatVecDraws> {
    if v == 0 {
        return Err(Error::InvalidParameter("sample size must be >= 1".into()));
    }
    if w.rows() != a.view_cols() {
        return Err(Error::DimensionMismatch(format!(
            "W has {} rows for a matrix with {} columns",
            w.rows(),
            a.view_cols()
        )));
    }
    if !(nu > 0.0 && nu <= 1.0) {
        return Err(Error::InvalidParameter(format!("nu out of range: {nu}")));
    }
    let n = a.view_rows();
    let norm_est = samp.c_full.matmul(w).frob_norm_sq();
    if norm_est == 0.0 {
        let picks = (0..v)
            .map(|_| {
                let index = rng.gen_range(0..n);
                let probability = 1.0 / n as f64;
                SamplePick {
                    index,
                    probability,
                    scale: 1.0 / (v as f64 * probability).sqrt(),
                }
            })
            .collect();
        return Ok(MatVecDraws {
            sampler: RowSampler { picks },
            uniform_fallback: true,
            proposals: 0,
        });
    }
    let z_total = samp.z_tree.total();
    if z_total <= 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let budget = 200 * (v as u64 + 8) * ((1.0 / nu).ceil() as u64 + 1) + 100_000;
    let mut picks = Vec::with_capacity(v);
    let mut proposals = 0u64;
    let mut buf = vec![0.0; w.cols()];
    while picks.len() < v {
        proposals += 1;
        if proposals > budget {
            return Err(Error::SamplingBudget(budget));
        }
        let i = samp.z_tree.sample(rng)?;
        let p_i = samp.z_tree.weight(i).unwrap_or(0.0) / z_total;
        if p_i <= 0.0 {
            continue;
        }
        a.row_times(i, w, &mut buf);
        let q_tilde = buf.iter().map(|x| x * x).sum::<f64>() / norm_est;
        let ratio = nu * q_tilde / p_i;
        if ratio > 1.0 + 1e-9 {
            return Err(Error::AcceptanceRatio { ratio });
        }
        if rng.gen::<f64>() < ratio {
            picks.push(SamplePick {
                index: i,
                probability: q_tilde,
                scale: 1.0 / (v as f64 * q_tilde).sqrt(),
            });
        }
    }
    Ok(MatVecDraws {
        sampler: RowSampler { picks },
        uniform_fallback: false,
        proposals,
    })
}

/// Leverage-score sketching matrix plus the independent-column selection.
pub struct LeverageSketch {
    pub sampler: RowSampler,
    pub column_selector: Vec<usize>,
    pub uniform_fallback: bool,
    pub proposals: u64,
}

/// Leverage-score sampling: detect the rank and a set of independent columns
/// with a sketched pivoted QR, build the sampler state over them, then draw
/// `target_size(rank)` rows through the rejection sampler with `W = C⁻¹G'`.
pub fn lev_sample<M: MatrixView>(
    a: &M,
    mu_s: Option<f64>,
    target_size: impl Fn(usize) -> usize,
    rng: &mut impl Rng,
) -> Result<LeverageSketch> {
    let n = a.view_rows();
    let d = a.view_cols();
    if a.view_nnz() == 0 {
        return Err(Error::ZeroMatrix);
    }
    let lambda_s = mu_s.unwrap_or(((n + 1) as f64).ln()).max(1.0);

    // Rank and independent columns from a column-pivoted QR of the sketch.
    let emb = ObliviousEmbedding::for_rank(d.min(n), DEFAULT_EPS0, DEFAULT_C_EMB, rng.gen());
    let sketched = if emb.m_rows() < n {
        emb.apply(a)
    } else {
        crate::dense::materialize(a)
    };
    let piv = sketched.qr_column_pivoted();
    if piv.rank == 0 {
        return Err(Error::ZeroMatrix);
    }
    let columns: Vec<usize> = piv.pivots[..piv.rank].to_vec();
    let k = columns.len();

    let restricted = ColumnSubsetView::new(a, &columns);
    let identity: Vec<usize> = (0..k).collect();
    let samp = build_samp(&restricted, &identity, lambda_s, rng)?;

    let g_prime_cols = ((C_GPRIME * ((n + 2) as f64).ln()).ceil() as usize).max(8);
    let g_prime = gaussian_sketch_right(k, g_prime_cols, rng);
    let w = samp.basis_inverse_times(&g_prime)?;

    let nu = 1.0 / (6.0 * (n as f64).powf(1.0 / lambda_s));
    let v = target_size(k);
    let draws = matvec_sampler(&restricted, &samp, &w, v, nu, rng)?;
    Ok(LeverageSketch {
        sampler: draws.sampler,
        column_selector: columns,
        uniform_fallback: draws.uniform_fallback,
        proposals: draws.proposals,
    })
}
