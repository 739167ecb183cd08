//! Factored rank-k approximation `ARWSA` built from chained sketches:
//! length-squared row/column sampling down to a small matrix, ridge-leverage
//! (projection-cost preserving) refinement, a small SVD and QR, then
//! leverage-score column sampling for the final factor. The model supports
//! column-conditional row sampling by rejection in time independent of the
//! row count.

use rand::Rng;

use crate::dense::DenseMatrix;
use crate::leverage::lev_sample;
use crate::sampler::{ColSampler, DynSamp, RowSampler, SamplePick};
use crate::svd::{best_rank_k_error, pseudo_inverse, thin_svd};
use crate::tree::WeightedTree;
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct LowRankConfig {
    /// Target rank.
    pub k: usize,
    /// Error parameter in (0, 1).
    pub epsilon: f64,
    /// Lower bound on the smallest nonzero singular value, for `Z_λ`;
    /// defaults to zero (conservative) when absent.
    pub sigma_k_lower: Option<f64>,
    /// Lower bound on `σ_k(A)`, for `Z_k`; sketch-estimated when absent.
    pub sigma_kk_lower: Option<f64>,
    /// Estimate of `‖A - A_k‖_F²`; sketch-estimated when absent.
    pub tau: Option<f64>,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub eps0: f64,
    pub c_beta: f64,
    /// Explicit sample counts for benchmark sweeps: rows for `S`/`R₁`,
    /// columns for `R₃`.
    pub rows_override: Option<usize>,
    pub cols_override: Option<usize>,
}

impl LowRankConfig {
    pub fn new(k: usize, epsilon: f64) -> Self {
        LowRankConfig {
            k,
            epsilon,
            sigma_k_lower: None,
            sigma_kk_lower: None,
            tau: None,
            c1: 2.0,
            c2: 2.0,
            c3: 2.0,
            c4: 2.0,
            eps0: 1.0 / 3.0,
            c_beta: 8.0,
            rows_override: None,
            cols_override: None,
        }
    }

    fn validate(&self, n: usize, d: usize) -> Result<()> {
        if self.k < 1 || self.k > n.min(d) {
            return Err(Error::InvalidRank {
                k: self.k,
                rows: n,
                cols: d,
            });
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in (0,1), got {}",
                self.epsilon
            )));
        }
        if let Some(t) = self.tau {
            if t.is_nan() || t <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "tau must be positive, got {t}"
                )));
            }
        }
        Ok(())
    }

    /// Fills in `tau` and `sigma_kk_lower` from a length-squared sketch when
    /// absent: the residual `‖A‖_F² - Σ_{i<k} σ_i(SA)²` estimates the tail
    /// mass and `0.9 σ_k(SA)` under-estimates `σ_k(A)`.
    pub fn resolved(&self, ds: &DynSamp, rng: &mut impl Rng) -> Result<LowRankConfig> {
        self.validate(ds.n_rows(), ds.n_cols())?;
        let mut out = self.clone();
        if out.sigma_k_lower.is_none() {
            out.sigma_k_lower = Some(0.0);
        }
        if out.tau.is_some() && out.sigma_kk_lower.is_some() {
            return Ok(out);
        }
        let frob = ds.frob_norm_sq();
        let sigma_1 = crate::ridge::estimate_sigma_1(ds, 30, rng);
        let stable_rank = if sigma_1 > 0.0 {
            frob / (sigma_1 * sigma_1)
        } else {
            1.0
        };
        let m = ((4.0 * stable_rank).ceil() as usize + self.k)
            .max(50)
            .min(ds.n_rows());
        let s = if m >= ds.n_rows() {
            RowSampler::identity(ds.n_rows())
        } else {
            ds.len_sq_sample_rows(m, rng)?
        };
        let f = thin_svd(&ds.sketch_rows(&s))?;
        if out.sigma_kk_lower.is_none() {
            let sk = f.sigma.get(self.k - 1).copied().unwrap_or(0.0);
            out.sigma_kk_lower = Some(0.9 * sk);
        }
        if out.tau.is_none() {
            let head: f64 = f.sigma.iter().take(self.k).map(|s| s * s).sum();
            let tail = (frob - head).max(0.0);
            out.tau = Some(tail.max(1e-12 * frob));
        }
        Ok(out)
    }
}

/// Ridge leverage scores of the rows at `λ = ‖M - M_k‖_F² / k`, normalized
/// to probabilities.
fn pcp_probs(small: &DenseMatrix, k: usize) -> Result<Vec<f64>> {
    let f = thin_svd(small)?;
    let r = f.rank();
    if r == 0 {
        return Err(Error::ZeroMatrix);
    }
    let tail: f64 = f.sigma[k.min(f.sigma.len())..].iter().map(|s| s * s).sum();
    let lambda = tail / k as f64;
    let mut scores = vec![0.0; small.rows()];
    for (i, score) in scores.iter_mut().enumerate() {
        for j in 0..r {
            let s = f.sigma[j];
            let x = f.u.get(i, j);
            *score += x * x * s * s / (s * s + lambda);
        }
    }
    let sd: f64 = scores.iter().sum();
    Ok(scores.iter().map(|s| s / sd).collect())
}

fn pcp_picks(
    small: &DenseMatrix,
    k: usize,
    eps: f64,
    c: f64,
    rng: &mut impl Rng,
) -> Result<Vec<SamplePick>> {
    let rows = small.rows();
    let m = (c / (eps * eps) * k as f64 * ((k + 1) as f64).ln()).ceil() as usize;
    if k >= rows.min(small.cols()) || m >= rows {
        // Exact pass-through: the sketch is the matrix itself.
        return Ok(RowSampler::identity(rows).picks);
    }
    let probs = pcp_probs(small, k)?;
    let mut tree = WeightedTree::with_capacity(rows);
    for (i, &p) in probs.iter().enumerate() {
        tree.upsert_weight(i, p)?;
    }
    let mut picks = Vec::with_capacity(m);
    for _ in 0..m {
        let index = tree.sample(rng)?;
        let probability = probs[index];
        picks.push(SamplePick {
            index,
            probability,
            scale: 1.0 / (probability * m as f64).sqrt(),
        });
    }
    Ok(picks)
}

/// Row sampler that is projection-cost preserving for rank-k projections of
/// `small`; exact ridge leverage scores are affordable because the input is
/// already sketch-sized.
pub fn pcp_sample_rows(
    small: &DenseMatrix,
    k: usize,
    eps: f64,
    c: f64,
    rng: &mut impl Rng,
) -> Result<RowSampler> {
    Ok(RowSampler {
        picks: pcp_picks(small, k, eps, c, rng)?,
    })
}

/// Column counterpart of [`pcp_sample_rows`].
pub fn pcp_sample_cols(
    small: &DenseMatrix,
    k: usize,
    eps: f64,
    c: f64,
    rng: &mut impl Rng,
) -> Result<ColSampler> {
    Ok(ColSampler {
        picks: pcp_picks(&small.transpose(), k, eps, c, rng)?,
    })
}

/// Factored rank-k model `ARWSA` with the caches the query sampler needs:
/// the materialized `Â = AR`, weighted trees over its columns and rows, and
/// per-column cumulative squared sums for log-time within-column draws.
pub struct LowRankModel {
    pub k: usize,
    /// `m_R x m_S`.
    pub w: DenseMatrix,
    pub row_sampler: RowSampler,
    pub col_sampler: ColSampler,
    /// `Â = AR`, `n x m_R`.
    pub ar_cache: DenseMatrix,
    pub ar_col_tree: WeightedTree,
    pub kappa_est: f64,
    pub rank_deficient: bool,
    /// Orthonormal `m_S x k` basis from the QR step, kept for verification.
    pub u_basis: DenseMatrix,
    /// First-stage column sampler, kept for verification.
    pub r1_sampler: ColSampler,
    ar_row_tree: WeightedTree,
    ar_col_cdfs: Vec<Vec<f64>>,
    beta_rows: usize,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct QueryStats {
    pub trials: u64,
    pub alpha_doublings: u32,
    pub alpha: f64,
    pub beta_v: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct ModelError {
    pub value: f64,
    /// Set when `‖A - A_k‖_F` vanished and the value is the absolute error.
    pub absolute_fallback: bool,
}

pub fn build_low_rank(
    ds: &DynSamp,
    cfg: &LowRankConfig,
    rng: &mut impl Rng,
) -> Result<LowRankModel> {
    let n = ds.n_rows();
    let d = ds.n_cols();
    let frob = ds.frob_norm_sq();
    if frob <= 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let cfg = cfg.resolved(ds, rng)?;
    let k = cfg.k;
    let eps = cfg.epsilon;
    let tau = cfg.tau.unwrap();
    let sigma_k = cfg.sigma_k_lower.unwrap();
    let lambda = tau / k as f64;
    let z_lambda_sq = 1.0 / (lambda + sigma_k * sigma_k);

    // Stage 1: length-squared row and column samples sized by Z_λ² ‖A‖_F².
    let base_raw = (cfg.c1 / (eps * eps) * ((k + 1) as f64).ln() * z_lambda_sq * frob).ceil();
    let m_s = cfg
        .rows_override
        .unwrap_or(base_raw as usize)
        .max(2 * k.min(n / 2).max(1))
        .min(n);
    let m_r1 = cfg
        .rows_override
        .unwrap_or(base_raw as usize)
        .max(2 * k.min(d / 2).max(1))
        .min(d);
    let s = if m_s >= n {
        RowSampler::identity(n)
    } else {
        ds.len_sq_sample_rows(m_s, rng)?
    };
    let r1 = if m_r1 >= d {
        ColSampler::identity(d)
    } else {
        ds.len_sq_sample_cols_of_sa(&s, m_r1, rng)?
    };
    let sar1 = ds.sketch_rows_cols(&s, &r1);
    if sar1.frob_norm_sq() == 0.0 {
        return Err(Error::StageZero("SAR1"));
    }

    // Stage 2: ridge-leverage PCP sampling of the small sketch, then the
    // top-k right singular space and an orthonormal basis U.
    let r2 = pcp_sample_cols(&sar1, k, eps, cfg.c2, rng)?;
    let sar1r2 = r2.sketch_dense(&sar1);
    let s2 = pcp_sample_rows(&sar1r2, k, eps, cfg.c2, rng)?;
    let small = s2.sketch_dense(&sar1r2);
    if small.frob_norm_sq() == 0.0 {
        return Err(Error::StageZero("S2SAR1R2"));
    }
    let fsvd = thin_svd(&small)?;
    let v_k = fsvd.v.select_columns(&(0..k).collect::<Vec<_>>());
    let u_src = sar1r2.matmul(&v_k);
    if u_src.frob_norm_sq() == 0.0 {
        return Err(Error::StageZero("SAR1R2V"));
    }
    let (u, _) = u_src.qr_thin();

    // Stage 3: column refinement. R₃ length-squared on SA, R₄ leverage on
    // the small factored matrix, composed into R.
    let sigma_kk = cfg.sigma_kk_lower.unwrap();
    let m_r3_raw = if sigma_kk > 0.0 {
        let z_k_sq = 1.0 / (sigma_kk * sigma_kk);
        (cfg.c3 * (cfg.eps0.powi(-2) * ((k + 1) as f64).ln() + 1.0 / eps) / eps * z_k_sq * frob)
            .ceil() as usize
    } else {
        d
    };
    let m_r3 = cfg
        .cols_override
        .unwrap_or(m_r3_raw)
        .max(2 * k.min(d / 2).max(1))
        .min(d);
    let r3 = if m_r3 >= d {
        ColSampler::identity(d)
    } else {
        ds.len_sq_sample_cols_of_sa(&s, m_r3, rng)?
    };
    let sar3 = ds.sketch_rows_cols(&s, &r3);
    let ut_sar3 = u.transpose().matmul(&sar3);
    if ut_sar3.frob_norm_sq() == 0.0 {
        return Err(Error::StageZero("UtSAR3"));
    }
    let f_size = (cfg.c4 * (cfg.eps0.powi(-2) * k as f64 * ((k + 1) as f64).ln() + k as f64 / eps))
        .ceil() as usize;
    let r4_picks = if f_size >= m_r3 {
        RowSampler::identity(m_r3).picks
    } else {
        lev_sample(&ut_sar3.transpose(), None, |_| f_size, rng)?
            .sampler
            .picks
    };
    let r_composed = ColSampler {
        picks: r4_picks
            .iter()
            .map(|p| {
                let base = r3.picks[p.index];
                SamplePick {
                    index: base.index,
                    probability: base.probability * p.probability,
                    scale: base.scale * p.scale,
                }
            })
            .collect(),
    };
    let m_r = r_composed.m();

    // W = (UᵀSAR)⁺ Uᵀ.
    let ut_sar = DenseMatrix::from_fn(k, m_r, |row, col| {
        let p = &r4_picks[col];
        ut_sar3.get(row, p.index) * p.scale
    });
    let rank_deficient = thin_svd(&ut_sar)?.rank() < k;
    let w = pseudo_inverse(&ut_sar)?.matmul(&u.transpose());

    // Â = AR materialized with its sampling caches.
    let mut col_map: Vec<Vec<(usize, f64)>> = vec![Vec::new(); d];
    for (slot, p) in r_composed.picks.iter().enumerate() {
        col_map[p.index].push((slot, p.scale));
    }
    let mut ar = DenseMatrix::zeros(n, m_r);
    for (i, j, v) in ds.matrix().iter() {
        for &(slot, scale) in &col_map[j] {
            ar.set(i, slot, v * scale);
        }
    }
    if ar.frob_norm_sq() == 0.0 {
        return Err(Error::StageZero("AR"));
    }
    let mut ar_col_tree = WeightedTree::with_capacity(m_r);
    let mut ar_col_cdfs = Vec::with_capacity(m_r);
    for u_col in 0..m_r {
        let mut cdf = Vec::with_capacity(n + 1);
        cdf.push(0.0);
        let mut acc = 0.0;
        for i in 0..n {
            let x = ar.get(i, u_col);
            acc += x * x;
            cdf.push(acc);
        }
        ar_col_tree.upsert_weight(u_col, acc)?;
        ar_col_cdfs.push(cdf);
    }
    let mut ar_row_tree = WeightedTree::with_capacity(n);
    for i in 0..n {
        let wsum: f64 = ar.row(i).iter().map(|x| x * x).sum();
        ar_row_tree.upsert_weight(i, wsum)?;
    }

    // Rejection constant from the sketched spectrum, with a 2x safety factor
    // folded into the condition-number estimate.
    let sar_full = ds.sketch_rows_cols(&s, &r_composed);
    let sar_svd = thin_svd(&sar_full)?;
    let sigma_max = sar_svd.sigma.first().copied().unwrap_or(0.0);
    let sigma_min = sar_svd.sigma_min_nonzero().ok_or(Error::StageZero("SAR"))?;
    let kappa_est = 2.0 * sigma_max / sigma_min;
    let beta_rows = ((cfg.c_beta * ar.frob_norm_sq() / (sigma_min * sigma_min)).ceil() as usize)
        .max(16)
        .min(n);

    Ok(LowRankModel {
        k,
        w,
        row_sampler: s,
        col_sampler: r_composed,
        ar_cache: ar,
        ar_col_tree,
        kappa_est,
        rank_deficient,
        u_basis: u,
        r1_sampler: r1,
        ar_row_tree,
        ar_col_cdfs,
        beta_rows,
    })
}

impl LowRankModel {
    pub fn m_s(&self) -> usize {
        self.row_sampler.m()
    }

    pub fn m_r(&self) -> usize {
        self.col_sampler.m()
    }

    /// `v = (WSA)_{*,j}`, the small response vector the query walks through.
    pub fn response_vector(&self, ds: &DynSamp, j: usize) -> Result<Vec<f64>> {
        if j >= ds.n_cols() {
            return Err(Error::IndexOutOfBounds {
                row: 0,
                col: j,
                rows: ds.n_rows(),
                cols: ds.n_cols(),
            });
        }
        let sa_col: Vec<f64> = self
            .row_sampler
            .picks
            .iter()
            .map(|p| p.scale * ds.matrix().get(p.index, j))
            .collect();
        let mut v = vec![0.0; self.w.rows()];
        self.w.mat_vec(&sa_col, &mut v);
        Ok(v)
    }

    /// Column `j` of the materialized model, `Â v`; the exact query-time
    /// target distribution is proportional to its squared entries.
    pub fn model_column(&self, ds: &DynSamp, j: usize) -> Result<Vec<f64>> {
        let v = self.response_vector(ds, j)?;
        let mut out = vec![0.0; self.ar_cache.rows()];
        self.ar_cache.mat_vec(&v, &mut out);
        Ok(out)
    }

    /// `‖Âv‖²` estimated by a length-squared row sketch of `Â`; exact when
    /// the sketch would need at least n rows.
    fn estimate_beta(&self, v: &[f64], rng: &mut impl Rng) -> f64 {
        let n = self.ar_cache.rows();
        let exact = |v: &[f64]| {
            let mut out = vec![0.0; n];
            self.ar_cache.mat_vec(v, &mut out);
            out.iter().map(|x| x * x).sum::<f64>()
        };
        if self.beta_rows >= n {
            return exact(v);
        }
        let total = self.ar_row_tree.total();
        if total <= 0.0 {
            return 0.0;
        }
        let mut acc = 0.0;
        for _ in 0..self.beta_rows {
            let i = match self.ar_row_tree.sample(rng) {
                Ok(i) => i,
                Err(_) => return 0.0,
            };
            let p = self.ar_row_tree.weight(i).unwrap_or(0.0) / total;
            if p <= 0.0 {
                continue;
            }
            let dot: f64 = self.ar_cache.row(i).iter().zip(v).map(|(a, b)| a * b).sum();
            acc += dot * dot / p;
        }
        let est = acc / self.beta_rows as f64;
        if est > 0.0 {
            est
        } else {
            exact(v)
        }
    }

    pub fn sample_row_given_column(
        &self,
        ds: &DynSamp,
        j: usize,
        rng: &mut impl Rng,
    ) -> Result<usize> {
        self.sample_row_given_column_with_stats(ds, j, rng)
            .map(|(i, _)| i)
    }

    /// Rejection sampling of a row index with probability
    /// `(ARWSA)_{ij}² / ‖(ARWSA)_{*,j}‖²`: propose a column of `Â` weighted
    /// by `‖Â_{*,u}‖² v_u²`, then a row within it, and accept with
    /// probability `q_i / (α p_i)`. If the computed acceptance ever exceeds
    /// one, α doubles and the trial restarts.
    pub fn sample_row_given_column_with_stats(
        &self,
        ds: &DynSamp,
        j: usize,
        rng: &mut impl Rng,
    ) -> Result<(usize, QueryStats)> {
        let v = self.response_vector(ds, j)?;
        if v.iter().all(|&x| x == 0.0) {
            return Err(Error::ZeroColumn(j));
        }
        let beta_v = self.estimate_beta(&v, rng);
        if beta_v <= 0.0 {
            return Err(Error::ZeroColumn(j));
        }
        let m_r = self.m_r();
        let mut proposal_tree = WeightedTree::with_capacity(m_r);
        for u in 0..m_r {
            let col_mass = self.ar_col_tree.weight(u).unwrap_or(0.0);
            proposal_tree.upsert_weight(u, col_mass * v[u] * v[u])?;
        }
        let g_total = proposal_tree.total();
        if g_total <= 0.0 {
            return Err(Error::ZeroColumn(j));
        }
        let mut alpha = (m_r as f64) * self.kappa_est * self.kappa_est;
        let mut stats = QueryStats {
            alpha,
            beta_v,
            ..Default::default()
        };
        loop {
            stats.trials += 1;
            if stats.trials as f64 > 100.0 * alpha + 10_000.0 {
                return Err(Error::SamplingBudget(stats.trials));
            }
            let u_star = proposal_tree.sample(rng)?;
            let cdf = &self.ar_col_cdfs[u_star];
            let col_total = *cdf.last().unwrap();
            let x = rng.gen::<f64>() * col_total;
            let i = cdf.partition_point(|&c| c <= x).min(cdf.len() - 1) - 1;
            let row = self.ar_cache.row(i);
            let mut weighted_sq = 0.0;
            let mut dot = 0.0;
            for (a, b) in row.iter().zip(&v) {
                weighted_sq += a * a * b * b;
                dot += a * b;
            }
            let p_i = weighted_sq / g_total;
            if p_i <= 0.0 {
                continue;
            }
            let q_i = dot * dot / beta_v;
            let ratio = q_i / (alpha * p_i);
            if ratio > 1.0 {
                alpha *= 2.0;
                stats.alpha_doublings += 1;
                stats.alpha = alpha;
                continue;
            }
            if rng.gen::<f64>() < ratio {
                return Ok((i, stats));
            }
        }
    }

    /// Dense `Y = ARWSA`, for verification at desk scale.
    pub fn materialize(&self, ds: &DynSamp) -> DenseMatrix {
        let aw = self.ar_cache.matmul(&self.w);
        let sa = ds.sketch_rows(&self.row_sampler);
        aw.matmul(&sa)
    }

    /// The relative error metric `‖A - Y‖_F / ‖A - A_k‖_F - 1`, computed
    /// with the exact SVD oracle in the denominator. Falls back to the
    /// absolute error when the best rank-k error vanishes.
    pub fn model_error(&self, ds: &DynSamp) -> Result<ModelError> {
        let y = self.materialize(ds);
        let a_frob_sq = ds.frob_norm_sq();
        let mut cross = 0.0;
        for (i, j, v) in ds.matrix().iter() {
            cross += v * y.get(i, j);
        }
        let diff_sq = (a_frob_sq - 2.0 * cross + y.frob_norm_sq()).max(0.0);
        let diff = diff_sq.sqrt();
        let denom = best_rank_k_error(&ds.matrix().to_dense(), self.k)?;
        if denom <= 1e-9 * a_frob_sq.sqrt() {
            Ok(ModelError {
                value: diff,
                absolute_fallback: true,
            })
        } else {
            Ok(ModelError {
                value: diff / denom - 1.0,
                absolute_fallback: false,
            })
        }
    }
}
