//! Sketched ridge regression.
//!
//! Samples rows of `A` and columns of `SA` by squared length, assembles the
//! small system `(SAR)(SAR)ᵀ + λI` and solves it per response column with
//! conjugate gradient. The result is the factored solution `AᵀSᵀX̃`, queryable
//! per entry without ever forming a dense `d x d'` matrix.

use rand::Rng;

use crate::dense::DenseMatrix;
use crate::sampler::{ColSampler, DynSamp, RowSampler};
use crate::svd::thin_svd;
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct RidgeConfig {
    /// Ridge weight λ >= 0.
    pub lambda: f64,
    /// Error parameter in (0, 1).
    pub epsilon: f64,
    /// Lower bound on the smallest nonzero singular value (σ̂_k <= 1/‖A⁺‖);
    /// estimated from a sketch when absent.
    pub sigma_k_lower: Option<f64>,
    /// Upper bound on the spectral norm (σ̂_1 >= ‖A‖); estimated by power
    /// iteration when absent.
    pub sigma_1_upper: Option<f64>,
    pub c_rows: f64,
    pub c_cols: f64,
    pub cg_tol: f64,
    /// Defaults to `10 sqrt(κ̂²) + 100` when unset.
    pub cg_max_iters: Option<usize>,
    /// Explicit sample counts, as in benchmark sweeps; capped at the matrix
    /// dimensions.
    pub rows_override: Option<usize>,
    pub cols_override: Option<usize>,
}

impl RidgeConfig {
    pub fn new(lambda: f64, epsilon: f64) -> Self {
        RidgeConfig {
            lambda,
            epsilon,
            sigma_k_lower: None,
            sigma_1_upper: None,
            c_rows: 2.0,
            c_cols: 2.0,
            cg_tol: 1e-8,
            cg_max_iters: None,
            rows_override: None,
            cols_override: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in (0,1), got {}",
                self.epsilon
            )));
        }
        if self.lambda.is_nan() || self.lambda < 0.0 || !self.lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lambda must be finite and >= 0, got {}",
                self.lambda
            )));
        }
        if let (Some(lo), Some(hi)) = (self.sigma_k_lower, self.sigma_1_upper) {
            if lo > hi {
                return Err(Error::InvalidParameter(format!(
                    "sigma_k_lower {lo} exceeds sigma_1_upper {hi}"
                )));
            }
        }
        Ok(())
    }

    /// Fills in missing spectrum bounds from the matrix itself.
    pub fn resolved(&self, ds: &DynSamp, rng: &mut impl Rng) -> Result<RidgeConfig> {
        self.validate()?;
        let mut out = self.clone();
        if out.sigma_1_upper.is_none() {
            out.sigma_1_upper = Some(estimate_sigma_1(ds, 30, rng));
        }
        if out.sigma_k_lower.is_none() {
            out.sigma_k_lower = Some(estimate_sigma_min(ds, out.sigma_1_upper.unwrap(), rng)?);
        }
        if out.lambda == 0.0 && out.sigma_k_lower == Some(0.0) {
            return Err(Error::InvalidParameter(
                "lambda must be positive when sigma_k_lower is zero".into(),
            ));
        }
        Ok(out)
    }

    fn spectrum(&self) -> Result<(f64, f64)> {
        match (self.sigma_k_lower, self.sigma_1_upper) {
            (Some(lo), Some(hi)) => Ok((lo, hi)),
            _ => Err(Error::InvalidParameter(
                "spectrum bounds unresolved; call resolved() first".into(),
            )),
        }
    }

    /// `κ̂ = Z_λ sqrt(λ + σ̂_1²)` with `Z_λ = 1/sqrt(λ + σ̂_k²)`.
    pub fn kappa_hat(&self) -> Result<f64> {
        let (lo, hi) = self.spectrum()?;
        let denom = self.lambda + lo * lo;
        if denom <= 0.0 {
            return Err(Error::InvalidParameter(
                "lambda + sigma_k² must be positive".into(),
            ));
        }
        Ok(((self.lambda + hi * hi) / denom).sqrt())
    }
}

/// Spectral norm overestimate: power iteration on `AᵀA` through the sparse
/// entry map, inflated by a 10% safety factor.
pub fn estimate_sigma_1(ds: &DynSamp, iters: usize, rng: &mut impl Rng) -> f64 {
    let d = ds.n_cols();
    if ds.frob_norm_sq() <= 0.0 || d == 0 {
        return 0.0;
    }
    let mut x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    for v in &mut x {
        *v /= norm;
    }
    let mut estimate = 0.0;
    let mut y = vec![0.0; ds.n_rows()];
    for _ in 0..iters {
        y.fill(0.0);
        for (i, j, v) in ds.matrix().iter() {
            y[i] += v * x[j];
        }
        let ynorm_sq: f64 = y.iter().map(|v| v * v).sum();
        estimate = ynorm_sq.sqrt();
        x.fill(0.0);
        for (i, j, v) in ds.matrix().iter() {
            x[j] += v * y[i];
        }
        let xnorm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            break;
        }
        for v in &mut x {
            *v /= xnorm;
        }
    }
    estimate * 1.1
}

/// Smallest-nonzero-singular-value underestimate from the thin SVD of a
/// constant-factor length-squared sketch, deflated by 10%.
pub fn estimate_sigma_min(ds: &DynSamp, sigma_1: f64, rng: &mut impl Rng) -> Result<f64> {
    if ds.frob_norm_sq() <= 0.0 {
        return Ok(0.0);
    }
    let stable_rank = if sigma_1 > 0.0 {
        ds.frob_norm_sq() / (sigma_1 * sigma_1)
    } else {
        1.0
    };
    let m = ((4.0 * stable_rank).ceil() as usize)
        .max(50)
        .min(ds.n_rows());
    let s = if m >= ds.n_rows() {
        RowSampler::identity(ds.n_rows())
    } else {
        ds.len_sq_sample_rows(m, rng)?
    };
    let sa = ds.sketch_rows(&s);
    let f = thin_svd(&sa)?;
    Ok(f.sigma_min_nonzero().unwrap_or(0.0) * 0.9)
}

/// Sample counts from the resolved configuration:
/// `m_S = ⌈c_rows ε⁻² κ̂² Z_λ² ‖A‖_F² ln(d+1)⌉` capped at `n` and
/// `m_R = ⌈c_cols ε⁻² ln(m_S) Z_λ² ‖A‖_F²⌉` capped at `d`.
pub fn ridge_sample_sizes(
    cfg: &RidgeConfig,
    frob_sq: f64,
    n: usize,
    d: usize,
) -> Result<(usize, usize)> {
    cfg.validate()?;
    if frob_sq <= 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let (sigma_k, _) = cfg.spectrum()?;
    let z_sq = cfg.lambda + sigma_k * sigma_k;
    if z_sq <= 0.0 {
        return Err(Error::InvalidParameter(
            "lambda + sigma_k² must be positive".into(),
        ));
    }
    let z_lambda_sq = 1.0 / z_sq;
    let kappa_hat = cfg.kappa_hat()?;
    let eps_sq = cfg.epsilon * cfg.epsilon;
    let m_s_raw =
        cfg.c_rows / eps_sq * kappa_hat * kappa_hat * z_lambda_sq * frob_sq * ((d + 1) as f64).ln();
    let m_s = (m_s_raw.ceil() as usize).max(1).min(n);
    let m_r_raw = cfg.c_cols / eps_sq * (m_s as f64).ln().max(1.0) * z_lambda_sq * frob_sq;
    let m_r = (m_r_raw.ceil() as usize).max(1).min(d);
    Ok((m_s, m_r))
}

pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Final relative residual `‖Mx - rhs‖ / ‖rhs‖`.
    pub residual: f64,
}

/// Conjugate gradient on a symmetric positive definite operator.
pub fn conjugate_gradient(
    mut matvec: impl FnMut(&[f64], &mut [f64]),
    rhs: &[f64],
    tol: f64,
    max_iters: usize,
) -> Result<CgOutcome> {
    let n = rhs.len();
    let rhs_norm = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut x = vec![0.0; n];
    if rhs_norm == 0.0 {
        return Ok(CgOutcome {
            x,
            iterations: 0,
            converged: true,
            residual: 0.0,
        });
    }
    let mut r = rhs.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rs: f64 = r.iter().map(|v| v * v).sum();
    let mut iterations = 0;
    while iterations < max_iters {
        if rs.sqrt() <= tol * rhs_norm {
            break;
        }
        matvec(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if !pap.is_finite() || pap <= 0.0 {
            return Err(Error::NumericalBreakdown);
        }
        let alpha = rs / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rs_new: f64 = r.iter().map(|v| v * v).sum();
        if !rs_new.is_finite() {
            return Err(Error::NumericalBreakdown);
        }
        let beta = rs_new / rs;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rs = rs_new;
        iterations += 1;
    }
    let residual = rs.sqrt() / rhs_norm;
    Ok(CgOutcome {
        x,
        iterations,
        converged: residual <= tol,
        residual,
    })
}

/// Factored ridge solution: the implicit output is `AᵀSᵀX̃`.
pub struct RidgeSolution {
    /// `m_S x d'` small solve result.
    pub x_tilde: DenseMatrix,
    pub row_sampler: RowSampler,
    pub col_sampler: ColSampler,
    /// Worst per-column iteration count.
    pub cg_iterations: usize,
    /// Worst per-column relative residual.
    pub residual_norm: f64,
    pub converged: bool,
}

impl RidgeSolution {
    /// One entry of `AᵀSᵀX̃`: the sum over sampler picks of
    /// `scale_t A[i_t, i] X̃[t, j]`; touches only `m_S` entries of `A`.
    pub fn solution_entry(&self, ds: &DynSamp, i: usize, j: usize) -> Result<f64> {
        if i >= ds.n_cols() || j >= self.x_tilde.cols() {
            return Err(Error::IndexOutOfBounds {
                row: i,
                col: j,
                rows: ds.n_cols(),
                cols: self.x_tilde.cols(),
            });
        }
        let mut acc = 0.0;
        for (t, pick) in self.row_sampler.picks.iter().enumerate() {
            let a = ds.matrix().get(pick.index, i);
            if a != 0.0 {
                acc += pick.scale * a * self.x_tilde.get(t, j);
            }
        }
        Ok(acc)
    }

    /// Dense `d x d'` materialization, for verification at desk scale.
    pub fn materialize(&self, ds: &DynSamp) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(ds.n_cols(), self.x_tilde.cols());
        for (t, pick) in self.row_sampler.picks.iter().enumerate() {
            for (col, v) in ds.row_entries(pick.index) {
                let w = pick.scale * v;
                for j in 0..self.x_tilde.cols() {
                    out.set(col, j, out.get(col, j) + w * self.x_tilde.get(t, j));
                }
            }
        }
        out
    }
}

/// Sketch, assemble `M = (SAR)(SAR)ᵀ + λI`, and CG-solve `M X̃ = SB` column
/// by column.
pub fn ridge_solve(
    ds: &DynSamp,
    b: &DenseMatrix,
    cfg: &RidgeConfig,
    rng: &mut impl Rng,
) -> Result<RidgeSolution> {
    let n = ds.n_rows();
    let d = ds.n_cols();
    if b.rows() != n {
        return Err(Error::DimensionMismatch(format!(
            "B has {} rows for an A with {}",
            b.rows(),
            n
        )));
    }
    if ds.frob_norm_sq() <= 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let cfg = cfg.resolved(ds, rng)?;
    let (auto_ms, auto_mr) = ridge_sample_sizes(&cfg, ds.frob_norm_sq(), n, d)?;
    let m_s = cfg.rows_override.unwrap_or(auto_ms).max(1).min(n);
    let m_r = cfg.cols_override.unwrap_or(auto_mr).max(1).min(d);

    let s = if m_s >= n {
        RowSampler::identity(n)
    } else {
        ds.len_sq_sample_rows(m_s, rng)?
    };
    let r = if m_r >= d {
        ColSampler::identity(d)
    } else {
        ds.len_sq_sample_cols_of_sa(&s, m_r, rng)?
    };

    let sar = ds.sketch_rows_cols(&s, &r);
    let mut system = sar.matmul(&sar.transpose());
    for i in 0..m_s {
        system.set(i, i, system.get(i, i) + cfg.lambda);
    }
    let sb = s.sketch_dense(b);

    let kappa_hat = cfg.kappa_hat()?;
    let max_iters = cfg
        .cg_max_iters
        .unwrap_or_else(|| (10.0 * kappa_hat).ceil() as usize + 100);

    let mut x_tilde = DenseMatrix::zeros(m_s, b.cols());
    let mut worst_iters = 0;
    let mut worst_residual: f64 = 0.0;
    let mut converged = true;
    let mut rhs = vec![0.0; m_s];
    for j in 0..b.cols() {
        for t in 0..m_s {
            rhs[t] = sb.get(t, j);
        }
        let outcome =
            conjugate_gradient(|p, out| system.mat_vec(p, out), &rhs, cfg.cg_tol, max_iters)?;
        for t in 0..m_s {
            x_tilde.set(t, j, outcome.x[t]);
        }
        worst_iters = worst_iters.max(outcome.iterations);
        worst_residual = worst_residual.max(outcome.residual);
        converged &= outcome.converged;
    }
    Ok(RidgeSolution {
        x_tilde,
        row_sampler: s,
        col_sampler: r,
        cg_iterations: worst_iters,
        residual_norm: worst_residual,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::SparseMatrix;
    use crate::svd::ridge_exact;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cg_identity_converges_immediately() {
        let m = DenseMatrix::identity(4);
        let rhs = vec![1.0, 2.0, 3.0, 4.0];
        let out = conjugate_gradient(|p, o| m.mat_vec(p, o), &rhs, 1e-10, 10).unwrap();
        assert!(out.converged);
        assert_eq!(out.iterations, 1);
        for (a, b) in out.x.iter().zip(&rhs) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn cg_diagonal_matches_direct_solve() {
        let diag: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let rhs = vec![1.0; 10];
        let out = conjugate_gradient(
            |p, o| {
                for i in 0..10 {
                    o[i] = diag[i] * p[i];
                }
            },
            &rhs,
            1e-10,
            50,
        )
        .unwrap();
        assert!(out.converged);
        assert!(out.iterations <= 10);
        for i in 0..10 {
            assert!((out.x[i] - 1.0 / diag[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn cg_zero_rhs_returns_zero() {
        let out = conjugate_gradient(|_, o| o.fill(0.0), &[0.0; 5], 1e-8, 10).unwrap();
        assert!(out.converged);
        assert_eq!(out.iterations, 0);
        assert!(out.x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn cg_detects_nan() {
        let rhs = vec![1.0, 1.0];
        let res = conjugate_gradient(|_, o| o.fill(f64::NAN), &rhs, 1e-8, 10);
        assert!(res.is_err());
    }

    #[test]
    fn cg_iterations_scale_like_sqrt_kappa() {
        // Chebyshev-node spectrum: endpoint-clustered eigenvalues realize
        // the sqrt-kappa convergence rate rather than beating it.
        let run = |kappa: f64| {
            let n = 2000;
            let diag: Vec<f64> = (0..n)
                .map(|i| {
                    let t = (std::f64::consts::PI * (i as f64 + 0.5) / n as f64).cos();
                    1.0 + (kappa - 1.0) * (1.0 + t) / 2.0
                })
                .collect();
            let rhs = vec![1.0; n];
            let out = conjugate_gradient(
                |p, o| {
                    for i in 0..n {
                        o[i] = diag[i] * p[i];
                    }
                },
                &rhs,
                1e-8,
                4 * n,
            )
            .unwrap();
            assert!(out.converged);
            out.iterations as f64
        };
        let i_small = run(1e2);
        let i_large = run(1e4);
        let ratio = i_large / i_small;
        assert!(
            (10.0 / 3.0..=30.0).contains(&ratio),
            "iteration ratio {ratio} outside sqrt-kappa scaling band"
        );
    }

    #[test]
    fn sample_sizes_formula_and_caps() {
        let mut cfg = RidgeConfig::new(1.0, 0.5);
        cfg.sigma_k_lower = Some(1.0);
        cfg.sigma_1_upper = Some(1.0);
        // kappa_hat = 1: m_S reduces to ceil(c_rows eps^-2 Z² F² ln(d+1)).
        let frob = 20.0;
        let (m_s, m_r) = ridge_sample_sizes(&cfg, frob, 100_000, 9000).unwrap();
        let expect = (2.0 / 0.25 * 0.5 * frob * (9001f64).ln()).ceil() as usize;
        assert_eq!(m_s, expect);
        assert!(m_r >= 1);
        // Doubling a dominant lambda roughly halves m_S.
        let mut big = cfg.clone();
        big.lambda = 1e6;
        let (m1, _) = ridge_sample_sizes(&big, frob, usize::MAX >> 1, 9000).unwrap();
        big.lambda = 2e6;
        let (m2, _) = ridge_sample_sizes(&big, frob, usize::MAX >> 1, 9000).unwrap();
        assert!(
            (m1 as f64 / m2 as f64 - 2.0).abs() < 0.1 || (m1 as isize - 2 * m2 as isize).abs() <= 2
        );
        // Caps bind on tiny matrices.
        let (c_s, c_r) = ridge_sample_sizes(&cfg, frob, 10, 7).unwrap();
        assert_eq!((c_s, c_r), (10, 7));
    }

    #[test]
    fn zero_spectrum_fails() {
        let mut cfg = RidgeConfig::new(0.0, 0.5);
        cfg.sigma_k_lower = Some(0.0);
        cfg.sigma_1_upper = Some(1.0);
        assert!(ridge_sample_sizes(&cfg, 1.0, 10, 10).is_err());
    }

    #[test]
    fn identity_design_recovers_b() {
        // A = I_n, lambda = 0, caps force exact sampling: AᵀSᵀX̃ = B.
        let n = 24;
        let mut m = SparseMatrix::new(n, n);
        for i in 0..n {
            m.set(i, i, 1.0).unwrap();
        }
        let ds = DynSamp::from_matrix(m);
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let b = DenseMatrix::gaussian(n, 2, &mut rng);
        let mut cfg = RidgeConfig::new(0.0, 0.3);
        cfg.sigma_k_lower = Some(1.0);
        cfg.sigma_1_upper = Some(1.0);
        cfg.rows_override = Some(n);
        cfg.cols_override = Some(n);
        let sol = ridge_solve(&ds, &b, &cfg, &mut rng).unwrap();
        assert!(sol.converged);
        let full = sol.materialize(&ds);
        let rel = full.sub(&b).frob_norm() / b.frob_norm();
        assert!(rel < 1e-6, "relative error {rel}");
    }

    #[test]
    fn zero_b_gives_zero_solution() {
        let mut rng = ChaCha8Rng::seed_from_u64(62);
        let mut m = SparseMatrix::new(10, 4);
        for i in 0..10 {
            for j in 0..4 {
                m.set(i, j, rng.gen_range(-1.0..1.0)).unwrap();
            }
        }
        let ds = DynSamp::from_matrix(m);
        let b = DenseMatrix::zeros(10, 1);
        let cfg = RidgeConfig::new(0.5, 0.4);
        let sol = ridge_solve(&ds, &b, &cfg, &mut rng).unwrap();
        assert_eq!(sol.x_tilde.max_abs(), 0.0);
        assert_eq!(sol.cg_iterations, 0);
    }

    #[test]
    fn solution_entry_matches_dense_assembly() {
        let mut rng = ChaCha8Rng::seed_from_u64(63);
        let mut m = SparseMatrix::new(30, 8);
        for i in 0..30 {
            for j in 0..8 {
                if rng.gen_bool(0.6) {
                    m.set(i, j, rng.gen_range(-2.0..2.0)).unwrap();
                }
            }
        }
        let ds = DynSamp::from_matrix(m);
        let b = DenseMatrix::gaussian(30, 2, &mut rng);
        let cfg = RidgeConfig::new(0.3, 0.4);
        let sol = ridge_solve(&ds, &b, &cfg, &mut rng).unwrap();
        let full = sol.materialize(&ds);
        // Dense oracle: Aᵀ (Sᵀ X̃) assembled with explicit matrices.
        let mut s_mat = DenseMatrix::zeros(sol.row_sampler.m(), 30);
        for (t, p) in sol.row_sampler.picks.iter().enumerate() {
            s_mat.set(t, p.index, p.scale);
        }
        let a_dense = ds.matrix().to_dense();
        let oracle = a_dense
            .transpose()
            .matmul(&s_mat.transpose())
            .matmul(&sol.x_tilde);
        assert!(oracle.sub(&full).max_abs() < 1e-10);
        for (i, j) in [(0, 0), (3, 1), (7, 0)] {
            let e = sol.solution_entry(&ds, i, j).unwrap();
            assert!((e - oracle.get(i, j)).abs() < 1e-10);
        }
        // Single-pick check: one term of the sum.
        let single = RidgeSolution {
            x_tilde: DenseMatrix::from_values(1, 1, vec![2.0]).unwrap(),
            row_sampler: RowSampler {
                picks: vec![crate::sampler::SamplePick {
                    index: 4,
                    probability: 1.0,
                    scale: 3.0,
                }],
            },
            col_sampler: ColSampler::identity(8),
            cg_iterations: 0,
            residual_norm: 0.0,
            converged: true,
        };
        let expect = 3.0 * ds.matrix().get(4, 2) * 2.0;
        assert!((single.solution_entry(&ds, 2, 0).unwrap() - expect).abs() < 1e-12);
        assert!(single.solution_entry(&ds, 9, 0).is_err());
    }

    #[test]
    fn sketched_solve_tracks_oracle_on_low_rank_instance() {
        // Moderate instance with real sampling; checks the end-to-end error
        // against the closed form at a loose tolerance.
        let mut rng = ChaCha8Rng::seed_from_u64(64);
        let n = 120;
        let d = 30;
        let k = 10;
        let u = DenseMatrix::gaussian(n, k, &mut rng).qr_thin().0;
        let v = DenseMatrix::gaussian(d, k, &mut rng).qr_thin().0;
        let a = u.matmul(&v.transpose());
        let mut sm = SparseMatrix::new(n, d);
        for i in 0..n {
            for j in 0..d {
                sm.set(i, j, a.get(i, j)).unwrap();
            }
        }
        let ds = DynSamp::from_matrix(sm);
        let w = DenseMatrix::gaussian(d, 1, &mut rng);
        let b = a.matmul(&w);
        let lambda = 0.1;
        let cfg = RidgeConfig::new(lambda, 0.3);
        let x_star = ridge_exact(&a, &b, lambda).unwrap();
        let mut errs = Vec::new();
        for seed in 0..5 {
            let mut r = ChaCha8Rng::seed_from_u64(700 + seed);
            let sol = ridge_solve(&ds, &b, &cfg, &mut r).unwrap();
            let y = sol.materialize(&ds);
            errs.push(y.sub(&x_star).frob_norm() / x_star.frob_norm());
        }
        let med = crate::stats::median(&errs);
        assert!(med < 0.5, "median relative error {med}");
    }

    #[test]
    fn zero_matrix_solve_fails() {
        let ds = DynSamp::new(5, 4);
        let b = DenseMatrix::zeros(5, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(66);
        assert!(matches!(
            ridge_solve(&ds, &b, &RidgeConfig::new(1.0, 0.3), &mut rng),
            Err(crate::Error::ZeroMatrix)
        ));
        // Response row-count mismatch.
        let mut m = SparseMatrix::new(5, 4);
        m.set(0, 0, 1.0).unwrap();
        let ds = DynSamp::from_matrix(m);
        let bad_b = DenseMatrix::zeros(4, 1);
        assert!(ridge_solve(&ds, &bad_b, &RidgeConfig::new(1.0, 0.3), &mut rng).is_err());
    }

    #[test]
    fn estimators_bracket_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(65);
        let u = DenseMatrix::gaussian(60, 5, &mut rng).qr_thin().0;
        let v = DenseMatrix::gaussian(20, 5, &mut rng).qr_thin().0;
        let sigma = [5.0, 4.0, 3.0, 2.0, 1.0];
        let mut a = DenseMatrix::zeros(60, 20);
        for i in 0..60 {
            for j in 0..20 {
                let mut acc = 0.0;
                for (t, s) in sigma.iter().enumerate() {
                    acc += u.get(i, t) * s * v.get(j, t);
                }
                a.set(i, j, acc);
            }
        }
        let mut sm = SparseMatrix::new(60, 20);
        for i in 0..60 {
            for j in 0..20 {
                sm.set(i, j, a.get(i, j)).unwrap();
            }
        }
        let ds = DynSamp::from_matrix(sm);
        let hi = estimate_sigma_1(&ds, 30, &mut rng);
        assert!((5.0..7.0).contains(&hi), "sigma_1 estimate {hi}");
        let lo = estimate_sigma_min(&ds, hi, &mut rng).unwrap();
        assert!(lo <= 1.05 && lo > 0.2, "sigma_min estimate {lo}");
    }
}
