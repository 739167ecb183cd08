//! Thin SVD via one-sided Jacobi, plus the exact oracles built on it:
//! leverage scores, ridge leverage scores and statistical dimension, best
//! rank-k error, pseudo-inverse, and a closed-form ridge solver.
//!
//! These are the ground-truth routes the probabilistic machinery is verified
//! against, so they favor accuracy over speed.

use crate::dense::DenseMatrix;
use crate::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Relative threshold below which a singular value is treated as zero.
pub fn rank_tolerance(rows: usize, cols: usize, sigma_max: f64) -> f64 {
    rows.max(cols) as f64 * sigma_max * 1e-12
}

#[derive(Clone, Debug)]
pub struct SvdFactors {
    /// Left singular vectors, `rows x min(rows, cols)`, orthonormal columns.
    pub u: DenseMatrix,
    /// Singular values, nonincreasing.
    pub sigma: Vec<f64>,
    /// Right singular vectors, `cols x min(rows, cols)`, orthonormal columns.
    pub v: DenseMatrix,
}

impl SvdFactors {
    /// Numerical rank under [`rank_tolerance`].
    pub fn rank(&self) -> usize {
        let tol = rank_tolerance(
            self.u.rows(),
            self.v.rows(),
            self.sigma.first().copied().unwrap_or(0.0),
        );
        self.sigma.iter().take_while(|&&s| s > tol).count()
    }

    /// Smallest singular value above the rank tolerance, if any.
    pub fn sigma_min_nonzero(&self) -> Option<f64> {
        let r = self.rank();
        if r == 0 {
            None
        } else {
            Some(self.sigma[r - 1])
        }
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        let mut us = self.u.clone();
        for i in 0..us.rows() {
            for (j, &s) in self.sigma.iter().enumerate() {
                us.set(i, j, us.get(i, j) * s);
            }
        }
        us.matmul(&self.v.transpose())
    }
}

/// One-sided Jacobi SVD. Operates on the transpose when the input is wide so
/// the rotation loop always runs over the smaller side.
pub fn thin_svd(m: &DenseMatrix) -> Result<SvdFactors> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    if m.rows() >= m.cols() {
        jacobi_tall(m)
    } else {
        let f = jacobi_tall(&m.transpose())?;
        Ok(SvdFactors {
            u: f.v,
            sigma: f.sigma,
            v: f.u,
        })
    }
}

fn jacobi_tall(m: &DenseMatrix) -> Result<SvdFactors> {
    let rows = m.rows();
    let cols = m.cols();
    // Columns with squared norm at or below this are numerical noise; pairs
    // of them are skipped so deflated directions cannot stall convergence.
    let negligible_sq = m.frob_norm_sq() * 1e-28;
    // Rotation threshold scales with the number of interacting columns:
    // each sweep reintroduces off-diagonal mass of order eps per column.
    let conv_tol = (f64::EPSILON * cols as f64).max(1e-15);
    // Column-major working copies: Jacobi rotates pairs of columns.
    let mut a: Vec<Vec<f64>> = (0..cols).map(|j| m.column(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..cols)
        .map(|j| {
            let mut e = vec![0.0; cols];
            e[j] = 1.0;
            e
        })
        .collect();

    let mut converged = false;
    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let (alpha, beta, gamma) = {
                    let (cp, cq) = (&a[p], &a[q]);
                    let mut alpha = 0.0;
                    let mut beta = 0.0;
                    let mut gamma = 0.0;
                    for i in 0..rows {
                        alpha += cp[i] * cp[i];
                        beta += cq[i] * cq[i];
                        gamma += cp[i] * cq[i];
                    }
                    (alpha, beta, gamma)
                };
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                if alpha <= negligible_sq || beta <= negligible_sq {
                    continue;
                }
                if gamma.abs() <= conv_tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (head, tail) = a.split_at_mut(q);
                let cp = &mut head[p];
                let cq = &mut tail[0];
                for i in 0..rows {
                    let x = cp[i];
                    let y = cq[i];
                    cp[i] = c * x - s * y;
                    cq[i] = s * x + c * y;
                }
                let (head, tail) = v.split_at_mut(q);
                let vp = &mut head[p];
                let vq = &mut tail[0];
                for i in 0..cols {
                    let x = vp[i];
                    let y = vq[i];
                    vp[i] = c * x - s * y;
                    vq[i] = s * x + c * y;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::SvdNoConvergence(MAX_SWEEPS));
    }

    let mut order: Vec<usize> = (0..cols).collect();
    let norms: Vec<f64> = a
        .iter()
        .map(|col| col.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let mut u = DenseMatrix::zeros(rows, cols);
    let mut vm = DenseMatrix::zeros(cols, cols);
    let mut sigma = Vec::with_capacity(cols);
    let sigma_max = norms[order[0]];
    let tiny = rank_tolerance(rows, cols, sigma_max);
    let mut zero_cols = Vec::new();
    for (slot, &src) in order.iter().enumerate() {
        let s = norms[src];
        sigma.push(if s > tiny { s } else { 0.0 });
        if s > tiny {
            for i in 0..rows {
                u.set(i, slot, a[src][i] / s);
            }
        } else {
            zero_cols.push(slot);
        }
        for i in 0..cols {
            vm.set(i, slot, v[src][i]);
        }
    }
    if !zero_cols.is_empty() {
        complete_orthonormal(&mut u, &zero_cols);
    }
    Ok(SvdFactors { u, sigma, v: vm })
}

/// Fills the listed columns with vectors orthonormal to every other column,
/// so `UᵀU = I` holds even for rank-deficient inputs.
fn complete_orthonormal(u: &mut DenseMatrix, slots: &[usize]) {
    let m = u.rows();
    let n = u.cols();
    let mut next_basis = 0usize;
    for &slot in slots {
        'candidates: while next_basis < m {
            let mut col = vec![0.0; m];
            col[next_basis] = 1.0;
            next_basis += 1;
            // Two rounds of Gram-Schmidt for stability.
            for _ in 0..2 {
                for j in 0..n {
                    if j == slot || slots.contains(&j) && j > slot {
                        continue;
                    }
                    let mut dot = 0.0;
                    for i in 0..m {
                        dot += col[i] * u.get(i, j);
                    }
                    for i in 0..m {
                        col[i] -= dot * u.get(i, j);
                    }
                }
            }
            let norm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-8 {
                for i in 0..m {
                    u.set(i, slot, col[i] / norm);
                }
                break 'candidates;
            }
        }
    }
}

/// Squared row norms of an orthonormal column basis of `m`'s column span.
/// Values lie in [0, 1] and sum to the rank.
pub fn exact_leverage_scores(m: &DenseMatrix) -> Result<Vec<f64>> {
    let f = thin_svd(m)?;
    let r = f.rank();
    if r == 0 {
        return Err(Error::ZeroMatrix);
    }
    let mut scores = vec![0.0; m.rows()];
    for (i, score) in scores.iter_mut().enumerate() {
        for j in 0..r {
            let x = f.u.get(i, j);
            *score += x * x;
        }
    }
    Ok(scores)
}

/// Ridge spectrum of a matrix at weight `lambda`: the diagonal
/// `D = (Σ² + λI)^{-1/2}` over the nonzero spectrum, the statistical
/// dimension `Σ σ_i²/(λ+σ_i²)`, and per-row ridge leverage scores
/// `‖U_{i,*}ΣD‖²`.
#[derive(Clone, Debug)]
pub struct RidgeSpectrum {
    pub lambda: f64,
    pub d_diag: Vec<f64>,
    pub sd_lambda: f64,
    pub ridge_scores: Vec<f64>,
}

impl RidgeSpectrum {
    /// `‖Λ_A⁺‖² = 1/(λ + σ_min²)` over the nonzero spectrum.
    pub fn aug_pinv_norm_sq(&self) -> f64 {
        self.d_diag.last().map(|d| d * d).unwrap_or(0.0)
    }
}

pub fn ridge_spectrum(m: &DenseMatrix, lambda: f64) -> Result<RidgeSpectrum> {
    if lambda.is_nan() || lambda < 0.0 || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "ridge weight must be finite and nonnegative, got {lambda}"
        )));
    }
    let f = thin_svd(m)?;
    let r = f.rank();
    let d_diag: Vec<f64> = f.sigma[..r]
        .iter()
        .map(|s| 1.0 / (s * s + lambda).sqrt())
        .collect();
    let sd_lambda: f64 = f.sigma[..r].iter().map(|s| s * s / (lambda + s * s)).sum();
    let mut ridge_scores = vec![0.0; m.rows()];
    for (i, score) in ridge_scores.iter_mut().enumerate() {
        for j in 0..r {
            let x = f.u.get(i, j) * f.sigma[j] * d_diag[j];
            *score += x * x;
        }
    }
    Ok(RidgeSpectrum {
        lambda,
        d_diag,
        sd_lambda,
        ridge_scores,
    })
}

/// `‖A - A_k‖_F = sqrt(Σ_{i>k} σ_i²)`.
pub fn best_rank_k_error(m: &DenseMatrix, k: usize) -> Result<f64> {
    if k < 1 || k > m.rows().min(m.cols()) {
        return Err(Error::InvalidRank {
            k,
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let f = thin_svd(m)?;
    Ok(f.sigma[k..].iter().map(|s| s * s).sum::<f64>().sqrt())
}

/// Moore-Penrose pseudo-inverse with singular values below the rank
/// tolerance dropped.
pub fn pseudo_inverse(m: &DenseMatrix) -> Result<DenseMatrix> {
    let f = thin_svd(m)?;
    let r = f.rank();
    // V_r diag(1/σ) U_rᵀ
    let mut vs = f.v.select_columns(&(0..r).collect::<Vec<_>>());
    for i in 0..vs.rows() {
        for j in 0..r {
            vs.set(i, j, vs.get(i, j) / f.sigma[j]);
        }
    }
    let ur = f.u.select_columns(&(0..r).collect::<Vec<_>>());
    Ok(vs.matmul(&ur.transpose()))
}

/// Closed-form ridge solution. For `λ > 0` this solves the normal
/// equations by Cholesky — `(AᵀA + λI)⁻¹AᵀB` when the matrix is tall,
/// `Aᵀ(AAᵀ + λI)⁻¹B` when wide; at `λ = 0` it falls back to the SVD route
/// and returns the minimum-norm least-squares solution.
pub fn ridge_exact(a: &DenseMatrix, b: &DenseMatrix, lambda: f64) -> Result<DenseMatrix> {
    if a.rows() != b.rows() {
        return Err(Error::DimensionMismatch(format!(
            "design has {} rows, responses {}",
            a.rows(),
            b.rows()
        )));
    }
    if lambda > 0.0 {
        let add_ridge = |mut g: DenseMatrix| {
            for i in 0..g.rows() {
                g.set(i, i, g.get(i, i) + lambda);
            }
            g
        };
        if a.rows() >= a.cols() {
            let gram = add_ridge(a.transpose().matmul(a));
            return gram.cholesky_solve(&a.transpose().matmul(b));
        }
        let gram = add_ridge(a.matmul(&a.transpose()));
        return Ok(a.transpose().matmul(&gram.cholesky_solve(b)?));
    }
    let f = thin_svd(a)?;
    let r = f.rank();
    let utb =
        f.u.select_columns(&(0..r).collect::<Vec<_>>())
            .transpose()
            .matmul(b);
    let mut scaled = utb;
    for i in 0..r {
        let s = f.sigma[i];
        let factor = s / (s * s + lambda);
        for j in 0..scaled.cols() {
            scaled.set(i, j, scaled.get(i, j) * factor);
        }
    }
    Ok(f.v
        .select_columns(&(0..r).collect::<Vec<_>>())
        .matmul(&scaled))
}
