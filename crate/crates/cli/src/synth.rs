//! Synthetic instances: `A = U diag(σ) Vᵀ` with `U`, `V` drawn by QR of
//! Gaussian matrices, so the factors are Haar-ish orthonormal and the rank
//! and spectrum are exact by construction.

use dynsketch::dense::DenseMatrix;
use dynsketch::SparseMatrix;
use rand::Rng;

use crate::{HarnessError, Result};

/// Exact rank-k matrix with the given singular values (all ones when
/// `sigma` is absent).
pub fn gen_synthetic_rank_k(
    n: usize,
    d: usize,
    k: usize,
    sigma: Option<&[f64]>,
    rng: &mut impl Rng,
) -> Result<SparseMatrix> {
    if k == 0 || k > n.min(d) {
        return Err(HarnessError::Spec(format!(
            "rank {k} out of range for {n}x{d}"
        )));
    }
    if let Some(s) = sigma {
        if s.len() != k {
            return Err(HarnessError::Spec(format!(
                "{} singular values for rank {k}",
                s.len()
            )));
        }
    }
    let (u, _) = DenseMatrix::gaussian(n, k, rng).qr_thin();
    let (v, _) = DenseMatrix::gaussian(d, k, rng).qr_thin();
    let mut m = SparseMatrix::new(n, d);
    for i in 0..n {
        for j in 0..d {
            let mut acc = 0.0;
            for t in 0..k {
                let s = sigma.map(|s| s[t]).unwrap_or(1.0);
                acc += u.get(i, t) * s * v.get(j, t);
            }
            if acc != 0.0 {
                m.set(i, j, acc)?;
            }
        }
    }
    Ok(m)
}

/// Head/tail spectrum: the top `k` singular values follow
/// `head * decay^(i-1)` and the remaining `min(n,d) - k` sit at `tail`.
/// A zero tail gives an exact rank-k matrix; a positive tail adds a
/// full-rank noise floor; `decay = 1` keeps the head flat.
pub fn gen_spectrum(
    n: usize,
    d: usize,
    k: usize,
    head: f64,
    decay: f64,
    tail: f64,
    rng: &mut impl Rng,
) -> Result<SparseMatrix> {
    if !(decay > 0.0 && decay <= 1.0) {
        return Err(HarnessError::Spec(format!(
            "sigma decay must lie in (0, 1], got {decay}"
        )));
    }
    let head_sigma: Vec<f64> = (0..k as i32).map(|i| head * decay.powi(i)).collect();
    if tail == 0.0 {
        return gen_synthetic_rank_k(n, d, k, Some(&head_sigma), rng);
    }
    let full = n.min(d);
    let mut sigma = vec![tail; full];
    sigma[..k].copy_from_slice(&head_sigma);
    gen_synthetic_rank_k(n, d, full, Some(&sigma), rng)
}

/// Flat head spectrum, kept for callers that do not sweep decay.
pub fn gen_head_tail(
    n: usize,
    d: usize,
    k: usize,
    head: f64,
    tail: f64,
    rng: &mut impl Rng,
) -> Result<SparseMatrix> {
    gen_spectrum(n, d, k, head, 1.0, tail, rng)
}
