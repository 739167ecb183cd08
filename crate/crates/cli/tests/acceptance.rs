//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! with the measured values. Run with `--nocapture` to see the lines:
//!
//! ```text
//! cargo test -p dynsketch-cli --test acceptance -- --nocapture
//! ```

use dynsketch::dense::DenseMatrix;
use dynsketch::leverage::lev_sample;
use dynsketch::lowrank::{build_low_rank, pcp_sample_cols, pcp_sample_rows, LowRankConfig};
use dynsketch::ridge::{conjugate_gradient, ridge_solve, RidgeConfig};
use dynsketch::stats::{chi_square_crit_99, chi_square_stat, median, splitmix64, tv_distance};
use dynsketch::svd::{best_rank_k_error, ridge_exact, ridge_spectrum};
use dynsketch::{DynSamp, SparseMatrix, WeightedTree};
use dynsketch_cli::experiment::{
    run_lra_experiment, run_query_benchmark, run_ridge_experiment, ExperimentSpec, MatrixSource,
    Task,
};
use dynsketch_cli::synth::{gen_head_tail, gen_synthetic_rank_k};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::time::Instant;

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed))
}

fn report(criterion: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("ACCEPTANCE {criterion}: {verdict} ({detail})");
    assert!(pass, "{criterion}: {detail}");
}

fn random_sparse(n: usize, d: usize, density: f64, rng: &mut impl Rng) -> SparseMatrix {
    let mut m = SparseMatrix::new(n, d);
    for i in 0..n {
        for j in 0..d {
            if rng.gen_bool(density) {
                m.set(i, j, rng.gen_range(-3.0..3.0)).unwrap();
            }
        }
    }
    m
}

/// Criterion 1: exact walk probabilities analytic to 1e-12; chi-square at
/// 99% over 1e5 draws for row, entry and two-stage column sampling.
#[test]
fn c01_tree_and_sampler_distributions() {
    let start = Instant::now();
    // Analytic path probabilities on a fixed tree and a random one.
    let mut tree = WeightedTree::new();
    for (id, v) in [(0usize, 1.0f64), (1, 2.0), (2, 2.0)] {
        tree.upsert(id, v).unwrap();
    }
    let exact: HashMap<usize, f64> = tree.walk_probabilities().into_iter().collect();
    let mut worst: f64 = 0.0;
    for (id, expect) in [(0usize, 1.0 / 9.0), (1, 4.0 / 9.0), (2, 4.0 / 9.0)] {
        worst = worst.max((exact[&id] - expect).abs());
    }
    let mut rng = rng_for(101);
    let mut big = WeightedTree::new();
    let mut weights = Vec::new();
    for id in 0..257 {
        let v: f64 = rng.gen_range(0.1..3.0);
        big.upsert(id, v).unwrap();
        weights.push(v * v);
    }
    let total: f64 = weights.iter().sum();
    for (id, p) in big.walk_probabilities() {
        worst = worst.max((p - weights[id] / total).abs());
    }
    let analytic_ok = worst < 1e-12;

    let draws = 100_000u64;
    // Row sampling on a random 20x10 matrix.
    let matrix = random_sparse(20, 10, 0.6, &mut rng);
    let ds = DynSamp::from_matrix(matrix);
    let frob = ds.frob_norm_sq();
    let row_probs: Vec<f64> = (0..20).map(|i| ds.row_norm_sq(i) / frob).collect();
    let mut counts = vec![0u64; 20];
    for _ in 0..draws {
        counts[ds.sample_row(&mut rng).unwrap()] += 1;
    }
    let df = row_probs.iter().filter(|&&p| p > 0.0).count() - 1;
    let row_stat = chi_square_stat(&counts, &row_probs, draws);
    let row_ok = row_stat < chi_square_crit_99(df);

    // Entry sampling within a random 1x8 row.
    let mut row_m = SparseMatrix::new(1, 8);
    for j in 0..8 {
        row_m.set(0, j, rng.gen_range(0.2..2.0)).unwrap();
    }
    let ds_row = DynSamp::from_matrix(row_m);
    let row_norm = ds_row.row_norm_sq(0);
    let entry_probs: Vec<f64> = (0..8)
        .map(|j| ds_row.get_entry(0, j).unwrap().powi(2) / row_norm)
        .collect();
    let mut entry_counts = vec![0u64; 8];
    for _ in 0..draws {
        entry_counts[ds_row.sample_entry_in_row(0, &mut rng).unwrap()] += 1;
    }
    let entry_stat = chi_square_stat(&entry_counts, &entry_probs, draws);
    let entry_ok = entry_stat < chi_square_crit_99(7);

    // Two-stage column sampling of SA on a random 10x6 matrix, m_S = 5.
    let matrix = random_sparse(10, 6, 0.8, &mut rng);
    let ds2 = DynSamp::from_matrix(matrix);
    let s = ds2.len_sq_sample_rows(5, &mut rng).unwrap();
    let sa = ds2.sketch_rows(&s);
    let sa_frob = sa.frob_norm_sq();
    let col_probs: Vec<f64> = (0..6)
        .map(|j| (0..5).map(|t| sa.get(t, j).powi(2)).sum::<f64>() / sa_frob)
        .collect();
    let r = ds2
        .len_sq_sample_cols_of_sa(&s, draws as usize, &mut rng)
        .unwrap();
    let mut col_counts = vec![0u64; 6];
    for p in &r.picks {
        col_counts[p.index] += 1;
    }
    let col_df = col_probs.iter().filter(|&&p| p > 0.0).count() - 1;
    let col_stat = chi_square_stat(&col_counts, &col_probs, draws);
    let col_ok = col_stat < chi_square_crit_99(col_df);

    let elapsed = start.elapsed().as_secs_f64();
    report(
        "C1 tree/sampler distributions",
        analytic_ok && row_ok && entry_ok && col_ok && elapsed < 10.0,
        &format!(
            "path dev {worst:.2e}; chi2 row {row_stat:.1} entry {entry_stat:.1} col {col_stat:.1}; {elapsed:.1}s"
        ),
    );
}

/// Criterion 2: 1e4 turnstile updates on 100x80 against a brute-force
/// replay oracle, to 1e-9 relative.
#[test]
fn c02_turnstile_integrity() {
    let start = Instant::now();
    let mut rng = rng_for(202);
    let mut ds = DynSamp::new(100, 80);
    let mut oracle: HashMap<(usize, usize), f64> = HashMap::new();
    for _ in 0..10_000 {
        let i = rng.gen_range(0..100);
        let j = rng.gen_range(0..80);
        let v = if rng.gen_bool(0.2) {
            0.0
        } else {
            rng.gen_range(-5.0..5.0)
        };
        ds.update_entry(i, j, v).unwrap();
        if v == 0.0 {
            oracle.remove(&(i, j));
        } else {
            oracle.insert((i, j), v);
        }
    }
    let frob: f64 = oracle.values().map(|v| v * v).sum();
    let frob_ok = (ds.frob_norm_sq() - frob).abs() <= 1e-9 * frob.max(1.0);
    let mut rows_ok = true;
    for i in 0..100 {
        let brute: f64 = oracle
            .iter()
            .filter(|((r, _), _)| *r == i)
            .map(|(_, v)| v * v)
            .sum();
        rows_ok &= (ds.row_norm_sq(i) - brute).abs() <= 1e-9 * brute.max(1.0);
    }
    let mut entries_ok = ds.nnz() == oracle.len();
    for (&(i, j), &v) in &oracle {
        entries_ok &= ds.get_entry(i, j).unwrap() == v;
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "C2 turnstile integrity",
        frob_ok && rows_ok && entries_ok && elapsed < 5.0,
        &format!(
            "frob {} vs {frob}; rows_ok {rows_ok}; entries_ok {entries_ok}; {elapsed:.2}s",
            ds.frob_norm_sq()
        ),
    );
}

/// Criterion 3: ridge correctness on a 400x60 rank-30 instance at
/// λ = ‖A‖²/10: median relative solution error <= 0.2 over 10 seeds, and
/// non-increasing across ε in {0.5, 0.3, 0.15}.
#[test]
fn c03_ridge_correctness() {
    let start = Instant::now();
    let mut rng = rng_for(303);
    let matrix = gen_synthetic_rank_k(400, 60, 30, None, &mut rng).unwrap();
    let dense = matrix.to_dense();
    let ds = DynSamp::from_matrix(matrix);
    let lambda = 0.1; // ‖A‖² / 10 with unit singular values
    let w = DenseMatrix::gaussian(60, 1, &mut rng);
    let b = dense.matmul(&w);
    let x_star = ridge_exact(&dense, &b, lambda).unwrap();
    let x_norm = x_star.frob_norm();

    let mut medians = Vec::new();
    for eps in [0.5, 0.3, 0.15] {
        let mut errs = Vec::new();
        for seed in 0..10 {
            let mut trial_rng = rng_for(30_000 + seed);
            let cfg = RidgeConfig::new(lambda, eps);
            let sol = ridge_solve(&ds, &b, &cfg, &mut trial_rng).unwrap();
            let x = sol.materialize(&ds);
            errs.push(x.sub(&x_star).frob_norm() / x_norm);
        }
        medians.push(median(&errs));
    }
    let band_ok = medians[1] <= 0.2;
    let monotone_ok = medians[0] + 1e-9 >= medians[1] && medians[1] + 1e-9 >= medians[2];
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "C3 ridge correctness",
        band_ok && monotone_ok && elapsed < 30.0,
        &format!(
            "medians at eps 0.5/0.3/0.15 = {:.2e}/{:.2e}/{:.2e}; {elapsed:.1}s",
            medians[0], medians[1], medians[2]
        ),
    );
}

/// Criterion 4: qualitative replica at desk scale, 700x900 rank-20 with 10%
/// row/column sampling at λ = 1: median error <= 0.2 over 10 seeds.
///
/// Known red. At (r,c) = (70,90) the estimator's error floor on natural
/// rank-20 instances sits near 0.25-0.37: solution mass concentrates on
/// directions with σ ≈ sqrt(λ) that length-squared sampling rarely visits,
/// and 70 draws cannot pay the κ² oversampling cost. The same code at the
/// full-scale sample counts (r,c) = (300,500) and (500,800) lands at
/// ~0.16/0.12, matching the published curve, so the gap is the operating
/// point, not the implementation. The context line below prints both.
#[test]
fn c04_ridge_ten_percent_sampling() {
    let start = Instant::now();
    let run_at = |rows: usize, cols: usize| {
        let mut spec = ExperimentSpec::new(
            Task::Ridge,
            MatrixSource::Synthetic {
                n_rows: 700,
                n_cols: 900,
                rank: 20,
                sigma_head: 1.0,
                sigma_decay: 1.0,
                sigma_tail: 0.0,
            },
        );
        spec.lambda = 1.0;
        spec.epsilon = 0.3;
        spec.rows = Some(rows);
        spec.cols = Some(cols);
        spec.trials = 10;
        spec.seed = 404;
        spec.noise = 0.0;
        run_ridge_experiment(&spec).unwrap().median_error
    };
    let ten_percent = run_at(70, 90);
    let paper_counts = run_at(300, 500);
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "C4 ridge 10% sampling replica",
        ten_percent <= 0.2 && elapsed < 60.0,
        &format!(
            "median error {ten_percent:.4} at (70,90); context: {paper_counts:.4} at (300,500); {elapsed:.1}s"
        ),
    );
}

/// Criterion 5: low-rank relative error with σ_i = 1/i² decay at 200x150,
/// k = 5, ε = 0.5: median ‖ARWSA - A‖_F <= 2.0 ‖A - A_k‖_F; exact rank-k
/// input recovers to 1e-6 relative.
#[test]
fn c05_lra_relative_error() {
    let start = Instant::now();
    let mut rng = rng_for(505);
    let sigma: Vec<f64> = (1..=150).map(|i| 1.0 / (i * i) as f64).collect();
    let matrix = gen_synthetic_rank_k(200, 150, 150, Some(&sigma), &mut rng).unwrap();
    let dense = matrix.to_dense();
    let best = best_rank_k_error(&dense, 5).unwrap();
    let ds = DynSamp::from_matrix(matrix);
    let mut ratios = Vec::new();
    for seed in 0..10 {
        let mut trial_rng = rng_for(50_000 + seed);
        let cfg = LowRankConfig::new(5, 0.5);
        let model = build_low_rank(&ds, &cfg, &mut trial_rng).unwrap();
        let y = model.materialize(&ds);
        ratios.push(y.sub(&dense).frob_norm() / best);
    }
    let med = median(&ratios);
    let decay_ok = med <= 2.0;

    // Exactly rank-k input: relative recovery to 1e-6.
    let matrix = gen_synthetic_rank_k(100, 80, 3, None, &mut rng).unwrap();
    let dense_k = matrix.to_dense();
    let ds_k = DynSamp::from_matrix(matrix);
    let mut rels = Vec::new();
    for seed in 0..10 {
        let mut trial_rng = rng_for(51_000 + seed);
        let model = build_low_rank(&ds_k, &LowRankConfig::new(3, 0.5), &mut trial_rng).unwrap();
        let y = model.materialize(&ds_k);
        rels.push(y.sub(&dense_k).frob_norm() / dense_k.frob_norm());
    }
    let exact_ok = median(&rels) <= 1e-6;
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "C5 LRA relative error",
        decay_ok && exact_ok && elapsed < 60.0,
        &format!(
            "decay median ratio {med:.3}; exact-rank median rel {:.2e}; {elapsed:.1}s",
            median(&rels)
        ),
    );
}

/// Criterion 6 (optional): MovieLens replica. Reads a MatrixMarket file
/// from DYNSKETCH_MOVIELENS; skips silently when unset.
#[test]
fn c06_movielens_replica_optional() {
    let Some(path) = std::env::var_os("DYNSKETCH_MOVIELENS") else {
        println!("ACCEPTANCE C6 MovieLens replica: SKIP (set DYNSKETCH_MOVIELENS to a MatrixMarket file)");
        return;
    };
    let start = Instant::now();
    let run_at = |rows: usize, cols: usize| {
        let mut spec = ExperimentSpec::new(
            Task::Lra,
            MatrixSource::File {
                path: path.clone().into(),
            },
        );
        spec.rank_list = vec![10];
        spec.rows = Some(rows);
        spec.cols = Some(cols);
        spec.epsilon = 0.5;
        spec.trials = 10;
        spec.seed = 606;
        run_lra_experiment(&spec).unwrap().median_error
    };
    let small = run_at(300, 500);
    let large = run_at(500, 800);
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "C6 MovieLens replica",
        (0.0..=0.15).contains(&small) && large <= small,
        &format!("metric(300,500) {small:.4}; metric(500,800) {large:.4}; {elapsed:.1}s"),
    );
}

/// Criterion 7: projection-cost preservation on a 60x40 instance, k = 4,
/// ε = 0.5: the sandwich holds for >= 95 of 100 random rank-k projections,
/// per sketch stage (rows and columns).
#[test]
fn c07_pcp_property() {
    let start = Instant::now();
    let mut rng = rng_for(707);
    let a = DenseMatrix::gaussian(60, 40, &mut rng);
    let k = 4;
    let eps = 0.5;

    let row_sketch = pcp_sample_rows(&a, k, eps, 2.0, &mut rng).unwrap();
    let sa = row_sketch.sketch_dense(&a);
    let col_sketch = pcp_sample_cols(&a, k, eps, 2.0, &mut rng).unwrap();
    let ar = col_sketch.sketch_dense(&a);

    let mut rows_ok = 0;
    let mut cols_ok = 0;
    for _ in 0..100 {
        // Row-stage: projections act on the column space (right side).
        let q = DenseMatrix::gaussian(40, k, &mut rng).qr_thin().0;
        let right_residual = |m: &DenseMatrix| {
            let mq = m.matmul(&q);
            m.sub(&mq.matmul(&q.transpose())).frob_norm_sq()
        };
        let full = right_residual(&a);
        let sk = right_residual(&sa);
        if sk >= (1.0 - eps) * full && sk <= (1.0 + eps) * full {
            rows_ok += 1;
        }
        // Column-stage: projections act on the row space (left side).
        let p = DenseMatrix::gaussian(60, k, &mut rng).qr_thin().0;
        let left_residual = |m: &DenseMatrix| {
            let pm = p.transpose().matmul(m);
            m.sub(&p.matmul(&pm)).frob_norm_sq()
        };
        let full_l = left_residual(&a);
        let sk_l = left_residual(&ar);
        if sk_l >= (1.0 - eps) * full_l && sk_l <= (1.0 + eps) * full_l {
            cols_ok += 1;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "C7 PCP property",
        rows_ok >= 95 && cols_ok >= 95 && elapsed < 20.0,
        &format!("row stage {rows_ok}/100, col stage {cols_ok}/100; {elapsed:.1}s"),
    );
}

/// Criterion 8: query distribution on an 80x60 model: TV between 1e4 draws
/// and the exact conditional distribution <= 0.05 on 10 columns; measured
/// rejection trials <= 2 m_R κ_est².
#[test]
fn c08_query_distribution() {
    let start = Instant::now();
    let mut rng = rng_for(808);
    let matrix = gen_synthetic_rank_k(80, 60, 8, None, &mut rng).unwrap();
    let ds = DynSamp::from_matrix(matrix);
    let model = build_low_rank(&ds, &LowRankConfig::new(8, 0.5), &mut rng).unwrap();

    let draws = 10_000u64;
    let mut worst_tv: f64 = 0.0;
    let mut total_trials = 0u64;
    let mut total_queries = 0u64;
    for c in 0..10 {
        let j = (c * 6007) % 60;
        let col = model.model_column(&ds, j).unwrap();
        let norm_sq: f64 = col.iter().map(|x| x * x).sum();
        let probs: Vec<f64> = col.iter().map(|x| x * x / norm_sq).collect();
        let mut counts = vec![0u64; 80];
        for _ in 0..draws {
            let (i, stats) = model
                .sample_row_given_column_with_stats(&ds, j, &mut rng)
                .unwrap();
            counts[i] += 1;
            total_trials += stats.trials;
            total_queries += 1;
        }
        worst_tv = worst_tv.max(tv_distance(&counts, &probs, draws));
    }
    let mean_trials = total_trials as f64 / total_queries as f64;
    let trials_bound = 2.0 * model.m_r() as f64 * model.kappa_est * model.kappa_est;
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "C8 query distribution",
        worst_tv <= 0.05 && mean_trials <= trials_bound && elapsed < 60.0,
        &format!(
            "worst TV {worst_tv:.4}; mean trials {mean_trials:.1} <= {trials_bound:.1}; {elapsed:.1}s"
        ),
    );
}

/// Criterion 9: leverage stack. Uniform sampling on an orthonormal design
/// within TV 0.05; the acceptance-ratio guard never fires; the
/// length-squared-contains-ridge-leverage domination holds exactly on 20
/// random (A, λ) pairs.
#[test]
fn c09_leverage_stack() {
    let start = Instant::now();
    // Block-orthonormal design: exactly uniform leverage scores.
    let n = 24;
    let k = 4;
    let blocks = (n / k) as f64;
    let a = DenseMatrix::from_fn(
        n,
        k,
        |i, j| {
            if i % k == j {
                1.0 / blocks.sqrt()
            } else {
                0.0
            }
        },
    );
    let mut rng = rng_for(909);
    let sketch = lev_sample(&a, None, |_| 10_000, &mut rng).unwrap();
    assert!(!sketch.uniform_fallback);
    let mut counts = vec![0u64; n];
    for p in &sketch.sampler.picks {
        counts[p.index] += 1;
    }
    let uniform = vec![1.0 / n as f64; n];
    let tv = tv_distance(&counts, &uniform, 10_000);

    // The acceptance-ratio guard is an error path; every call above and
    // below succeeding means it never fired. Exercise it across fresh
    // instances for good measure.
    let mut guard_ok = true;
    for seed in 0..20 {
        let mut r = rng_for(91_000 + seed);
        let inst = DenseMatrix::gaussian(120, 5, &mut r);
        match lev_sample(&inst, None, |_| 50, &mut r) {
            Ok(_) => {}
            Err(dynsketch::Error::AcceptanceRatio { .. }) => {
                guard_ok = false;
            }
            Err(e) => panic!("unexpected error: {e}"),
        }
    }

    // Domination inequality, exact probabilities.
    let v = 30.0;
    let mut domination_ok = true;
    for seed in 0..20 {
        let mut r = rng_for(92_000 + seed);
        let inst = DenseMatrix::gaussian(15, 5, &mut r);
        let lambda = r.gen_range(0.01..4.0);
        let spec = ridge_spectrum(&inst, lambda).unwrap();
        let frob = inst.frob_norm_sq();
        let m = v * spec.aug_pinv_norm_sq() * frob / spec.sd_lambda;
        for i in 0..15 {
            let len_expected = m * inst.row(i).iter().map(|x| x * x).sum::<f64>() / frob;
            let ridge_expected = v * spec.ridge_scores[i] / spec.sd_lambda;
            domination_ok &= len_expected >= ridge_expected - 1e-10;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "C9 leverage stack",
        tv <= 0.05 && guard_ok && domination_ok && elapsed < 30.0,
        &format!(
            "uniform TV {tv:.4}; guard fired: {}; domination {domination_ok}; {elapsed:.1}s",
            !guard_ok
        ),
    );
}

/// Criterion 10: CG solves diagonal systems to 1e-8 against the direct
/// solve, and iteration counts scale like sqrt(κ) within a factor of 3.
#[test]
fn c10_cg_solver() {
    let start = Instant::now();
    // Direct-solve comparison.
    let diag: Vec<f64> = (1..=10).map(|i| i as f64).collect();
    let rhs: Vec<f64> = (0..10).map(|i| (i as f64 + 1.0) * 0.5).collect();
    let out = conjugate_gradient(
        |p, o| {
            for i in 0..10 {
                o[i] = diag[i] * p[i];
            }
        },
        &rhs,
        1e-10,
        100,
    )
    .unwrap();
    let mut direct_ok = out.converged;
    for i in 0..10 {
        direct_ok &= (out.x[i] - rhs[i] / diag[i]).abs() <= 1e-8;
    }

    // sqrt(kappa) scaling on Chebyshev-node spectra.
    let iterations_for = |kappa: f64| {
        let n = 2000;
        let d: Vec<f64> = (0..n)
            .map(|i| {
                let t = (std::f64::consts::PI * (i as f64 + 0.5) / n as f64).cos();
                1.0 + (kappa - 1.0) * (1.0 + t) / 2.0
            })
            .collect();
        let ones = vec![1.0; n];
        conjugate_gradient(
            |p, o| {
                for i in 0..n {
                    o[i] = d[i] * p[i];
                }
            },
            &ones,
            1e-8,
            8 * n,
        )
        .unwrap()
        .iterations as f64
    };
    let ratio = iterations_for(1e4) / iterations_for(1e2);
    let scaling_ok = (10.0 / 3.0..=30.0).contains(&ratio);
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "C10 CG solver",
        direct_ok && scaling_ok && elapsed < 5.0,
        &format!("direct_ok {direct_ok}; iteration ratio {ratio:.2}; {elapsed:.1}s"),
    );
}

/// Criterion 11: query latency at fixed (k, ε) grows by at most 2x when n
/// grows 4x, measured via the query benchmark driver.
#[test]
fn c11_sublinear_query_scaling() {
    let start = Instant::now();
    let latency_at = |n: usize| {
        let mut spec = ExperimentSpec::new(
            Task::Query,
            MatrixSource::Synthetic {
                n_rows: n,
                n_cols: 100,
                rank: 5,
                sigma_head: 2.0,
                sigma_decay: 1.0,
                sigma_tail: 0.0,
            },
        );
        spec.rank_list = vec![5];
        spec.epsilon = 0.5;
        spec.trials = 2;
        spec.seed = 1111;
        // Fixed sample counts independent of n keep the model size constant
        // while n grows.
        spec.rows = Some(400);
        spec.cols = Some(40);
        spec.queries = 300;
        spec.draws = 0;
        spec.check_cols = 0;
        let rep = run_query_benchmark(&spec).unwrap();
        let lat: Vec<f64> = rep
            .rows
            .iter()
            .map(|r| r.median_query_latency_seconds.unwrap())
            .collect();
        median(&lat)
    };
    let small = latency_at(1000);
    let large = latency_at(4000);
    let ratio = large / small;
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "C11 sublinear query scaling",
        ratio <= 2.0 && elapsed < 120.0,
        &format!("latency {small:.2e}s @ n=1000 vs {large:.2e}s @ n=4000, ratio {ratio:.2}; {elapsed:.1}s"),
    );
}

/// Companion check used by criterion 5's instance family: doubling the
/// sample counts never increases the median metric.
#[test]
fn c05b_metric_monotone_in_sample_size() {
    let start = Instant::now();
    let mut rng = rng_for(560);
    let matrix = gen_head_tail(120, 90, 6, 2.0, 0.2, &mut rng).unwrap();
    let dense = matrix.to_dense();
    let best = best_rank_k_error(&dense, 6).unwrap();
    let ds = DynSamp::from_matrix(matrix);
    let median_at = |rows: usize, cols: usize| {
        let mut ratios = Vec::new();
        for seed in 0..10 {
            let mut trial_rng = rng_for(56_000 + seed);
            let mut cfg = LowRankConfig::new(6, 0.5);
            cfg.rows_override = Some(rows);
            cfg.cols_override = Some(cols);
            let model = build_low_rank(&ds, &cfg, &mut trial_rng).unwrap();
            let y = model.materialize(&ds);
            ratios.push(y.sub(&dense).frob_norm() / best);
        }
        median(&ratios)
    };
    let coarse = median_at(30, 25);
    let fine = median_at(60, 50);
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "C5b metric monotone in sample size",
        fine <= coarse + 1e-9,
        &format!("median ratio {coarse:.3} -> {fine:.3}; {elapsed:.1}s"),
    );
}
