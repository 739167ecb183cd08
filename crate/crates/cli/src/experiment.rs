//! Experiment drivers: build the sampling structure, run the solver or
//! model under test across independent trials, score against the exact
//! oracle, and emit machine-readable reports.
//!
//! Timing follows the query/total split: "query" excludes the time to
//! maintain the sampling structure, "total" includes it. Error fields are
//! deterministic for a fixed spec and seed; per-trial randomness comes from
//! splitmix-derived substreams of the master seed.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use dynsketch::dense::DenseMatrix;
use dynsketch::lowrank::{build_low_rank, LowRankConfig};
use dynsketch::ridge::{ridge_solve, RidgeConfig};
use dynsketch::stats::{median, splitmix64, tv_distance};
use dynsketch::svd::{best_rank_k_error, ridge_exact};
use dynsketch::{DynSamp, SparseMatrix};

use crate::{synth, HarnessError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Ridge,
    Lra,
    Query,
    Bench,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum MatrixSource {
    File {
        path: PathBuf,
    },
    Synthetic {
        n_rows: usize,
        n_cols: usize,
        rank: usize,
        sigma_head: f64,
        sigma_decay: f64,
        sigma_tail: f64,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub task: Task,
    pub source: MatrixSource,
    pub lambda: f64,
    pub epsilon: f64,
    /// Ranks to sweep (`lra`); first entry used by `query`/`bench`.
    pub rank_list: Vec<usize>,
    /// Explicit sampled-row count; formula-driven when absent.
    pub rows: Option<usize>,
    /// Explicit sampled-column count; formula-driven when absent.
    pub cols: Option<usize>,
    pub responses: usize,
    /// Relative response noise for ridge instances.
    pub noise: f64,
    pub trials: usize,
    pub seed: u64,
    /// Timed queries per trial (`query`/`bench`).
    pub queries: usize,
    /// Draws per TV-checked column.
    pub draws: usize,
    /// Number of columns TV-checked against the exact distribution.
    pub check_cols: usize,
    /// Row counts swept by `bench`.
    pub scale_rows: Vec<usize>,
    pub output: Option<PathBuf>,
    pub format: ReportFormat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
}

impl ExperimentSpec {
    pub fn new(task: Task, source: MatrixSource) -> Self {
        ExperimentSpec {
            task,
            source,
            lambda: 1.0,
            epsilon: 0.3,
            rank_list: vec![10],
            rows: None,
            cols: None,
            responses: 1,
            noise: 0.01,
            trials: 10,
            seed: 1,
            queries: 1000,
            draws: 10_000,
            check_cols: 10,
            scale_rows: Vec::new(),
            output: None,
            format: ReportFormat::Json,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(HarnessError::Spec("trials must be >= 1".into()));
        }
        if self.rank_list.is_empty() {
            return Err(HarnessError::Spec("rank list must be nonempty".into()));
        }
        if let MatrixSource::Synthetic {
            n_rows,
            n_cols,
            rank,
            ..
        } = self.source
        {
            if rank == 0 || rank > n_rows.min(n_cols).max(1) || n_rows == 0 || n_cols == 0 {
                return Err(HarnessError::Spec(format!(
                    "bad synthetic recipe {n_rows}x{n_cols} rank {rank}"
                )));
            }
        }
        Ok(())
    }

    fn trial_rng(&self, label: u64, trial: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(splitmix64(
            self.seed ^ splitmix64(label.wrapping_add(trial << 20)),
        ))
    }

    fn load_matrix(&self, n_override: Option<usize>) -> Result<SparseMatrix> {
        match &self.source {
            MatrixSource::File { path } => crate::io::load_matrix_market(path),
            MatrixSource::Synthetic {
                n_rows,
                n_cols,
                rank,
                sigma_head,
                sigma_decay,
                sigma_tail,
            } => {
                let n = n_override.unwrap_or(*n_rows);
                let mut rng = self.trial_rng(0xDA7A, n as u64);
                synth::gen_spectrum(
                    n,
                    *n_cols,
                    *rank,
                    *sigma_head,
                    *sigma_decay,
                    *sigma_tail,
                    &mut rng,
                )
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_rows: Option<usize>,
    pub error: f64,
    pub query_seconds: f64,
    pub total_seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cg_iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rows_sampled: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cols_sampled: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_rejection_trials: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub median_query_latency_seconds: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub task: Task,
    pub seed: u64,
    pub config: serde_json::Value,
    pub rows: Vec<TrialRow>,
    pub median_error: f64,
    pub mean_error: f64,
    pub median_query_seconds: f64,
    pub median_total_seconds: f64,
}

impl Report {
    fn from_rows(task: Task, spec: &ExperimentSpec, rows: Vec<TrialRow>) -> Result<Report> {
        let errors: Vec<f64> = rows.iter().map(|r| r.error).collect();
        let queries: Vec<f64> = rows.iter().map(|r| r.query_seconds).collect();
        let totals: Vec<f64> = rows.iter().map(|r| r.total_seconds).collect();
        Ok(Report {
            task,
            seed: spec.seed,
            config: serde_json::to_value(spec)?,
            median_error: median(&errors),
            mean_error: errors.iter().sum::<f64>() / errors.len() as f64,
            median_query_seconds: median(&queries),
            median_total_seconds: median(&totals),
            rows,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One CSV row per trial with a fixed column set; empty cells for
    /// fields a task does not produce.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "trial,k,n_rows,error,query_seconds,total_seconds,cg_iterations,rows_sampled,cols_sampled,mean_rejection_trials,median_query_latency_seconds\n",
        );
        let opt = |v: Option<String>| v.unwrap_or_default();
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{}\n",
                r.trial,
                opt(r.k.map(|v| v.to_string())),
                opt(r.n_rows.map(|v| v.to_string())),
                r.error,
                r.query_seconds,
                r.total_seconds,
                opt(r.cg_iterations.map(|v| v.to_string())),
                opt(r.rows_sampled.map(|v| v.to_string())),
                opt(r.cols_sampled.map(|v| v.to_string())),
                opt(r.mean_rejection_trials.map(|v| v.to_string())),
                opt(r.median_query_latency_seconds.map(|v| v.to_string())),
            ));
        }
        out
    }

    pub fn write(&self, path: &Path, format: ReportFormat) -> Result<()> {
        let body = match format {
            ReportFormat::Json => self.to_json()?,
            ReportFormat::Csv => self.to_csv(),
        };
        std::fs::write(path, body)?;
        Ok(())
    }
}

fn gaussian_vec(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    use rand_distr::StandardNormal;
    (0..n)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// Planted responses `B = A w + noise`, keeping most of `B` inside the
/// column span so the oracle comparison measures sketching error rather
/// than irreducible residual.
fn planted_responses(
    a: &DenseMatrix,
    responses: usize,
    noise: f64,
    rng: &mut impl Rng,
) -> DenseMatrix {
    let n = a.rows();
    let d = a.cols();
    let mut b = DenseMatrix::zeros(n, responses);
    for c in 0..responses {
        let w = gaussian_vec(d, rng);
        let mut col = vec![0.0; n];
        a.mat_vec(&w, &mut col);
        let scale: f64 = col.iter().map(|v| v * v).sum::<f64>().sqrt() / (n as f64).sqrt();
        for (i, val) in col.iter().enumerate() {
            let eta = if noise > 0.0 {
                noise * scale * rng.sample::<f64, _>(rand_distr::StandardNormal)
            } else {
                0.0
            };
            b.set(i, c, val + eta);
        }
    }
    b
}

/// Ridge experiment: per-trial solve against the closed-form optimum
/// `X* = (AᵀA + λI)⁻¹AᵀB`, error `‖X - X*‖_F / ‖X*‖_F`.
pub fn run_ridge_experiment(spec: &ExperimentSpec) -> Result<Report> {
    spec.validate()?;
    let matrix = spec.load_matrix(None)?;
    let dense = matrix.to_dense();

    let build_start = Instant::now();
    let ds = DynSamp::from_matrix(matrix);
    let build_seconds = build_start.elapsed().as_secs_f64();

    let mut rng = spec.trial_rng(0xB0B, 0);
    let b = planted_responses(&dense, spec.responses, spec.noise, &mut rng);
    let x_star = ridge_exact(&dense, &b, spec.lambda)
        .map_err(|e| HarnessError::Oracle(format!("closed-form ridge solve failed: {e}")))?;
    let x_star_norm = x_star.frob_norm();
    if x_star_norm == 0.0 {
        return Err(HarnessError::Oracle("optimal solution is zero".into()));
    }

    let mut rows = Vec::with_capacity(spec.trials);
    for trial in 0..spec.trials {
        let mut trial_rng = spec.trial_rng(0x51DE, trial as u64);
        let mut cfg = RidgeConfig::new(spec.lambda, spec.epsilon);
        cfg.rows_override = spec.rows;
        cfg.cols_override = spec.cols;
        let solve_start = Instant::now();
        let sol = ridge_solve(&ds, &b, &cfg, &mut trial_rng)?;
        let query_seconds = solve_start.elapsed().as_secs_f64();
        let x = sol.materialize(&ds);
        let error = x.sub(&x_star).frob_norm() / x_star_norm;
        rows.push(TrialRow {
            trial,
            k: None,
            n_rows: Some(ds.n_rows()),
            error,
            query_seconds,
            total_seconds: build_seconds + query_seconds,
            cg_iterations: Some(sol.cg_iterations),
            rows_sampled: Some(sol.row_sampler.m()),
            cols_sampled: Some(sol.col_sampler.m()),
            mean_rejection_trials: None,
            median_query_latency_seconds: None,
        });
    }
    Report::from_rows(Task::Ridge, spec, rows)
}

/// Low-rank experiment: the error metric is
/// `‖A - ARWSA‖_F / ‖A - A_k‖_F - 1` with the denominator from the exact
/// SVD oracle, computed once per rank.
pub fn run_lra_experiment(spec: &ExperimentSpec) -> Result<Report> {
    spec.validate()?;
    let matrix = spec.load_matrix(None)?;
    let dense = matrix.to_dense();
    let frob_sq = dense.frob_norm_sq();

    let build_start = Instant::now();
    let ds = DynSamp::from_matrix(matrix);
    let build_seconds = build_start.elapsed().as_secs_f64();

    let mut rows = Vec::new();
    for &k in &spec.rank_list {
        let denom = best_rank_k_error(&dense, k)
            .map_err(|e| HarnessError::Oracle(format!("best rank-{k} error: {e}")))?;
        for trial in 0..spec.trials {
            let mut trial_rng = spec.trial_rng(0x10A, (k as u64) << 32 | trial as u64);
            let mut cfg = LowRankConfig::new(k, spec.epsilon);
            cfg.rows_override = spec.rows;
            cfg.cols_override = spec.cols;
            let query_start = Instant::now();
            let model = build_low_rank(&ds, &cfg, &mut trial_rng)?;
            let query_seconds = query_start.elapsed().as_secs_f64();
            let y = model.materialize(&ds);
            let diff = y.sub(&dense).frob_norm();
            let error = if denom <= 1e-9 * frob_sq.sqrt() {
                diff // absolute fallback on exactly rank-k input
            } else {
                diff / denom - 1.0
            };
            rows.push(TrialRow {
                trial,
                k: Some(k),
                n_rows: Some(ds.n_rows()),
                error,
                query_seconds,
                total_seconds: build_seconds + query_seconds,
                cg_iterations: None,
                rows_sampled: Some(model.m_s()),
                cols_sampled: Some(model.m_r()),
                mean_rejection_trials: None,
                median_query_latency_seconds: None,
            });
        }
    }
    Report::from_rows(Task::Lra, spec, rows)
}

/// Query benchmark: builds the model, measures per-query latency and
/// rejection-trial counts over random columns, and records the worst TV
/// distance between empirical draws and the exact column distribution on a
/// handful of columns. The row error field carries that worst TV.
pub fn run_query_benchmark(spec: &ExperimentSpec) -> Result<Report> {
    spec.validate()?;
    let matrix = spec.load_matrix(None)?;
    let build_start = Instant::now();
    let ds = DynSamp::from_matrix(matrix);
    let build_seconds = build_start.elapsed().as_secs_f64();
    let k = spec.rank_list[0];

    let mut rows = Vec::with_capacity(spec.trials);
    for trial in 0..spec.trials {
        let mut trial_rng = spec.trial_rng(0x9E4, trial as u64);
        let mut cfg = LowRankConfig::new(k, spec.epsilon);
        cfg.rows_override = spec.rows;
        cfg.cols_override = spec.cols;
        let model_start = Instant::now();
        let model = build_low_rank(&ds, &cfg, &mut trial_rng)?;
        let model_seconds = model_start.elapsed().as_secs_f64();

        let usable_columns: Vec<usize> = (0..ds.n_cols())
            .filter(|&j| {
                model
                    .response_vector(&ds, j)
                    .map(|v| v.iter().any(|&x| x != 0.0))
                    .unwrap_or(false)
            })
            .collect();
        if usable_columns.is_empty() {
            return Err(HarnessError::Oracle("model has no nonzero columns".into()));
        }

        // Latency and rejection cost over random columns.
        let mut latencies = Vec::with_capacity(spec.queries);
        let mut total_trials = 0u64;
        for _ in 0..spec.queries {
            let j = usable_columns[trial_rng.gen_range(0..usable_columns.len())];
            let q_start = Instant::now();
            let (_, stats) = model.sample_row_given_column_with_stats(&ds, j, &mut trial_rng)?;
            latencies.push(q_start.elapsed().as_secs_f64());
            total_trials += stats.trials;
        }
        let mean_trials = total_trials as f64 / spec.queries as f64;

        // TV against the exact conditional distribution on a few columns.
        let mut worst_tv: f64 = 0.0;
        for c in 0..spec.check_cols.min(usable_columns.len()) {
            let j = usable_columns[(c * 7919) % usable_columns.len()];
            let col = model.model_column(&ds, j)?;
            let norm_sq: f64 = col.iter().map(|x| x * x).sum();
            let probs: Vec<f64> = col.iter().map(|x| x * x / norm_sq).collect();
            let mut counts = vec![0u64; col.len()];
            for _ in 0..spec.draws {
                let i = model.sample_row_given_column(&ds, j, &mut trial_rng)?;
                counts[i] += 1;
            }
            worst_tv = worst_tv.max(tv_distance(&counts, &probs, spec.draws as u64));
        }

        rows.push(TrialRow {
            trial,
            k: Some(k),
            n_rows: Some(ds.n_rows()),
            error: worst_tv,
            query_seconds: model_seconds,
            total_seconds: build_seconds + model_seconds,
            cg_iterations: None,
            rows_sampled: Some(model.m_s()),
            cols_sampled: Some(model.m_r()),
            mean_rejection_trials: Some(mean_trials),
            median_query_latency_seconds: Some(median(&latencies)),
        });
    }
    Report::from_rows(Task::Query, spec, rows)
}

/// Latency scaling across row counts at fixed (k, ε): one row per
/// (n, trial) carrying the median per-query latency.
pub fn run_scaling_benchmark(spec: &ExperimentSpec) -> Result<Report> {
    spec.validate()?;
    if spec.scale_rows.len() < 2 {
        return Err(HarnessError::Spec(
            "bench needs at least two row counts in scale_rows".into(),
        ));
    }
    if !matches!(spec.source, MatrixSource::Synthetic { .. }) {
        return Err(HarnessError::Spec(
            "bench requires a synthetic recipe".into(),
        ));
    }
    let k = spec.rank_list[0];
    let mut rows = Vec::new();
    for &n in &spec.scale_rows {
        let matrix = spec.load_matrix(Some(n))?;
        let build_start = Instant::now();
        let ds = DynSamp::from_matrix(matrix);
        let build_seconds = build_start.elapsed().as_secs_f64();
        for trial in 0..spec.trials {
            let mut trial_rng = spec.trial_rng(0xBE9C, (n as u64) << 24 | trial as u64);
            let mut cfg = LowRankConfig::new(k, spec.epsilon);
            cfg.rows_override = spec.rows;
            cfg.cols_override = spec.cols;
            let model_start = Instant::now();
            let model = build_low_rank(&ds, &cfg, &mut trial_rng)?;
            let model_seconds = model_start.elapsed().as_secs_f64();
            let usable: Vec<usize> = (0..ds.n_cols())
                .filter(|&j| {
                    model
                        .response_vector(&ds, j)
                        .map(|v| v.iter().any(|&x| x != 0.0))
                        .unwrap_or(false)
                })
                .collect();
            let mut latencies = Vec::with_capacity(spec.queries);
            let mut total_trials = 0u64;
            for _ in 0..spec.queries {
                let j = usable[trial_rng.gen_range(0..usable.len())];
                let q_start = Instant::now();
                let (_, stats) =
                    model.sample_row_given_column_with_stats(&ds, j, &mut trial_rng)?;
                latencies.push(q_start.elapsed().as_secs_f64());
                total_trials += stats.trials;
            }
            rows.push(TrialRow {
                trial,
                k: Some(k),
                n_rows: Some(n),
                error: 0.0,
                query_seconds: model_seconds,
                total_seconds: build_seconds + model_seconds,
                cg_iterations: None,
                rows_sampled: Some(model.m_s()),
                cols_sampled: Some(model.m_r()),
                mean_rejection_trials: Some(total_trials as f64 / spec.queries as f64),
                median_query_latency_seconds: Some(median(&latencies)),
            });
        }
    }
    Report::from_rows(Task::Bench, spec, rows)
}

pub fn run(spec: &ExperimentSpec) -> Result<Report> {
    match spec.task {
        Task::Ridge => run_ridge_experiment(spec),
        Task::Lra => run_lra_experiment(spec),
        Task::Query => run_query_benchmark(spec),
        Task::Bench => run_scaling_benchmark(spec),
    }
}
