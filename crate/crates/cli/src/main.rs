use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dynsketch_cli::experiment::{run, ExperimentSpec, MatrixSource, ReportFormat, Task};
use dynsketch_cli::io::{load_bag_of_words, write_matrix_market};

/// Dynamic sampling sketches: ridge regression, low-rank approximation and
/// sublinear query benchmarks.
#[derive(Parser)]
#[command(name = "dynsketch", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct InputArgs {
    /// MatrixMarket file to load; mutually exclusive with the synthetic
    /// recipe flags.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Synthetic recipe: number of rows.
    #[arg(long, default_value_t = 700)]
    n_rows: usize,
    /// Synthetic recipe: number of columns.
    #[arg(long, default_value_t = 900)]
    n_cols: usize,
    /// Synthetic recipe: rank of the planted head.
    #[arg(short = 'k', long, default_value_t = 20)]
    rank: usize,
    /// Singular value of the planted head directions.
    #[arg(long, default_value_t = 1.0)]
    sigma_head: f64,
    /// Geometric decay of the head spectrum (1 = flat).
    #[arg(long, default_value_t = 1.0)]
    sigma_decay: f64,
    /// Singular value of the remaining directions (0 = exact rank).
    #[arg(long, default_value_t = 0.0)]
    sigma_tail: f64,
}

impl InputArgs {
    fn source(&self) -> MatrixSource {
        match &self.input {
            Some(path) => MatrixSource::File { path: path.clone() },
            None => MatrixSource::Synthetic {
                n_rows: self.n_rows,
                n_cols: self.n_cols,
                rank: self.rank,
                sigma_head: self.sigma_head,
                sigma_decay: self.sigma_decay,
                sigma_tail: self.sigma_tail,
            },
        }
    }
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Number of sampled rows (overrides the formula-driven size).
    #[arg(short = 'r', long)]
    rows: Option<usize>,
    /// Number of sampled columns (overrides the formula-driven size).
    #[arg(short = 'c', long)]
    cols: Option<usize>,
    #[arg(long, default_value_t = 0.3)]
    epsilon: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Independent trials to average over.
    #[arg(long, default_value_t = 10)]
    trials: usize,
    /// Master seed; all randomness derives from it.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Report destination (stdout when omitted).
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_parser = parse_format, default_value = "json")]
    format: ReportFormat,
}

fn parse_format(s: &str) -> Result<ReportFormat, String> {
    match s {
        "json" => Ok(ReportFormat::Json),
        "csv" => Ok(ReportFormat::Csv),
        other => Err(format!("unknown format '{other}' (expected json or csv)")),
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sketched ridge regression scored against the closed-form optimum.
    Ridge {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        common: CommonArgs,
        /// Number of response columns d'.
        #[arg(long, default_value_t = 1)]
        responses: usize,
        /// Relative noise added to the planted responses.
        #[arg(long, default_value_t = 0.01)]
        noise: f64,
    },
    /// Low-rank approximation scored against the best rank-k error.
    Lra {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated ranks to sweep.
        #[arg(long, value_delimiter = ',', default_value = "10,15,20")]
        rank_list: Vec<usize>,
    },
    /// Column-conditional query sampler: TV distance, latency, rejection
    /// trials.
    Query {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        common: CommonArgs,
        /// Timed queries per trial.
        #[arg(long, default_value_t = 1000)]
        queries: usize,
        /// Draws per TV-checked column.
        #[arg(long, default_value_t = 10_000)]
        draws: usize,
        /// Columns checked against the exact distribution.
        #[arg(long, default_value_t = 10)]
        check_cols: usize,
    },
    /// Query latency scaling across row counts at fixed rank and epsilon.
    Bench {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated row counts to sweep.
        #[arg(long, value_delimiter = ',', default_value = "1000,4000")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 200)]
        queries: usize,
    },
    /// Convert UCI bag-of-words triples to a MatrixMarket file.
    Convert {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
}

fn build_spec(task: Task, input: &InputArgs, common: &CommonArgs) -> ExperimentSpec {
    let mut spec = ExperimentSpec::new(task, input.source());
    spec.lambda = common.lambda;
    spec.epsilon = common.epsilon;
    spec.rows = common.rows;
    spec.cols = common.cols;
    spec.trials = common.trials;
    spec.seed = common.seed;
    spec.output = common.output.clone();
    spec.format = common.format;
    spec.rank_list = vec![input.rank];
    spec
}

fn emit(
    report: &dynsketch_cli::experiment::Report,
    common: &CommonArgs,
) -> dynsketch_cli::Result<()> {
    match &common.output {
        Some(path) => {
            report.write(path, common.format)?;
            eprintln!(
                "median error {:.6}, median query {:.4}s, median total {:.4}s -> {}",
                report.median_error,
                report.median_query_seconds,
                report.median_total_seconds,
                path.display()
            );
        }
        None => {
            let body = match common.format {
                ReportFormat::Json => report.to_json()?,
                ReportFormat::Csv => report.to_csv(),
            };
            println!("{body}");
        }
    }
    Ok(())
}

fn run_cli() -> dynsketch_cli::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Ridge {
            input,
            common,
            responses,
            noise,
        } => {
            let mut spec = build_spec(Task::Ridge, &input, &common);
            spec.responses = responses;
            spec.noise = noise;
            let report = run(&spec)?;
            emit(&report, &common)
        }
        Command::Lra {
            input,
            common,
            rank_list,
        } => {
            let mut spec = build_spec(Task::Lra, &input, &common);
            spec.rank_list = rank_list;
            let report = run(&spec)?;
            emit(&report, &common)
        }
        Command::Query {
            input,
            common,
            queries,
            draws,
            check_cols,
        } => {
            let mut spec = build_spec(Task::Query, &input, &common);
            spec.queries = queries;
            spec.draws = draws;
            spec.check_cols = check_cols;
            let report = run(&spec)?;
            emit(&report, &common)
        }
        Command::Bench {
            input,
            common,
            sizes,
            queries,
        } => {
            let mut spec = build_spec(Task::Bench, &input, &common);
            spec.scale_rows = sizes;
            spec.queries = queries;
            let report = run(&spec)?;
            emit(&report, &common)
        }
        Command::Convert { input, output } => {
            let matrix = load_bag_of_words(&input)?;
            write_matrix_market(&output, &matrix)?;
            eprintln!(
                "wrote {}x{} matrix with {} nonzeros to {}",
                matrix.n_rows(),
                matrix.n_cols(),
                matrix.nnz(),
                output.display()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run_cli() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
