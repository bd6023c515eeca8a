//! The `sgl` command line: `simulate`, `fit`, `path`, `check`.
//!
//! Exit status is 0 on success, 1 on bad input or flags, 2 when a solver
//! run did not converge (its results are still written).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Result, SglError};
use crate::io::{self, Dataset, Summary};
use crate::model::{PenaltySpec, WeightMode};
use crate::oracle::{fit_oracle, OracleOptions};
use crate::path::{fit_path, PathResult, PathSpec};
use crate::sim::{self, SimConfig};
use crate::solver::{fit, kkt_residual, SolverOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "sgl", version, about = "Sparse group lasso by blockwise coordinate descent")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a block-correlated synthetic dataset.
    Simulate(SimulateArgs),
    /// Fit at one penalty pair.
    Fit(FitArgs),
    /// Fit a warm-started regularization path.
    Path(PathArgs),
    /// Check optimality of given coefficients.
    Check(CheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Weights {
    Unit,
    Sqrt,
}

impl From<Weights> for WeightMode {
    fn from(w: Weights) -> Self {
        match w {
            Weights::Unit => WeightMode::Unit,
            Weights::Sqrt => WeightMode::SqrtSize,
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, env = "SGL_SEED", default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Nonzero coefficients per block, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [10usize, 8, 6, 4, 2])]
    pub counts: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    #[arg(long, default_value_t = 10)]
    pub n_blocks: usize,
    #[arg(long, default_value_t = 10)]
    pub block_size: usize,
    #[arg(long, default_value_t = 0.2)]
    pub rho: f64,
    #[arg(long, default_value_t = 4.0)]
    pub noise_sd: f64,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub groups: PathBuf,
    #[arg(long, value_enum, default_value_t = Weights::Unit)]
    pub weights: Weights,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_sweeps: usize,
    /// Disable the closed-form update for orthonormal groups.
    #[arg(long)]
    pub no_fast_path: bool,
}

impl SolverArgs {
    fn options(&self) -> SolverOptions {
        SolverOptions {
            outer_tol: self.tol,
            max_sweeps: self.max_sweeps,
            orthonormal_fast_path: !self.no_fast_path,
            ..SolverOptions::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: DataArgs,
    #[arg(long)]
    pub lambda1: f64,
    #[arg(long)]
    pub lambda2: f64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct PathArgs {
    #[command(flatten)]
    pub input: DataArgs,
    /// Mixing α; several comma-separated values are fitted in parallel.
    #[arg(long, value_delimiter = ',', default_values_t = [0.5])]
    pub alpha: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    pub npoints: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub ratio_min: f64,
    /// Ground truth (`index,group,beta_true`) for misclassification columns.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// One row per λ with a column per feature, instead of one row per (λ, feature).
    #[arg(long)]
    pub wide: bool,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub input: DataArgs,
    #[arg(long)]
    pub coefs: PathBuf,
    #[arg(long)]
    pub lambda1: f64,
    #[arg(long)]
    pub lambda2: f64,
    /// Also run the proximal-gradient reference and report the objective gap.
    #[arg(long)]
    pub oracle: bool,
}

/// Parses `argv` (program name first), runs, and returns the exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            let first = e.to_string();
            eprintln!("sgl: {}", first.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: "));
            return EXIT_INPUT;
        }
    };
    match execute(&cli) {
        Ok(report) => {
            print!("{}", report.stdout);
            if report.converged {
                EXIT_OK
            } else {
                eprintln!("sgl: solver did not converge; results were written anyway");
                EXIT_NOT_CONVERGED
            }
        }
        Err(e) => {
            eprintln!("sgl: {e}");
            EXIT_INPUT
        }
    }
}

/// What a subcommand produced, before it is turned into an exit status.
#[derive(Debug, Default)]
pub struct Report {
    pub stdout: String,
    pub converged: bool,
}

pub fn execute(cli: &Cli) -> Result<Report> {
    match &cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Fit(args) => fit_command(args),
        Command::Path(args) => path_command(args),
        Command::Check(args) => check_command(args),
    }
}

fn load(args: &DataArgs) -> Result<Dataset> {
    io::read_dataset(&args.data, &args.groups, args.weights.into())
}

fn penalty_from_flags(lambda1: f64, lambda2: f64) -> Result<PenaltySpec> {
    PenaltySpec::new(lambda1, lambda2).map_err(|e| SglError::InvalidConfig(format!("--lambda1/--lambda2: {e}")))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| SglError::input(dir, e.to_string()))
}

fn simulate(args: &SimulateArgs) -> Result<Report> {
    let config = SimConfig {
        n: args.n,
        block_sizes: vec![args.block_size; args.n_blocks],
        nonzero_counts: args.counts.clone(),
        rho: args.rho,
        noise_sd: args.noise_sd,
        seed: args.seed,
        ..SimConfig::default()
    };
    let data = sim::generate(&config)?;
    ensure_dir(&args.out)?;
    io::write_sim_dataset(&args.out, &data)?;
    Ok(Report {
        stdout: format!(
            "wrote {} observations x {} features to {}\n",
            config.n,
            config.n_features(),
            args.out.display()
        ),
        converged: true,
    })
}

fn fit_command(args: &FitArgs) -> Result<Report> {
    let dataset = load(&args.input)?;
    let penalty = penalty_from_flags(args.lambda1, args.lambda2)?;
    let result = fit(&dataset.problem, &penalty, &args.solver.options(), None)?;
    ensure_dir(&args.out)?;
    io::write_coefficients(&args.out.join("coefficients.csv"), &dataset.coefficient_rows(&result.coefficients))?;
    let problem = &dataset.problem;
    let summary = Summary {
        objective: result.objective,
        sweeps: result.sweeps,
        converged: result.converged,
        kkt_worst: result.kkt.worst_violation,
        lambda1: penalty.lambda1,
        lambda2: penalty.lambda2,
        n: problem.n_samples(),
        p: problem.n_features(),
        n_groups: problem.n_groups(),
    };
    io::write_summary(&args.out.join("summary.json"), &summary)?;
    Ok(Report {
        stdout: format!(
            "objective={} sweeps={} converged={} kkt_worst={} nonzeros={}\n",
            result.objective,
            result.sweeps,
            result.converged,
            result.kkt.worst_violation,
            result.coefficients.nonzero_count()
        ),
        converged: result.converged,
    })
}

fn path_command(args: &PathArgs) -> Result<Report> {
    let dataset = load(&args.input)?;
    let truth = match &args.truth {
        Some(path) => Some(dataset.to_problem_order(&io::read_truth(path, dataset.feature_names.len())?)),
        None => None,
    };
    let opts = args.solver.options();
    let specs: Vec<PathSpec> = args
        .alpha
        .iter()
        .map(|&mixing| PathSpec {
            n_points: args.npoints,
            ratio_min: args.ratio_min,
            mixing,
        })
        .collect();
    for spec in &specs {
        spec.validate()
            .map_err(|e| SglError::InvalidConfig(format!("--alpha/--npoints/--ratio-min: {e}")))?;
    }

    let results: Vec<Result<PathResult>> = if specs.len() == 1 {
        vec![fit_path(&dataset.problem, &specs[0], &opts)]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = specs
                .iter()
                .map(|spec| scope.spawn(|| fit_path(&dataset.problem, spec, &opts)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("path worker panicked"))
                .collect()
        })
    };
    let paths = results.into_iter().collect::<Result<Vec<_>>>()?;

    ensure_dir(&args.out)?;
    write_path_csv(&args.out.join("path.csv"), &dataset, &paths, args.wide)?;
    write_metrics_csv(&args.out.join("metrics.csv"), &dataset, &paths, truth.as_deref())?;
    let converged = paths.iter().all(PathResult::all_converged);
    let mut stdout = String::new();
    for path in &paths {
        let _ = writeln!(
            stdout,
            "alpha={} lambda_max={} points={} converged={}",
            path.mixing,
            path.lambda_max,
            path.points.len(),
            path.all_converged()
        );
    }
    Ok(Report { stdout, converged })
}

fn write_path_csv(target: &Path, dataset: &Dataset, paths: &[PathResult], wide: bool) -> Result<()> {
    let err = |e: csv::Error| SglError::input(target, e.to_string());
    let mut w = csv::Writer::from_path(target).map_err(err)?;
    if wide {
        let mut header = vec!["alpha".to_string(), "lambda_index".into(), "lambda".into()];
        header.extend(dataset.feature_names.iter().cloned());
        w.write_record(&header).map_err(err)?;
    } else {
        w.write_record(["alpha", "lambda_index", "lambda", "index", "group", "value"])
            .map_err(err)?;
    }
    for path in paths {
        for (k, point) in path.points.iter().enumerate() {
            let rows = dataset.coefficient_rows(&point.coefficients);
            if wide {
                let mut record = vec![path.mixing.to_string(), k.to_string(), point.lambda.to_string()];
                record.extend(rows.iter().map(|r| r.value.to_string()));
                w.write_record(&record).map_err(err)?;
            } else {
                for row in rows {
                    w.write_record([
                        path.mixing.to_string(),
                        k.to_string(),
                        point.lambda.to_string(),
                        row.index.to_string(),
                        row.group,
                        row.value.to_string(),
                    ])
                    .map_err(err)?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn write_metrics_csv(target: &Path, dataset: &Dataset, paths: &[PathResult], truth: Option<&[f64]>) -> Result<()> {
    let err = |e: csv::Error| SglError::input(target, e.to_string());
    let mut w = csv::Writer::from_path(target).map_err(err)?;
    let mut header = vec![
        "alpha", "lambda_index", "lambda", "lambda1", "lambda2", "objective", "active_groups", "nonzeros", "sweeps",
        "converged", "kkt_worst",
    ];
    if truth.is_some() {
        header.extend(["group_misclassified", "coef_misclassified"]);
    }
    w.write_record(&header).map_err(err)?;
    let groups = dataset.problem.groups();
    for path in paths {
        for (k, pt) in path.points.iter().enumerate() {
            let mut record = vec![
                path.mixing.to_string(),
                k.to_string(),
                pt.lambda.to_string(),
                pt.penalty.lambda1.to_string(),
                pt.penalty.lambda2.to_string(),
                pt.objective.to_string(),
                pt.active_groups.to_string(),
                pt.nonzeros.to_string(),
                pt.sweeps.to_string(),
                pt.converged.to_string(),
                pt.kkt_worst.to_string(),
            ];
            if let Some(truth) = truth {
                let (g, c) = sim::misclassification(groups, truth, &pt.coefficients)?;
                record.push(g.to_string());
                record.push(c.to_string());
            }
            w.write_record(&record).map_err(err)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn check_command(args: &CheckArgs) -> Result<Report> {
    let dataset = load(&args.input)?;
    let penalty = penalty_from_flags(args.lambda1, args.lambda2)?;
    let rows = io::read_coefficients(&args.coefs)?;
    let beta = dataset.coefficients_from_rows(&rows, &args.coefs)?;
    let problem = &dataset.problem;
    let report = kkt_residual(problem, &beta, &penalty)?;
    let objective = problem.objective(&beta, &penalty)?;

    let mut out = String::new();
    let _ = writeln!(out, "objective={objective}");
    let _ = writeln!(out, "kkt_worst={}", report.worst_violation);
    for (l, res) in report.group_residuals.iter().enumerate() {
        let _ = writeln!(
            out,
            "group={} active={} residual={res}",
            dataset.group_labels[l],
            !beta.is_group_zero(problem.groups(), l)
        );
    }
    let mut converged = true;
    if args.oracle {
        let reference = fit_oracle(problem, &penalty, &OracleOptions::default())?;
        converged = reference.converged;
        let _ = writeln!(out, "oracle_objective={}", reference.objective);
        let _ = writeln!(out, "oracle_iterations={}", reference.iterations);
        let _ = writeln!(out, "objective_gap={}", objective - reference.objective);
    }
    Ok(Report { stdout: out, converged })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_flag_is_input_error() {
        assert_eq!(run(["sgl", "fit", "--bogus"]), EXIT_INPUT);
        assert_eq!(run(["sgl", "frobnicate"]), EXIT_INPUT);
    }

    #[test]
    fn help_exits_zero() {
        assert_eq!(run(["sgl", "--help"]), EXIT_OK);
    }

    #[test]
    fn missing_file_is_input_error() {
        assert_eq!(
            run(["sgl", "fit", "--data", "/nonexistent/d.csv", "--groups", "/nonexistent/g.csv", "--lambda1", "1", "--lambda2", "1"]),
            EXIT_INPUT
        );
    }
}
