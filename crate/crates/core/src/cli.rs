//! Command-line front end.
//!
//! Every run is described by an [`ExperimentConfig`]; flags build one, or
//! `--config` loads one from JSON. Given the same config the outputs are
//! byte-identical.
//!
//! Exit codes: 0 success, 2 usage, 3 non-convergence, 4 no-root truncation
//! (partial output is still written), 1 any other failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::analytic_spectrum::{omega_k_approx, prediction_ladder, spiral, spiral_crossings, RootMethod, SpiralBranch};
use crate::bulk_analysis::{
    cavity_solve, crude_bound, default_eta, lambda_grid, measure_bulk_edge, norm_upper_bound,
    variance_profile, CavityOptions, PointStatus,
};
use crate::error::{Error, Result};
use crate::io::{opt_real, real, to_json, write_fitness_csv, write_matrix_binary, MatrixHeader, Table};
use crate::model::{
    coarse_grain, expected_matrix, gen_fitness, sample_adjacency, MatrixKind, ModelParams, Partition,
    WeightMode,
};
use crate::numerical_spectrum::{compare, histogram};
use crate::rng::derive_seed;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NON_CONVERGENCE: u8 = 3;
pub const EXIT_NO_ROOT: u8 = 4;

/// Largest `n` accepted by `compare` and `bulk` without `--paper-scale`.
pub const DESK_SCALE_MAX_N: usize = 4096;

/// Environment variable consulted for the worker count when `--threads` is absent.
pub const THREADS_ENV: &str = "MSM_THREADS";

/// Coarse-graining tolerance on the kernel identity.
pub const COARSE_GRAIN_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionKind {
    Contiguous,
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictConfig {
    pub alpha: f64,
    pub n: usize,
    pub k_max: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareConfig {
    pub alpha: f64,
    pub n: usize,
    pub seed: u64,
    pub k_max: usize,
    pub deterministic: bool,
    pub paper_scale: bool,
    pub histogram_bins: usize,
    pub dump: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpiralConfig {
    pub alpha: f64,
    pub n: usize,
    pub omega_max: f64,
    pub steps: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BulkConfig {
    pub alphas: Vec<f64>,
    pub ns: Vec<usize>,
    pub seed: u64,
    pub realizations: usize,
    pub deterministic: bool,
    pub paper_scale: bool,
    pub density: bool,
    /// Imaginary offset in `A/sqrt(n)` units; `None` uses `2.5/sqrt(n)`.
    pub eta: Option<f64>,
    pub grid_points: usize,
    pub cavity: CavityOptions,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoarsegrainConfig {
    pub alpha: f64,
    pub n: usize,
    pub b: usize,
    pub seed: u64,
    pub deterministic: bool,
    pub partition: PartitionKind,
}

/// Complete description of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum ExperimentConfig {
    Predict(PredictConfig),
    Compare(CompareConfig),
    Spiral(SpiralConfig),
    Bulk(BulkConfig),
    Coarsegrain(CoarsegrainConfig),
}

impl ExperimentConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentConfig::Predict(_) => "predict",
            ExperimentConfig::Compare(_) => "compare",
            ExperimentConfig::Spiral(_) => "spiral",
            ExperimentConfig::Bulk(_) => "bulk",
            ExperimentConfig::Coarsegrain(_) => "coarsegrain",
        }
    }

    /// Checks ranges and the desk-scale limit.
    pub fn validate(&self) -> Result<()> {
        let usage = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        let scale = |n: usize, allow_large: bool| {
            if n > DESK_SCALE_MAX_N && !allow_large {
                Err(Error::InvalidParameter(format!(
                    "n = {n} exceeds {DESK_SCALE_MAX_N}; pass --paper-scale"
                )))
            } else {
                Ok(())
            }
        };
        match self {
            ExperimentConfig::Predict(c) if c.k_max == 0 => usage("--k-max must be >= 1"),
            ExperimentConfig::Compare(c) => {
                if c.k_max == 0 {
                    return usage("--k-max must be >= 1");
                }
                if c.histogram_bins == 0 {
                    return usage("--histogram-bins must be >= 1");
                }
                scale(c.n, c.paper_scale)
            }
            ExperimentConfig::Spiral(c) if c.steps < 2 || !(c.omega_max > 0.0) => {
                usage("--steps must be >= 2 and --omega-max > 0")
            }
            ExperimentConfig::Bulk(c) => {
                if c.alphas.is_empty() || c.ns.is_empty() {
                    return usage("--alpha and --n need at least one value");
                }
                if c.realizations == 0 {
                    return usage("--realizations must be >= 1");
                }
                if matches!(c.eta, Some(e) if !(e > 0.0)) {
                    return usage("--eta must be > 0");
                }
                if c.grid_points < 2 {
                    return usage("--grid-points must be >= 2");
                }
                c.ns.iter().try_for_each(|&n| scale(n, c.paper_scale))
            }
            ExperimentConfig::Coarsegrain(c) if c.b == 0 || c.n % c.b != 0 => {
                usage("--b must divide --n")
            }
            _ => Ok(()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "msm", version, about = "Spectra of annealed multi-scale random graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output file; stdout when absent. Side files share its stem.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: Format,

    /// JSON config replacing the subcommand flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Worker threads; falls back to MSM_THREADS, then to all cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 2048)]
    pub n: usize,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Tabulate omega_k and lambda_k.
    Predict {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 8)]
        k_max: usize,
    },
    /// Compare predictions with the spectra of P and one sample of A.
    Compare {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 6)]
        k_max: usize,
        /// Use x_j = (n/j)^(1/alpha) instead of i.i.d. Pareto weights.
        #[arg(long)]
        deterministic: bool,
        /// Allow n above 4096.
        #[arg(long)]
        paper_scale: bool,
        #[arg(long, default_value_t = 100)]
        histogram_bins: usize,
        /// Also write P and A as binary dumps and the fitness vector as CSV.
        #[arg(long)]
        dump: bool,
    },
    /// Sample the spiral sigma(omega) and its real-axis crossings.
    Spiral {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 2.0)]
        omega_max: f64,
        #[arg(long, default_value_t = 4000)]
        steps: usize,
    },
    /// Sweep the bulk edge over alpha and n; optionally solve the cavity density.
    Bulk {
        #[arg(long, value_delimiter = ',', default_value = "0.5")]
        alpha: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "512,1024")]
        n: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        realizations: usize,
        #[arg(long)]
        deterministic: bool,
        #[arg(long)]
        paper_scale: bool,
        /// Solve the cavity equation for each (n, alpha).
        #[arg(long)]
        density: bool,
        /// Imaginary offset in A/sqrt(n) units.
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long, default_value_t = 121)]
        grid_points: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 0.5)]
        damping: f64,
        #[arg(long, default_value_t = 5000)]
        max_iter: usize,
    },
    /// Aggregate nodes into supernodes and check the kernel identity.
    Coarsegrain {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        b: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        deterministic: bool,
        #[arg(long, value_enum, default_value = "contiguous")]
        partition: PartitionKind,
    },
}

impl Command {
    pub fn to_config(&self) -> ExperimentConfig {
        match self {
            Command::Predict { model, k_max } => ExperimentConfig::Predict(PredictConfig {
                alpha: model.alpha,
                n: model.n,
                k_max: *k_max,
            }),
            Command::Compare {
                model,
                seed,
                k_max,
                deterministic,
                paper_scale,
                histogram_bins,
                dump,
            } => ExperimentConfig::Compare(CompareConfig {
                alpha: model.alpha,
                n: model.n,
                seed: *seed,
                k_max: *k_max,
                deterministic: *deterministic,
                paper_scale: *paper_scale,
                histogram_bins: *histogram_bins,
                dump: *dump,
            }),
            Command::Spiral {
                model,
                omega_max,
                steps,
            } => ExperimentConfig::Spiral(SpiralConfig {
                alpha: model.alpha,
                n: model.n,
                omega_max: *omega_max,
                steps: *steps,
            }),
            Command::Bulk {
                alpha,
                n,
                seed,
                realizations,
                deterministic,
                paper_scale,
                density,
                eta,
                grid_points,
                tol,
                damping,
                max_iter,
            } => ExperimentConfig::Bulk(BulkConfig {
                alphas: alpha.clone(),
                ns: n.clone(),
                seed: *seed,
                realizations: *realizations,
                deterministic: *deterministic,
                paper_scale: *paper_scale,
                density: *density,
                eta: *eta,
                grid_points: *grid_points,
                cavity: CavityOptions {
                    damping: *damping,
                    tol: *tol,
                    max_iter: *max_iter,
                },
            }),
            Command::Coarsegrain {
                model,
                b,
                seed,
                deterministic,
                partition,
            } => ExperimentConfig::Coarsegrain(CoarsegrainConfig {
                alpha: model.alpha,
                n: model.n,
                b: *b,
                seed: *seed,
                deterministic: *deterministic,
                partition: *partition,
            }),
        }
    }
}

/// Main document plus side files and the exit code of a run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Output {
    pub main: String,
    pub side_files: Vec<(String, String)>,
    pub code: u8,
}

fn weight_mode(deterministic: bool) -> WeightMode {
    if deterministic {
        WeightMode::Deterministic
    } else {
        WeightMode::IidPareto
    }
}

#[derive(Serialize)]
struct PredictRow {
    k: usize,
    omega_k: f64,
    omega_k_approx: Option<f64>,
    lambda_k: f64,
    method: RootMethod,
    residual: f64,
}

fn run_predict(c: &PredictConfig, cfg: &ExperimentConfig, format: Format) -> Result<Output> {
    let ladder = prediction_ladder(c.k_max, c.n, c.alpha)?;
    let rows = ladder
        .predictions
        .iter()
        .map(|p| {
            Ok(PredictRow {
                k: p.k,
                omega_k: p.omega_k,
                omega_k_approx: if p.k >= 2 {
                    Some(omega_k_approx(p.k, c.n, c.alpha)?)
                } else {
                    None
                },
                lambda_k: p.lambda_k,
                method: p.method,
                residual: p.residual,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let main = match format {
        Format::Csv => {
            let mut t = Table::new(&["k", "omega_k", "omega_k_approx", "lambda_k", "method", "residual"]);
            for r in &rows {
                t.push(vec![
                    r.k.to_string(),
                    real(r.omega_k),
                    opt_real(r.omega_k_approx),
                    real(r.lambda_k),
                    match r.method {
                        RootMethod::ExactRoot => "exact_root".into(),
                        RootMethod::Approximate => "approximate".into(),
                    },
                    real(r.residual),
                ]);
            }
            t.to_csv_string()?
        }
        Format::Json => to_json(
            cfg,
            &serde_json::json!({ "predictions": rows, "truncated_at": ladder.truncated_at }),
        )?,
    };
    Ok(Output {
        main,
        side_files: Vec::new(),
        code: if ladder.truncated_at.is_some() { EXIT_NO_ROOT } else { EXIT_OK },
    })
}

fn run_compare(c: &CompareConfig, cfg: &ExperimentConfig, format: Format) -> Result<Output> {
    let params = ModelParams::new(c.n, c.alpha, c.seed, weight_mode(c.deterministic))?;
    let run = compare(&params, c.k_max)?;
    let report = &run.report;
    let main = match format {
        Format::Csv => {
            let mut t = Table::new(&[
                "k",
                "lambda_pred",
                "lambda_P",
                "lambda_A",
                "rel_err_pred_vs_P",
                "rel_err_P_vs_A",
                "cosine_sim_pred_vs_P",
                "cosine_sim_P_vs_A",
                "sign_consistent",
            ]);
            for r in &report.rows {
                t.push(vec![
                    r.k.to_string(),
                    opt_real(r.lambda_pred),
                    real(r.lambda_p),
                    real(r.lambda_a),
                    opt_real(r.rel_err_pred_vs_p),
                    real(r.rel_err_p_vs_a),
                    opt_real(r.cosine_sim_pred_vs_p),
                    real(r.cosine_sim_p_vs_a),
                    r.sign_consistent.map(|b| b.to_string()).unwrap_or_default(),
                ]);
            }
            t.to_csv_string()?
        }
        Format::Json => to_json(cfg, report)?,
    };

    let mut side_files = Vec::new();
    if format == Format::Csv {
        side_files.push((
            "summary.json".to_string(),
            to_json(
                cfg,
                &serde_json::json!({
                    "bulk_edge_measured": report.bulk_edge_measured,
                    "k_break": report.k_break,
                    "prediction_truncated_at": report.prediction_truncated_at,
                }),
            )?,
        ));
    }

    let mut ev = Table::new(&["k", "j", "predicted", "numerical_P", "numerical_A"]);
    for row in &report.rows {
        let i = row.k - 1;
        let (vp, va) = match (run.p.vector(i), run.a.vector(i)) {
            (Some(vp), Some(va)) => (vp, va),
            _ => continue,
        };
        let pred = run.predictions.get(i).map(|p| p.entries.as_slice());
        let reference = pred.unwrap_or(vp);
        let vp = crate::analytic_eigenvectors::align_sign(reference, vp);
        let va = crate::analytic_eigenvectors::align_sign(&vp, va);
        for j in 0..c.n {
            ev.push(vec![
                row.k.to_string(),
                (j + 1).to_string(),
                opt_real(pred.map(|p| p[j])),
                real(vp[j]),
                real(va[j]),
            ]);
        }
    }
    side_files.push(("eigenvectors.csv".to_string(), ev.to_csv_string()?));

    let span = run
        .p
        .eigenvalues
        .iter()
        .chain(&run.a.eigenvalues)
        .fold(0.0f64, |m, l| m.max(l.abs()));
    let hi = span * (1.0 + 1e-9) + f64::MIN_POSITIVE;
    let mut hist = Table::new(&["bin_left", "bin_right", "count", "source_kind"]);
    for d in [&run.p, &run.a] {
        for b in histogram(&d.eigenvalues, -hi, hi, c.histogram_bins)? {
            hist.push(vec![
                real(b.left),
                real(b.right),
                b.count.to_string(),
                d.source_kind.as_str().to_string(),
            ]);
        }
    }
    side_files.push(("histogram.csv".to_string(), hist.to_csv_string()?));

    Ok(Output {
        main,
        side_files,
        code: if report.prediction_truncated_at.is_some() {
            EXIT_NO_ROOT
        } else {
            EXIT_OK
        },
    })
}

fn dump_matrices(c: &CompareConfig, out: &Path) -> Result<()> {
    let params = ModelParams::new(c.n, c.alpha, c.seed, weight_mode(c.deterministic))?;
    let x = gen_fitness(&params)?;
    let p = expected_matrix(&x, params.epsilon_n)?;
    let a = sample_adjacency(&p, derive_seed(params.seed, 0))?;
    let header = |kind| MatrixHeader {
        n: c.n,
        alpha: c.alpha,
        epsilon_n: params.epsilon_n,
        seed: c.seed,
        kind,
    };
    write_fitness_csv(&side_path(out, "fitness.csv"), &x)?;
    write_matrix_binary(&side_path(out, "P.bin"), &header(MatrixKind::ExpectedP), &p)?;
    write_matrix_binary(&side_path(out, "A.bin"), &header(MatrixKind::AdjacencyA), &a)?;
    Ok(())
}

#[derive(Serialize)]
struct SpiralRecord {
    omega: f64,
    re: f64,
    im: f64,
    branch: &'static str,
}

fn run_spiral(c: &SpiralConfig, cfg: &ExperimentConfig, format: Format) -> Result<Output> {
    let mut records = Vec::with_capacity(2 * c.steps);
    for branch in [SpiralBranch::Plus, SpiralBranch::Minus] {
        for s in spiral(c.alpha, c.n, c.omega_max, c.steps, branch)?.samples {
            records.push(SpiralRecord {
                omega: s.omega,
                re: s.re,
                im: s.im,
                branch: branch.as_str(),
            });
        }
    }
    let crossings = spiral_crossings(c.alpha, c.n, c.omega_max, c.steps)?;
    let main = match format {
        Format::Csv => {
            let mut t = Table::new(&["omega", "re", "im", "branch"]);
            for r in &records {
                t.push(vec![real(r.omega), real(r.re), real(r.im), r.branch.to_string()]);
            }
            for x in &crossings {
                t.push(vec![real(x.omega), real(x.value), real(0.0), "crossing".to_string()]);
            }
            t.to_csv_string()?
        }
        Format::Json => to_json(
            cfg,
            &serde_json::json!({ "samples": records, "crossings": crossings }),
        )?,
    };
    Ok(Output {
        main,
        side_files: Vec::new(),
        code: EXIT_OK,
    })
}

#[derive(Serialize)]
struct SweepRow {
    n: usize,
    alpha: f64,
    mean_edge: f64,
    stderr: f64,
    crude_bound: f64,
    expectation_bound: f64,
}

#[derive(Serialize)]
struct DensityRun {
    n: usize,
    alpha: f64,
    eta: f64,
    lambda: Vec<f64>,
    rho_h: Vec<f64>,
    mass: f64,
    status: Vec<PointStatus>,
}

fn run_bulk(c: &BulkConfig, cfg: &ExperimentConfig, format: Format) -> Result<Output> {
    let mut sweep = Vec::new();
    let mut densities = Vec::new();
    for &alpha in &c.alphas {
        for &n in &c.ns {
            let params = ModelParams::new(n, alpha, c.seed, weight_mode(c.deterministic))?;
            let edge = measure_bulk_edge(&params, c.realizations)?;
            let x = gen_fitness(&params)?;
            let p = expected_matrix(&x, params.epsilon_n)?;
            let bounds = norm_upper_bound(&variance_profile(&p)?, n);
            sweep.push(SweepRow {
                n,
                alpha,
                mean_edge: edge.mean,
                stderr: edge.stderr,
                crude_bound: crude_bound(n),
                expectation_bound: bounds.expectation_bound,
            });
            if c.density {
                let eta = c.eta.unwrap_or_else(|| default_eta(n));
                let grid = lambda_grid(-0.75, 0.75, c.grid_points, eta)?;
                let sol = cavity_solve(&x, params.epsilon_n, &grid, &c.cavity)?;
                densities.push(DensityRun {
                    n,
                    alpha,
                    eta,
                    mass: sol.mass(),
                    lambda: grid.iter().map(|z| z.re).collect(),
                    rho_h: sol.density.clone(),
                    status: sol.status,
                });
            }
        }
    }
    let all_converged = densities
        .iter()
        .all(|d| d.status.iter().all(|s| s.converged));

    let mut side_files = Vec::new();
    let main = match format {
        Format::Csv => {
            let mut t = Table::new(&["n", "alpha", "mean_edge", "stderr", "crude_bound", "expectation_bound"]);
            for r in &sweep {
                t.push(vec![
                    r.n.to_string(),
                    real(r.alpha),
                    real(r.mean_edge),
                    real(r.stderr),
                    real(r.crude_bound),
                    real(r.expectation_bound),
                ]);
            }
            if c.density {
                let mut d = Table::new(&["n", "alpha", "lambda", "rho_H", "converged"]);
                for run in &densities {
                    for ((l, rho), st) in run.lambda.iter().zip(&run.rho_h).zip(&run.status) {
                        d.push(vec![
                            run.n.to_string(),
                            real(run.alpha),
                            real(*l),
                            real(*rho),
                            st.converged.to_string(),
                        ]);
                    }
                }
                side_files.push(("density.csv".to_string(), d.to_csv_string()?));
                let log: Vec<_> = densities
                    .iter()
                    .map(|d| serde_json::json!({ "n": d.n, "alpha": d.alpha, "eta": d.eta, "mass": d.mass, "status": d.status }))
                    .collect();
                side_files.push(("convergence.json".to_string(), to_json(cfg, &log)?));
            }
            t.to_csv_string()?
        }
        Format::Json => to_json(
            cfg,
            &serde_json::json!({ "sweep": sweep, "densities": densities }),
        )?,
    };
    Ok(Output {
        main,
        side_files,
        code: if all_converged { EXIT_OK } else { EXIT_NON_CONVERGENCE },
    })
}

#[derive(Serialize)]
struct CoarsegrainReport {
    n: usize,
    b: usize,
    alpha: f64,
    blocks: usize,
    max_violation: f64,
    passed: bool,
}

fn run_coarsegrain(c: &CoarsegrainConfig, cfg: &ExperimentConfig, format: Format) -> Result<Output> {
    let params = ModelParams::new(c.n, c.alpha, c.seed, weight_mode(c.deterministic))?;
    let x = gen_fitness(&params)?;
    let partition = match c.partition {
        PartitionKind::Contiguous => Partition::Contiguous,
        PartitionKind::Random => Partition::Random {
            seed: derive_seed(c.seed, 1),
        },
    };
    let cg = coarse_grain(&x, params.epsilon_n, c.b, partition)?;
    let violation = cg.max_invariance_violation();
    let report = CoarsegrainReport {
        n: c.n,
        b: c.b,
        alpha: c.alpha,
        blocks: cg.blocks.len(),
        max_violation: violation,
        passed: violation < COARSE_GRAIN_TOL,
    };
    let main = match format {
        Format::Csv => {
            let mut t = Table::new(&["n", "b", "alpha", "blocks", "max_violation", "passed"]);
            t.push(vec![
                report.n.to_string(),
                report.b.to_string(),
                real(report.alpha),
                report.blocks.to_string(),
                real(report.max_violation),
                report.passed.to_string(),
            ]);
            t.to_csv_string()?
        }
        Format::Json => to_json(cfg, &report)?,
    };
    Ok(Output {
        main,
        side_files: Vec::new(),
        code: if report.passed { EXIT_OK } else { EXIT_FAILURE },
    })
}

/// Executes a resolved configuration without touching the filesystem.
pub fn execute(cfg: &ExperimentConfig, format: Format) -> Result<Output> {
    cfg.validate()?;
    match cfg {
        ExperimentConfig::Predict(c) => run_predict(c, cfg, format),
        ExperimentConfig::Compare(c) => run_compare(c, cfg, format),
        ExperimentConfig::Spiral(c) => run_spiral(c, cfg, format),
        ExperimentConfig::Bulk(c) => run_bulk(c, cfg, format),
        ExperimentConfig::Coarsegrain(c) => run_coarsegrain(c, cfg, format),
    }
}

/// `dir/stem.suffix` for an output path `dir/stem.ext`.
pub fn side_path(out: &Path, suffix: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".to_string());
    out.with_file_name(format!("{stem}.{suffix}"))
}

pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidParameter(_) => EXIT_USAGE,
        Error::NonConvergence { .. } => EXIT_NON_CONVERGENCE,
        Error::NoRoot { .. } => EXIT_NO_ROOT,
        _ => EXIT_FAILURE,
    }
}

fn resolve_config(cli: &Cli) -> Result<ExperimentConfig> {
    let from_flags = cli.command.to_config();
    let Some(path) = &cli.config else {
        return Ok(from_flags);
    };
    let loaded: ExperimentConfig = serde_json::from_str(&fs::read_to_string(path)?)
        .map_err(|e| Error::InvalidParameter(format!("config {}: {e}", path.display())))?;
    if loaded.name() != from_flags.name() {
        return Err(Error::InvalidParameter(format!(
            "config is for `{}`, not `{}`",
            loaded.name(),
            from_flags.name()
        )));
    }
    Ok(loaded)
}

fn configure_threads(flag: Option<usize>) -> Result<()> {
    let count = match flag {
        Some(t) => Some(t),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| {
                Error::InvalidParameter(format!("{THREADS_ENV} must be a positive integer"))
            })?),
            Err(_) => None,
        },
    };
    if let Some(t) = count {
        if t == 0 {
            return Err(Error::InvalidParameter("thread count must be >= 1".into()));
        }
        // a pool that is already initialised keeps its size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    Ok(())
}

fn run_parsed<W: Write>(cli: &Cli, stdout: &mut W) -> Result<u8> {
    configure_threads(cli.threads)?;
    let cfg = resolve_config(cli)?;
    let output = execute(&cfg, cli.format)?;
    match &cli.out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(path, &output.main)?;
            for (suffix, body) in &output.side_files {
                fs::write(side_path(path, suffix), body)?;
            }
            if let ExperimentConfig::Compare(c) = &cfg {
                if c.dump {
                    dump_matrices(c, path)?;
                }
            }
        }
        None => stdout.write_all(output.main.as_bytes())?,
    }
    Ok(output.code)
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T, W, E>(args: I, stdout: &mut W, stderr: &mut E) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
    W: Write,
    E: Write,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code() as u8;
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match run_parsed(&cli, stdout) {
        Ok(code) => code,
        Err(err) => {
            let _ = writeln!(stderr, "error: {err}");
            exit_code(&err)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (u8, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("msm").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn predict_single_row() {
        let (code, out, _) = call(&["predict", "--alpha", "0.5", "--n", "10000", "--k-max", "1"]);
        assert_eq!(code, EXIT_OK);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines.len(), 2);
        let lambda: f64 = lines[1].split(',').nth(3).unwrap().parse().unwrap();
        assert!((lambda - 245.08).abs() < 0.01);
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(call(&["predict", "--k-max", "0"]).0, EXIT_USAGE);
        assert_eq!(call(&["predict", "--bogus"]).0, EXIT_USAGE);
        assert_eq!(call(&["coarsegrain", "--n", "10", "--b", "3"]).0, EXIT_USAGE);
        assert_eq!(call(&["compare", "--n", "5000"]).0, EXIT_USAGE);
    }

    #[test]
    fn truncated_ladder_exits_four_with_rows() {
        let (code, out, _) = call(&["predict", "--n", "100", "--k-max", "400"]);
        assert_eq!(code, EXIT_NO_ROOT);
        assert!(out.lines().count() > 2);
    }

    #[test]
    fn json_carries_schema_and_config() {
        let (code, out, _) = call(&["coarsegrain", "--n", "100", "--b", "10", "--format", "json"]);
        assert_eq!(code, EXIT_OK);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["config"]["command"], "coarsegrain");
        assert_eq!(v["data"]["passed"], true);
    }

    #[test]
    fn side_paths_share_stem() {
        assert_eq!(
            side_path(Path::new("runs/report.csv"), "eigenvectors.csv"),
            PathBuf::from("runs/eigenvectors.csv").with_file_name("report.eigenvectors.csv")
        );
    }
}
