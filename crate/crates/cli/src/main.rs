//! `lpocv`: leave-p-out risk estimation and model selection for densities on [0, 1].

mod error;
mod ingest;
mod output;
mod spec;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use lpocv::estimator::{density_grid, fit_projection};
use lpocv::lpo::{lpo_risk_brute, lpo_risk_closed, DEFAULT_CAP};
use lpocv::moments::{hist_variance_coeffs, moment_report};
use lpocv::penalty::{expected_ideal_penalty, expected_lpo_penalty, overpen_factor, penalty_sweep};
use lpocv::selection::{
    admissible_p_range, auto_p, build_collection, check_assumptions, select_model, solve_epsilon,
    CollectionOptions, DEFAULT_MARGIN,
};
use lpocv::simulation::{
    adaptivity_slope_experiment, density_moments, oracle_ratio_experiment, ExperimentConfig,
};
use lpocv::verify::run_suite;

use error::{CliError, CliResult};
use ingest::{ingest_samples, Column};
use output::{csv_text, emit, json_text, num, SCHEMA_VERSION};

#[derive(Parser, Debug)]
#[command(
    name = "lpocv",
    version,
    about = "Closed-form leave-p-out cross-validation for density estimation on [0, 1]"
)]
struct Cli {
    /// Worker threads for model evaluation and simulations.
    #[arg(long, global = true, env = "LPOCV_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct InputArgs {
    /// Sample file: one value per line, or CSV with --column.
    #[arg(short, long)]
    input: PathBuf,
    /// CSV column (0-based index or header name).
    #[arg(long)]
    column: Option<Column>,
}

#[derive(Args, Debug)]
struct OutArg {
    /// Output file (written atomically); stdout when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CollectionArgs {
    /// Collection kind: pc, pp or tp.
    #[arg(long, default_value = "pc")]
    collection: String,
    /// Φ in the dimension budget Φ n/(ln n)².
    #[arg(long, default_value_t = 1.0)]
    phi: f64,
    /// Degree bound r for pp.
    #[arg(long, default_value_t = 1)]
    degree_bound: usize,
    /// Largest histogram dimension for pc (overrides the budget).
    #[arg(long)]
    max_dim: Option<usize>,
}

impl CollectionArgs {
    fn build(&self, n: usize) -> CliResult<lpocv::selection::Collection> {
        let kind = spec::parse_collection(&self.collection)?;
        let opts = CollectionOptions {
            degree_bound: self.degree_bound,
            max_dim: self.max_dim,
        };
        Ok(build_collection(kind, n, self.phi, opts)?)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lpo risk of one model on a sample.
    Risk {
        #[command(flatten)]
        input: InputArgs,
        /// Model descriptor, e.g. hist:20, trig:3, haar-scaling:4, haar-wavelet:2, poly:3:2.
        #[arg(long)]
        model: String,
        /// Test-set size, 1 <= p <= n-1.
        #[arg(short, long)]
        p: usize,
        /// Enumerate all C(n, p) splits instead of using the closed form.
        #[arg(long)]
        brute: bool,
        /// Largest C(n, p) the brute-force path accepts.
        #[arg(long, default_value_t = DEFAULT_CAP as u64)]
        cap: u64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Choose the model with the smallest Lpo risk.
    Select {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        collection: CollectionArgs,
        /// Test-set size, or `auto` for the midpoint of the admissible range.
        #[arg(short, long)]
        p: String,
        #[command(flatten)]
        out: OutArg,
    },
    /// Report the regularity and complexity assumptions of a collection.
    Check {
        #[command(flatten)]
        collection: CollectionArgs,
        /// Sample size.
        #[arg(short, long)]
        n: usize,
        /// Known density, enabling the (Ad) sufficient condition.
        #[arg(long)]
        density: Option<String>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Exact mean, variance and bias of the Lpo risk under a known density.
    Moments {
        /// Model descriptor (see `risk --help`).
        #[arg(long)]
        model: String,
        /// uniform, cusp:L:ALPHA, inline JSON or JSON file.
        #[arg(long, default_value = "uniform")]
        density: String,
        /// Sample size.
        #[arg(short, long)]
        n: usize,
        /// Test-set size, 1 <= p <= n-1.
        #[arg(short, long)]
        p: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// CSV of the Lpo penalty and C_over for p = 1..n-1.
    PenaltySweep {
        #[command(flatten)]
        input: InputArgs,
        /// Model descriptor (see `risk --help`).
        #[arg(long)]
        model: String,
        #[command(flatten)]
        out: OutArg,
    },
    /// CSV of the fitted projection estimator on a regular grid.
    DensityGrid {
        #[command(flatten)]
        input: InputArgs,
        /// Model descriptor (see `risk --help`).
        #[arg(long)]
        model: String,
        /// Number of grid points on [0, 1].
        #[arg(long, default_value_t = 201)]
        points: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Monte Carlo experiments.
    Simulate {
        #[command(subcommand)]
        experiment: Experiment,
    },
    /// Closed forms against brute-force and enumeration oracles.
    Verify {
        /// Seed for the random cases.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Emit the table as JSON.
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Args, Debug)]
struct SimArgs {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the configured replication count.
    #[arg(long)]
    replications: Option<usize>,
    /// Also write CSV rows (n, mean risk, oracle risk, ratio) here.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Subcommand, Debug)]
enum Experiment {
    /// Mean risk of the selected estimator over the oracle risk.
    OracleRatio(SimArgs),
    /// Slope of log risk against log n.
    Adaptivity(SimArgs),
}

fn envelope(verb: &str, body: Value) -> Value {
    let mut v = json!({ "schema_version": SCHEMA_VERSION, "verb": verb });
    if let (Value::Object(dst), Value::Object(src)) = (&mut v, body) {
        dst.extend(src);
    }
    v
}

fn resolve_p(p: &str, n: usize) -> CliResult<(usize, &'static str)> {
    if p == "auto" {
        if n < 29 {
            return Err(CliError::Usage(format!("--p auto needs n >= 29, got {n}")));
        }
        return Ok((auto_p(n)?, "auto"));
    }
    p.parse()
        .map(|v| (v, "explicit"))
        .map_err(|_| CliError::Usage(format!("--p must be an integer or `auto`, got {p:?}")))
}

fn load_config(args: &SimArgs) -> CliResult<ExperimentConfig> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| CliError::Io {
        path: args.config.display().to_string(),
        message: e.to_string(),
    })?;
    let mut cfg: ExperimentConfig = serde_json::from_str(&text)?;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(r) = args.replications {
        cfg.replications = r;
    }
    Ok(cfg)
}

fn write_rows_csv(path: Option<&Path>, rows: &[lpocv::simulation::ExperimentRow]) -> CliResult<()> {
    if let Some(p) = path {
        let text = csv_text(
            &["n", "p", "mean_risk", "stderr", "oracle_risk", "ratio"],
            rows.iter().map(|r| {
                vec![
                    r.n.to_string(),
                    r.p.to_string(),
                    num(r.mean_risk),
                    num(r.stderr),
                    num(r.oracle_risk),
                    num(r.ratio),
                ]
            }),
        )?;
        output::write_atomic(p, text.as_bytes())?;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Risk {
            input,
            model,
            p,
            brute,
            cap,
            out,
        } => {
            let sample = ingest_samples(&input.input, input.column.as_ref())?;
            let model = spec::parse_model(&model)?;
            let r = if brute {
                lpo_risk_brute(&model, &sample, p, cap as u128)?
            } else {
                lpo_risk_closed(&model, &sample, p)?
            };
            let body = json!({
                "model": r.model, "n": r.n, "p": r.p, "risk": r.value,
                "method": if brute { "brute" } else { "closed" },
            });
            emit(out.output.as_deref(), &json_text(&envelope("risk", body))?)
        }
        Command::Select {
            input,
            collection,
            p,
            out,
        } => {
            let sample = ingest_samples(&input.input, input.column.as_ref())?;
            let (p, source) = resolve_p(&p, sample.len())?;
            let col = collection.build(sample.len())?;
            let r = select_model(&col, &sample, p)?;
            let body = json!({
                "n": sample.len(),
                "p": p,
                "p_source": source,
                "collection": col.kind,
                "chosen": { "index": r.chosen, "model": r.chosen_model, "dim": r.chosen_dim, "risk": r.chosen_risk },
                "risks": r.curve.iter().map(|c| c.risk).collect::<Vec<_>>(),
                "curve": r.curve,
                "ties": r.ties,
            });
            emit(
                out.output.as_deref(),
                &json_text(&envelope("select", body))?,
            )
        }
        Command::Check {
            collection,
            n,
            density,
            out,
        } => {
            let col = collection.build(n)?;
            let density = density.as_deref().map(spec::parse_density).transpose()?;
            let report = check_assumptions(&col, n, density.as_ref());
            let eps = solve_epsilon(n);
            let range = eps
                .map(|e| admissible_p_range(n, e.epsilon, DEFAULT_MARGIN, DEFAULT_MARGIN))
                .transpose()?;
            let body = json!({
                "collection": col.kind,
                "dims": col.dims(),
                "assumptions": report,
                "epsilon": eps,
                "p_range": range.map(|r| json!({
                    "p_lo": r.p_lo, "p_hi": r.p_hi, "lower": r.lower, "upper": r.upper,
                    "zeta": r.zeta, "alpha": r.alpha, "beta": r.beta,
                    "empty": r.is_empty(), "midpoint": r.midpoint(),
                })),
            });
            emit(out.output.as_deref(), &json_text(&envelope("check", body))?)
        }
        Command::Moments {
            model,
            density,
            n,
            p,
            out,
        } => {
            let model = spec::parse_model(&model)?;
            let density = spec::parse_density(&density)?;
            let bm = density_moments(&density, &model);
            let report = moment_report(&bm, n, p)?;
            let hist_poly = match model.family() {
                lpocv::bases::Family::Histogram { bins } => {
                    let alphas: Vec<f64> = (0..bins)
                        .map(|k| density.mass(k as f64 / bins as f64, (k + 1) as f64 / bins as f64))
                        .collect();
                    let c = hist_variance_coeffs(&alphas, &vec![1.0 / bins as f64; bins], n)?;
                    Some(json!({ "q2": c.q2, "q1": c.q1, "q0": c.q0, "variance": c.variance(p)? }))
                }
                _ => None,
            };
            let body = json!({
                "model": model.id(),
                "density": density,
                "n": n,
                "p": p,
                "expectation": report.mean,
                "variance": report.variance,
                "bias": report.bias,
                "v_m": bm.v_m(),
                "proj_sq_norm": bm.proj_sq_norm(),
                "variance_sum": bm.variance_sum(),
                "expected_ideal_penalty": expected_ideal_penalty(&bm, n)?,
                "expected_lpo_penalty": expected_lpo_penalty(&bm, n, p)?,
                "c_over": overpen_factor(n, p)?,
                "hist_variance_poly": hist_poly,
            });
            emit(
                out.output.as_deref(),
                &json_text(&envelope("moments", body))?,
            )
        }
        Command::PenaltySweep { input, model, out } => {
            let sample = ingest_samples(&input.input, input.column.as_ref())?;
            let model = spec::parse_model(&model)?;
            let rows = penalty_sweep(&model, &sample)?;
            let n = sample.len();
            let text = csv_text(
                &["p", "pen_p", "c_over", "empirical_risk", "lpo_risk"],
                rows.iter()
                    .map(|d| {
                        Ok(vec![
                            d.p.to_string(),
                            num(d.lpo_penalty),
                            num(overpen_factor(n, d.p)?),
                            num(d.empirical_risk),
                            num(d.lpo_risk),
                        ])
                    })
                    .collect::<CliResult<Vec<_>>>()?,
            )?;
            emit(out.output.as_deref(), &text)
        }
        Command::DensityGrid {
            input,
            model,
            points,
            out,
        } => {
            if points < 2 {
                return Err(CliError::Usage("--points must be at least 2".into()));
            }
            let sample = ingest_samples(&input.input, input.column.as_ref())?;
            let model = spec::parse_model(&model)?;
            let est = fit_projection(&model, &sample);
            let text = csv_text(
                &["x", "density"],
                density_grid(&est, points)
                    .into_iter()
                    .map(|(x, y)| vec![num(x), num(y)]),
            )?;
            emit(out.output.as_deref(), &text)
        }
        Command::Simulate { experiment } => match experiment {
            Experiment::OracleRatio(args) => {
                let cfg = load_config(&args)?;
                let report = oracle_ratio_experiment(&cfg)?;
                write_rows_csv(args.csv.as_deref(), &report.rows)?;
                let body = json!({ "config": report.config, "rows": report.rows });
                emit(
                    args.out.output.as_deref(),
                    &json_text(&envelope("simulate oracle-ratio", body))?,
                )
            }
            Experiment::Adaptivity(args) => {
                let cfg = load_config(&args)?;
                let r = adaptivity_slope_experiment(&cfg)?;
                write_rows_csv(args.csv.as_deref(), &r.report.rows)?;
                let body = json!({
                    "slope": r.slope, "stderr": r.stderr, "intercept": r.intercept,
                    "config": r.report.config, "rows": r.report.rows,
                });
                emit(
                    args.out.output.as_deref(),
                    &json_text(&envelope("simulate adaptivity", body))?,
                )
            }
        },
        Command::Verify {
            seed,
            json: as_json,
            out,
        } => {
            let rows = run_suite(seed)?;
            let failed = rows.iter().filter(|r| !r.pass).count();
            let text = if as_json {
                json_text(&envelope(
                    "verify",
                    json!({ "seed": seed, "rows": rows, "failed": failed }),
                ))?
            } else {
                let width = rows.iter().map(|r| r.check.len()).max().unwrap_or(5);
                let mut t = format!(
                    "{:<width$}  {:>6}  {:>10}  {:>9}  result\n",
                    "check", "cases", "max error", "tolerance"
                );
                for r in &rows {
                    t.push_str(&format!(
                        "{:<width$}  {:>6}  {:>10.2e}  {:>9.0e}  {}\n",
                        r.check,
                        r.cases,
                        r.max_error,
                        r.tolerance,
                        if r.pass { "PASS" } else { "FAIL" }
                    ));
                }
                t
            };
            emit(out.output.as_deref(), &text)?;
            if failed > 0 {
                return Err(CliError::VerifyFailed { failed });
            }
            Ok(())
        }
    }
}

fn fail(e: &CliError) -> ExitCode {
    let text =
        serde_json::to_string(&e.to_json()).unwrap_or_else(|_| format!("{{\"error\":\"{e}\"}}"));
    eprintln!("{text}");
    ExitCode::from(e.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(
                e.kind(),
                ErrorKind::DisplayHelp
                    | ErrorKind::DisplayVersion
                    | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand
            ) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            return fail(&CliError::Usage(e.to_string().trim().to_string()));
        }
    };
    if let Some(t) = cli.threads {
        if t == 0 {
            return fail(&CliError::Usage("--threads must be at least 1".into()));
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
        {
            return fail(&CliError::Usage(format!("thread pool: {e}")));
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
