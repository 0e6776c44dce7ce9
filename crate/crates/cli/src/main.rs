use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pebblex_core::experiments::{
    run_bouquet_experiment, run_geolb_experiment, run_path_experiment, run_spectrum_experiment, spectrum_grid,
    BouquetInstance, ExperimentResult, Knobs, OutputFormat,
};
use pebblex_core::hypoexp::{asymp_log_cdf, cdf_yn_exact, log_cdf_yinf};
use pebblex_core::multiset::{fill_geometric, fill_uniform_total, GeometricParams, Solvability};
use pebblex_core::shadow::{verify_theorem1, VerifyMode};
use pebblex_core::thresholds::{geometric_threshold, uniform_threshold, SearchBudget};
use pebblex_core::pebbling::is_solvable;
use pebblex_core::{Error, Graph, McConfig, PebbleDistribution, SolveMethod};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "pebblex", version, about = "Pebbling solvability, random thresholds and related numerics")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Seed for every random stream.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Monte-Carlo samples per threshold search (or per estimate).
    #[arg(long, global = true, default_value_t = 1 << 22)]
    budget: u64,
    /// Samples per yes/no query of a threshold search; defaults to budget/8.
    #[arg(long, global = true)]
    per_query: Option<u64>,
    /// Also write results into this directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value = "json")]
    format: OutputFormat,
    /// Run Monte-Carlo batches on the calling thread only.
    #[arg(long, global = true)]
    sequential: bool,
}

impl Common {
    fn mc(&self) -> McConfig {
        let cfg = McConfig::new(self.seed);
        if self.sequential {
            cfg.sequential()
        } else {
            cfg
        }
    }

    fn search_budget(&self) -> SearchBudget {
        let b = SearchBudget::new(self.budget);
        match self.per_query {
            Some(q) => b.with_per_query(q),
            None => b,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a distribution solves the graph.
    Solve {
        #[arg(long)]
        graph: String,
        /// Comma-separated counts, or a file holding them.
        #[arg(long)]
        dist: String,
        #[arg(long, default_value = "auto")]
        method: SolveMethod,
    },
    /// Draw random distributions, one per line.
    Sample {
        #[arg(long)]
        graph: String,
        #[arg(long, value_parser = ["uniform", "geometric"])]
        model: String,
        /// Total pebbles (uniform) or expected total (geometric).
        #[arg(long = "T")]
        t: f64,
        #[arg(long, default_value_t = 1)]
        count: u64,
    },
    /// Estimate the uniform or geometric pebbling threshold of a graph.
    Threshold {
        #[arg(long)]
        graph: String,
        #[arg(long, value_parser = ["uniform", "geometric"], default_value = "geometric")]
        model: String,
    },
    /// Multiset shadow checks.
    Shadow {
        #[command(subcommand)]
        command: ShadowCommand,
    },
    /// Distribution function of the hypoexponential sums.
    Ydist {
        /// Evaluate `P(Y <= x)`.
        #[arg(long, conflicts_with = "asymp", required_unless_present = "asymp")]
        x: Option<f64>,
        /// Use the finite sum of `n` terms instead of the limit.
        #[arg(long, requires = "x")]
        n: Option<u32>,
        /// Leading-order value at `x = c'/2^c'`.
        #[arg(long)]
        asymp: Option<f64>,
    },
    /// Experiment drivers; rows go to CSV, parameters to a JSON manifest.
    Experiment {
        #[command(subcommand)]
        command: ExperimentCommand,
    },
}

#[derive(Subcommand)]
enum ShadowCommand {
    /// Check the lower-shadow inequality on subsets of one level.
    Verify {
        #[arg(long)]
        n: usize,
        #[arg(long = "T")]
        t: u64,
        #[arg(long, default_value = "exhaustive")]
        mode: VerifyMode,
        /// Random subsets per size in sampled mode.
        #[arg(long, default_value_t = 1000)]
        trials: u64,
    },
}

#[derive(Args, Clone, Copy)]
struct KnobArgs {
    #[arg(long)]
    g0: Option<usize>,
    #[arg(long)]
    l0: Option<u32>,
    #[arg(long)]
    k: Option<f64>,
}

impl KnobArgs {
    fn knobs(&self) -> Knobs {
        let d = Knobs::default();
        Knobs { g0: self.g0.unwrap_or(d.g0), l0: self.l0.unwrap_or(d.l0), k: self.k.unwrap_or(d.k), ..d }
    }
}

#[derive(Subcommand)]
enum ExperimentCommand {
    /// Geometric pebbling thresholds of paths.
    Path {
        #[arg(long, value_delimiter = ',', default_values_t = [1024usize, 4096, 16384])]
        n: Vec<usize>,
    },
    /// Bouquet thresholds against their predicted bands.
    Bouquet {
        /// `n:g:L` for the many-arm regime, `n:g:L:eps` for the short-arm one.
        #[arg(long, required = true)]
        instance: Vec<String>,
        #[command(flatten)]
        knobs: KnobArgs,
    },
    /// Bouquets built to hit target thresholds.
    Spectrum {
        #[arg(long)]
        n: usize,
        /// Targets; defaults to a log-spaced grid over the admissible range.
        #[arg(long, value_delimiter = ',')]
        targets: Vec<f64>,
        #[arg(long, default_value_t = 9)]
        points: usize,
        /// Also measure each constructed bouquet's threshold.
        #[arg(long)]
        measure: bool,
        #[command(flatten)]
        knobs: KnobArgs,
    },
    /// The lower-bound event probability and its approach to 1/2.
    Geolb {
        #[arg(long, value_delimiter = ',', default_values_t = [100u64, 1000, 10000])]
        n: Vec<u64>,
        /// Vertex count for the Monte-Carlo cross-check; 0 skips it.
        #[arg(long, default_value_t = 100)]
        mc_n: u64,
    },
}

/// Error plus the exit status it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::BudgetExhausted(_) => 3,
            Error::Io(_) => 1,
            _ => 2,
        };
        Self { code, message: e.to_string() }
    }
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into() }
}

/// What a command produced, ready to print.
struct Output {
    name: &'static str,
    json: String,
    csv: Option<String>,
    budget_exhausted: bool,
}

fn to_json(v: &impl Serialize) -> Result<String, Failure> {
    serde_json::to_string_pretty(v).map_err(|e| fail(1, e.to_string()))
}

fn flat_csv<T: Serialize>(rows: &[T]) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| fail(1, e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| fail(1, e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| fail(1, e.to_string()))
}

fn single<T: Serialize>(name: &'static str, value: &T, flat: bool) -> Result<Output, Failure> {
    let csv = if flat { Some(flat_csv(std::slice::from_ref(value))?) } else { None };
    Ok(Output { name, json: to_json(value)?, csv, budget_exhausted: false })
}

fn read_dist(arg: &str) -> Result<PebbleDistribution, Error> {
    let path = std::path::Path::new(arg);
    if !arg.contains(',') && path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(e.to_string()))?;
        PebbleDistribution::parse(&text)
    } else {
        PebbleDistribution::parse(arg)
    }
}

#[derive(Serialize)]
struct SolveOut {
    solvable: bool,
    witness: Option<usize>,
    method: &'static str,
}

#[derive(Serialize)]
struct YdistOut {
    value: f64,
    log_value: f64,
    method: String,
}

#[derive(Serialize)]
struct ShadowSummary {
    n: usize,
    #[serde(rename = "T")]
    t: u64,
    cases: u64,
    violations: u64,
    tight: u64,
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    let common = &cli.common;
    let cfg = common.mc();
    match &cli.command {
        Command::Solve { graph, dist, method } => {
            let graph = Graph::from_literal(graph)?;
            let dist = read_dist(dist)?;
            let used = method.resolve(&graph)?;
            let verdict = is_solvable(&graph, &dist, used)?;
            let out = SolveOut { solvable: verdict.solvable, witness: verdict.witness, method: used.name() };
            single("solve", &out, true)
        }
        Command::Sample { graph, model, t, count } => {
            let graph = Graph::from_literal(graph)?;
            let n = graph.vertex_count();
            let draws: Vec<Vec<u64>> = match model.as_str() {
                "uniform" => {
                    if !(*t >= 0.0) || t.fract() != 0.0 {
                        return Err(Error::Precondition(format!("uniform model needs an integer total, got {t}")).into());
                    }
                    let total = *t as u64;
                    cfg.map_batches(0, 0..*count, |rng, _| {
                        let mut buf = vec![0; n];
                        fill_uniform_total(&mut buf, total, rng);
                        buf
                    })
                }
                _ => {
                    let params = GeometricParams::for_total_mean(n, *t)?;
                    cfg.map_batches(0, 0..*count, |rng, _| {
                        let mut buf = vec![0; n];
                        fill_geometric(&mut buf, params, rng);
                        buf
                    })
                }
            };
            let csv: String = draws
                .iter()
                .map(|d| d.iter().map(u64::to_string).collect::<Vec<_>>().join(",") + "\n")
                .collect();
            Ok(Output { name: "sample", json: to_json(&draws)?, csv: Some(csv), budget_exhausted: false })
        }
        Command::Threshold { graph, model } => {
            let graph = Graph::from_literal(graph)?;
            let family = Solvability::new(graph, SolveMethod::Auto)?;
            let budget = common.search_budget();
            let est = match model.as_str() {
                "uniform" => uniform_threshold(&family, &budget, &cfg)?,
                _ => geometric_threshold(&family, &budget, &cfg)?,
            };
            let mut out = single("threshold", &est, true)?;
            out.budget_exhausted = est.budget_exhausted;
            Ok(out)
        }
        Command::Shadow { command: ShadowCommand::Verify { n, t, mode, trials } } => {
            let report = verify_theorem1(*n, *t, *mode, *trials, &cfg)?;
            let summary = ShadowSummary {
                n: report.n,
                t: report.t,
                cases: report.cases,
                violations: report.violations,
                tight: report.tight,
            };
            Ok(Output {
                name: "shadow",
                json: to_json(&report)?,
                csv: Some(flat_csv(&[summary])?),
                budget_exhausted: false,
            })
        }
        Command::Ydist { x, n, asymp } => {
            let out = match (x, n, asymp) {
                (Some(x), Some(n), _) => {
                    let v = cdf_yn_exact(*n, *x)?;
                    YdistOut { value: v, log_value: v.ln(), method: format!("finite_sum_{n}") }
                }
                (Some(x), None, _) => {
                    let (lp, path) = log_cdf_yinf(*x)?;
                    YdistOut { value: lp.value(), log_value: lp.log_value, method: format!("series_c{}", path.c) }
                }
                (None, _, Some(c)) => {
                    let lp = asymp_log_cdf(*c)?;
                    YdistOut { value: lp.value(), log_value: lp.log_value, method: "asymptotic".into() }
                }
                _ => return Err(fail(2, "give --x or --asymp")),
            };
            single("ydist", &out, true)
        }
        Command::Experiment { command } => {
            let result = run_experiment(command, common, &cfg)?;
            Ok(Output {
                name: "experiment",
                json: result.to_json()?,
                csv: Some(result.to_csv()?),
                budget_exhausted: result.budget_exhausted(),
            })
            .and_then(|o| {
                if let Some(dir) = &common.out {
                    result.write_to_dir(dir)?;
                }
                Ok(o)
            })
        }
    }
}

fn parse_instance(s: &str) -> Result<BouquetInstance, Error> {
    let parts: Vec<&str> = s.split(':').collect();
    let int = |t: &str| t.parse::<usize>().map_err(|_| Error::Parse(format!("bad integer `{t}` in `{s}`")));
    match parts.as_slice() {
        [n, g, l] => Ok(BouquetInstance { n: int(n)?, g: int(g)?, arm_len: int(l)?, eps: None }),
        [n, g, l, e] => Ok(BouquetInstance {
            n: int(n)?,
            g: int(g)?,
            arm_len: int(l)?,
            eps: Some(e.parse().map_err(|_| Error::Parse(format!("bad eps `{e}` in `{s}`")))?),
        }),
        _ => Err(Error::Parse(format!("expected n:g:L or n:g:L:eps, got `{s}`"))),
    }
}

fn run_experiment(command: &ExperimentCommand, common: &Common, cfg: &McConfig) -> Result<ExperimentResult, Error> {
    let budget = common.search_budget();
    match command {
        ExperimentCommand::Path { n } => run_path_experiment(n, &budget, cfg),
        ExperimentCommand::Bouquet { instance, knobs } => {
            let instances = instance.iter().map(|s| parse_instance(s)).collect::<Result<Vec<_>, _>>()?;
            run_bouquet_experiment(&instances, &knobs.knobs(), &budget, cfg)
        }
        ExperimentCommand::Spectrum { n, targets, points, measure, knobs } => {
            let targets = if targets.is_empty() { spectrum_grid(*n, *points) } else { targets.clone() };
            run_spectrum_experiment(*n, &targets, &knobs.knobs(), measure.then_some(&budget), cfg)
        }
        ExperimentCommand::Geolb { n, mc_n } => {
            let mc = (*mc_n > 0).then_some((*mc_n, common.budget));
            run_geolb_experiment(n, mc, cfg)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            let text = match (cli.common.format, &out.csv) {
                (OutputFormat::Csv, Some(csv)) => csv.clone(),
                (OutputFormat::Csv, None) => {
                    eprintln!("error: csv output is not available for this command");
                    return ExitCode::from(2);
                }
                (OutputFormat::Json, _) => out.json.clone() + "\n",
            };
            print!("{text}");
            let is_experiment = out.name == "experiment";
            if let (Some(dir), false) = (&cli.common.out, is_experiment) {
                let ext = match cli.common.format {
                    OutputFormat::Csv => "csv",
                    OutputFormat::Json => "json",
                };
                let written = std::fs::create_dir_all(dir).and_then(|_| std::fs::write(dir.join(format!("{}.{ext}", out.name)), &text));
                if let Err(e) = written {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            }
            if out.budget_exhausted {
                eprintln!("warning: sample budget exhausted; intervals are partial");
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
