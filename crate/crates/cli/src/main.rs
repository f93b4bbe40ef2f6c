use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use truthdisc::generator::{
    generate_scenario, Conflict, Coverage, ScenarioConfig, TruthDistribution,
};
use truthdisc::harness::{
    emit_figure, emit_report, load_claims, reformat_for_ltm, reformat_for_mle,
    report::write_report, run_experiment, run_sweep, write_claims, write_ground_truth,
    AlgorithmSpec, CountingAlloc, ExperimentSpec, ReportRow, Status,
};
use truthdisc::AlgorithmId;

#[global_allocator]
static ALLOC: CountingAlloc = CountingAlloc;

#[derive(Parser)]
#[command(
    name = "truthdisc",
    version,
    about = "Truth discovery algorithms and benchmark harness"
)]
struct Cli {
    /// Seed for scenario generation and stochastic algorithms.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Convergence threshold for iterative algorithms.
    #[arg(long, global = true)]
    delta: Option<f64>,
    /// Iteration cap for iterative algorithms.
    #[arg(long = "max-iters", global = true)]
    max_iters: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic scenario: claims, ground truth and metadata.
    Generate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Output directory.
        #[arg(short, long, default_value = ".")]
        out: PathBuf,
    },
    /// Run an experiment spec (TOML) and write the report.
    Run {
        spec: PathBuf,
        /// Report path; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Sweep the number of distinct values per item.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, default_value_t = 2)]
        from: usize,
        #[arg(long, default_value_t = 20)]
        to: usize,
        /// Number of seeds per point, starting at --seed (default 0).
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        /// Algorithms to run; all of them when omitted.
        #[arg(short, long, value_delimiter = ',')]
        algorithms: Vec<String>,
        /// Runs per seed for LTM.
        #[arg(long)]
        ltm_runs: Option<usize>,
        /// Report path; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Long-format figure file.
        #[arg(long)]
        figure: Option<PathBuf>,
    },
    /// Reformat a claim file for LTM or MLE.
    Convert {
        #[arg(value_enum)]
        to: Target,
        input: PathBuf,
        output: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Ltm,
    Mle,
}

#[derive(Args)]
struct ScenarioArgs {
    /// key=value scenario file; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    sources: Option<usize>,
    #[arg(long)]
    items: Option<usize>,
    #[arg(long)]
    cov: Option<Coverage>,
    #[arg(long)]
    conf: Option<Conflict>,
    #[arg(long)]
    gt: Option<TruthDistribution>,
    #[arg(long)]
    max_distinct: Option<usize>,
}

impl ScenarioArgs {
    fn resolve(&self, seed: Option<u64>) -> Result<ScenarioConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                ScenarioConfig::parse_kv(&text, &path.display().to_string())?
            }
            None => ScenarioConfig::default(),
        };
        cfg.n_sources = self.sources.unwrap_or(cfg.n_sources);
        cfg.n_items = self.items.unwrap_or(cfg.n_items);
        cfg.cov = self.cov.unwrap_or(cfg.cov);
        cfg.conf = self.conf.unwrap_or(cfg.conf);
        cfg.gt = self.gt.unwrap_or(cfg.gt);
        cfg.max_distinct = self.max_distinct.unwrap_or(cfg.max_distinct);
        cfg.seed = seed.unwrap_or(cfg.seed);
        cfg.validate()?;
        Ok(cfg)
    }
}

fn write_rows(rows: &[ReportRow], output: Option<&Path>) -> Result<()> {
    match output {
        Some(path) => emit_report(rows, path)?,
        None => write_report(rows, std::io::stdout().lock())?,
    }
    Ok(())
}

/// Exit status: success only when every cell is OK.
fn summarize(rows: &[ReportRow]) -> ExitCode {
    let failed: Vec<_> = rows.iter().filter(|r| r.status != Status::Ok).collect();
    if failed.is_empty() {
        return ExitCode::SUCCESS;
    }
    eprintln!("{} of {} cells did not complete:", failed.len(), rows.len());
    for r in failed {
        eprintln!("  {} / {}: {}", r.dataset, r.algorithm, r.status);
    }
    ExitCode::FAILURE
}

fn apply_globals(spec: &mut ExperimentSpec, cli: &Cli) {
    if cli.seed.is_some() {
        spec.seed = cli.seed;
    }
    if cli.delta.is_some() {
        spec.delta = cli.delta;
    }
    if let Some(cap) = cli.max_iters {
        spec.iteration_cap = cap;
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Generate { scenario, out } => {
            let cfg = scenario.resolve(cli.seed)?;
            let sc = generate_scenario(&cfg)?;
            fs::create_dir_all(out)?;
            write_claims(&sc.claims, &out.join("claims.csv"))?;
            write_ground_truth(&sc.ground_truth, &out.join("truth.csv"))?;
            fs::write(out.join("scenario.txt"), cfg.to_kv())?;
            fs::write(out.join("metadata.txt"), sc.metadata.to_kv())?;
            if let Some(first) = sc.metadata.shortfalls.first() {
                log::warn!(
                    "{} items short of their distinct-value count, e.g. {first:?}",
                    sc.metadata.shortfalls.len()
                );
            }
            eprintln!("{} claims written to {}", sc.claims.len(), out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Run { spec, output } => {
            let mut exp = ExperimentSpec::load(spec)?;
            apply_globals(&mut exp, &cli);
            let rows = run_experiment(&exp)?;
            write_rows(&rows, output.as_deref().or(exp.output.as_deref()))?;
            Ok(summarize(&rows))
        }
        Command::Sweep {
            scenario,
            from,
            to,
            seeds,
            algorithms,
            ltm_runs,
            output,
            figure,
        } => {
            if from > to || *from < 2 {
                bail!("invalid sweep range {from}..={to}");
            }
            let base = scenario.resolve(None)?;
            let first = cli.seed.unwrap_or(0);
            let seeds: Vec<u64> = (first..first + seeds).collect();
            let algs = if algorithms.is_empty() {
                AlgorithmId::ALL
                    .into_iter()
                    .map(AlgorithmSpec::named)
                    .collect()
            } else {
                algorithms
                    .iter()
                    .map(|a| AlgorithmSpec {
                        name: a.clone(),
                        ..Default::default()
                    })
                    .collect::<Vec<_>>()
            };
            let mut template = ExperimentSpec {
                ltm_runs: *ltm_runs,
                ..Default::default()
            };
            apply_globals(&mut template, &cli);
            let (rows, points) = run_sweep(&base, *from..=*to, &seeds, &algs, &template)?;
            write_rows(&rows, output.as_deref())?;
            if let Some(path) = figure {
                emit_figure(&points, path)?;
            }
            Ok(summarize(&rows))
        }
        Command::Convert { to, input, output } => {
            let claims = load_claims(input)?;
            let converted = match to {
                Target::Ltm => reformat_for_ltm(&claims),
                Target::Mle => reformat_for_mle(&claims),
            };
            write_claims(&converted, output)?;
            eprintln!("{} claims -> {}", claims.len(), converted.len());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    CountingAlloc::mark_installed();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
