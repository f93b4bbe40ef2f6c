//! The experiment matrix: datasets × algorithms, repetitions, statistics.

use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::io::{load_claims, load_ground_truth, read_text};
use super::memory::MemoryProbe;
use super::reformat::{reformat_for_ltm, reformat_for_mle, MleMapping};
use super::report::{FigurePoint, ReportRow, Status};
use crate::algorithm::{Algorithm, AlgorithmId};
use crate::convergence::MAX_ITERATIONS;
use crate::error::{Error, Result};
use crate::generator::{generate_scenario, ScenarioConfig};
use crate::metrics::{compute_metrics, GroundTruth, MetricScope, MetricsReport};
use crate::model::{Claim, IndexedDataset};

/// Environment variable holding the number of concurrent matrix cells.
pub const WORKERS_ENV: &str = "TRUTHDISC_WORKERS";

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub name: Option<String>,
    pub claims: Option<PathBuf>,
    pub truth: Option<PathBuf>,
    pub scenario: Option<ScenarioConfig>,
    pub scenario_file: Option<PathBuf>,
    /// Generate one instance per seed and pool them into one row.
    pub seeds: Option<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSpec {
    pub name: String,
    #[serde(default)]
    pub params: toml::Table,
}

impl AlgorithmSpec {
    pub fn named(id: AlgorithmId) -> Self {
        AlgorithmSpec {
            name: id.name().to_string(),
            params: toml::Table::new(),
        }
    }
}

fn default_repetitions() -> usize {
    1
}

fn default_cap() -> usize {
    MAX_ITERATIONS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub datasets: Vec<DatasetSpec>,
    pub algorithms: Vec<AlgorithmSpec>,
    /// Runs per instance for deterministic algorithms.
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    /// Runs per instance for LTM; defaults to its `runs` parameter.
    pub ltm_runs: Option<usize>,
    pub output: Option<PathBuf>,
    #[serde(default = "default_cap")]
    pub iteration_cap: usize,
    pub delta: Option<f64>,
    /// Base seed for stochastic algorithms; run r uses seed + r.
    pub seed: Option<u64>,
    pub time_limit_ms: Option<u64>,
    pub memory_limit_mb: Option<f64>,
    #[serde(default)]
    pub scope: MetricScope,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            datasets: Vec::new(),
            algorithms: Vec::new(),
            repetitions: 1,
            ltm_runs: None,
            output: None,
            iteration_cap: MAX_ITERATIONS,
            delta: None,
            seed: None,
            time_limit_ms: None,
            memory_limit_mb: None,
            scope: MetricScope::GoldStandard,
        }
    }
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::SpecError(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_toml(&read_text(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.datasets.is_empty() {
            return Err(Error::SpecError("no datasets".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::SpecError("no algorithms".into()));
        }
        if self.repetitions == 0 {
            return Err(Error::SpecError("repetitions must be >= 1".into()));
        }
        Ok(())
    }
}

fn merge(base: &mut toml::Table, over: &toml::Table) {
    for (k, v) in over {
        match (base.get_mut(k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            _ => {
                base.insert(k.clone(), v.clone());
            }
        }
    }
}

fn with_overrides<P>(defaults: &P, over: &toml::Table, name: &str) -> Result<P>
where
    P: Serialize + serde::de::DeserializeOwned,
{
    let bad = |e: &dyn std::fmt::Display| Error::SpecError(format!("{name} params: {e}"));
    let mut table = toml::Table::try_from(defaults).map_err(|e| bad(&e))?;
    for key in over.keys() {
        if !table.contains_key(key) {
            return Err(Error::SpecError(format!(
                "{name}: unknown parameter `{key}`"
            )));
        }
    }
    merge(&mut table, over);
    table.try_into().map_err(|e| bad(&e))
}

/// Builds an algorithm from its name and parameter overrides.
pub fn build_algorithm(spec: &AlgorithmSpec) -> Result<Algorithm> {
    let id: AlgorithmId = spec
        .name
        .parse()
        .map_err(|e: Error| Error::SpecError(e.to_string()))?;
    let over = &spec.params;
    let name = id.name();
    Ok(match id.default_algorithm() {
        Algorithm::MajorityVoting => {
            if !over.is_empty() {
                return Err(Error::SpecError(
                    "MajorityVoting takes no parameters".into(),
                ));
            }
            Algorithm::MajorityVoting
        }
        Algorithm::TruthFinder(p) => Algorithm::TruthFinder(with_overrides(&p, over, name)?),
        Algorithm::Cosine(p) => Algorithm::Cosine(with_overrides(&p, over, name)?),
        Algorithm::TwoEstimates(p) => Algorithm::TwoEstimates(with_overrides(&p, over, name)?),
        Algorithm::ThreeEstimates(p) => Algorithm::ThreeEstimates(with_overrides(&p, over, name)?),
        Algorithm::Ltm(p) => Algorithm::Ltm(with_overrides(&p, over, name)?),
        Algorithm::Mle(p) => Algorithm::Mle(with_overrides(&p, over, name)?),
        Algorithm::Depen(p) => {
            let q: crate::dependence::DepenParams = with_overrides(&p, over, name)?;
            if q.variant != p.variant {
                return Err(Error::SpecError(format!(
                    "{name}: variant cannot be overridden"
                )));
            }
            Algorithm::Depen(q)
        }
        Algorithm::SimpleLca(p) => Algorithm::SimpleLca(with_overrides(&p, over, name)?),
        Algorithm::GuessLca(p) => Algorithm::GuessLca(with_overrides(&p, over, name)?),
    })
}

/// A dataset ready to run: claims, truth and the indexed view.
pub struct Instance {
    pub claims: Vec<Claim>,
    pub truth: GroundTruth,
    pub indexed: IndexedDataset,
}

impl Instance {
    pub fn new(claims: Vec<Claim>, truth: GroundTruth) -> Result<Self> {
        let indexed = IndexedDataset::new(claims.clone())?;
        let unclaimed: Vec<&String> = truth
            .iter()
            .map(|(item, _)| item)
            .filter(|i| indexed.item_index(i).is_none())
            .collect();
        if let Some(first) = unclaimed.first() {
            log::warn!(
                "{} ground-truth items have no claims, e.g. `{first}`",
                unclaimed.len()
            );
        }
        Ok(Instance {
            claims,
            truth,
            indexed,
        })
    }
}

/// All instances pooled into one report row.
pub struct PreparedDataset {
    pub label: String,
    pub instances: Vec<Instance>,
    /// Set when the dataset itself could not be built.
    pub error: Option<String>,
}

fn scenario_label(cfg: &ScenarioConfig, seeds: &[u64]) -> String {
    let base = format!(
        "S{}_D{}_cov{}_conf{}_gt{}_max{}",
        cfg.n_sources, cfg.n_items, cfg.cov, cfg.conf, cfg.gt, cfg.max_distinct
    );
    match seeds {
        [one] => format!("{base}_seed{one}"),
        [first, .., last] => format!("{base}_seeds{first}-{last}"),
        [] => base,
    }
}

pub fn prepare_dataset(spec: &DatasetSpec) -> Result<PreparedDataset> {
    let scenario = match (&spec.scenario, &spec.scenario_file) {
        (Some(_), Some(_)) => {
            return Err(Error::SpecError(
                "give either scenario or scenario_file".into(),
            ))
        }
        (Some(s), None) => Some(s.clone()),
        (None, Some(path)) => Some(ScenarioConfig::parse_kv(
            &read_text(path)?,
            &path.display().to_string(),
        )?),
        (None, None) => None,
    };
    match (scenario, &spec.claims) {
        (Some(cfg), None) => {
            let seeds = spec.seeds.clone().unwrap_or_else(|| vec![cfg.seed]);
            if seeds.is_empty() {
                return Err(Error::SpecError("empty seed list".into()));
            }
            let instances = seeds
                .par_iter()
                .map(|&seed| {
                    let sc = generate_scenario(&ScenarioConfig {
                        seed,
                        ..cfg.clone()
                    })?;
                    Instance::new(sc.claims, sc.ground_truth)
                })
                .collect::<Result<Vec<_>>>()?;
            let label = spec
                .name
                .clone()
                .unwrap_or_else(|| scenario_label(&cfg, &seeds));
            Ok(PreparedDataset {
                label,
                instances,
                error: None,
            })
        }
        (None, Some(claims)) => {
            let truth = spec
                .truth
                .as_ref()
                .ok_or_else(|| Error::SpecError(format!("{}: no truth file", claims.display())))?;
            let label = spec
                .name
                .clone()
                .unwrap_or_else(|| claims.display().to_string());
            let instance = Instance::new(load_claims(claims)?, load_ground_truth(truth)?)?;
            Ok(PreparedDataset {
                label,
                instances: vec![instance],
                error: None,
            })
        }
        (Some(_), Some(_)) => Err(Error::SpecError("give either claims or a scenario".into())),
        (None, None) => Err(Error::SpecError(
            "dataset needs claims or a scenario".into(),
        )),
    }
}

/// Mean, sample standard deviation and 95% CI half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub std: Option<f64>,
    pub ci95: Option<f64>,
    pub n: usize,
}

pub fn summarize(xs: &[f64]) -> Option<Summary> {
    let n = xs.len();
    if n == 0 {
        return None;
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return Some(Summary {
            mean,
            std: None,
            ci95: None,
            n,
        });
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let std = var.sqrt();
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.975);
    Some(Summary {
        mean,
        std: Some(std),
        ci95: Some(t * std / (n as f64).sqrt()),
        n,
    })
}

fn mean_of(xs: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = xs.flatten().collect();
    summarize(&v).map(|s| s.mean)
}

/// Settings shared by every cell of a run.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub repetitions: usize,
    pub ltm_runs: Option<usize>,
    pub iteration_cap: usize,
    pub delta: Option<f64>,
    pub seed: Option<u64>,
    pub time_limit_ms: Option<u64>,
    pub memory_limit_mb: Option<f64>,
    pub scope: MetricScope,
}

impl From<&ExperimentSpec> for RunOptions {
    fn from(s: &ExperimentSpec) -> Self {
        RunOptions {
            repetitions: s.repetitions,
            ltm_runs: s.ltm_runs,
            iteration_cap: s.iteration_cap,
            delta: s.delta,
            seed: s.seed,
            time_limit_ms: s.time_limit_ms,
            memory_limit_mb: s.memory_limit_mb,
            scope: s.scope,
        }
    }
}

/// Per-run measurements of one cell.
#[derive(Debug, Clone, Default)]
pub struct CellRuns {
    pub metrics: Vec<MetricsReport>,
    pub iterations: Vec<f64>,
    pub time_ms: Vec<f64>,
    pub mem_mb: Vec<f64>,
}

enum CellError {
    Limit,
    Failed(Error),
}

fn dependence_bytes(n_sources: usize) -> f64 {
    (n_sources * n_sources * std::mem::size_of::<f64>()) as f64
}

/// The dataset view an algorithm runs on, with a way back to the original.
enum View {
    Original,
    Ltm(IndexedDataset),
    Mle(IndexedDataset, MleMapping),
}

fn view_for(id: AlgorithmId, inst: &Instance) -> Result<View> {
    Ok(match id {
        AlgorithmId::Ltm if inst.claims.iter().any(|c| c.value.contains('|')) => {
            View::Ltm(IndexedDataset::new(reformat_for_ltm(&inst.claims))?)
        }
        AlgorithmId::Mle => View::Mle(
            IndexedDataset::new(reformat_for_mle(&inst.claims))?,
            MleMapping::new(&inst.indexed),
        ),
        _ => View::Original,
    })
}

fn run_cell_inner(
    alg: &Algorithm,
    data: &PreparedDataset,
    opts: &RunOptions,
) -> std::result::Result<CellRuns, CellError> {
    let id = alg.id();
    let mut runs = CellRuns::default();
    let reps = match alg {
        Algorithm::Ltm(p) => opts.ltm_runs.unwrap_or(p.runs).max(1),
        _ => opts.repetitions.max(1),
    };
    for inst in &data.instances {
        if let (Algorithm::Depen(_), Some(limit)) = (alg, opts.memory_limit_mb) {
            if dependence_bytes(inst.indexed.n_sources()) / (1024.0 * 1024.0) > limit {
                return Err(CellError::Limit);
            }
        }
        let view = view_for(id, inst).map_err(CellError::Failed)?;
        let ds = match &view {
            View::Original => &inst.indexed,
            View::Ltm(d) | View::Mle(d, _) => d,
        };
        for rep in 0..reps {
            let mut alg = alg.clone();
            if let Algorithm::Ltm(p) = &mut alg {
                p.seed = opts.seed.unwrap_or(p.seed).wrapping_add(rep as u64);
            }
            let probe = MemoryProbe::start();
            let start = Instant::now();
            let outcome = alg.run(ds).map_err(CellError::Failed)?;
            let elapsed = start.elapsed().as_secs_f64() * 1e3;
            let mem = probe.peak_mb();
            if opts.time_limit_ms.is_some_and(|l| elapsed > l as f64) {
                return Err(CellError::Limit);
            }
            let metrics = match &view {
                View::Mle(d, map) => {
                    let sel = map.selection(&inst.indexed, d, &outcome.selection);
                    compute_metrics(&sel, &inst.truth, &inst.indexed, opts.scope)
                }
                _ => compute_metrics(&outcome.selection, &inst.truth, ds, opts.scope),
            }
            .map_err(CellError::Failed)?;
            runs.metrics.push(metrics);
            runs.iterations.push(outcome.iterations as f64);
            runs.time_ms.push(elapsed);
            runs.mem_mb.push(mem);
        }
    }
    Ok(runs)
}

/// Runs one cell and folds its repetitions into a report row.
pub fn run_cell(alg: &Algorithm, data: &PreparedDataset, opts: &RunOptions) -> ReportRow {
    let name = alg.id().name();
    let params = alg.param_digest();
    if let Some(e) = &data.error {
        log::warn!("{} / {name}: {e}", data.label);
        return ReportRow::failed(&data.label, name, &params, Status::Na);
    }
    match run_cell_inner(alg, data, opts) {
        Err(CellError::Limit) => ReportRow::failed(&data.label, name, &params, Status::El),
        Err(CellError::Failed(e)) => {
            log::warn!("{} / {name}: {e}", data.label);
            ReportRow::failed(&data.label, name, &params, Status::Na)
        }
        Ok(runs) => {
            let precision: Vec<f64> = runs.metrics.iter().filter_map(|m| m.precision).collect();
            let p = summarize(&precision);
            ReportRow {
                dataset: data.label.clone(),
                algorithm: name.to_string(),
                params,
                precision: p.map(|s| s.mean),
                precision_std: p.and_then(|s| s.std),
                precision_ci95: p.and_then(|s| s.ci95),
                accuracy: mean_of(runs.metrics.iter().map(|m| m.accuracy)),
                recall: mean_of(runs.metrics.iter().map(|m| m.recall)),
                specificity: mean_of(runs.metrics.iter().map(|m| m.specificity)),
                iterations: mean_of(runs.iterations.iter().map(|&x| Some(x))),
                time_ms: mean_of(runs.time_ms.iter().map(|&x| Some(x))),
                mem_mb: runs.mem_mb.iter().copied().reduce(f64::max),
                status: Status::Ok,
            }
        }
    }
}

/// Worker count from the environment, defaulting to available cores.
pub fn worker_count() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&n: &usize| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn in_pool<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count())
        .build()
        .map_err(|e| Error::SpecError(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

fn configured(spec: &AlgorithmSpec, opts: &RunOptions) -> Result<Algorithm> {
    let mut alg = build_algorithm(spec)?;
    alg.set_max_iterations(opts.iteration_cap);
    if let Some(d) = opts.delta {
        alg.set_delta(d);
    }
    Ok(alg)
}

/// Runs the full matrix. Rows come back in (dataset, algorithm) spec order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ReportRow>> {
    spec.validate()?;
    let opts = RunOptions::from(spec);
    let algorithms = spec
        .algorithms
        .iter()
        .map(|a| configured(a, &opts))
        .collect::<Result<Vec<_>>>()?;
    in_pool(|| {
        let datasets: Vec<PreparedDataset> = spec
            .datasets
            .iter()
            .enumerate()
            .map(|(i, d)| {
                prepare_dataset(d).unwrap_or_else(|e| PreparedDataset {
                    label: d.name.clone().unwrap_or_else(|| format!("dataset{i}")),
                    instances: Vec::new(),
                    error: Some(e.to_string()),
                })
            })
            .collect();
        let cells: Vec<(usize, usize)> = (0..datasets.len())
            .flat_map(|d| (0..algorithms.len()).map(move |a| (d, a)))
            .collect();
        cells
            .par_iter()
            .map(|&(d, a)| run_cell(&algorithms[a], &datasets[d], &opts))
            .collect()
    })
}

/// Distinct-value sweep: one dataset per `max_distinct` in `range`, pooled
/// over `seeds`. Returns the report rows and the long-format points.
pub fn run_sweep(
    base: &ScenarioConfig,
    range: std::ops::RangeInclusive<usize>,
    seeds: &[u64],
    algorithms: &[AlgorithmSpec],
    template: &ExperimentSpec,
) -> Result<(Vec<ReportRow>, Vec<FigurePoint>)> {
    let points: Vec<usize> = range.collect();
    let spec = ExperimentSpec {
        datasets: points
            .iter()
            .map(|&k| DatasetSpec {
                scenario: Some(ScenarioConfig {
                    max_distinct: k,
                    ..base.clone()
                }),
                seeds: Some(seeds.to_vec()),
                ..Default::default()
            })
            .collect(),
        algorithms: algorithms.to_vec(),
        ..template.clone()
    };
    let rows = run_experiment(&spec)?;
    let scenario = format!(
        "S{}_D{}_cov{}_conf{}_gt{}",
        base.n_sources, base.n_items, base.cov, base.conf, base.gt
    );
    let figure = rows
        .iter()
        .enumerate()
        .map(|(i, r)| FigurePoint {
            scenario: scenario.clone(),
            algorithm: r.algorithm.clone(),
            distinct_values: points[i / algorithms.len()],
            precision: r.precision,
        })
        .collect();
    Ok((rows, figure))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn summary_stats() {
        let s = summarize(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_abs_diff_eq!(s.mean, 2.5);
        assert_abs_diff_eq!(s.std.unwrap(), 1.2909944487, epsilon = 1e-9);
        // t(.975, 3) = 3.182446
        assert_abs_diff_eq!(
            s.ci95.unwrap(),
            3.182446305 * 1.2909944487 / 2.0,
            epsilon = 1e-6
        );
        assert!(summarize(&[]).is_none());
        assert!(summarize(&[0.3]).unwrap().std.is_none());
    }

    #[test]
    fn overrides_apply() {
        let spec: AlgorithmSpec =
            toml::from_str("name = \"TruthFinder\"\nparams = { rho = 0.3 }").unwrap();
        match build_algorithm(&spec).unwrap() {
            Algorithm::TruthFinder(p) => {
                assert_eq!(p.rho, 0.3);
                assert_eq!(p.gamma, 0.1);
            }
            other => panic!("{other:?}"),
        }
        let bad: AlgorithmSpec = toml::from_str("name = \"Cosine\"\nparams = { rho = 1 }").unwrap();
        assert!(build_algorithm(&bad).is_err());
        let ltm: AlgorithmSpec =
            toml::from_str("name = \"LTM\"\nparams = { alpha = [0.9, 0.1, 0.9, 0.1], runs = 3 }")
                .unwrap();
        assert!(matches!(build_algorithm(&ltm).unwrap(), Algorithm::Ltm(p) if p.runs == 3));
    }

    #[test]
    fn empty_algorithms_rejected() {
        let spec = ExperimentSpec {
            datasets: vec![DatasetSpec {
                scenario: Some(ScenarioConfig::default()),
                ..Default::default()
            }],
            ..Default::default()
        };
        assert!(matches!(run_experiment(&spec), Err(Error::SpecError(_))));
    }

    #[test]
    fn spec_from_toml() {
        let spec = ExperimentSpec::from_toml(
            r#"
            repetitions = 2
            [[datasets]]
            seeds = [1, 2]
            scenario = { n_sources = 6, n_items = 20, cov = "U75", conf = "U", gt = "80O", max_distinct = 3, seed = 0 }
            [[algorithms]]
            name = "MajorityVoting"
            "#,
        )
        .unwrap();
        assert_eq!(spec.datasets[0].scenario.as_ref().unwrap().n_sources, 6);
        let rows = run_experiment(&spec).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].status, Status::Ok);
        assert_eq!(rows[0].dataset, "S6_D20_covU75_confU_gt80O_max3_seeds1-2");
    }
}
