//! Seeded synthetic scenarios with controlled coverage, conflict and
//! ground-truth distributions.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::GroundTruth;
use crate::model::Claim;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Coverage {
    U25,
    U75,
    E,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Conflict {
    U,
    E,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TruthDistribution {
    R,
    U25,
    U75,
    FP,
    FO,
    #[serde(rename = "80P")]
    P80,
    #[serde(rename = "80O")]
    O80,
    E,
}

macro_rules! text_enum {
    ($ty:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        impl $ty {
            pub fn as_str(self) -> &'static str {
                match self { $($ty::$variant => $text),+ }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s.trim().to_ascii_uppercase().as_str() {
                    $($text => Ok($ty::$variant),)+
                    _ => Err(Error::InvalidParameter(format!(
                        "unknown {} `{s}`", stringify!($ty)
                    ))),
                }
            }
        }
    };
}

text_enum!(Coverage { U25 => "U25", U75 => "U75", E => "E" });
text_enum!(Conflict { U => "U", E => "E" });
text_enum!(TruthDistribution {
    R => "R", U25 => "U25", U75 => "U75", FP => "FP", FO => "FO",
    P80 => "80P", O80 => "80O", E => "E",
});

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n_sources: usize,
    pub n_items: usize,
    pub cov: Coverage,
    pub conf: Conflict,
    pub gt: TruthDistribution,
    pub max_distinct: usize,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            n_sources: 50,
            n_items: 1000,
            cov: Coverage::U25,
            conf: Conflict::U,
            gt: TruthDistribution::R,
            max_distinct: 2,
            seed: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_sources == 0 || self.n_items == 0 {
            return Err(Error::InvalidParameter(
                "source and item counts must be positive".into(),
            ));
        }
        if self.max_distinct < 2 {
            return Err(Error::InvalidParameter(format!(
                "max_distinct={} must be >= 2",
                self.max_distinct
            )));
        }
        if self.cov == Coverage::E && self.n_sources < 2 {
            return Err(Error::InvalidParameter(
                "exponential coverage needs >= 2 sources".into(),
            ));
        }
        Ok(())
    }

    /// Compact label used as the dataset name in reports.
    pub fn label(&self) -> String {
        format!(
            "S{}_D{}_cov{}_conf{}_gt{}_max{}_seed{}",
            self.n_sources,
            self.n_items,
            self.cov,
            self.conf,
            self.gt,
            self.max_distinct,
            self.seed
        )
    }

    /// Parses a flat `key=value` file. Blank lines and `#` comments are skipped.
    pub fn parse_kv(text: &str, path: &str) -> Result<Self> {
        let mut cfg = ScenarioConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::ParseError {
                path: path.into(),
                line: lineno as u64 + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key=value, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let int = |v: &str| v.parse::<u64>().map_err(|e| err(format!("{key}: {e}")));
            match key {
                "n_sources" => cfg.n_sources = int(value)? as usize,
                "n_items" => cfg.n_items = int(value)? as usize,
                "max_distinct" => cfg.max_distinct = int(value)? as usize,
                "seed" => cfg.seed = int(value)?,
                "cov" => cfg.cov = value.parse().map_err(|e: Error| err(e.to_string()))?,
                "conf" => cfg.conf = value.parse().map_err(|e: Error| err(e.to_string()))?,
                "gt" => cfg.gt = value.parse().map_err(|e: Error| err(e.to_string()))?,
                _ => return Err(err(format!("unknown key `{key}`"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_kv(&self) -> String {
        format!(
            "n_sources={}\nn_items={}\ncov={}\nconf={}\ngt={}\nmax_distinct={}\nseed={}\n",
            self.n_sources,
            self.n_items,
            self.cov,
            self.conf,
            self.gt,
            self.max_distinct,
            self.seed
        )
    }
}

fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor().max(0.0) as usize
}

/// Items covered by each source, in source order.
pub fn coverage_counts(cov: Coverage, n_sources: usize, n_items: usize) -> Vec<usize> {
    match cov {
        Coverage::U25 => vec![n_items / 4; n_sources],
        Coverage::U75 => vec![3 * n_items / 4; n_sources],
        Coverage::E => {
            let denom = 4f64.exp() - 1.0;
            let last = (n_sources.max(2) - 1) as f64;
            (0..n_sources)
                .map(|i| {
                    let x = 1.0
                        + (n_items as f64 - 1.0) * ((4.0 * i as f64 / last).exp() - 1.0) / denom;
                    round_half_up(x).clamp(1, n_items)
                })
                .collect()
        }
    }
}

/// Requested distinct values per item, in item order.
pub fn conflict_counts(conf: Conflict, n_items: usize, max_distinct: usize) -> Vec<usize> {
    match conf {
        Conflict::U => vec![max_distinct; n_items],
        Conflict::E => {
            let n = n_items as f64;
            let top = (2.0 * (n - 1.0) / n - 1.0).exp();
            (1..=n_items)
                .map(|i| {
                    let x =
                        (max_distinct as f64 - 1.0) * (2.0 * i as f64 / n - 1.0).exp() / top + 1.0;
                    round_half_up(x).clamp(1, max_distinct)
                })
                .collect()
        }
    }
}

/// True claims per source given each source's coverage.
pub fn truth_quota<R: Rng>(gt: TruthDistribution, coverage: &[usize], rng: &mut R) -> Vec<usize> {
    let n = coverage.len();
    let split = |rng: &mut R, major: fn(usize) -> usize, minor: fn(usize) -> usize| {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let n_major = round_half_up(0.8 * n as f64);
        let mut out = vec![0; n];
        for (rank, &s) in order.iter().enumerate() {
            out[s] = if rank < n_major {
                major(coverage[s])
            } else {
                minor(coverage[s])
            };
        }
        out
    };
    match gt {
        TruthDistribution::R => coverage.iter().map(|&c| rng.random_range(0..=c)).collect(),
        TruthDistribution::U25 => coverage.iter().map(|&c| c / 4).collect(),
        TruthDistribution::U75 => coverage.iter().map(|&c| 3 * c / 4).collect(),
        TruthDistribution::FP => split(rng, |_| 0, |c| c),
        TruthDistribution::FO => split(rng, |c| c, |_| 0),
        TruthDistribution::P80 => split(rng, |c| c / 5, |c| 4 * c / 5),
        TruthDistribution::O80 => split(rng, |c| 4 * c / 5, |c| c / 5),
        TruthDistribution::E => {
            let s = n as f64;
            let lo = (1.0 / s).exp();
            let denom = std::f64::consts::E - lo;
            coverage
                .iter()
                .enumerate()
                .map(|(k, &c)| {
                    let i = (k + 1) as f64;
                    let x = if denom > 0.0 {
                        c as f64 * ((i / s).exp() - lo) / denom
                    } else {
                        c as f64
                    };
                    round_half_up(x).min(c)
                })
                .collect()
        }
    }
}

/// An item whose claimed distinct values differ from the request.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConflictShortfall {
    pub item: String,
    pub requested: usize,
    pub achieved: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioMetadata {
    pub coverage: Vec<usize>,
    pub true_claims: Vec<usize>,
    pub requested_distinct: Vec<usize>,
    pub achieved_distinct: Vec<usize>,
    pub shortfalls: Vec<ConflictShortfall>,
}

impl ScenarioMetadata {
    /// Per-source fraction of true claims; sources with no claims count as 0.
    pub fn true_positive_rates(&self) -> Vec<f64> {
        self.coverage
            .iter()
            .zip(&self.true_claims)
            .map(|(&c, &t)| if c == 0 { 0.0 } else { t as f64 / c as f64 })
            .collect()
    }

    /// Flat `key=value` rendering with comma-separated lists.
    pub fn to_kv(&self) -> String {
        let join = |xs: &[usize]| {
            xs.iter()
                .map(usize::to_string)
                .collect::<Vec<_>>()
                .join(",")
        };
        let shortfalls = self
            .shortfalls
            .iter()
            .map(|s| format!("{}:{}:{}", s.item, s.requested, s.achieved))
            .collect::<Vec<_>>()
            .join(",");
        format!(
            "coverage={}\ntrue_claims={}\nrequested_distinct={}\nachieved_distinct={}\nshortfalls={}\n",
            join(&self.coverage),
            join(&self.true_claims),
            join(&self.requested_distinct),
            join(&self.achieved_distinct),
            shortfalls
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedScenario {
    pub config: ScenarioConfig,
    pub claims: Vec<Claim>,
    pub ground_truth: GroundTruth,
    pub metadata: ScenarioMetadata,
}

fn width(n: usize, min: usize) -> usize {
    n.saturating_sub(1).to_string().len().max(min)
}

pub fn source_id(s: usize, n_sources: usize) -> String {
    format!("s{:0w$}", s, w = width(n_sources, 3))
}

pub fn item_id(d: usize, n_items: usize) -> String {
    format!("d{:0w$}", d, w = width(n_items, 4))
}

fn token(d: usize, k: usize) -> String {
    format!("v{d}_{k}")
}

pub fn generate_scenario(config: &ScenarioConfig) -> Result<GeneratedScenario> {
    config.validate()?;
    let (n_s, n_d) = (config.n_sources, config.n_items);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let requested = conflict_counts(config.conf, n_d, config.max_distinct);
    // k = 1 items still need one false token for sources whose quota says false
    let n_tokens: Vec<usize> = requested.iter().map(|&k| k.max(2)).collect();
    let true_token: Vec<usize> = requested.iter().map(|&k| rng.random_range(0..k)).collect();

    let coverage = coverage_counts(config.cov, n_s, n_d);
    let covered: Vec<Vec<usize>> = coverage
        .iter()
        .map(|&c| {
            let mut items = index::sample(&mut rng, n_d, c).into_vec();
            items.sort_unstable();
            items
        })
        .collect();

    let quota = truth_quota(config.gt, &coverage, &mut rng);
    // is_true[s][k] for the k-th covered item of s
    let is_true: Vec<Vec<bool>> = covered
        .iter()
        .zip(&quota)
        .map(|(items, &q)| {
            let mut flags = vec![false; items.len()];
            for k in index::sample(&mut rng, items.len(), q) {
                flags[k] = true;
            }
            flags
        })
        .collect();

    // per item: (source, true?) in source order
    let mut by_item: Vec<Vec<(usize, bool)>> = vec![Vec::new(); n_d];
    for (s, items) in covered.iter().enumerate() {
        for (k, &d) in items.iter().enumerate() {
            by_item[d].push((s, is_true[s][k]));
        }
    }

    let mut claims = Vec::with_capacity(coverage.iter().sum());
    let mut achieved = vec![0; n_d];
    let mut shortfalls = Vec::new();
    let mut ground_truth = GroundTruth::new();
    for d in 0..n_d {
        let item = item_id(d, n_d);
        ground_truth.insert(item.clone(), &token(d, true_token[d]));
        let mut pool: Vec<usize> = (0..n_tokens[d]).filter(|&k| k != true_token[d]).collect();
        pool.shuffle(&mut rng);
        let mut distinct = std::collections::BTreeSet::new();
        let mut next_false = 0;
        for &(s, truthful) in &by_item[d] {
            let k = if truthful {
                true_token[d]
            } else if next_false < pool.len() {
                next_false += 1;
                pool[next_false - 1]
            } else {
                pool[rng.random_range(0..pool.len())]
            };
            distinct.insert(k);
            claims.push(Claim::new(
                format!("c{}", claims.len() + 1),
                source_id(s, n_s),
                item.clone(),
                token(d, k),
            ));
        }
        achieved[d] = distinct.len();
        if achieved[d] != requested[d] {
            shortfalls.push(ConflictShortfall {
                item,
                requested: requested[d],
                achieved: achieved[d],
            });
        }
    }

    Ok(GeneratedScenario {
        config: config.clone(),
        claims,
        ground_truth,
        metadata: ScenarioMetadata {
            coverage,
            true_claims: quota,
            requested_distinct: requested,
            achieved_distinct: achieved,
            shortfalls,
        },
    })
}

/// Ground truth keyed by item, for file output.
pub fn truth_rows(gt: &GroundTruth) -> BTreeMap<String, String> {
    gt.iter()
        .filter_map(|(d, vs)| vs.iter().next().map(|v| (d.clone(), v.clone())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exponential_coverage_points() {
        let c = coverage_counts(Coverage::E, 50, 1000);
        assert_eq!(c[0], 1);
        assert_eq!(c[24], 115);
        assert_eq!(c[49], 1000);
        assert!(c.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(coverage_counts(Coverage::U25, 3, 1000), vec![250; 3]);
        assert_eq!(coverage_counts(Coverage::U75, 1, 10), vec![7]);
    }

    #[test]
    fn exponential_conflict_points() {
        let c = conflict_counts(Conflict::E, 1000, 20);
        assert_eq!(c[0], 4);
        assert_eq!(c[999], 20);
        assert!(c.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(conflict_counts(Conflict::U, 3, 5), vec![5; 3]);
    }

    #[test]
    fn quotas() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cov = vec![100; 50];
        let fp = truth_quota(TruthDistribution::FP, &cov, &mut rng);
        assert_eq!(fp.iter().filter(|&&q| q == 0).count(), 40);
        assert_eq!(fp.iter().filter(|&&q| q == 100).count(), 10);
        assert_eq!(truth_quota(TruthDistribution::U75, &cov, &mut rng)[0], 75);
        let e = truth_quota(TruthDistribution::E, &cov, &mut rng);
        assert_eq!(e[0], 0);
        assert_eq!(e[49], 100);
        let p80 = truth_quota(TruthDistribution::P80, &cov, &mut rng);
        assert_eq!(p80.iter().filter(|&&q| q == 20).count(), 40);
    }

    #[test]
    fn u75_example() {
        let cfg = ScenarioConfig {
            gt: TruthDistribution::U75,
            seed: 7,
            ..Default::default()
        };
        let sc = generate_scenario(&cfg).unwrap();
        assert!(sc.metadata.coverage.iter().all(|&c| c == 250));
        assert!(sc.metadata.true_claims.iter().all(|&t| t == 187));
        assert_eq!(sc.claims.len(), 50 * 250);
    }

    #[test]
    fn fo_rate() {
        let cfg = ScenarioConfig {
            gt: TruthDistribution::FO,
            seed: 3,
            ..Default::default()
        };
        let sc = generate_scenario(&cfg).unwrap();
        let rates = sc.metadata.true_positive_rates();
        assert!(rates.iter().sum::<f64>() / rates.len() as f64 >= 0.8);
    }

    #[test]
    fn kv_round_trip() {
        let cfg = ScenarioConfig {
            n_sources: 7,
            cov: Coverage::E,
            gt: TruthDistribution::P80,
            ..Default::default()
        };
        assert_eq!(ScenarioConfig::parse_kv(&cfg.to_kv(), "x").unwrap(), cfg);
        assert!(ScenarioConfig::parse_kv("bogus=1", "x").is_err());
        assert!(ScenarioConfig::parse_kv("max_distinct=1", "x").is_err());
    }

    fn arb_config() -> impl Strategy<Value = ScenarioConfig> {
        (
            2usize..12,
            1usize..40,
            prop::sample::select(vec![Coverage::U25, Coverage::U75, Coverage::E]),
            prop::sample::select(vec![Conflict::U, Conflict::E]),
            prop::sample::select(vec![
                TruthDistribution::R,
                TruthDistribution::U25,
                TruthDistribution::U75,
                TruthDistribution::FP,
                TruthDistribution::FO,
                TruthDistribution::P80,
                TruthDistribution::O80,
                TruthDistribution::E,
            ]),
            2usize..21,
            any::<u64>(),
        )
            .prop_map(|(n_sources, n_items, cov, conf, gt, max_distinct, seed)| {
                ScenarioConfig {
                    n_sources,
                    n_items,
                    cov,
                    conf,
                    gt,
                    max_distinct,
                    seed,
                }
            })
    }

    proptest! {
        #[test]
        fn generator_invariants(cfg in arb_config()) {
            let sc = generate_scenario(&cfg).unwrap();
            prop_assert_eq!(sc.ground_truth.len(), cfg.n_items);
            let mut per_source_true = vec![0usize; cfg.n_sources];
            let mut per_source = vec![0usize; cfg.n_sources];
            for c in &sc.claims {
                let s: usize = c.source_id[1..].parse().unwrap();
                let d: usize = c.data_item_id[1..].parse().unwrap();
                let prefix = format!("v{d}_");
                prop_assert!(c.value.starts_with(&prefix));
                per_source[s] += 1;
                if sc.ground_truth.get(&c.data_item_id).unwrap().contains(&c.value) {
                    per_source_true[s] += 1;
                }
            }
            prop_assert_eq!(&per_source, &sc.metadata.coverage);
            prop_assert_eq!(&per_source_true, &sc.metadata.true_claims);
            prop_assert_eq!(generate_scenario(&cfg).unwrap(), sc);
        }
    }
}
