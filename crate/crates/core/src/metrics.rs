use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{canonical_value, IndexedDataset};
use crate::state::Selection;

/// True value set per data item, with canonicalized values.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroundTruth {
    truths: BTreeMap<String, BTreeSet<String>>,
}

impl GroundTruth {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, item: impl Into<String>, value: &str) {
        self.truths
            .entry(item.into())
            .or_default()
            .insert(canonical_value(value));
    }

    pub fn get(&self, item: &str) -> Option<&BTreeSet<String>> {
        self.truths.get(item)
    }

    pub fn len(&self) -> usize {
        self.truths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.truths.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &BTreeSet<String>)> {
        self.truths.iter()
    }
}

impl<I: Into<String>, V: AsRef<str>> FromIterator<(I, V)> for GroundTruth {
    fn from_iter<T: IntoIterator<Item = (I, V)>>(iter: T) -> Self {
        let mut gt = GroundTruth::new();
        for (item, value) in iter {
            gt.insert(item, value.as_ref());
        }
        gt
    }
}

/// Which items the confusion counts range over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricScope {
    /// Only items listed in the ground truth (gold-standard sample).
    #[default]
    GoldStandard,
    /// Every item of the dataset; unlisted items have no true value.
    AllItems,
}

/// Confusion counts and the four quality ratios.
///
/// A ratio whose denominator is zero is `None`, printed as `undefined`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricsReport {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
    pub precision: Option<f64>,
    pub accuracy: Option<f64>,
    pub recall: Option<f64>,
    pub specificity: Option<f64>,
    pub iterations: usize,
    pub wall_time_ms: f64,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

impl MetricsReport {
    pub fn from_counts(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        MetricsReport {
            tp,
            fp,
            fn_,
            tn,
            precision: ratio(tp, tp + fp),
            accuracy: ratio(tp + tn, tp + fp + fn_ + tn),
            recall: ratio(tp, tp + fn_),
            specificity: ratio(tn, fp + tn),
            iterations: 0,
            wall_time_ms: 0.0,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |r: Option<f64>| r.map_or("undefined".to_string(), |x| format!("{x:.4}"));
        write!(
            f,
            "precision={} accuracy={} recall={} specificity={} (tp={} fp={} fn={} tn={})",
            show(self.precision),
            show(self.accuracy),
            show(self.recall),
            show(self.specificity),
            self.tp,
            self.fp,
            self.fn_,
            self.tn
        )
    }
}

/// Scores a truth selection against ground truth over (item, value) labels.
///
/// Ground-truth values nobody claimed count as false negatives. Items
/// listed in the ground truth but absent from the dataset are skipped.
pub fn compute_metrics(
    selected: &Selection,
    ground_truth: &GroundTruth,
    ds: &IndexedDataset,
    scope: MetricScope,
) -> Result<MetricsReport> {
    if ground_truth.is_empty() {
        return Err(Error::EmptyGoldStandard);
    }
    let empty = BTreeSet::new();
    let (mut tp, mut fp, mut fn_, mut tn) = (0u64, 0u64, 0u64, 0u64);
    for d in 0..ds.n_items() {
        let truths = match (ground_truth.get(ds.item_name(d)), scope) {
            (Some(t), _) => t,
            (None, MetricScope::GoldStandard) => continue,
            (None, MetricScope::AllItems) => &empty,
        };
        let picked = selected.values(d);
        let mut matched = 0u64;
        for v in ds.item_values(d) {
            let is_true = truths.contains(ds.value_str(v));
            matched += u64::from(is_true);
            match (picked.contains(&v), is_true) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => tn += 1,
            }
        }
        fn_ += truths.len() as u64 - matched;
    }
    Ok(MetricsReport::from_counts(tp, fp, fn_, tn))
}
