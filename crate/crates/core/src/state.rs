use std::collections::{BTreeMap, BTreeSet};

use crate::model::{IndexedDataset, ItemIdx, ValueIdx};

/// Source trust and value confidence at one iteration of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrustState {
    /// T_s, indexed by source.
    pub source_trust: Vec<f64>,
    /// C_v, indexed by value.
    pub value_confidence: Vec<f64>,
    pub iteration: usize,
}

impl TrustState {
    pub fn new(source_trust: Vec<f64>, value_confidence: Vec<f64>, iteration: usize) -> Self {
        TrustState {
            source_trust,
            value_confidence,
            iteration,
        }
    }

    /// True when every score is finite.
    pub fn is_finite(&self) -> bool {
        self.source_trust
            .iter()
            .chain(&self.value_confidence)
            .all(|x| x.is_finite())
    }

    /// Source trust keyed by source id.
    pub fn trust_by_source<'a>(&self, ds: &'a IndexedDataset) -> BTreeMap<&'a str, f64> {
        ds.sources()
            .iter()
            .map(String::as_str)
            .zip(self.source_trust.iter().copied())
            .collect()
    }
}

/// How the final truth labels are read off the value confidences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SelectionMode {
    /// Exactly one value per item, the highest-scoring one.
    Argmax,
    /// Exactly one value per item, the lowest-scoring one.
    Argmin,
    /// Every value scoring strictly above the threshold.
    Threshold(f64),
}

/// Values labelled true, per item.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    per_item: Vec<Vec<ValueIdx>>,
}

impl Selection {
    pub fn from_per_item(per_item: Vec<Vec<ValueIdx>>) -> Self {
        Selection { per_item }
    }

    pub fn values(&self, d: ItemIdx) -> &[ValueIdx] {
        &self.per_item[d]
    }

    pub fn is_selected(&self, ds: &IndexedDataset, v: ValueIdx) -> bool {
        self.per_item[ds.value_item(v)].contains(&v)
    }

    pub fn n_items(&self) -> usize {
        self.per_item.len()
    }

    /// Selected value texts keyed by item id.
    pub fn to_map(&self, ds: &IndexedDataset) -> BTreeMap<String, BTreeSet<String>> {
        self.per_item
            .iter()
            .enumerate()
            .map(|(d, vs)| {
                (
                    ds.item_name(d).to_string(),
                    vs.iter().map(|&v| ds.value_str(v).to_string()).collect(),
                )
            })
            .collect()
    }
}

/// Labels values true from the confidences in `state`.
///
/// Argmax/argmin ties go to the lexicographically smallest value text.
pub fn select_true_values(
    state: &TrustState,
    ds: &IndexedDataset,
    mode: SelectionMode,
) -> Selection {
    select_from_scores(&state.value_confidence, ds, mode)
}

pub(crate) fn select_from_scores(
    scores: &[f64],
    ds: &IndexedDataset,
    mode: SelectionMode,
) -> Selection {
    let per_item = (0..ds.n_items())
        .map(|d| {
            let range = ds.item_values(d);
            match mode {
                SelectionMode::Argmax => vec![best_by(range, ds, |a, b| scores[a] > scores[b])],
                SelectionMode::Argmin => vec![best_by(range, ds, |a, b| scores[a] < scores[b])],
                SelectionMode::Threshold(t) => range.filter(|&v| scores[v] > t).collect(),
            }
        })
        .collect();
    Selection { per_item }
}

fn best_by(
    mut range: std::ops::Range<ValueIdx>,
    ds: &IndexedDataset,
    better: impl Fn(ValueIdx, ValueIdx) -> bool,
) -> ValueIdx {
    let mut best = range.next().expect("every indexed item has a value");
    for v in range {
        if better(v, best) || (!better(best, v) && ds.value_str(v) < ds.value_str(best)) {
            best = v;
        }
    }
    best
}
