//! Claims and the indexed views every algorithm iterates over.
//!
//! Sources are numbered in lexicographic order of their ids, so iterating
//! `0..n_sources()` is the lexical source order. Data items are numbered in
//! order of first appearance and candidate values are stored contiguously
//! per item, again in order of first appearance.

use std::collections::{HashMap, HashSet};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type SourceIdx = usize;
pub type ItemIdx = usize;
pub type ValueIdx = usize;

/// One `(claim_id, source_id, data_item_id, value)` assertion.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Claim {
    pub claim_id: String,
    pub source_id: String,
    pub data_item_id: String,
    pub value: String,
}

impl Claim {
    pub fn new(
        claim_id: impl Into<String>,
        source_id: impl Into<String>,
        data_item_id: impl Into<String>,
        value: impl Into<String>,
    ) -> Self {
        Claim {
            claim_id: claim_id.into(),
            source_id: source_id.into(),
            data_item_id: data_item_id.into(),
            value: value.into(),
        }
    }
}

/// Values are compared after trimming and case-folding.
pub fn canonical_value(raw: &str) -> String {
    raw.trim().to_lowercase()
}

/// Immutable claim collection with the supporter/disputer/coverage views
/// precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexedDataset {
    claims: Vec<Claim>,
    sources: Vec<String>,
    items: Vec<String>,
    /// `(item, canonical value)` per value index.
    values: Vec<(ItemIdx, String)>,
    /// `item_offsets[d]..item_offsets[d + 1]` are the candidate values of `d`.
    item_offsets: Vec<usize>,
    claim_value: Vec<ValueIdx>,
    claim_source: Vec<SourceIdx>,
    supporters: Vec<Vec<SourceIdx>>,
    disputers: Vec<Vec<SourceIdx>>,
    item_sources: Vec<Vec<SourceIdx>>,
    source_values: Vec<Vec<ValueIdx>>,
    source_items: Vec<Vec<ItemIdx>>,
    source_lookup: HashMap<String, SourceIdx>,
    item_lookup: HashMap<String, ItemIdx>,
}

/// Builds every view of the dataset from a claim list.
pub fn index_dataset(claims: Vec<Claim>) -> Result<IndexedDataset> {
    IndexedDataset::new(claims)
}

impl IndexedDataset {
    pub fn new(claims: Vec<Claim>) -> Result<Self> {
        if claims.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut seen = HashSet::with_capacity(claims.len());
        for c in &claims {
            if !seen.insert(c.claim_id.as_str()) {
                return Err(Error::DuplicateClaim(c.claim_id.clone()));
            }
        }
        drop(seen);

        let mut sources: Vec<String> = claims
            .iter()
            .map(|c| c.source_id.clone())
            .collect::<HashSet<_>>()
            .into_iter()
            .collect();
        sources.sort();
        let source_lookup: HashMap<String, SourceIdx> = sources
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();

        let mut items = Vec::new();
        let mut item_lookup = HashMap::new();
        // per item: canonical value -> local index, in first-appearance order
        let mut local_values: Vec<Vec<String>> = Vec::new();
        let mut local_lookup: Vec<HashMap<String, usize>> = Vec::new();
        let mut claim_local = Vec::with_capacity(claims.len());
        for c in &claims {
            let d = *item_lookup
                .entry(c.data_item_id.clone())
                .or_insert_with(|| {
                    items.push(c.data_item_id.clone());
                    local_values.push(Vec::new());
                    local_lookup.push(HashMap::new());
                    items.len() - 1
                });
            let v = canonical_value(&c.value);
            let next = local_values[d].len();
            let k = *local_lookup[d].entry(v.clone()).or_insert_with(|| {
                local_values[d].push(v);
                next
            });
            claim_local.push((d, k));
        }

        let mut item_offsets = Vec::with_capacity(items.len() + 1);
        let mut values = Vec::new();
        item_offsets.push(0);
        for (d, vals) in local_values.into_iter().enumerate() {
            values.extend(vals.into_iter().map(|v| (d, v)));
            item_offsets.push(values.len());
        }

        let n_sources = sources.len();
        let mut supporters = vec![Vec::new(); values.len()];
        let mut item_sources = vec![Vec::new(); items.len()];
        let mut source_values = vec![Vec::new(); n_sources];
        let mut source_items = vec![Vec::new(); n_sources];
        let mut claim_value = Vec::with_capacity(claims.len());
        let mut claim_source = Vec::with_capacity(claims.len());
        for (c, &(d, k)) in claims.iter().zip(&claim_local) {
            let s = source_lookup[&c.source_id];
            let v = item_offsets[d] + k;
            claim_value.push(v);
            claim_source.push(s);
            supporters[v].push(s);
            item_sources[d].push(s);
            source_values[s].push(v);
            source_items[s].push(d);
        }
        for list in supporters
            .iter_mut()
            .chain(item_sources.iter_mut())
            .chain(source_values.iter_mut())
            .chain(source_items.iter_mut())
        {
            list.sort_unstable();
            list.dedup();
        }

        let disputers = values
            .iter()
            .enumerate()
            .map(|(v, &(d, _))| sorted_difference(&item_sources[d], &supporters[v]))
            .collect();

        Ok(IndexedDataset {
            claims,
            sources,
            items,
            values,
            item_offsets,
            claim_value,
            claim_source,
            supporters,
            disputers,
            item_sources,
            source_values,
            source_items,
            source_lookup,
            item_lookup,
        })
    }

    pub fn claims(&self) -> &[Claim] {
        &self.claims
    }

    pub fn n_sources(&self) -> usize {
        self.sources.len()
    }

    pub fn n_items(&self) -> usize {
        self.items.len()
    }

    /// |V|, the number of distinct (item, value) pairs.
    pub fn n_values(&self) -> usize {
        self.values.len()
    }

    pub fn sources(&self) -> &[String] {
        &self.sources
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }

    pub fn source_name(&self, s: SourceIdx) -> &str {
        &self.sources[s]
    }

    pub fn item_name(&self, d: ItemIdx) -> &str {
        &self.items[d]
    }

    pub fn source_index(&self, id: &str) -> Option<SourceIdx> {
        self.source_lookup.get(id).copied()
    }

    pub fn item_index(&self, id: &str) -> Option<ItemIdx> {
        self.item_lookup.get(id).copied()
    }

    /// Looks up a value of `item` by its (canonicalized) text.
    pub fn value_index(&self, item: ItemIdx, value: &str) -> Option<ValueIdx> {
        let v = canonical_value(value);
        self.item_values(item).find(|&i| self.values[i].1 == v)
    }

    /// V_d, as a contiguous range of value indices.
    pub fn item_values(&self, d: ItemIdx) -> Range<ValueIdx> {
        self.item_offsets[d]..self.item_offsets[d + 1]
    }

    pub fn value_item(&self, v: ValueIdx) -> ItemIdx {
        self.values[v].0
    }

    /// Canonical text of a value.
    pub fn value_str(&self, v: ValueIdx) -> &str {
        &self.values[v].1
    }

    /// S_v: sources claiming `v`, in lexical order.
    pub fn supporters(&self, v: ValueIdx) -> &[SourceIdx] {
        &self.supporters[v]
    }

    /// S_v̄: sources claiming the item of `v` but not `v` itself.
    pub fn disputers(&self, v: ValueIdx) -> &[SourceIdx] {
        &self.disputers[v]
    }

    /// S_d: sources claiming anything for `d`.
    pub fn item_sources(&self, d: ItemIdx) -> &[SourceIdx] {
        &self.item_sources[d]
    }

    /// V_s.
    pub fn source_values(&self, s: SourceIdx) -> &[ValueIdx] {
        &self.source_values[s]
    }

    /// D_s.
    pub fn source_items(&self, s: SourceIdx) -> &[ItemIdx] {
        &self.source_items[s]
    }

    /// V_{D_s}: every candidate value of every item `s` covers.
    pub fn source_item_values(&self, s: SourceIdx) -> impl Iterator<Item = ValueIdx> + '_ {
        self.source_items[s]
            .iter()
            .flat_map(move |&d| self.item_values(d))
    }

    /// |V_{D_s}|.
    pub fn source_item_value_count(&self, s: SourceIdx) -> usize {
        self.source_items[s]
            .iter()
            .map(|&d| self.item_values(d).len())
            .sum()
    }

    pub fn claim_value(&self, claim: usize) -> ValueIdx {
        self.claim_value[claim]
    }

    pub fn claim_source(&self, claim: usize) -> SourceIdx {
        self.claim_source[claim]
    }

    /// True when no source provides more than one value for an item.
    pub fn is_single_claim_per_source(&self) -> bool {
        (0..self.n_sources()).all(|s| self.source_values[s].len() == self.source_items[s].len())
    }
}

fn sorted_difference(all: &[usize], remove: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(all.len().saturating_sub(remove.len()));
    let mut j = 0;
    for &x in all {
        while j < remove.len() && remove[j] < x {
            j += 1;
        }
        if j < remove.len() && remove[j] == x {
            continue;
        }
        out.push(x);
    }
    out
}

/// The affiliation example: four sources claiming the affiliations of four
/// researchers, with ground truth MIT, MSR, UCI, Google.
pub fn affiliation_example() -> (Vec<Claim>, Vec<(String, String)>) {
    let rows = [
        ("S1", "Stonebraker", "MIT"),
        ("S2", "Stonebraker", "UWisc"),
        ("S4", "Stonebraker", "MIT"),
        ("S1", "Bernstein", "MSR"),
        ("S3", "Bernstein", "AT&T"),
        ("S1", "Carey", "UCI"),
        ("S3", "Carey", "BEA"),
        ("S4", "Carey", "BEA"),
        ("S1", "Halevy", "Google"),
        ("S3", "Halevy", "UWisc"),
        ("S4", "Halevy", "MSR"),
    ];
    let claims = rows
        .iter()
        .enumerate()
        .map(|(i, (s, person, v))| {
            Claim::new(
                format!("c{}", i + 1),
                *s,
                format!("{person}:AffiliatedTo"),
                *v,
            )
        })
        .collect();
    let truth = [
        ("Stonebraker", "MIT"),
        ("Bernstein", "MSR"),
        ("Carey", "UCI"),
        ("Halevy", "Google"),
    ]
    .iter()
    .map(|(p, v)| (format!("{p}:AffiliatedTo"), v.to_string()))
    .collect();
    (claims, truth)
}
