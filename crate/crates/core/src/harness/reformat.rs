//! Input rewrites required by LTM (atomic values) and MLE (Boolean
//! positive observations).

use std::collections::{BTreeMap, BTreeSet};

use crate::model::{canonical_value, Claim, IndexedDataset};
use crate::probabilistic::ltm::LIST_SEPARATOR;
use crate::state::Selection;

pub const MLE_TRUE: &str = "True";

/// Splits list values into one claim per element. Split claims get ids
/// `<id>.<k>`; empty elements are dropped.
pub fn reformat_for_ltm(claims: &[Claim]) -> Vec<Claim> {
    let mut out = Vec::with_capacity(claims.len());
    for c in claims {
        if !c.value.contains(LIST_SEPARATOR) {
            out.push(c.clone());
            continue;
        }
        let parts: Vec<&str> = c
            .value
            .split(LIST_SEPARATOR)
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .collect();
        if parts.is_empty() {
            log::warn!("claim {} has an empty list value; dropped", c.claim_id);
        }
        for (k, part) in parts.into_iter().enumerate() {
            out.push(Claim::new(
                format!("{}.{}", c.claim_id, k + 1),
                &c.source_id,
                &c.data_item_id,
                part,
            ));
        }
    }
    out
}

/// Composite item id for a reformatted (item, value) pair.
pub fn composite_item(item: &str, value: &str) -> String {
    format!("{item}:{value}")
}

/// Rewrites claims as Boolean observations on `item:value` composites.
/// Claims already valued true are kept as they are and claims valued false
/// are dropped, so applying this twice changes nothing.
pub fn reformat_for_mle(claims: &[Claim]) -> Vec<Claim> {
    claims
        .iter()
        .filter_map(|c| match canonical_value(&c.value).as_str() {
            "true" => Some(c.clone()),
            "false" => None,
            _ => Some(Claim::new(
                &c.claim_id,
                &c.source_id,
                composite_item(&c.data_item_id, &c.value),
                MLE_TRUE,
            )),
        })
        .collect()
}

/// Maps a selection over the MLE-reformatted dataset back to the original
/// items: an original value is selected iff its composite item is.
pub struct MleMapping {
    /// Per original item, (original value text, composite item id).
    table: Vec<Vec<(String, String)>>,
}

impl MleMapping {
    pub fn new(original: &IndexedDataset) -> Self {
        let table = (0..original.n_items())
            .map(|d| {
                original
                    .item_values(d)
                    .map(|v| {
                        let text = original.value_str(v);
                        let composite = if text == "true" {
                            original.item_name(d).to_string()
                        } else {
                            composite_item(original.item_name(d), text)
                        };
                        (text.to_string(), composite)
                    })
                    .collect()
            })
            .collect();
        MleMapping { table }
    }

    pub fn selection(
        &self,
        original: &IndexedDataset,
        reformatted: &IndexedDataset,
        sel: &Selection,
    ) -> Selection {
        let chosen: BTreeSet<&str> = (0..reformatted.n_items())
            .filter(|&d| !sel.values(d).is_empty())
            .map(|d| reformatted.item_name(d))
            .collect();
        let per_item = self
            .table
            .iter()
            .enumerate()
            .map(|(d, row)| {
                row.iter()
                    .filter(|(_, composite)| chosen.contains(composite.as_str()))
                    .filter_map(|(text, _)| original.value_index(d, text))
                    .collect()
            })
            .collect();
        Selection::from_per_item(per_item)
    }
}

/// (source, item, value) relation with canonical values, for checking
/// that a rewrite lost nothing.
pub fn relation(claims: &[Claim]) -> BTreeSet<(String, String, String)> {
    claims
        .iter()
        .map(|c| {
            (
                c.source_id.clone(),
                c.data_item_id.clone(),
                canonical_value(&c.value),
            )
        })
        .collect()
}

/// Inverts [`reformat_for_ltm`]: joins split elements back by claim id.
pub fn undo_ltm(claims: &[Claim]) -> BTreeMap<String, Vec<String>> {
    let mut out: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for c in claims {
        let base = c
            .claim_id
            .rsplit_once('.')
            .map_or(c.claim_id.as_str(), |(b, _)| b);
        out.entry(base.to_string())
            .or_default()
            .push(c.value.clone());
    }
    out
}
