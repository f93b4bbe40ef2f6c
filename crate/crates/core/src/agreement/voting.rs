use crate::algorithm::Outcome;
use crate::model::IndexedDataset;
use crate::state::{select_from_scores, SelectionMode, TrustState};

/// Majority voting: C_v = |S_v| / |S_d|, one pass.
///
/// Source trust is reported as the fraction of a source's values that won
/// their item.
pub fn run_voting(ds: &IndexedDataset) -> Outcome {
    let confidence: Vec<f64> = (0..ds.n_values())
        .map(|v| {
            let d = ds.value_item(v);
            ds.supporters(v).len() as f64 / ds.item_sources(d).len() as f64
        })
        .collect();
    let selection = select_from_scores(&confidence, ds, SelectionMode::Argmax);
    let trust = (0..ds.n_sources())
        .map(|s| {
            let vs = ds.source_values(s);
            let won = vs.iter().filter(|&&v| selection.is_selected(ds, v)).count();
            won as f64 / vs.len() as f64
        })
        .collect();
    Outcome {
        state: TrustState::new(trust, confidence, 1),
        selection,
        iterations: 1,
        converged: true,
    }
}
