use serde::{Deserialize, Serialize};

use crate::algorithm::{check_finite, Outcome};
use crate::convergence::{has_converged, DEFAULT_DELTA, MAX_ITERATIONS};
use crate::error::{Error, Result};
use crate::model::IndexedDataset;
use crate::state::{select_from_scores, SelectionMode, TrustState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CosineParams {
    pub eta: f64,
    pub delta: f64,
    pub max_iterations: usize,
}

impl Default for CosineParams {
    fn default() -> Self {
        CosineParams {
            eta: 0.2,
            delta: DEFAULT_DELTA,
            max_iterations: MAX_ITERATIONS,
        }
    }
}

/// T0_s = (2|V_s| - |V_{D_s}|) / |V_{D_s}|.
pub(crate) fn initial_trust(ds: &IndexedDataset) -> Vec<f64> {
    (0..ds.n_sources())
        .map(|s| {
            let own = ds.source_values(s).len() as f64;
            let all = ds.source_item_value_count(s) as f64;
            (2.0 * own - all) / all
        })
        .collect()
}

fn update_trust(ds: &IndexedDataset, eta: f64, conf: &[f64], trust: &mut [f64]) {
    for (s, t) in trust.iter_mut().enumerate() {
        let pos: f64 = ds.source_values(s).iter().map(|&v| conf[v]).sum();
        let (mut total, mut squares, mut count) = (0.0, 0.0, 0usize);
        for v in ds.source_item_values(s) {
            total += conf[v];
            squares += conf[v] * conf[v];
            count += 1;
        }
        let norm = (count as f64 * squares).sqrt();
        if norm > 0.0 {
            *t = (1.0 - eta) * *t + eta * (pos - (total - pos)) / norm;
        }
    }
}

/// C_v = (sum_{S_v} T^3 - sum_{S_d - S_v} T^3) / sum_{S_d} T^3, with the
/// denominator's magnitude taken as sum |T|^3. That is the same value
/// whenever all trust shares a sign (typically all negative at high
/// conflict, where the sign flip is what ranks well-supported values
/// first) and keeps C_v within [-1, 1] when signs are mixed.
fn update_confidence(ds: &IndexedDataset, trust: &[f64], conf: &mut [f64]) {
    for (v, c) in conf.iter_mut().enumerate() {
        let cube = |s: &usize| trust[*s].powi(3);
        let pos: f64 = ds.supporters(v).iter().map(cube).sum();
        let neg: f64 = ds.disputers(v).iter().map(cube).sum();
        let sources = ds.item_sources(ds.value_item(v));
        let norm: f64 = sources.iter().map(|s| cube(s).abs()).sum();
        let signed: f64 = sources.iter().map(cube).sum();
        if norm != 0.0 {
            *c = (pos - neg) / norm;
            if signed < 0.0 {
                *c = -*c;
            }
        }
    }
}

pub fn run_cosine(ds: &IndexedDataset, p: &CosineParams) -> Result<Outcome> {
    if !(p.eta > 0.0 && p.eta <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "eta={} not in (0,1]",
            p.eta
        )));
    }
    let mut trust = initial_trust(ds);
    let mut conf = vec![1.0; ds.n_values()];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < p.max_iterations {
        iterations += 1;
        let prev = trust.clone();
        update_trust(ds, p.eta, &conf, &mut trust);
        update_confidence(ds, &trust, &mut conf);
        check_finite("Cosine", "source trust", &trust)?;
        check_finite("Cosine", "value confidence", &conf)?;
        converged = has_converged(&prev, &trust, p.delta);
        if converged {
            break;
        }
    }
    let selection = select_from_scores(&conf, ds, SelectionMode::Argmax);
    Ok(Outcome {
        state: TrustState::new(trust, conf, iterations),
        selection,
        iterations,
        converged,
    })
}
