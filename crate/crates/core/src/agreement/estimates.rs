use serde::{Deserialize, Serialize};

use super::normalize;
use crate::algorithm::{check_finite, Outcome};
use crate::convergence::{has_converged, DEFAULT_DELTA, MAX_ITERATIONS};
use crate::error::{Error, Result};
use crate::model::IndexedDataset;
use crate::state::{select_from_scores, SelectionMode, TrustState};

/// Which end of the value scores marks a true value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    Argmax,
    Argmin,
}

/// The 2-Estimates value score accumulates (1 - T) from supporters and T
/// from disputers, so it grows with disbelief.
pub const TWO_ESTIMATES_POLARITY: Polarity = Polarity::Argmin;

/// With the error factor interleaved and all three families normalized, the
/// 3-Estimates score ends up oriented the other way.
pub const THREE_ESTIMATES_POLARITY: Polarity = Polarity::Argmax;

impl From<Polarity> for SelectionMode {
    fn from(p: Polarity) -> Self {
        match p {
            Polarity::Argmax => SelectionMode::Argmax,
            Polarity::Argmin => SelectionMode::Argmin,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatesParams {
    pub lambda: f64,
    pub t0: f64,
    /// Initial value error factor; 3-Estimates only.
    pub eps0: f64,
    pub delta: f64,
    pub polarity: Polarity,
    pub max_iterations: usize,
}

/// Defaults to the 2-Estimates polarity; use [`EstimatesParams::three`]
/// for 3-Estimates.
impl Default for EstimatesParams {
    fn default() -> Self {
        EstimatesParams {
            lambda: 0.5,
            t0: 0.8,
            eps0: 0.4,
            delta: DEFAULT_DELTA,
            polarity: TWO_ESTIMATES_POLARITY,
            max_iterations: MAX_ITERATIONS,
        }
    }
}

impl EstimatesParams {
    pub fn two() -> Self {
        Self::default()
    }

    pub fn three() -> Self {
        EstimatesParams {
            polarity: THREE_ESTIMATES_POLARITY,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::InvalidParameter(format!(
                "lambda={} not in [0,1]",
                self.lambda
            )));
        }
        if !self.t0.is_finite() || !self.eps0.is_finite() {
            return Err(Error::InvalidParameter("t0 and eps0 must be finite".into()));
        }
        Ok(())
    }
}

/// Raw value scores before normalization. `eps` of `None` is 2-Estimates.
fn raw_confidence(ds: &IndexedDataset, trust: &[f64], eps: Option<&[f64]>) -> Vec<f64> {
    (0..ds.n_values())
        .map(|v| {
            let e = eps.map_or(1.0, |e| e[v]);
            let pos: f64 = ds.supporters(v).iter().map(|&s| 1.0 - trust[s] * e).sum();
            let neg: f64 = ds.disputers(v).iter().map(|&s| trust[s] * e).sum();
            let n = ds.item_sources(ds.value_item(v)).len() as f64;
            (pos + neg) / n
        })
        .collect()
}

fn raw_trust_2(ds: &IndexedDataset, conf: &[f64]) -> Vec<f64> {
    (0..ds.n_sources())
        .map(|s| {
            let pos: f64 = ds.source_values(s).iter().map(|&v| 1.0 - conf[v]).sum();
            let (mut total, mut count) = (0.0, 0usize);
            for v in ds.source_item_values(s) {
                total += conf[v];
                count += 1;
            }
            let own: f64 = ds.source_values(s).iter().map(|&v| conf[v]).sum();
            (pos + (total - own)) / count as f64
        })
        .collect()
}

/// Error factor update; values whose item has no nonzero-trust source keep
/// their previous raw score.
fn raw_error(ds: &IndexedDataset, trust: &[f64], conf: &[f64], prev: &[f64]) -> Vec<f64> {
    (0..ds.n_values())
        .map(|v| {
            let mut sum = 0.0;
            let mut norm = 0usize;
            for &s in ds.supporters(v) {
                if trust[s] != 0.0 {
                    sum += (1.0 - conf[v]) / trust[s];
                    norm += 1;
                }
            }
            for &s in ds.disputers(v) {
                if trust[s] != 0.0 {
                    sum += conf[v] / trust[s];
                    norm += 1;
                }
            }
            if norm == 0 {
                prev[v]
            } else {
                sum / norm as f64
            }
        })
        .collect()
}

fn raw_trust_3(ds: &IndexedDataset, conf: &[f64], eps: &[f64], prev: &[f64]) -> Vec<f64> {
    (0..ds.n_sources())
        .map(|s| {
            let own = ds.source_values(s);
            let mut sum = 0.0;
            let mut norm = 0usize;
            for v in ds.source_item_values(s) {
                if eps[v] == 0.0 {
                    continue;
                }
                norm += 1;
                sum += if own.binary_search(&v).is_ok() {
                    (1.0 - conf[v]) / eps[v]
                } else {
                    conf[v] / eps[v]
                };
            }
            if norm == 0 {
                prev[s]
            } else {
                sum / norm as f64
            }
        })
        .collect()
}

fn finish(
    ds: &IndexedDataset,
    p: &EstimatesParams,
    trust: Vec<f64>,
    conf: Vec<f64>,
    iterations: usize,
    converged: bool,
) -> Outcome {
    let selection = select_from_scores(&conf, ds, p.polarity.into());
    Outcome {
        state: TrustState::new(trust, conf, iterations),
        selection,
        iterations,
        converged,
    }
}

pub fn run_2estimates(ds: &IndexedDataset, p: &EstimatesParams) -> Result<Outcome> {
    p.validate()?;
    let mut trust = vec![p.t0; ds.n_sources()];
    let mut conf = vec![0.0; ds.n_values()];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < p.max_iterations {
        iterations += 1;
        conf = normalize(&raw_confidence(ds, &trust, None), p.lambda);
        let next = normalize(&raw_trust_2(ds, &conf), p.lambda);
        check_finite("2-Estimates", "source trust", &next)?;
        converged = has_converged(&trust, &next, p.delta);
        trust = next;
        if converged {
            break;
        }
    }
    Ok(finish(ds, p, trust, conf, iterations, converged))
}

pub fn run_3estimates(ds: &IndexedDataset, p: &EstimatesParams) -> Result<Outcome> {
    p.validate()?;
    let mut trust = vec![p.t0; ds.n_sources()];
    let mut eps = vec![p.eps0; ds.n_values()];
    let mut conf = vec![0.0; ds.n_values()];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < p.max_iterations {
        iterations += 1;
        conf = normalize(&raw_confidence(ds, &trust, Some(&eps)), p.lambda);
        eps = normalize(&raw_error(ds, &trust, &conf, &eps), p.lambda);
        let next = normalize(&raw_trust_3(ds, &conf, &eps, &trust), p.lambda);
        check_finite("3-Estimates", "source trust", &next)?;
        converged = has_converged(&trust, &next, p.delta);
        trust = next;
        if converged {
            break;
        }
    }
    Ok(finish(ds, p, trust, conf, iterations, converged))
}
