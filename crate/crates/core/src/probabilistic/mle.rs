use serde::{Deserialize, Serialize};

use crate::algorithm::Outcome;
use crate::convergence::{has_converged, DEFAULT_DELTA, MAX_ITERATIONS};
use crate::error::{Error, Result};
use crate::model::IndexedDataset;
use crate::state::{select_from_scores, SelectionMode, TrustState};

/// Above this many sources the direct-space products collapse to 0/0.
pub const MAX_DIRECT_SOURCES: usize = 5000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MleParams {
    pub beta1: f64,
    pub r: f64,
    pub delta: f64,
    pub max_iterations: usize,
    /// Evaluate the E-step in log space and lift the source-count guard.
    pub log_space: bool,
}

impl Default for MleParams {
    fn default() -> Self {
        MleParams {
            beta1: 0.5,
            r: 0.5,
            delta: DEFAULT_DELTA,
            max_iterations: MAX_ITERATIONS,
            log_space: false,
        }
    }
}

/// Per-source reporting probabilities: `a` when the value is true, `b` when false.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Rates {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

pub(crate) fn initial_rates(ds: &IndexedDataset, p: &MleParams) -> Rates {
    let n = ds.n_values() as f64;
    let (a, b) = (0..ds.n_sources())
        .map(|s| {
            let f = ds.source_values(s).len() as f64 / n;
            (p.r * f / p.beta1, (1.0 - p.r) * f / (1.0 - p.beta1))
        })
        .unzip();
    Rates { a, b }
}

pub(crate) fn e_step(
    ds: &IndexedDataset,
    rates: &Rates,
    beta1: f64,
    log_space: bool,
) -> Result<Vec<f64>> {
    (0..ds.n_values())
        .map(|v| {
            let c = if log_space {
                let (mut la, mut lb) = (beta1.ln(), (1.0 - beta1).ln());
                for &s in ds.supporters(v) {
                    la += rates.a[s].ln();
                    lb += rates.b[s].ln();
                }
                for &s in ds.disputers(v) {
                    la += (1.0 - rates.a[s]).ln();
                    lb += (1.0 - rates.b[s]).ln();
                }
                1.0 / (1.0 + (lb - la).exp())
            } else {
                let (mut av, mut bv) = (1.0, 1.0);
                for &s in ds.supporters(v) {
                    av *= rates.a[s];
                    bv *= rates.b[s];
                }
                for &s in ds.disputers(v) {
                    av *= 1.0 - rates.a[s];
                    bv *= 1.0 - rates.b[s];
                }
                av * beta1 / (av * beta1 + bv * (1.0 - beta1))
            };
            if c.is_nan() {
                Err(Error::numeric(
                    "MLE",
                    format!("confidence of value {v} is NaN"),
                ))
            } else {
                Ok(c)
            }
        })
        .collect()
}

fn m_step(ds: &IndexedDataset, conf: &[f64]) -> Result<Rates> {
    let n = ds.n_values() as f64;
    let c_sum: f64 = conf.iter().sum();
    let (a, b): (Vec<f64>, Vec<f64>) = (0..ds.n_sources())
        .map(|s| {
            let vs = ds.source_values(s);
            let c_s: f64 = vs.iter().map(|&v| conf[v]).sum();
            (c_s / c_sum, (vs.len() as f64 - c_s) / (n - c_sum))
        })
        .unzip();
    if a.iter().chain(&b).any(|x| x.is_nan()) {
        return Err(Error::numeric("MLE", "source rates became NaN"));
    }
    Ok(Rates { a, b })
}

fn concat(r: &Rates) -> Vec<f64> {
    r.a.iter().chain(&r.b).copied().collect()
}

/// Expects Boolean positive observations; see the harness reformatter.
pub fn run_mle(ds: &IndexedDataset, p: &MleParams) -> Result<Outcome> {
    if !(p.beta1 > 0.0 && p.beta1 < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "beta1={} not in (0,1)",
            p.beta1
        )));
    }
    if !(0.0..=1.0).contains(&p.r) {
        return Err(Error::InvalidParameter(format!("r={} not in [0,1]", p.r)));
    }
    if ds.n_sources() > MAX_DIRECT_SOURCES && !p.log_space {
        return Err(Error::SourceCountExceeded(ds.n_sources()));
    }
    let mut rates = initial_rates(ds, p);
    let mut conf = vec![0.0; ds.n_values()];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < p.max_iterations {
        iterations += 1;
        conf = e_step(ds, &rates, p.beta1, p.log_space)?;
        let next = m_step(ds, &conf)?;
        converged = has_converged(&concat(&rates), &concat(&next), p.delta);
        rates = next;
        if converged {
            break;
        }
    }
    let trust = rates
        .a
        .iter()
        .zip(&rates.b)
        .map(|(a, b)| a * p.beta1 / (a * p.beta1 + b * (1.0 - p.beta1)))
        .collect();
    let selection = select_from_scores(&conf, ds, SelectionMode::Threshold(0.5));
    Ok(Outcome {
        state: TrustState::new(trust, conf, iterations),
        selection,
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Claim;
    use approx::assert_abs_diff_eq;

    fn one() -> IndexedDataset {
        IndexedDataset::new(vec![Claim::new("1", "s", "d", "true")]).unwrap()
    }

    #[test]
    fn e_step_substitution() {
        let rates = Rates {
            a: vec![0.6],
            b: vec![0.2],
        };
        let c = e_step(&one(), &rates, 0.5, false).unwrap();
        assert_abs_diff_eq!(c[0], 0.75, epsilon = 1e-12);
        let c = e_step(&one(), &rates, 0.5, true).unwrap();
        assert_abs_diff_eq!(c[0], 0.75, epsilon = 1e-12);
    }

    #[test]
    fn equal_rates_give_prior() {
        let rates = Rates {
            a: vec![0.3],
            b: vec![0.3],
        };
        let c = e_step(&one(), &rates, 0.7, false).unwrap();
        assert_abs_diff_eq!(c[0], 0.7, epsilon = 1e-12);
    }

    #[test]
    fn symmetric_defaults_start_equal() {
        let ds = IndexedDataset::new(vec![
            Claim::new("1", "a", "d1", "true"),
            Claim::new("2", "a", "d2", "true"),
            Claim::new("3", "b", "d1", "true"),
        ])
        .unwrap();
        let r = initial_rates(&ds, &MleParams::default());
        assert_eq!(r.a, r.b);
        // |V| = 2: a holds both values, b one of them
        assert_abs_diff_eq!(r.a[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.a[1], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn source_guard() {
        let claims = (0..MAX_DIRECT_SOURCES + 1)
            .map(|s| Claim::new(format!("c{s}"), format!("s{s}"), "d", "true"))
            .collect();
        let ds = IndexedDataset::new(claims).unwrap();
        assert!(matches!(
            run_mle(&ds, &MleParams::default()),
            Err(Error::SourceCountExceeded(_))
        ));
    }

    #[test]
    fn asymmetric_prior_separates_values() {
        let ds = IndexedDataset::new(vec![
            Claim::new("1", "a", "d1", "true"),
            Claim::new("2", "b", "d1", "true"),
            Claim::new("3", "c", "d1", "true"),
            Claim::new("4", "a", "d2", "true"),
            Claim::new("5", "c", "d3", "true"),
        ])
        .unwrap();
        let p = MleParams {
            r: 0.7,
            ..Default::default()
        };
        let out = run_mle(&ds, &p).unwrap();
        let c = &out.state.value_confidence;
        assert!(c[0] > c[1] && c[0] > c[2]);
        for x in c {
            assert!((0.0..=1.0).contains(x));
        }
    }
}
