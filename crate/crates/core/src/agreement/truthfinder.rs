use serde::{Deserialize, Serialize};

use crate::algorithm::{check_finite, clamp_trust, Outcome};
use crate::convergence::{has_converged, DEFAULT_DELTA, MAX_ITERATIONS};
use crate::error::{Error, Result};
use crate::model::IndexedDataset;
use crate::similarity::Similarity;
use crate::state::{select_from_scores, SelectionMode, TrustState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TruthFinderParams {
    /// Weight of the support similar values lend each other.
    pub rho: f64,
    /// Dampening factor of the logistic.
    pub gamma: f64,
    pub t0: f64,
    pub delta: f64,
    pub sim: Similarity,
    pub max_iterations: usize,
}

impl Default for TruthFinderParams {
    fn default() -> Self {
        TruthFinderParams {
            rho: 0.5,
            gamma: 0.1,
            t0: 0.8,
            delta: DEFAULT_DELTA,
            sim: Similarity::ExactMatch,
            max_iterations: MAX_ITERATIONS,
        }
    }
}

impl TruthFinderParams {
    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::InvalidParameter(format!(
                "rho={} not in [0,1]",
                self.rho
            )));
        }
        if self.gamma <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "gamma={} must be > 0",
                self.gamma
            )));
        }
        if !(0.0..=1.0).contains(&self.t0) {
            return Err(Error::InvalidParameter(format!(
                "t0={} not in [0,1]",
                self.t0
            )));
        }
        Ok(())
    }
}

/// sigma_v = -sum ln(1 - T_s) over supporters.
fn raw_scores(ds: &IndexedDataset, trust: &[f64], sigma: &mut [f64]) {
    for (v, out) in sigma.iter_mut().enumerate() {
        *out = -ds
            .supporters(v)
            .iter()
            .map(|&s| (1.0 - clamp_trust(trust[s])).ln())
            .sum::<f64>();
    }
}

fn confidence(ds: &IndexedDataset, p: &TruthFinderParams, sigma: &[f64], conf: &mut [f64]) {
    for d in 0..ds.n_items() {
        let range = ds.item_values(d);
        for v in range.clone() {
            let mut adjusted = sigma[v];
            if !p.sim.is_trivial() {
                adjusted += p.rho
                    * range
                        .clone()
                        .filter(|&w| w != v)
                        .map(|w| sigma[w] * p.sim.sim(ds.value_str(v), ds.value_str(w)))
                        .sum::<f64>();
            }
            conf[v] = 1.0 / (1.0 + (-p.gamma * adjusted).exp());
        }
    }
}

pub fn run_truthfinder(ds: &IndexedDataset, p: &TruthFinderParams) -> Result<Outcome> {
    p.validate()?;
    let mut trust = vec![p.t0; ds.n_sources()];
    let mut sigma = vec![0.0; ds.n_values()];
    let mut conf = vec![0.0; ds.n_values()];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < p.max_iterations {
        iterations += 1;
        raw_scores(ds, &trust, &mut sigma);
        confidence(ds, p, &sigma, &mut conf);
        check_finite("TruthFinder", "value confidence", &conf)?;
        let next: Vec<f64> = (0..ds.n_sources())
            .map(|s| {
                let vs = ds.source_values(s);
                vs.iter().map(|&v| conf[v]).sum::<f64>() / vs.len() as f64
            })
            .collect();
        converged = has_converged(&trust, &next, p.delta);
        trust = next;
        if converged {
            break;
        }
    }
    // confidences consistent with the final trust vector
    raw_scores(ds, &trust, &mut sigma);
    confidence(ds, p, &sigma, &mut conf);
    check_finite("TruthFinder", "value confidence", &conf)?;
    let selection = select_from_scores(&conf, ds, SelectionMode::Argmax);
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
    use crate::model::{affiliation_example, Claim};
    use approx::assert_abs_diff_eq;

    #[test]
    fn single_source_single_value() {
        let ds = IndexedDataset::new(vec![Claim::new("1", "s", "d", "x")]).unwrap();
        let p = TruthFinderParams {
            rho: 0.0,
            ..Default::default()
        };
        let mut sigma = vec![0.0];
        raw_scores(&ds, &[0.8], &mut sigma);
        let mut conf = vec![0.0];
        confidence(&ds, &p, &sigma, &mut conf);
        let oracle = 1.0 / (1.0 + (-0.1 * -(0.2f64).ln()).exp());
        assert_abs_diff_eq!(sigma[0], 1.6094, epsilon = 1e-4);
        assert_abs_diff_eq!(conf[0], oracle, epsilon = 1e-12);
        assert_abs_diff_eq!(conf[0], 0.5402, epsilon = 1e-4);
    }

    #[test]
    fn zero_trust_gives_half_confidence() {
        let ds = IndexedDataset::new(vec![
            Claim::new("1", "a", "d", "x"),
            Claim::new("2", "b", "d", "y"),
        ])
        .unwrap();
        let mut sigma = vec![0.0; 2];
        raw_scores(&ds, &[0.0, 0.0], &mut sigma);
        let mut conf = vec![0.0; 2];
        confidence(&ds, &TruthFinderParams::default(), &sigma, &mut conf);
        for c in conf {
            assert_abs_diff_eq!(c, 0.5, epsilon = 1e-8);
        }
    }

    #[test]
    fn affiliation_selection_pattern() {
        let (claims, _) = affiliation_example();
        let ds = IndexedDataset::new(claims).unwrap();
        let out = run_truthfinder(&ds, &TruthFinderParams::default()).unwrap();
        let sel = out.selection.to_map(&ds);
        let picked: Vec<_> = [
            "Stonebraker:AffiliatedTo",
            "Bernstein:AffiliatedTo",
            "Carey:AffiliatedTo",
            "Halevy:AffiliatedTo",
        ]
        .iter()
        .map(|d| sel[*d].iter().next().unwrap().clone())
        .collect();
        assert_eq!(picked, vec!["mit", "at&t", "bea", "msr"]);
        assert!(out.converged);
    }

    #[test]
    fn similarity_lends_support() {
        let ds = IndexedDataset::new(vec![
            Claim::new("1", "a", "d", "10"),
            Claim::new("2", "b", "d", "11"),
            Claim::new("3", "c", "d", "50"),
        ])
        .unwrap();
        let p = TruthFinderParams {
            sim: Similarity::Numeric { scale: 1.0 },
            max_iterations: 1,
            ..Default::default()
        };
        let c = run_truthfinder(&ds, &p).unwrap().state.value_confidence;
        assert!(c[0] > c[2] && c[1] > c[2]);
    }

    #[test]
    fn rejects_bad_params() {
        let ds = IndexedDataset::new(vec![Claim::new("1", "s", "d", "x")]).unwrap();
        let p = TruthFinderParams {
            rho: 2.0,
            ..Default::default()
        };
        assert!(run_truthfinder(&ds, &p).is_err());
    }
}
