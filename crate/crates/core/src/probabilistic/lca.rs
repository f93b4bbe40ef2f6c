//! SimpleLCA and GuessLCA. E-steps run in log space with a per-item
//! log-sum-exp normalization.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::algorithm::{check_finite, clamp_trust, Outcome};
use crate::convergence::{has_converged, DEFAULT_DELTA, MAX_ITERATIONS};
use crate::error::{Error, Result};
use crate::model::{IndexedDataset, ItemIdx, SourceIdx};
use crate::state::{select_from_scores, SelectionMode, TrustState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LcaParams {
    pub beta1: f64,
    pub t0: f64,
    /// Certainty w[source][item]; pairs not listed default to 1.
    pub certainty: BTreeMap<String, BTreeMap<String, f64>>,
    pub delta: f64,
    pub max_iterations: usize,
}

impl Default for LcaParams {
    fn default() -> Self {
        LcaParams {
            beta1: 0.5,
            t0: 0.8,
            certainty: BTreeMap::new(),
            delta: DEFAULT_DELTA,
            max_iterations: MAX_ITERATIONS,
        }
    }
}

/// Resolved certainty weights.
#[derive(Debug, Clone, Default)]
pub struct Weights {
    overrides: HashMap<(SourceIdx, ItemIdx), f64>,
}

impl Weights {
    pub fn resolve(ds: &IndexedDataset, p: &LcaParams) -> Result<Self> {
        let mut overrides = HashMap::new();
        for (source, items) in &p.certainty {
            let Some(s) = ds.source_index(source) else {
                continue;
            };
            for (item, &w) in items {
                if !(0.0..=1.0).contains(&w) {
                    return Err(Error::InvalidParameter(format!(
                        "certainty {w} for ({source}, {item}) not in [0,1]"
                    )));
                }
                if let Some(d) = ds.item_index(item) {
                    overrides.insert((s, d), w);
                }
            }
        }
        Ok(Weights { overrides })
    }

    #[inline]
    pub fn get(&self, s: SourceIdx, d: ItemIdx) -> f64 {
        if self.overrides.is_empty() {
            1.0
        } else {
            self.overrides.get(&(s, d)).copied().unwrap_or(1.0)
        }
    }
}

/// p_g = |S_v| / |S_d|.
pub fn guess_probabilities(ds: &IndexedDataset) -> Vec<f64> {
    (0..ds.n_values())
        .map(|v| ds.supporters(v).len() as f64 / ds.item_sources(ds.value_item(v)).len() as f64)
        .collect()
}

#[inline]
fn weighted_ln(w: f64, x: f64) -> f64 {
    if w == 0.0 {
        0.0
    } else {
        w * x.ln()
    }
}

/// Item-normalized value confidences. `guess` of `None` is SimpleLCA.
pub fn e_step(
    ds: &IndexedDataset,
    trust: &[f64],
    beta1: f64,
    weights: &Weights,
    guess: Option<&[f64]>,
) -> Vec<f64> {
    let mut conf = vec![0.0; ds.n_values()];
    let mut logs = Vec::new();
    for d in 0..ds.n_items() {
        let range = ds.item_values(d);
        let n_vals = range.len() as f64;
        logs.clear();
        for v in range.clone() {
            let mut l = beta1.ln();
            for &s in ds.supporters(v) {
                let t = clamp_trust(trust[s]);
                let f = match guess {
                    None => t,
                    Some(pg) => t + (1.0 - t) * pg[v],
                };
                l += weighted_ln(weights.get(s, d), f);
            }
            for &s in ds.disputers(v) {
                let t = clamp_trust(trust[s]);
                let f = match guess {
                    None => (1.0 - t) / (n_vals - 1.0),
                    Some(pg) => (1.0 - t) * pg[v],
                };
                l += weighted_ln(weights.get(s, d), f);
            }
            logs.push(l);
        }
        let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY || max.is_nan() {
            for v in range {
                conf[v] = 1.0 / n_vals;
            }
            continue;
        }
        let total: f64 = logs.iter().map(|l| (l - max).exp()).sum();
        for (v, l) in range.zip(&logs) {
            conf[v] = (l - max).exp() / total;
        }
    }
    conf
}

fn simple_m_step(ds: &IndexedDataset, conf: &[f64], weights: &Weights, trust: &mut [f64]) {
    for (s, t) in trust.iter_mut().enumerate() {
        let num: f64 = ds
            .source_values(s)
            .iter()
            .map(|&v| conf[v] * weights.get(s, ds.value_item(v)))
            .sum();
        let den: f64 = ds.source_items(s).iter().map(|&d| weights.get(s, d)).sum();
        if den > 0.0 {
            *t = num / den;
        }
    }
}

/// T_s = (sum_{V_s} C_v + sum_{V_{D_s}} p_g/(1-p_g) C_v) / sum_{V_{D_s}} C_v w_{s,d},
/// clamped to [0,1]. Terms with p_g = 1 are dropped.
fn guess_m_step(
    ds: &IndexedDataset,
    conf: &[f64],
    pg: &[f64],
    weights: &Weights,
    trust: &mut [f64],
) {
    for (s, t) in trust.iter_mut().enumerate() {
        let own: f64 = ds.source_values(s).iter().map(|&v| conf[v]).sum();
        let (mut odds, mut den) = (0.0, 0.0);
        for v in ds.source_item_values(s) {
            if pg[v] < 1.0 {
                odds += pg[v] / (1.0 - pg[v]) * conf[v];
            }
            den += conf[v] * weights.get(s, ds.value_item(v));
        }
        if den > 0.0 {
            *t = ((own + odds) / den).clamp(0.0, 1.0);
        }
    }
}

fn validate(p: &LcaParams) -> Result<()> {
    if !(p.beta1 > 0.0 && p.beta1 <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "beta1={} not in (0,1]",
            p.beta1
        )));
    }
    if !(0.0..=1.0).contains(&p.t0) {
        return Err(Error::InvalidParameter(format!("t0={} not in [0,1]", p.t0)));
    }
    Ok(())
}

pub fn run_simple_lca(ds: &IndexedDataset, p: &LcaParams) -> Result<Outcome> {
    validate(p)?;
    let weights = Weights::resolve(ds, p)?;
    let mut trust = vec![p.t0; ds.n_sources()];
    let mut conf = vec![0.0; ds.n_values()];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < p.max_iterations {
        iterations += 1;
        conf = e_step(ds, &trust, p.beta1, &weights, None);
        let prev = trust.clone();
        simple_m_step(ds, &conf, &weights, &mut trust);
        check_finite("SimpleLCA", "source trust", &trust)?;
        converged = has_converged(&prev, &trust, p.delta);
        if converged {
            break;
        }
    }
    Ok(finish(ds, trust, conf, iterations, converged))
}

pub fn run_guess_lca(ds: &IndexedDataset, p: &LcaParams) -> Result<Outcome> {
    validate(p)?;
    let weights = Weights::resolve(ds, p)?;
    let pg = guess_probabilities(ds);
    let mut trust = vec![p.t0; ds.n_sources()];
    let mut conf = vec![0.0; ds.n_values()];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < p.max_iterations {
        iterations += 1;
        let next_conf = e_step(ds, &trust, p.beta1, &weights, Some(&pg));
        let prev = trust.clone();
        guess_m_step(ds, &next_conf, &pg, &weights, &mut trust);
        check_finite("GuessLCA", "source trust", &trust)?;
        converged = iterations > 1
            && has_converged(&prev, &trust, p.delta)
            && has_converged(&conf, &next_conf, p.delta);
        conf = next_conf;
        if converged {
            break;
        }
    }
    Ok(finish(ds, trust, conf, iterations, converged))
}

fn finish(
    ds: &IndexedDataset,
    trust: Vec<f64>,
    conf: Vec<f64>,
    iterations: usize,
    converged: bool,
) -> Outcome {
    let selection = select_from_scores(&conf, ds, SelectionMode::Argmax);
    Outcome {
        state: TrustState::new(trust, conf, iterations),
        selection,
        iterations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Claim;
    use approx::assert_abs_diff_eq;

    fn ds(rows: &[(&str, &str, &str)]) -> IndexedDataset {
        IndexedDataset::new(
            rows.iter()
                .enumerate()
                .map(|(i, (s, d, v))| Claim::new(format!("c{i}"), *s, *d, *v))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn simple_e_step_substitution() {
        // s1 (T=.8) claims x, s2 (T=.2) claims y: C_x ∝ .5*.8*.8, C_y ∝ .5*.2*.2
        let data = ds(&[("s1", "d", "x"), ("s2", "d", "y")]);
        let c = e_step(&data, &[0.8, 0.2], 0.5, &Weights::default(), None);
        assert_abs_diff_eq!(c[0], 0.32 / (0.32 + 0.02), epsilon = 1e-12);
        // a T=.5 source weighs both values equally, leaving raw (.4, .1) -> (.8, .2)
        let c = e_step(&data, &[0.8, 0.5], 0.5, &Weights::default(), None);
        assert_abs_diff_eq!(c[0], 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(c[1], 0.2, epsilon = 1e-12);
        // with s2 silent on d, x alone carries no disputer term
        let single = ds(&[("s1", "d", "x"), ("s1", "e", "q"), ("s2", "e", "y")]);
        let c = e_step(&single, &[0.8, 0.8], 0.5, &Weights::default(), None);
        assert_abs_diff_eq!(c[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn guess_probability_ratio() {
        let data = ds(&[
            ("a", "d", "x"),
            ("b", "d", "x"),
            ("c", "d", "x"),
            ("e", "d", "y"),
        ]);
        let pg = guess_probabilities(&data);
        assert_abs_diff_eq!(pg[0], 0.75);
        assert_abs_diff_eq!(pg[1], 0.25);
    }

    #[test]
    fn guess_majority_wins() {
        let data = ds(&[("a", "d", "a"), ("b", "d", "a"), ("c", "d", "b")]);
        let pg = guess_probabilities(&data);
        let c = e_step(&data, &[0.8; 3], 0.5, &Weights::default(), Some(&pg));
        assert!(c[0] > c[1]);
        assert_abs_diff_eq!(c[0] + c[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_weight_leaves_trust() {
        let data = ds(&[("a", "d", "x"), ("b", "d", "y")]);
        let mut p = LcaParams::default();
        p.certainty
            .insert("a".into(), [("d".to_string(), 0.0)].into());
        let w = Weights::resolve(&data, &p).unwrap();
        let mut trust = vec![0.8, 0.8];
        simple_m_step(&data, &[0.5, 0.5], &w, &mut trust);
        assert_eq!(trust[0], 0.8);
        assert_abs_diff_eq!(trust[1], 0.5);
    }

    #[test]
    fn runs_keep_invariants() {
        let data = ds(&[
            ("a", "d1", "x"),
            ("b", "d1", "x"),
            ("c", "d1", "y"),
            ("a", "d2", "p"),
            ("c", "d2", "q"),
        ]);
        for run in [run_simple_lca, run_guess_lca] {
            let out = run(&data, &LcaParams::default()).unwrap();
            for t in &out.state.source_trust {
                assert!((0.0..=1.0).contains(t));
            }
            for d in 0..data.n_items() {
                let sum: f64 = data
                    .item_values(d)
                    .map(|v| out.state.value_confidence[v])
                    .sum();
                assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);
            }
            assert_eq!(data.value_str(out.selection.values(0)[0]), "x");
        }
    }
}
