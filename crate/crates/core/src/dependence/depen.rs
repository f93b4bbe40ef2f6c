use serde::{Deserialize, Serialize};

use super::copy::{comp_depen, source_claims, DependenceMatrix};
use crate::agreement::run_voting;
use crate::algorithm::{check_finite, clamp_trust, Outcome};
use crate::convergence::{has_converged, DEFAULT_DELTA, MAX_ITERATIONS};
use crate::error::{Error, Result};
use crate::model::{IndexedDataset, SourceIdx, ValueIdx};
use crate::similarity::Similarity;
use crate::state::{select_from_scores, SelectionMode, TrustState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DepenVariant {
    Depen,
    Accu,
    AccuSim,
    AccuNoDep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceOrder {
    #[default]
    Lexical,
    ByDependence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepenParams {
    pub variant: DepenVariant,
    /// Prior probability that two sources are dependent.
    pub alpha: f64,
    /// Probability that a copier copies a given value.
    pub c: f64,
    /// Number of false values per item.
    pub n: f64,
    pub t0: f64,
    pub rho: f64,
    pub sim: Similarity,
    pub delta: f64,
    pub max_iterations: usize,
    pub order: SourceOrder,
    /// Compute the dependence matrix from the initial labels only.
    pub compute_once: bool,
}

impl DepenParams {
    pub fn for_variant(variant: DepenVariant) -> Self {
        let c = match variant {
            DepenVariant::Depen | DepenVariant::AccuNoDep => 0.8,
            DepenVariant::Accu => 0.1,
            DepenVariant::AccuSim => 0.05,
        };
        DepenParams {
            variant,
            alpha: 0.2,
            c,
            n: 100.0,
            t0: 0.8,
            rho: 0.5,
            sim: Similarity::ExactMatch,
            delta: DEFAULT_DELTA,
            max_iterations: MAX_ITERATIONS,
            order: SourceOrder::Lexical,
            compute_once: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha={} not in (0,1)",
                self.alpha
            )));
        }
        if !(self.c > 0.0 && self.c < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "c={} not in (0,1)",
                self.c
            )));
        }
        if self.n.is_nan() || self.n <= 0.0 {
            return Err(Error::InvalidParameter(format!("n={} must be > 0", self.n)));
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::InvalidParameter(format!(
                "rho={} not in [0,1]",
                self.rho
            )));
        }
        Ok(())
    }

    fn uses_accuracy(&self) -> bool {
        self.variant != DepenVariant::Depen
    }
}

/// Orders the supporters of one value. Lexical order is index order since
/// sources are indexed by sorted id.
pub fn order_sources(
    supporters: &[SourceIdx],
    mode: SourceOrder,
    dep: &DependenceMatrix,
) -> Vec<SourceIdx> {
    let mut out = supporters.to_vec();
    match mode {
        SourceOrder::Lexical => out.sort_unstable(),
        SourceOrder::ByDependence => {
            let weight = |s: SourceIdx| -> f64 {
                supporters
                    .iter()
                    .filter(|&&o| o != s)
                    .map(|&o| dep.get(s, o))
                    .sum()
            };
            let mut keyed: Vec<(f64, SourceIdx)> = out.iter().map(|&s| (weight(s), s)).collect();
            keyed.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            out = keyed.into_iter().map(|(_, s)| s).collect();
        }
    }
    out
}

/// prod over `pre` of (1 - c * dep(s, s_j)); 1 when `pre` is empty.
pub fn vote_count(s: SourceIdx, pre: &[SourceIdx], c: f64, dep: &DependenceMatrix) -> f64 {
    pre.iter().map(|&o| 1.0 - c * dep.get(s, o)).product()
}

fn t_score(p: &DepenParams, t: f64) -> f64 {
    if p.uses_accuracy() {
        let t = clamp_trust(t);
        (p.n * t / (1.0 - t)).ln()
    } else {
        1.0
    }
}

fn confidence(
    ds: &IndexedDataset,
    p: &DepenParams,
    trust: &[f64],
    dep: Option<&DependenceMatrix>,
) -> Vec<f64> {
    let scores: Vec<f64> = trust.iter().map(|&t| t_score(p, t)).collect();
    let mut conf: Vec<f64> = (0..ds.n_values())
        .map(|v| match dep {
            None => ds.supporters(v).iter().map(|&s| scores[s]).sum(),
            Some(dep) => {
                let ordered = order_sources(ds.supporters(v), p.order, dep);
                ordered
                    .iter()
                    .enumerate()
                    .map(|(k, &s)| scores[s] * vote_count(s, &ordered[..k], p.c, dep))
                    .sum()
            }
        })
        .collect();
    if p.variant == DepenVariant::AccuSim && !p.sim.is_trivial() {
        let base = conf.clone();
        for d in 0..ds.n_items() {
            let range = ds.item_values(d);
            for v in range.clone() {
                conf[v] += p.rho
                    * range
                        .clone()
                        .filter(|&w| w != v)
                        .map(|w| base[w] * p.sim.sim(ds.value_str(w), ds.value_str(v)))
                        .sum::<f64>();
            }
        }
    }
    conf
}

/// Mean over V_s of the within-item softmax of C.
fn update_trust(ds: &IndexedDataset, conf: &[f64]) -> Vec<f64> {
    let mut soft = vec![0.0; ds.n_values()];
    for d in 0..ds.n_items() {
        let range = ds.item_values(d);
        let max = range
            .clone()
            .map(|v| conf[v])
            .fold(f64::NEG_INFINITY, f64::max);
        let total: f64 = range.clone().map(|v| (conf[v] - max).exp()).sum();
        for v in range {
            soft[v] = (conf[v] - max).exp() / total;
        }
    }
    (0..ds.n_sources())
        .map(|s| {
            let vs = ds.source_values(s);
            vs.iter().map(|&v| soft[v]).sum::<f64>() / vs.len() as f64
        })
        .collect()
}

fn labels_of(ds: &IndexedDataset, conf: &[f64]) -> Vec<ValueIdx> {
    let sel = select_from_scores(conf, ds, SelectionMode::Argmax);
    (0..ds.n_items()).map(|d| sel.values(d)[0]).collect()
}

fn dependence(
    claims: &[Vec<(usize, ValueIdx)>],
    labels: &[ValueIdx],
    p: &DepenParams,
    trust: &[f64],
) -> DependenceMatrix {
    DependenceMatrix::compute(claims, labels, |i, j, o| {
        let accuracy = if p.uses_accuracy() {
            (trust[i] + trust[j]) / 2.0
        } else {
            p.t0
        };
        comp_depen(o, p.alpha, p.c, p.n, accuracy)
    })
}

pub fn run_depen_family(ds: &IndexedDataset, p: &DepenParams) -> Result<Outcome> {
    p.validate()?;
    if p.variant == DepenVariant::AccuNoDep {
        return iterate(ds, p, Dependence::None);
    }
    iterate(ds, p, Dependence::Estimated)
}

/// Runs the iteration with a dependence matrix held fixed throughout.
pub fn run_with_fixed_dependence(
    ds: &IndexedDataset,
    p: &DepenParams,
    dep: &DependenceMatrix,
) -> Result<Outcome> {
    p.validate()?;
    if dep.n_sources() != ds.n_sources() {
        return Err(Error::InvalidParameter(format!(
            "dependence matrix covers {} sources, dataset has {}",
            dep.n_sources(),
            ds.n_sources()
        )));
    }
    iterate(ds, p, Dependence::Fixed(dep))
}

enum Dependence<'a> {
    None,
    Fixed(&'a DependenceMatrix),
    Estimated,
}

fn iterate(ds: &IndexedDataset, p: &DepenParams, mode: Dependence<'_>) -> Result<Outcome> {
    let mut trust = vec![p.t0; ds.n_sources()];
    let claims = match mode {
        Dependence::Estimated => source_claims(ds),
        _ => Vec::new(),
    };
    let mut estimated = match mode {
        Dependence::Estimated => {
            let votes = run_voting(ds);
            let labels = labels_of(ds, &votes.state.value_confidence);
            Some(dependence(&claims, &labels, p, &trust))
        }
        _ => None,
    };
    let mut conf = vec![0.0; ds.n_values()];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < p.max_iterations {
        iterations += 1;
        let dep = match mode {
            Dependence::None => None,
            Dependence::Fixed(m) => Some(m),
            Dependence::Estimated => estimated.as_ref(),
        };
        conf = confidence(ds, p, &trust, dep);
        check_finite("Depen", "value confidence", &conf)?;
        let next = update_trust(ds, &conf);
        check_finite("Depen", "source trust", &next)?;
        converged = has_converged(&trust, &next, p.delta);
        trust = next;
        if converged {
            break;
        }
        if matches!(mode, Dependence::Estimated) && !p.compute_once {
            let labels = labels_of(ds, &conf);
            estimated = Some(dependence(&claims, &labels, p, &trust));
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

/// Dependence matrix a run would start from, for inspection dumps.
pub fn initial_dependence(ds: &IndexedDataset, p: &DepenParams) -> DependenceMatrix {
    if p.variant == DepenVariant::AccuNoDep {
        return DependenceMatrix::zeros(ds.n_sources());
    }
    let votes = run_voting(ds);
    let labels = labels_of(ds, &votes.state.value_confidence);
    dependence(&source_claims(ds), &labels, p, &vec![p.t0; ds.n_sources()])
}
