//! The common run interface over all thirteen methods.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::agreement::{self, CosineParams, EstimatesParams, TruthFinderParams};
use crate::dependence::{self, DepenParams, DepenVariant};
use crate::error::{Error, Result};
use crate::model::IndexedDataset;
use crate::probabilistic::{self, LcaParams, LtmParams, MleParams};
use crate::state::{Selection, TrustState};

/// Result of one algorithm run.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub state: TrustState,
    pub selection: Selection,
    pub iterations: usize,
    /// False when the iteration cap stopped the run.
    pub converged: bool,
}

/// Names of the supported methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AlgorithmId {
    MajorityVoting,
    TruthFinder,
    Cosine,
    TwoEstimates,
    ThreeEstimates,
    Ltm,
    Mle,
    Depen,
    Accu,
    AccuSim,
    AccuNoDep,
    SimpleLca,
    GuessLca,
}

impl AlgorithmId {
    pub const ALL: [AlgorithmId; 13] = [
        AlgorithmId::MajorityVoting,
        AlgorithmId::TruthFinder,
        AlgorithmId::Cosine,
        AlgorithmId::TwoEstimates,
        AlgorithmId::ThreeEstimates,
        AlgorithmId::Ltm,
        AlgorithmId::Mle,
        AlgorithmId::Depen,
        AlgorithmId::Accu,
        AlgorithmId::AccuSim,
        AlgorithmId::AccuNoDep,
        AlgorithmId::SimpleLca,
        AlgorithmId::GuessLca,
    ];

    /// Everything except the majority-voting baseline.
    pub fn iterative() -> impl Iterator<Item = AlgorithmId> {
        Self::ALL.into_iter().skip(1)
    }

    pub fn name(self) -> &'static str {
        match self {
            AlgorithmId::MajorityVoting => "MajorityVoting",
            AlgorithmId::TruthFinder => "TruthFinder",
            AlgorithmId::Cosine => "Cosine",
            AlgorithmId::TwoEstimates => "2-Estimates",
            AlgorithmId::ThreeEstimates => "3-Estimates",
            AlgorithmId::Ltm => "LTM",
            AlgorithmId::Mle => "MLE",
            AlgorithmId::Depen => "Depen",
            AlgorithmId::Accu => "Accu",
            AlgorithmId::AccuSim => "AccuSim",
            AlgorithmId::AccuNoDep => "AccuNoDep",
            AlgorithmId::SimpleLca => "SimpleLCA",
            AlgorithmId::GuessLca => "GuessLCA",
        }
    }

    /// Only LTM draws random numbers.
    pub fn is_stochastic(self) -> bool {
        self == AlgorithmId::Ltm
    }

    pub fn default_algorithm(self) -> Algorithm {
        match self {
            AlgorithmId::MajorityVoting => Algorithm::MajorityVoting,
            AlgorithmId::TruthFinder => Algorithm::TruthFinder(Default::default()),
            AlgorithmId::Cosine => Algorithm::Cosine(Default::default()),
            AlgorithmId::TwoEstimates => Algorithm::TwoEstimates(EstimatesParams::two()),
            AlgorithmId::ThreeEstimates => Algorithm::ThreeEstimates(EstimatesParams::three()),
            AlgorithmId::Ltm => Algorithm::Ltm(Default::default()),
            AlgorithmId::Mle => Algorithm::Mle(Default::default()),
            AlgorithmId::Depen => Algorithm::Depen(DepenParams::for_variant(DepenVariant::Depen)),
            AlgorithmId::Accu => Algorithm::Depen(DepenParams::for_variant(DepenVariant::Accu)),
            AlgorithmId::AccuSim => {
                Algorithm::Depen(DepenParams::for_variant(DepenVariant::AccuSim))
            }
            AlgorithmId::AccuNoDep => {
                Algorithm::Depen(DepenParams::for_variant(DepenVariant::AccuNoDep))
            }
            AlgorithmId::SimpleLca => Algorithm::SimpleLca(Default::default()),
            AlgorithmId::GuessLca => Algorithm::GuessLca(Default::default()),
        }
    }
}

impl fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AlgorithmId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        let id = match key.as_str() {
            "majorityvoting" | "voting" => AlgorithmId::MajorityVoting,
            "truthfinder" => AlgorithmId::TruthFinder,
            "cosine" => AlgorithmId::Cosine,
            "2estimates" | "twoestimates" => AlgorithmId::TwoEstimates,
            "3estimates" | "threeestimates" => AlgorithmId::ThreeEstimates,
            "ltm" => AlgorithmId::Ltm,
            "mle" => AlgorithmId::Mle,
            "depen" => AlgorithmId::Depen,
            "accu" => AlgorithmId::Accu,
            "accusim" => AlgorithmId::AccuSim,
            "accunodep" => AlgorithmId::AccuNoDep,
            "simplelca" => AlgorithmId::SimpleLca,
            "guesslca" => AlgorithmId::GuessLca,
            _ => return Err(Error::InvalidParameter(format!("unknown algorithm `{s}`"))),
        };
        Ok(id)
    }
}

/// A method together with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Algorithm {
    MajorityVoting,
    TruthFinder(TruthFinderParams),
    Cosine(CosineParams),
    TwoEstimates(EstimatesParams),
    ThreeEstimates(EstimatesParams),
    Ltm(LtmParams),
    Mle(MleParams),
    Depen(DepenParams),
    SimpleLca(LcaParams),
    GuessLca(LcaParams),
}

impl Algorithm {
    pub fn id(&self) -> AlgorithmId {
        match self {
            Algorithm::MajorityVoting => AlgorithmId::MajorityVoting,
            Algorithm::TruthFinder(_) => AlgorithmId::TruthFinder,
            Algorithm::Cosine(_) => AlgorithmId::Cosine,
            Algorithm::TwoEstimates(_) => AlgorithmId::TwoEstimates,
            Algorithm::ThreeEstimates(_) => AlgorithmId::ThreeEstimates,
            Algorithm::Ltm(_) => AlgorithmId::Ltm,
            Algorithm::Mle(_) => AlgorithmId::Mle,
            Algorithm::Depen(p) => match p.variant {
                DepenVariant::Depen => AlgorithmId::Depen,
                DepenVariant::Accu => AlgorithmId::Accu,
                DepenVariant::AccuSim => AlgorithmId::AccuSim,
                DepenVariant::AccuNoDep => AlgorithmId::AccuNoDep,
            },
            Algorithm::SimpleLca(_) => AlgorithmId::SimpleLca,
            Algorithm::GuessLca(_) => AlgorithmId::GuessLca,
        }
    }

    /// Runs the method once. LTM uses its configured seed.
    pub fn run(&self, ds: &IndexedDataset) -> Result<Outcome> {
        match self {
            Algorithm::MajorityVoting => Ok(agreement::run_voting(ds)),
            Algorithm::TruthFinder(p) => agreement::run_truthfinder(ds, p),
            Algorithm::Cosine(p) => agreement::run_cosine(ds, p),
            Algorithm::TwoEstimates(p) => agreement::run_2estimates(ds, p),
            Algorithm::ThreeEstimates(p) => agreement::run_3estimates(ds, p),
            Algorithm::Ltm(p) => probabilistic::run_ltm(ds, p),
            Algorithm::Mle(p) => probabilistic::run_mle(ds, p),
            Algorithm::Depen(p) => dependence::run_depen_family(ds, p),
            Algorithm::SimpleLca(p) => probabilistic::run_simple_lca(ds, p),
            Algorithm::GuessLca(p) => probabilistic::run_guess_lca(ds, p),
        }
    }

    /// Caps the number of iterations for iterative methods.
    pub fn set_max_iterations(&mut self, cap: usize) {
        match self {
            Algorithm::MajorityVoting | Algorithm::Ltm(_) => {}
            Algorithm::TruthFinder(p) => p.max_iterations = cap,
            Algorithm::Cosine(p) => p.max_iterations = cap,
            Algorithm::TwoEstimates(p) | Algorithm::ThreeEstimates(p) => p.max_iterations = cap,
            Algorithm::Mle(p) => p.max_iterations = cap,
            Algorithm::Depen(p) => p.max_iterations = cap,
            Algorithm::SimpleLca(p) | Algorithm::GuessLca(p) => p.max_iterations = cap,
        }
    }

    /// Overrides the convergence threshold where one applies.
    pub fn set_delta(&mut self, delta: f64) {
        match self {
            Algorithm::MajorityVoting | Algorithm::Ltm(_) => {}
            Algorithm::TruthFinder(p) => p.delta = delta,
            Algorithm::Cosine(p) => p.delta = delta,
            Algorithm::TwoEstimates(p) | Algorithm::ThreeEstimates(p) => p.delta = delta,
            Algorithm::Mle(p) => p.delta = delta,
            Algorithm::Depen(p) => p.delta = delta,
            Algorithm::SimpleLca(p) | Algorithm::GuessLca(p) => p.delta = delta,
        }
    }

    /// Short human-readable parameter string for reports.
    pub fn param_digest(&self) -> String {
        match self {
            Algorithm::MajorityVoting => String::new(),
            Algorithm::TruthFinder(p) => format!(
                "rho={} gamma={} t0={} delta={}",
                p.rho, p.gamma, p.t0, p.delta
            ),
            Algorithm::Cosine(p) => format!("eta={} delta={}", p.eta, p.delta),
            Algorithm::TwoEstimates(p) => {
                format!("lambda={} t0={} delta={}", p.lambda, p.t0, p.delta)
            }
            Algorithm::ThreeEstimates(p) => format!(
                "lambda={} t0={} eps0={} delta={}",
                p.lambda, p.t0, p.eps0, p.delta
            ),
            Algorithm::Ltm(p) => format!(
                "k={} burnin={} thin={} alpha={:?} beta={:?} seed={}",
                p.k, p.burnin, p.thin, p.alpha, p.beta, p.seed
            ),
            Algorithm::Mle(p) => format!("beta1={} r={} delta={}", p.beta1, p.r, p.delta),
            Algorithm::Depen(p) => format!(
                "alpha={} c={} n={} t0={} rho={} delta={}",
                p.alpha, p.c, p.n, p.t0, p.rho, p.delta
            ),
            Algorithm::SimpleLca(p) | Algorithm::GuessLca(p) => {
                format!("beta1={} t0={} delta={}", p.beta1, p.t0, p.delta)
            }
        }
    }
}

/// Keeps a trust score away from 0 and 1 wherever ln(1 - T) or 1/T appears.
pub(crate) fn clamp_trust(t: f64) -> f64 {
    const EPS: f64 = 1e-9;
    t.clamp(EPS, 1.0 - EPS)
}

pub(crate) fn check_finite(name: &'static str, what: &str, xs: &[f64]) -> Result<()> {
    match xs.iter().position(|x| !x.is_finite()) {
        None => Ok(()),
        Some(i) => Err(Error::numeric(
            name,
            format!("non-finite {what} at index {i}"),
        )),
    }
}
