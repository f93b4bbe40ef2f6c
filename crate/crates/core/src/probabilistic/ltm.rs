use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithm::Outcome;
use crate::error::{Error, Result};
use crate::model::{IndexedDataset, ValueIdx};
use crate::state::{select_from_scores, SelectionMode, TrustState};

/// Separator marking a list value that must be split before LTM can run.
pub const LIST_SEPARATOR: char = '|';

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LtmParams {
    pub k: usize,
    pub burnin: usize,
    pub thin: usize,
    /// (a11, a10, a01, a00), indexed [truth][observed].
    pub alpha: (f64, f64, f64, f64),
    /// (b1, b0).
    pub beta: (f64, f64),
    pub seed: u64,
    pub runs: usize,
}

impl Default for LtmParams {
    fn default() -> Self {
        LtmParams {
            k: 500,
            burnin: 100,
            thin: 9,
            alpha: (0.9, 0.1, 0.9, 0.1),
            beta: (0.1, 0.1),
            seed: 0,
            runs: 100,
        }
    }
}

impl LtmParams {
    fn validate(&self) -> Result<()> {
        if self.k <= self.burnin {
            return Err(Error::InvalidParameter(format!(
                "k={} must exceed burnin={}",
                self.k, self.burnin
            )));
        }
        if self.thin == 0 {
            return Err(Error::InvalidParameter("thin must be >= 1".into()));
        }
        let (a, b) = (self.alpha, self.beta);
        if [a.0, a.1, a.2, a.3, b.0, b.1]
            .iter()
            .any(|x| x.is_nan() || *x <= 0.0)
        {
            return Err(Error::InvalidParameter(
                "alpha and beta must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Number of sweeps whose labels are accumulated into C_v.
    pub fn sample_count(&self) -> usize {
        (self.burnin + 1..=self.k)
            .filter(|i| i % self.thin == 0)
            .count()
    }

    fn alpha_table(&self) -> [[f64; 2]; 2] {
        let a = self.alpha;
        [[a.3, a.2], [a.1, a.0]]
    }

    fn beta_table(&self) -> [f64; 2] {
        [self.beta.1, self.beta.0]
    }
}

/// Running product folded into a log accumulator before it can underflow.
struct LogProduct {
    log: f64,
    prod: f64,
    pending: u32,
}

impl LogProduct {
    fn new(start: f64) -> Self {
        LogProduct {
            log: start.ln(),
            prod: 1.0,
            pending: 0,
        }
    }

    #[inline]
    fn mul(&mut self, x: f64) {
        self.prod *= x;
        self.pending += 1;
        if self.pending == 32 {
            self.log += self.prod.ln();
            self.prod = 1.0;
            self.pending = 0;
        }
    }

    fn ln(&self) -> f64 {
        self.log + self.prod.ln()
    }
}

/// Collapsed Gibbs sampler state for one run.
pub struct LtmSampler<'a> {
    ds: &'a IndexedDataset,
    alpha: [[f64; 2]; 2],
    beta: [f64; 2],
    labels: Vec<u8>,
    /// n[s][t][o]
    counts: Vec<[[u32; 2]; 2]>,
    rng: ChaCha8Rng,
}

impl<'a> LtmSampler<'a> {
    pub fn new(ds: &'a IndexedDataset, p: &LtmParams, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut labels = Vec::with_capacity(ds.n_values());
        let mut counts = vec![[[0u32; 2]; 2]; ds.n_sources()];
        for v in 0..ds.n_values() {
            let t: u8 = if rng.random::<f64>() < 0.5 { 0 } else { 1 };
            labels.push(t);
            for &s in ds.supporters(v) {
                counts[s][t as usize][1] += 1;
            }
            for &s in ds.disputers(v) {
                counts[s][t as usize][0] += 1;
            }
        }
        LtmSampler {
            ds,
            alpha: p.alpha_table(),
            beta: p.beta_table(),
            labels,
            counts,
            rng,
        }
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn counts(&self) -> &[[[u32; 2]; 2]] {
        &self.counts
    }

    fn log_odds(&self, v: ValueIdx) -> (f64, f64) {
        let t = self.labels[v] as usize;
        let tb = 1 - t;
        let a = &self.alpha;
        let mut pt = LogProduct::new(self.beta[t]);
        let mut ptb = LogProduct::new(self.beta[tb]);
        let mut factor = |s: usize, o: usize| {
            let n = &self.counts[s];
            let num = n[t][o] as f64 + a[t][o] - 1.0;
            let den = (n[t][1] + n[t][0]) as f64 + a[t][1] + a[t][0] - 1.0;
            pt.mul(num / den);
            let num = n[tb][o] as f64 + a[tb][o];
            let den = (n[tb][1] + n[tb][0]) as f64 + a[tb][1] + a[tb][0];
            ptb.mul(num / den);
        };
        for &s in self.ds.supporters(v) {
            factor(s, 1);
        }
        for &s in self.ds.disputers(v) {
            factor(s, 0);
        }
        (pt.ln(), ptb.ln())
    }

    fn flip(&mut self, v: ValueIdx) {
        let old = self.labels[v] as usize;
        let new = 1 - old;
        self.labels[v] = new as u8;
        for &s in self.ds.supporters(v) {
            self.counts[s][old][1] -= 1;
            self.counts[s][new][1] += 1;
        }
        for &s in self.ds.disputers(v) {
            self.counts[s][old][0] -= 1;
            self.counts[s][new][0] += 1;
        }
    }

    /// Resamples every label once.
    pub fn sweep(&mut self) {
        for v in 0..self.ds.n_values() {
            let (lt, ltb) = self.log_odds(v);
            // p_tb / (p_t + p_tb)
            let p_flip = 1.0 / (1.0 + (lt - ltb).exp());
            if self.rng.random::<f64>() < p_flip {
                self.flip(v);
            }
        }
    }

    /// Per-source sensitivity (a11-smoothed share of true values claimed).
    fn sensitivity(&self) -> Vec<f64> {
        let a = &self.alpha;
        self.counts
            .iter()
            .map(|n| (n[1][1] as f64 + a[1][1]) / ((n[1][1] + n[1][0]) as f64 + a[1][1] + a[1][0]))
            .collect()
    }
}

/// One seeded sampler run using `p.seed`.
pub fn run_ltm(ds: &IndexedDataset, p: &LtmParams) -> Result<Outcome> {
    run_seeded(ds, p, p.seed)
}

/// `p.runs` independent runs with seeds `seed + r`, in run order.
pub fn run_ltm_repeated(ds: &IndexedDataset, p: &LtmParams) -> Result<Vec<Outcome>> {
    (0..p.runs as u64)
        .into_par_iter()
        .map(|r| run_seeded(ds, p, p.seed.wrapping_add(r)))
        .collect()
}

fn run_seeded(ds: &IndexedDataset, p: &LtmParams, seed: u64) -> Result<Outcome> {
    p.validate()?;
    if let Some(v) = (0..ds.n_values()).find(|&v| ds.value_str(v).contains(LIST_SEPARATOR)) {
        return Err(Error::RequiresReformat(format!(
            "LTM needs atomic values; `{}` on item `{}` is a list",
            ds.value_str(v),
            ds.item_name(ds.value_item(v))
        )));
    }
    let mut sampler = LtmSampler::new(ds, p, seed);
    let mut conf = vec![0.0; ds.n_values()];
    let weight = p.thin as f64 / (p.k - p.burnin) as f64;
    for i in 1..=p.k {
        sampler.sweep();
        if i > p.burnin && i % p.thin == 0 {
            for (c, &t) in conf.iter_mut().zip(sampler.labels()) {
                *c += f64::from(t) * weight;
            }
        }
    }
    let selection = select_from_scores(&conf, ds, SelectionMode::Threshold(0.5));
    Ok(Outcome {
        state: TrustState::new(sampler.sensitivity(), conf, p.k),
        selection,
        iterations: p.k,
        converged: true,
    })
}
