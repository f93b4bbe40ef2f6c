use std::io::Write;

use rayon::prelude::*;

use crate::error::Result;
use crate::model::{IndexedDataset, ItemIdx, SourceIdx, ValueIdx};

/// Agreement statistics of two sources over the items both cover.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Overlap {
    /// Both give the current true value.
    pub k_t: u32,
    /// Both give the same false value.
    pub k_f: u32,
    /// They give different values.
    pub k_d: u32,
}

/// Posterior probability that two sources are dependent, given their
/// overlap, the prior `alpha`, copy probability `c`, the number `n` of
/// false values per item and source accuracy `accuracy`.
///
/// Per-item likelihoods, independent vs copying:
/// same true  A^2            vs A c + A^2 (1 - c)
/// same false (1-A)^2 / n    vs (1-A) c + (1-A)^2 (1 - c) / n
/// different  P_d            vs P_d (1 - c)
pub fn comp_depen(o: Overlap, alpha: f64, c: f64, n: f64, accuracy: f64) -> f64 {
    let a = accuracy.clamp(1e-9, 1.0 - 1e-9);
    let shared_true = (a / (c + a * (1.0 - c))).ln();
    let f = 1.0 - a;
    let shared_false = ((f * f / n) / (f * c + f * f * (1.0 - c) / n)).ln();
    let differ = (1.0 / (1.0 - c)).ln();
    let evidence = f64::from(o.k_t) * shared_true
        + f64::from(o.k_f) * shared_false
        + f64::from(o.k_d) * differ;
    let logit = (alpha / (1.0 - alpha)).ln() - evidence;
    1.0 / (1.0 + (-logit).exp())
}

/// Item-sorted (item, value) pairs per source.
pub(crate) fn source_claims(ds: &IndexedDataset) -> Vec<Vec<(ItemIdx, ValueIdx)>> {
    (0..ds.n_sources())
        .map(|s| {
            let mut pairs: Vec<_> = ds
                .source_values(s)
                .iter()
                .map(|&v| (ds.value_item(v), v))
                .collect();
            pairs.sort_unstable();
            pairs
        })
        .collect()
}

/// Merge-join of two sources' claims. A source with several values on one
/// item shares with the other if any value matches.
pub(crate) fn overlap(
    a: &[(ItemIdx, ValueIdx)],
    b: &[(ItemIdx, ValueIdx)],
    truth: &[ValueIdx],
) -> Overlap {
    let mut o = Overlap::default();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let (da, db) = (a[i].0, b[j].0);
        if da < db {
            i += 1;
        } else if db < da {
            j += 1;
        } else {
            let ie = a[i..].iter().take_while(|p| p.0 == da).count() + i;
            let je = b[j..].iter().take_while(|p| p.0 == da).count() + j;
            let shared = a[i..ie]
                .iter()
                .find(|p| b[j..je].iter().any(|q| q.1 == p.1));
            match shared {
                Some(&(_, v)) if v == truth[da] => o.k_t += 1,
                Some(_) => {
                    if a[i..ie].iter().any(|p| p.1 == truth[da])
                        && b[j..je].iter().any(|q| q.1 == truth[da])
                    {
                        o.k_t += 1;
                    } else {
                        o.k_f += 1;
                    }
                }
                None => o.k_d += 1,
            }
            i = ie;
            j = je;
        }
    }
    o
}

/// Symmetric pairwise dependence probabilities; the diagonal is unused.
#[derive(Debug, Clone, PartialEq)]
pub struct DependenceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DependenceMatrix {
    pub fn zeros(n: usize) -> Self {
        DependenceMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn n_sources(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: SourceIdx, j: SourceIdx) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: SourceIdx, j: SourceIdx, p: f64) {
        self.data[i * self.n + j] = p;
        self.data[j * self.n + i] = p;
    }

    /// Upper-triangle rows are filled in parallel, then mirrored; every
    /// entry depends only on its pair.
    pub(crate) fn compute(
        claims: &[Vec<(ItemIdx, ValueIdx)>],
        truth: &[ValueIdx],
        prob: impl Fn(SourceIdx, SourceIdx, Overlap) -> f64 + Sync,
    ) -> Self {
        let n = claims.len();
        let mut data = vec![0.0; n * n];
        data.par_chunks_mut(n.max(1))
            .enumerate()
            .for_each(|(i, row)| {
                for (j, cell) in row.iter_mut().enumerate().skip(i + 1) {
                    *cell = prob(i, j, overlap(&claims[i], &claims[j], truth));
                }
            });
        for i in 0..n {
            for j in 0..i {
                data[i * n + j] = data[j * n + i];
            }
        }
        DependenceMatrix { n, data }
    }

    /// CSV with header `source_i,source_j,probability`, upper triangle only.
    pub fn write_csv<W: Write>(&self, ds: &IndexedDataset, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["source_i", "source_j", "probability"])?;
        for i in 0..self.n {
            for j in i + 1..self.n {
                w.write_record([
                    ds.source_name(i),
                    ds.source_name(j),
                    &self.get(i, j).to_string(),
                ])?;
            }
        }
        w.flush()
            .map_err(|e| crate::error::Error::io("<dependence matrix>", e))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Claim;
    use approx::assert_abs_diff_eq;

    /// Direct-space posterior, written independently of the log form.
    fn oracle(o: Overlap, alpha: f64, c: f64, n: f64, a: f64) -> f64 {
        let pd = 1.0 - a * a - (1.0 - a) * (1.0 - a) / n;
        let ind = (a * a).powi(o.k_t as i32)
            * ((1.0 - a).powi(2) / n).powi(o.k_f as i32)
            * pd.powi(o.k_d as i32);
        let dep = (a * c + a * a * (1.0 - c)).powi(o.k_t as i32)
            * ((1.0 - a) * c + (1.0 - a).powi(2) * (1.0 - c) / n).powi(o.k_f as i32)
            * (pd * (1.0 - c)).powi(o.k_d as i32);
        alpha * dep / (alpha * dep + (1.0 - alpha) * ind)
    }

    #[test]
    fn no_overlap_is_prior() {
        assert_abs_diff_eq!(
            comp_depen(Overlap::default(), 0.2, 0.8, 100.0, 0.8),
            0.2,
            epsilon = 1e-12
        );
    }

    #[test]
    fn matches_direct_oracle() {
        for k_t in 0..6 {
            for k_f in 0..4 {
                for k_d in 0..4 {
                    let o = Overlap { k_t, k_f, k_d };
                    for &(c, a) in &[(0.8, 0.8), (0.1, 0.6), (0.05, 0.95)] {
                        let got = comp_depen(o, 0.2, c, 100.0, a);
                        assert_abs_diff_eq!(got, oracle(o, 0.2, c, 100.0, a), epsilon = 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn shared_errors_raise_dependence() {
        let mut last = 0.0;
        for k_f in 0..30 {
            let p = comp_depen(
                Overlap {
                    k_t: 5,
                    k_f,
                    k_d: 3,
                },
                0.2,
                0.8,
                100.0,
                0.8,
            );
            assert!(p >= last);
            last = p;
        }
        let identical = comp_depen(
            Overlap {
                k_t: 80,
                k_f: 20,
                k_d: 0,
            },
            0.2,
            0.8,
            100.0,
            0.8,
        );
        assert!(identical > 0.99);
    }

    #[test]
    fn overlap_counts() {
        let ds = IndexedDataset::new(vec![
            Claim::new("1", "a", "d1", "x"),
            Claim::new("2", "b", "d1", "x"),
            Claim::new("3", "a", "d2", "p"),
            Claim::new("4", "b", "d2", "p"),
            Claim::new("5", "c", "d2", "q"),
            Claim::new("6", "c", "d2", "q2"),
            Claim::new("7", "a", "d3", "u"),
            Claim::new("8", "b", "d3", "w"),
            Claim::new("9", "b", "d4", "z"),
        ])
        .unwrap();
        let claims = source_claims(&ds);
        // truth: x on d1, q on d2, u on d3, z on d4
        let truth: Vec<_> = [("d1", "x"), ("d2", "q"), ("d3", "u"), ("d4", "z")]
            .iter()
            .map(|(d, v)| ds.value_index(ds.item_index(d).unwrap(), v).unwrap())
            .collect();
        let mut truth_by_item = vec![0; ds.n_items()];
        for (k, d) in ["d1", "d2", "d3", "d4"].iter().enumerate() {
            truth_by_item[ds.item_index(d).unwrap()] = truth[k];
        }
        let o = overlap(&claims[0], &claims[1], &truth_by_item);
        assert_eq!(
            o,
            Overlap {
                k_t: 1,
                k_f: 1,
                k_d: 1
            }
        );
        let m = DependenceMatrix::compute(&claims, &truth_by_item, |_, _, o| f64::from(o.k_d));
        assert_eq!(m.get(0, 1), m.get(1, 0));
        assert_eq!(m.get(0, 2), 1.0);
    }
}
