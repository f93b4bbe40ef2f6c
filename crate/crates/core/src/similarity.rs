use serde::{Deserialize, Serialize};

/// Value-similarity kernel used by TruthFinder and AccuSim.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Similarity {
    /// 1 iff the two values are equal.
    #[default]
    ExactMatch,
    /// 1 - normalized Levenshtein distance.
    Levenshtein,
    /// exp(-|a - b| / scale) for numeric values; non-numeric pairs fall back
    /// to exact match.
    Numeric { scale: f64 },
}

impl Similarity {
    pub fn sim(&self, a: &str, b: &str) -> f64 {
        match *self {
            Similarity::ExactMatch => f64::from(u8::from(a == b)),
            Similarity::Levenshtein => strsim::normalized_levenshtein(a, b),
            Similarity::Numeric { scale } => match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(x), Ok(y)) => (-(x - y).abs() / scale).exp(),
                _ => f64::from(u8::from(a == b)),
            },
        }
    }

    /// Distinct values of one item never interact under exact match.
    pub fn is_trivial(&self) -> bool {
        matches!(self, Similarity::ExactMatch)
    }
}
