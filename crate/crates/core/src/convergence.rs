//! The stopping rule shared by every iterative algorithm.

use crate::error::{Error, Result};

/// Default threshold on `1 - cos(prev, curr)`.
pub const DEFAULT_DELTA: f64 = 0.001;

/// Hard cap on iterations for every iterative algorithm.
pub const MAX_ITERATIONS: usize = 500;

pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64> {
    debug_assert_eq!(a.len(), b.len());
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok(dot / (na.sqrt() * nb.sqrt()))
}

/// `1 - cos(prev, curr) <= delta`.
pub fn converged(prev: &[f64], curr: &[f64], delta: f64) -> Result<bool> {
    Ok(1.0 - cosine_similarity(prev, curr)? <= delta)
}

/// [`converged`] with a zero-norm vector read as "not yet".
pub(crate) fn has_converged(prev: &[f64], curr: &[f64], delta: f64) -> bool {
    converged(prev, curr, delta).unwrap_or(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn identical_vectors_converge() {
        assert!(converged(&[0.8, 0.8], &[0.8, 0.8], DEFAULT_DELTA).unwrap());
    }

    #[test]
    fn orthogonal_vectors_do_not() {
        assert!(!converged(&[1.0, 0.0], &[0.0, 1.0], DEFAULT_DELTA).unwrap());
    }

    #[test]
    fn small_rotation_exceeds_default_delta() {
        // 1 - 1.28 / sqrt(1.28 * 1.30)
        let gap = 1.0 - cosine_similarity(&[0.8, 0.8], &[0.9, 0.7]).unwrap();
        assert_abs_diff_eq!(gap, 0.007722, epsilon = 1e-6);
        assert!(!converged(&[0.8, 0.8], &[0.9, 0.7], DEFAULT_DELTA).unwrap());
    }

    #[test]
    fn zero_vector_is_an_error() {
        assert!(matches!(
            converged(&[0.0, 0.0], &[1.0, 0.0], 0.1),
            Err(Error::ZeroNorm)
        ));
        assert!(!has_converged(&[0.0, 0.0], &[1.0, 0.0], 0.1));
    }

    proptest! {
        #[test]
        fn symmetric_and_scale_invariant(
            x in prop::collection::vec(0.01f64..10.0, 1..20),
            k in 0.01f64..100.0,
        ) {
            let y: Vec<f64> = x.iter().map(|v| v * k).collect();
            prop_assert!(converged(&x, &y, 1e-9).unwrap());
            let z: Vec<f64> = x.iter().rev().copied().collect();
            prop_assert_eq!(converged(&x, &z, 0.01).unwrap(), converged(&z, &x, 0.01).unwrap());
        }
    }
}
