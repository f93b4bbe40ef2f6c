/// Min-max scaling blended with its rounded (half-up) image:
/// `lambda * x1 + (1 - lambda) * round(x1)`.
///
/// A constant list maps to all zeros.
pub fn normalize(values: &[f64], lambda: f64) -> Vec<f64> {
    let (min, max) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    if values.is_empty() || max <= min {
        return vec![0.0; values.len()];
    }
    let span = max - min;
    values
        .iter()
        .map(|&x| {
            let x1 = (x - min) / span;
            let x2 = (x1 + 0.5).floor();
            lambda * x1 + (1.0 - lambda) * x2
        })
        .collect()
}
