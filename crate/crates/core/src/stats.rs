//! Shared correlation and moment helpers.
//!
//! All time averages are plain empirical means with the population
//! denominator (divide by the sample count), matching how the consistency
//! correlations are defined on normalized signals.

/// Variance guard below which a series is treated as constant.
pub const EPS_VAR: f64 = 1e-12;

pub fn mean(x: &[f64]) -> f64 {
    debug_assert!(!x.is_empty());
    x.iter().sum::<f64>() / x.len() as f64
}

/// Population variance (denominator `n`).
#[cfg_attr(not(test), allow(dead_code))]
pub fn population_variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64
}

/// Centered second-moment sums of two equally long series:
/// `(sum (a-ā)(b-b̄), sum (a-ā)², sum (b-b̄)²)`.
pub fn centered_sums(a: &[f64], b: &[f64]) -> (f64, f64, f64) {
    debug_assert_eq!(a.len(), b.len());
    let (ma, mb) = (mean(a), mean(b));
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    (sab, saa, sbb)
}

/// Pearson correlation of two series, or `None` when either side fails the
/// variance guard. A single square root of the variance product keeps the
/// value exactly `±1` for (anti-)identical inputs.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    assert_eq!(a.len(), b.len(), "contract violation: unequal series lengths");
    assert!(a.len() >= 2, "contract violation: need at least 2 samples");
    let n = a.len() as f64;
    let (sab, saa, sbb) = centered_sums(a, b);
    if saa / n < EPS_VAR || sbb / n < EPS_VAR {
        return None;
    }
    Some(sab / (saa * sbb).sqrt())
}
