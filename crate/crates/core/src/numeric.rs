//! Overflow-safe scalar helpers shared by the closed-form model and the oracle.

use std::f64::consts::LN_2;

/// log(cosh x), computed as |x| + log1p(e^(-2|x|)) - log 2 so it stays finite
/// for |x| far beyond the overflow point of cosh.
pub fn log_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - LN_2
}

/// log Σ_i exp(x_i), accumulated in index order.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = xs.iter().map(|&x| (x - max).exp()).sum();
    max + sum.ln()
}

/// tanh(x)/x for x >= 0. The singularity at 0 is removable: below 1e-12 the
/// limit value 1 is used, below 1e-4 a short Taylor series.
pub fn tanh_over(x: f64) -> f64 {
    if x < 1e-12 {
        1.0
    } else if x < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 3.0 + 2.0 * x2 * x2 / 15.0
    } else {
        x.tanh() / x
    }
}
