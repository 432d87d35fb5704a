/// Cross-entropy of ranking the positive above one negative:
/// `-ln(e^p / (e^p + e^n))`, evaluated as `ln(1 + e^(n - p))`.
pub fn pair_loss(s_pos: f64, s_neg: f64) -> f64 {
    softplus(s_neg - s_pos)
}

/// `d pair_loss / d s_neg`; the derivative with respect to `s_pos` is its
/// negation.
pub fn pair_loss_slope(s_pos: f64, s_neg: f64) -> f64 {
    crate::encoder::sigmoid(s_neg - s_pos)
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}
