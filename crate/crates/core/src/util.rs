use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma};

/// Draws an index with probability proportional to `weights`.
///
/// Weights need not be normalised. Returns `None` when no weight is positive.
pub(crate) fn sample_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Option<usize> {
    let total: f64 = weights.iter().filter(|w| **w > 0.0).sum();
    if !(total > 0.0) || !total.is_finite() {
        return None;
    }
    let mut u = rng.random::<f64>() * total;
    let mut last = None;
    for (k, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            if u < w {
                return Some(k);
            }
            u -= w;
            last = Some(k);
        }
    }
    last
}

/// Draws an index from unnormalised log weights.
pub(crate) fn sample_log_index<R: Rng + ?Sized>(log_weights: &[f64], rng: &mut R) -> Option<usize> {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max.is_nan() {
        return None;
    }
    let weights: Vec<f64> = log_weights.iter().map(|lw| (lw - max).exp()).collect();
    sample_index(&weights, rng)
}

pub(crate) fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

// Shape parameters reaching these helpers are built from positive
// hyperparameters plus nonnegative counts.
pub(crate) fn draw_beta<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    Beta::new(a, b)
        .unwrap_or_else(|e| panic!("Beta({a}, {b}): {e}"))
        .sample(rng)
}

pub(crate) fn draw_gamma_rate<R: Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> f64 {
    Gamma::new(shape, 1.0 / rate)
        .unwrap_or_else(|e| panic!("Gamma({shape}, rate {rate}): {e}"))
        .sample(rng)
}

/// `x * ln(y)` with the convention `0 * ln(0) = 0`.
pub(crate) fn xlny(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln()
    }
}

pub(crate) fn ln_beta_density(x: f64, a: f64, b: f64) -> f64 {
    xlny(a - 1.0, x) + xlny(b - 1.0, 1.0 - x) - statrs::function::beta::ln_beta(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sample_index_skips_zero_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let k = sample_index(&[0.0, 2.0, 0.0, 1.0], &mut rng).unwrap();
            assert!(k == 1 || k == 3);
        }
        assert_eq!(sample_index(&[0.0, 0.0], &mut rng), None);
    }

    #[test]
    fn log_sum_exp_handles_infinities() {
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY, f64::NEG_INFINITY]), f64::NEG_INFINITY);
        let v = log_sum_exp(&[0.0, f64::NEG_INFINITY, 0.0]);
        assert!((v - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn beta_density_matches_uniform() {
        assert!(ln_beta_density(0.3, 1.0, 1.0).abs() < 1e-12);
        assert!((ln_beta_density(0.0, 1.0, 3.0) - 3f64.ln()).abs() < 1e-12);
    }
}
