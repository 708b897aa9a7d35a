//! Convergence checks on scalar MCMC traces.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample variance with an `n - 1` divisor.
pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
}

fn autocovariance(x: &[f64], m: f64, lag: usize) -> f64 {
    let n = x.len();
    (0..n - lag).map(|i| (x[i] - m) * (x[i + lag] - m)).sum::<f64>() / n as f64
}

/// Effective sample size by Geyer's initial monotone sequence estimator.
///
/// A constant trace returns `n`.
pub fn effective_sample_size(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 4 {
        return n as f64;
    }
    let m = mean(x);
    let c0 = autocovariance(x, m, 0);
    if c0 <= 0.0 {
        return n as f64;
    }
    let mut sum = 0.0;
    let mut prev_pair = f64::INFINITY;
    let mut lag = 0;
    while lag + 1 < n {
        let pair = (autocovariance(x, m, lag) + autocovariance(x, m, lag + 1)) / c0;
        if pair <= 0.0 {
            break;
        }
        let pair = pair.min(prev_pair);
        sum += pair;
        prev_pair = pair;
        lag += 2;
    }
    // tau = -1 + 2 * sum of pairs
    let tau = (2.0 * sum - 1.0).max(1.0 / n as f64);
    n as f64 / tau
}

/// Split potential scale reduction over chains of equal length.
pub fn split_rhat(chains: &[&[f64]]) -> f64 {
    let halves: Vec<&[f64]> = chains
        .iter()
        .flat_map(|c| {
            let h = c.len() / 2;
            [&c[..h], &c[c.len() - h..]]
        })
        .collect();
    let n = halves.iter().map(|h| h.len()).min().unwrap_or(0);
    if halves.len() < 2 || n < 2 {
        return f64::NAN;
    }
    let means: Vec<f64> = halves.iter().map(|h| mean(&h[..n])).collect();
    let within = halves.iter().map(|h| variance(&h[..n])).sum::<f64>() / halves.len() as f64;
    let between = n as f64 * variance(&means);
    if within == 0.0 {
        return if between == 0.0 { 1.0 } else { f64::INFINITY };
    }
    let pooled = (n as f64 - 1.0) / n as f64 * within + between / n as f64;
    (pooled / within).sqrt()
}

/// Difference in means of two samples scaled by its standard error, with each
/// sample's variance divided by its effective sample size.
pub fn geweke_z(a: &[f64], b: &[f64]) -> f64 {
    let se2 = variance(a) / effective_sample_size(a) + variance(b) / effective_sample_size(b);
    let diff = mean(a) - mean(b);
    if se2 == 0.0 {
        return if diff == 0.0 { 0.0 } else { f64::INFINITY * diff.signum() };
    }
    diff / se2.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftTest {
    pub slope: f64,
    pub t_statistic: f64,
    pub p_value: f64,
}

impl DriftTest {
    pub fn drifts(&self, level: f64) -> bool {
        self.p_value < level
    }
}

/// Tests for a linear trend in the second half of a trace.
///
/// The half is cut into `n_batches` consecutive batches and their means are
/// regressed on batch index; batching absorbs the autocorrelation that would
/// otherwise inflate the t statistic.
pub fn drift_test(trace: &[f64], n_batches: usize) -> Option<DriftTest> {
    let half = &trace[trace.len() / 2..];
    if n_batches < 3 || half.len() < n_batches {
        return None;
    }
    let size = half.len() / n_batches;
    let ys: Vec<f64> = (0..n_batches).map(|b| mean(&half[b * size..(b + 1) * size])).collect();
    let xs: Vec<f64> = (0..n_batches).map(|b| b as f64).collect();
    let (mx, my) = (mean(&xs), mean(&ys));
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - my - slope * (x - mx)).powi(2)).sum();
    let df = (n_batches - 2) as f64;
    let se = (rss / df / sxx).sqrt();
    let t_statistic = if se > 0.0 {
        slope / se
    } else if slope == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    let dist = StudentsT::new(0.0, 1.0, df).ok()?;
    let p_value = 2.0 * (1.0 - dist.cdf(t_statistic.abs()));
    Some(DriftTest {
        slope,
        t_statistic,
        p_value,
    })
}
