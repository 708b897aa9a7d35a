//! Forward filtering and backward sampling of one unit's trajectory.
//!
//! The hidden chain moves from cluster `l` at `t - 1` to cluster `k` at `t`
//! with probability `(1 - p) q_k^t + p [k = l]`, and starts from `q^1`.

use rand::Rng;

use crate::dataset::PanelDataset;
use crate::emissions::{log_likelihood, ClusterParams};
use crate::error::{Error, Result};
use crate::prior::StickWeights;
use crate::util::{log_sum_exp, sample_log_index};

/// Log filtered probabilities `log P(g_t = k | Y_1..Y_t)` for one unit,
/// period-major `T × K`. Each row is normalised.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterTable {
    n_periods: usize,
    truncation: usize,
    log_probs: Vec<f64>,
}

impl FilterTable {
    pub fn n_periods(&self) -> usize {
        self.n_periods
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.log_probs[t * self.truncation..(t + 1) * self.truncation]
    }

    pub fn probabilities(&self, t: usize) -> Vec<f64> {
        self.row(t).iter().map(|l| l.exp()).collect()
    }
}

/// Emission log-likelihoods of every cluster for one unit, `T × K`.
/// Empty cells contribute zero.
pub fn emission_table(dataset: &PanelDataset, unit: usize, params: &[ClusterParams]) -> Vec<f64> {
    let k = params.len();
    let mut out = vec![0.0; dataset.n_periods() * k];
    for t in 0..dataset.n_periods() {
        if let Some(cell) = dataset.cell(unit, t) {
            for (j, p) in params.iter().enumerate() {
                out[t * k + j] = log_likelihood(cell, p);
            }
        }
    }
    out
}

/// Forward recursion over precomputed log-potentials (`T × K`), which hold
/// the emission term plus any extra per-period node factor.
///
/// On failure returns the first period whose filtered row has no mass.
pub fn filter_log_potentials(
    log_potentials: &[f64],
    weights: &StickWeights,
    p: f64,
) -> std::result::Result<FilterTable, usize> {
    let n_periods = weights.n_periods();
    let k = weights.truncation();
    debug_assert_eq!(log_potentials.len(), n_periods * k);
    let mut log_probs = vec![0.0; n_periods * k];
    let mut prev = vec![0.0; k];
    let mut row = vec![0.0; k];
    for t in 0..n_periods {
        let q = weights.q_row(t);
        for j in 0..k {
            let prior = if t == 0 { q[j] } else { (1.0 - p) * q[j] + p * prev[j] };
            row[j] = prior.ln() + log_potentials[t * k + j];
        }
        let norm = log_sum_exp(&row);
        if norm == f64::NEG_INFINITY || norm.is_nan() {
            return Err(t);
        }
        for j in 0..k {
            let lp = row[j] - norm;
            log_probs[t * k + j] = lp;
            prev[j] = lp.exp();
        }
    }
    Ok(FilterTable {
        n_periods,
        truncation: k,
        log_probs,
    })
}

/// Filtered probabilities for `unit` given fixed parameters, weights and
/// stickiness.
pub fn forward_filter(
    unit: usize,
    dataset: &PanelDataset,
    params: &[ClusterParams],
    weights: &StickWeights,
    p: f64,
) -> Result<FilterTable> {
    if params.len() != weights.truncation() || dataset.n_periods() != weights.n_periods() {
        return Err(Error::DimensionMismatch(format!(
            "{} cluster parameters and {}×{} weights for a {}-period dataset",
            params.len(),
            weights.n_periods(),
            weights.truncation(),
            dataset.n_periods()
        )));
    }
    if unit >= dataset.n_units() {
        return Err(Error::OutOfRange(format!("unit {unit} of {}", dataset.n_units())));
    }
    let table = emission_table(dataset, unit, params);
    filter_log_potentials(&table, weights, p).map_err(|period| Error::FilterUnderflow { unit, period })
}

/// Draws a whole trajectory from its joint conditional: the last period from
/// its filtered row, then each earlier period from the filtered row times the
/// transition into the state already drawn.
pub fn backward_sample<R: Rng + ?Sized>(filter: &FilterTable, weights: &StickWeights, p: f64, rng: &mut R) -> Vec<usize> {
    let n_periods = filter.n_periods;
    let k = filter.truncation;
    let mut path = vec![0; n_periods];
    if n_periods == 0 {
        return path;
    }
    let last = n_periods - 1;
    path[last] = sample_log_index(filter.row(last), rng).unwrap_or(0);
    let mut logw = vec![0.0; k];
    for t in (0..last).rev() {
        let next = path[t + 1];
        let move_in = (1.0 - p) * weights.q(t + 1, next);
        let row = filter.row(t);
        for j in 0..k {
            let trans = if j == next { move_in + p } else { move_in };
            logw[j] = trans.ln() + row[j];
        }
        path[t] = sample_log_index(&logw, rng).unwrap_or(next);
    }
    path
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{ChannelDecl, Unit};
    use crate::emissions::{CellObservations, ChannelKind, ChannelObs};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn toy(n_periods: usize) -> PanelDataset {
        let cells = (0..n_periods)
            .map(|t| Some(CellObservations::new(vec![ChannelObs::binary(t as u64 % 3, 2).unwrap()])))
            .collect();
        PanelDataset::new(
            vec![ChannelDecl::new("v", ChannelKind::Bernoulli)],
            (0..n_periods as i64).collect(),
            vec![],
            vec![Unit { id: "u".into(), attributes: vec![] }],
            cells,
        )
        .unwrap()
    }

    #[test]
    fn single_cluster_filter_is_certain() {
        // K = 1 is not a sampler setting but the recursion must still hold.
        let ds = toy(3);
        let w = StickWeights::from_pi_rows(vec![vec![1.0]; 3]).unwrap();
        let f = forward_filter(0, &ds, &[ClusterParams { values: vec![0.3] }], &w, 0.4).unwrap();
        for t in 0..3 {
            assert_eq!(f.row(t), &[0.0]);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(backward_sample(&f, &w, 0.4, &mut rng), vec![0, 0, 0]);
    }

    #[test]
    fn zero_stickiness_mixes_to_weights() {
        let ds = toy(2);
        let w = StickWeights::from_pi_rows(vec![vec![0.3, 1.0], vec![0.6, 1.0]]).unwrap();
        let params = [ClusterParams { values: vec![0.2] }, ClusterParams { values: vec![0.9] }];
        let f = forward_filter(0, &ds, &params, &w, 0.0).unwrap();
        let cell = ds.cell(0, 1).unwrap();
        let un: Vec<f64> = (0..2).map(|k| w.q(1, k) * log_likelihood(cell, &params[k]).exp()).collect();
        let z: f64 = un.iter().sum();
        for k in 0..2 {
            assert!((f.probabilities(1)[k] - un[k] / z).abs() < 1e-12);
        }
    }

    #[test]
    fn rows_normalise() {
        let ds = toy(4);
        let w = StickWeights::from_pi_rows(vec![vec![0.2, 0.5, 1.0]; 4]).unwrap();
        let params: Vec<_> = [0.1, 0.5, 0.8].iter().map(|&v| ClusterParams { values: vec![v] }).collect();
        let f = forward_filter(0, &ds, &params, &w, 0.7).unwrap();
        for t in 0..4 {
            let s: f64 = f.probabilities(t).iter().sum();
            assert!((s - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn impossible_data_reports_the_period() {
        let ds = toy(3);
        let w = StickWeights::from_pi_rows(vec![vec![0.5, 1.0]; 3]).unwrap();
        // period 1 has 1 success of 2: impossible under theta in {0, 1}
        let params = [ClusterParams { values: vec![0.0] }, ClusterParams { values: vec![1.0] }];
        let err = forward_filter(0, &ds, &params, &w, 0.5).unwrap_err();
        assert!(matches!(err, Error::FilterUnderflow { unit: 0, period: 1 }));
    }

    #[test]
    fn full_stickiness_gives_constant_paths() {
        let ds = toy(3);
        let w = StickWeights::from_pi_rows(vec![vec![0.5, 1.0]; 3]).unwrap();
        let params = [ClusterParams { values: vec![0.3] }, ClusterParams { values: vec![0.6] }];
        let f = forward_filter(0, &ds, &params, &w, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..500 {
            let path = backward_sample(&f, &w, 1.0, &mut rng);
            assert!(path.iter().all(|&k| k == path[0]));
        }
    }
}
