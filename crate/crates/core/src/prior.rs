//! Generative side of the intergenerational Chinese restaurant process.
//!
//! Two representations are provided. The stick-breaking path draws per-period
//! stick fractions whose Beta parameters carry the previous period's cluster
//! occupancy, then seats each non-sticky unit independently. The sequential
//! restaurant seats units one at a time, with seat counts made up of the whole
//! previous generation plus the non-sticky units already seated in the current
//! one. Both agree once the sticks are integrated out and the truncation level
//! is large; [`enumerate_partition_distribution`] gives the exact law of the
//! restaurant for tiny panels so the two can be compared.
//!
//! Cluster labels are 0-based throughout.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util::{draw_beta, sample_index};

/// DP concentration, strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Concentration(f64);

impl Concentration {
    pub fn new(gamma: f64) -> Result<Self> {
        if gamma > 0.0 && gamma.is_finite() {
            Ok(Concentration(gamma))
        } else {
            Err(Error::param("gamma", format!("must be positive and finite, got {gamma}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for Concentration {
    fn default() -> Self {
        Concentration(1.0)
    }
}

impl TryFrom<f64> for Concentration {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Concentration::new(v)
    }
}

impl From<Concentration> for f64 {
    fn from(c: Concentration) -> f64 {
        c.0
    }
}

/// Stickiness probability together with its Beta prior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stickiness {
    pub p: f64,
    pub alpha_p: f64,
    pub beta_p: f64,
}

impl Stickiness {
    pub fn new(p: f64, alpha_p: f64, beta_p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::param("p", format!("must lie in [0, 1], got {p}")));
        }
        if !(alpha_p > 0.0 && alpha_p.is_finite()) {
            return Err(Error::param("alpha_p", format!("must be positive, got {alpha_p}")));
        }
        if !(beta_p > 0.0 && beta_p.is_finite()) {
            return Err(Error::param("beta_p", format!("must be positive, got {beta_p}")));
        }
        Ok(Stickiness { p, alpha_p, beta_p })
    }

    /// `p` under the default uniform prior.
    pub fn with_p(p: f64) -> Result<Self> {
        Stickiness::new(p, 1.0, 1.0)
    }

    pub fn sample_prior<R: Rng + ?Sized>(alpha_p: f64, beta_p: f64, rng: &mut R) -> Result<Self> {
        let p = draw_beta(alpha_p, beta_p, rng);
        Stickiness::new(p, alpha_p, beta_p)
    }
}

/// Per-period stick fractions and the mixture weights they induce, stored
/// period-major (`T × K`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StickWeights {
    n_periods: usize,
    truncation: usize,
    pi: Vec<f64>,
    q: Vec<f64>,
}

impl StickWeights {
    pub fn from_pi_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_periods = rows.len();
        let truncation = rows.first().map_or(0, Vec::len);
        if n_periods == 0 || truncation == 0 {
            return Err(Error::DimensionMismatch("stick weights need at least one period and one stick".into()));
        }
        let mut pi = Vec::with_capacity(n_periods * truncation);
        let mut q = Vec::with_capacity(n_periods * truncation);
        for row in &rows {
            if row.len() != truncation {
                return Err(Error::DimensionMismatch(format!(
                    "stick row has {} entries, expected {truncation}",
                    row.len()
                )));
            }
            q.extend(stick_break(row)?);
            pi.extend_from_slice(row);
        }
        Ok(StickWeights {
            n_periods,
            truncation,
            pi,
            q,
        })
    }

    pub fn n_periods(&self) -> usize {
        self.n_periods
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn pi_row(&self, t: usize) -> &[f64] {
        &self.pi[t * self.truncation..(t + 1) * self.truncation]
    }

    pub fn q_row(&self, t: usize) -> &[f64] {
        &self.q[t * self.truncation..(t + 1) * self.truncation]
    }

    pub fn q(&self, t: usize, k: usize) -> f64 {
        self.q[t * self.truncation + k]
    }

    pub fn set_pi_row(&mut self, t: usize, row: &[f64]) -> Result<()> {
        if row.len() != self.truncation {
            return Err(Error::DimensionMismatch(format!(
                "stick row has {} entries, expected {}",
                row.len(),
                self.truncation
            )));
        }
        let q = stick_break(row)?;
        let span = t * self.truncation..(t + 1) * self.truncation;
        self.pi[span.clone()].copy_from_slice(row);
        self.q[span].copy_from_slice(&q);
        Ok(())
    }
}

/// Latent cluster indices `g` and sticky indicators `d`, unit-major (`N × T`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AssignmentState {
    n_units: usize,
    n_periods: usize,
    g: Vec<usize>,
    d: Vec<bool>,
}

impl AssignmentState {
    /// Everyone in cluster 0, nobody sticky.
    pub fn new(n_units: usize, n_periods: usize) -> Self {
        AssignmentState {
            n_units,
            n_periods,
            g: vec![0; n_units * n_periods],
            d: vec![false; n_units * n_periods],
        }
    }

    /// Builds a state from `matrix[unit][period]` with all indicators cleared.
    pub fn from_matrix(matrix: &[Vec<usize>]) -> Result<Self> {
        let n_units = matrix.len();
        let n_periods = matrix.first().map_or(0, Vec::len);
        if matrix.iter().any(|row| row.len() != n_periods) {
            return Err(Error::DimensionMismatch("assignment rows have unequal lengths".into()));
        }
        Ok(AssignmentState {
            n_units,
            n_periods,
            g: matrix.concat(),
            d: vec![false; n_units * n_periods],
        })
    }

    pub fn n_units(&self) -> usize {
        self.n_units
    }

    pub fn n_periods(&self) -> usize {
        self.n_periods
    }

    #[inline]
    pub fn cluster(&self, unit: usize, period: usize) -> usize {
        self.g[unit * self.n_periods + period]
    }

    #[inline]
    pub fn set_cluster(&mut self, unit: usize, period: usize, k: usize) {
        self.g[unit * self.n_periods + period] = k;
    }

    #[inline]
    pub fn sticky(&self, unit: usize, period: usize) -> bool {
        self.d[unit * self.n_periods + period]
    }

    #[inline]
    pub fn set_sticky(&mut self, unit: usize, period: usize, d: bool) {
        self.d[unit * self.n_periods + period] = d;
    }

    pub fn trajectory(&self, unit: usize) -> &[usize] {
        &self.g[unit * self.n_periods..(unit + 1) * self.n_periods]
    }

    pub fn set_trajectory(&mut self, unit: usize, path: &[usize]) {
        self.g[unit * self.n_periods..(unit + 1) * self.n_periods].copy_from_slice(path);
    }

    pub fn indicators(&self, unit: usize) -> &[bool] {
        &self.d[unit * self.n_periods..(unit + 1) * self.n_periods]
    }

    pub fn period(&self, period: usize) -> Vec<usize> {
        (0..self.n_units).map(|i| self.cluster(i, period)).collect()
    }

    /// Flat cluster indices, unit-major.
    pub fn raw_clusters(&self) -> &[usize] {
        &self.g
    }

    pub fn raw_indicators(&self) -> &[bool] {
        &self.d
    }

    /// Occupancy of clusters `0..len` at `period`.
    pub fn counts(&self, period: usize, len: usize) -> Vec<usize> {
        let mut counts = vec![0; len];
        for i in 0..self.n_units {
            counts[self.cluster(i, period)] += 1;
        }
        counts
    }

    /// Occupancy counting only units that entered through the restaurant.
    pub fn nonsticky_counts(&self, period: usize, len: usize) -> Vec<usize> {
        let mut counts = vec![0; len];
        for i in 0..self.n_units {
            if !self.sticky(i, period) {
                counts[self.cluster(i, period)] += 1;
            }
        }
        counts
    }

    pub fn max_cluster(&self) -> usize {
        self.g.iter().copied().max().unwrap_or(0)
    }

    pub fn n_occupied(&self) -> usize {
        let mut seen: Vec<usize> = self.g.clone();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    }

    pub fn to_matrix(&self) -> Vec<Vec<usize>> {
        (0..self.n_units).map(|i| self.trajectory(i).to_vec()).collect()
    }

    pub fn clear_indicators(&mut self) {
        self.d.iter_mut().for_each(|d| *d = false);
    }

    /// Checks the structural invariants against truncation level `truncation`.
    pub fn validate(&self, truncation: usize) -> Result<()> {
        for i in 0..self.n_units {
            if self.n_periods > 0 && self.sticky(i, 0) {
                return Err(Error::param("d", format!("unit {i} is sticky in the first period")));
            }
            for t in 0..self.n_periods {
                if self.cluster(i, t) >= truncation {
                    return Err(Error::param(
                        "g",
                        format!("unit {i} period {t} has cluster {} ≥ K = {truncation}", self.cluster(i, t)),
                    ));
                }
                if t > 0 && self.sticky(i, t) && self.cluster(i, t) != self.cluster(i, t - 1) {
                    return Err(Error::param("d", format!("unit {i} is sticky at {t} but changed cluster")));
                }
            }
        }
        Ok(())
    }
}

/// Relabels `matrix[unit][period]` by order of first appearance, scanning
/// periods in order and units within each period.
pub fn canonical_labels(matrix: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n_periods = matrix.first().map_or(0, Vec::len);
    let mut map: BTreeMap<usize, usize> = BTreeMap::new();
    let mut out = vec![vec![0; n_periods]; matrix.len()];
    for t in 0..n_periods {
        for (i, row) in matrix.iter().enumerate() {
            let next = map.len();
            out[i][t] = *map.entry(row[t]).or_insert(next);
        }
    }
    out
}

/// Seats one customer: returns an existing table with probability
/// `counts[k] / (total + gamma)` or `counts.len()` for a new table.
fn seat<R: Rng + ?Sized>(counts: &[usize], gamma: f64, rng: &mut R) -> usize {
    let mut weights: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    weights.push(gamma);
    sample_index(&weights, rng).unwrap_or(counts.len())
}

/// Period-one assignments from the plain restaurant.
///
/// Unit 0 opens cluster 0; unit `i` joins cluster `k` with probability
/// `n_k / (i + gamma)` or opens the next label with probability
/// `gamma / (i + gamma)`.
pub fn sample_initial_assignments<R: Rng + ?Sized>(
    n_units: usize,
    gamma: Concentration,
    rng: &mut R,
) -> Vec<usize> {
    let mut counts: Vec<usize> = Vec::new();
    let mut out = Vec::with_capacity(n_units);
    for _ in 0..n_units {
        let k = seat(&counts, gamma.value(), rng);
        if k == counts.len() {
            counts.push(0);
        }
        counts[k] += 1;
        out.push(k);
    }
    out
}

/// One generation of the intergenerational restaurant, returning the new
/// assignments and which units stayed through stickiness.
pub fn sample_transition_with_indicators<R: Rng + ?Sized>(
    prev: &[usize],
    p: f64,
    gamma: Concentration,
    rng: &mut R,
) -> (Vec<usize>, Vec<bool>) {
    let mut counts = vec![0usize; prev.iter().copied().max().map_or(0, |m| m + 1)];
    for &k in prev {
        counts[k] += 1;
    }
    let mut out = Vec::with_capacity(prev.len());
    let mut sticky = Vec::with_capacity(prev.len());
    for &before in prev {
        if rng.random::<f64>() < p {
            out.push(before);
            sticky.push(true);
        } else {
            let k = seat(&counts, gamma.value(), rng);
            if k == counts.len() {
                counts.push(0);
            }
            counts[k] += 1;
            out.push(k);
            sticky.push(false);
        }
    }
    (out, sticky)
}

/// One generation of the intergenerational restaurant.
///
/// Each unit in turn keeps its previous cluster with probability `p`;
/// otherwise it is seated with counts combining the whole previous generation
/// and the non-sticky units of this generation seated before it.
pub fn sample_transition<R: Rng + ?Sized>(prev: &[usize], p: f64, gamma: Concentration, rng: &mut R) -> Vec<usize> {
    sample_transition_with_indicators(prev, p, gamma, rng).0
}

/// Full `N × T` draw from the sequential restaurant (labels unbounded).
pub fn sample_restaurant_path<R: Rng + ?Sized>(
    n_units: usize,
    n_periods: usize,
    p: f64,
    gamma: Concentration,
    rng: &mut R,
) -> AssignmentState {
    let mut state = AssignmentState::new(n_units, n_periods);
    if n_periods == 0 {
        return state;
    }
    let mut current = sample_initial_assignments(n_units, gamma, rng);
    for (i, &k) in current.iter().enumerate() {
        state.set_cluster(i, 0, k);
    }
    for t in 1..n_periods {
        let (next, sticky) = sample_transition_with_indicators(&current, p, gamma, rng);
        for i in 0..n_units {
            state.set_cluster(i, t, next[i]);
            state.set_sticky(i, t, sticky[i]);
        }
        current = next;
    }
    state
}

/// Mixture weights `q_k = pi_k * prod_{l<k} (1 - pi_l)` from stick fractions.
///
/// The final fraction is the truncation stick and must equal 1, so the
/// weights sum to one.
pub fn stick_break(pi_row: &[f64]) -> Result<Vec<f64>> {
    for (index, &value) in pi_row.iter().enumerate() {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::StickOutOfRange { index, value });
        }
    }
    match pi_row.last() {
        None => return Err(Error::DimensionMismatch("empty stick row".into())),
        Some(&last) if last != 1.0 => return Err(Error::UnpinnedStick(last)),
        _ => {}
    }
    let mut remaining = 1.0;
    Ok(pi_row
        .iter()
        .map(|&pi| {
            let w = pi * remaining;
            remaining *= 1.0 - pi;
            w
        })
        .collect())
}

/// Beta parameters of the stick fractions `0..K-1` given occupancy counts.
///
/// `counts` may be shorter than `truncation`. Entry `k` is
/// `(1 + n_k, gamma + sum_{l>k} n_l)`.
pub fn stick_posterior_params(counts: &[usize], gamma: f64, truncation: usize) -> Vec<(f64, f64)> {
    let mut tail: usize = counts.iter().sum();
    (0..truncation.saturating_sub(1))
        .map(|k| {
            let n = counts.get(k).copied().unwrap_or(0);
            tail -= n;
            (1.0 + n as f64, gamma + tail as f64)
        })
        .collect()
}

/// Draws one period's stick fractions given the previous period's occupancy.
///
/// `pi_k ~ Beta(1 + n_k, gamma + N - sum_{l<=k} n_l)` for `k < K - 1`, and the
/// last stick is pinned to 1. With all-zero counts this is the plain
/// `Beta(1, gamma)` prior of the first period.
pub fn sample_stick_weights_prior<R: Rng + ?Sized>(
    prev_counts: &[usize],
    gamma: Concentration,
    truncation: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if truncation < 2 {
        return Err(Error::param("K", format!("truncation level must be at least 2, got {truncation}")));
    }
    if prev_counts.len() > truncation && prev_counts[truncation..].iter().any(|&c| c > 0) {
        return Err(Error::DimensionMismatch(format!(
            "counts occupy clusters beyond the truncation level {truncation}"
        )));
    }
    let mut row: Vec<f64> = stick_posterior_params(prev_counts, gamma.value(), truncation)
        .into_iter()
        .map(|(a, b)| draw_beta(a, b, rng))
        .collect();
    row.push(1.0);
    Ok(row)
}

/// A joint draw of assignments and stick weights from the truncated
/// stick-breaking prior.
#[derive(Debug, Clone)]
pub struct PriorDraw {
    pub assignments: AssignmentState,
    pub weights: StickWeights,
}

/// Forward simulation of the truncated stick-breaking process: period-one
/// sticks from `Beta(1, gamma)`, later sticks conditioned on the previous
/// period's counts, and each later unit sticky with probability `p`.
pub fn sample_prior_path<R: Rng + ?Sized>(
    n_units: usize,
    n_periods: usize,
    truncation: usize,
    gamma: Concentration,
    p: f64,
    rng: &mut R,
) -> Result<PriorDraw> {
    if n_periods == 0 {
        return Err(Error::param("n_periods", "must be at least 1"));
    }
    let mut state = AssignmentState::new(n_units, n_periods);
    let mut rows = Vec::with_capacity(n_periods);
    let mut counts = vec![0usize; truncation];
    for t in 0..n_periods {
        let pi = sample_stick_weights_prior(&counts, gamma, truncation, rng)?;
        let q = stick_break(&pi)?;
        for i in 0..n_units {
            if t > 0 && rng.random::<f64>() < p {
                let before = state.cluster(i, t - 1);
                state.set_cluster(i, t, before);
                state.set_sticky(i, t, true);
            } else {
                let k = sample_index(&q, rng).unwrap_or(truncation - 1);
                state.set_cluster(i, t, k);
            }
        }
        counts = state.counts(t, truncation);
        rows.push(pi);
    }
    Ok(PriorDraw {
        assignments: state,
        weights: StickWeights::from_pi_rows(rows)?,
    })
}

/// Default ceiling on enumerated paths.
pub const DEFAULT_ENUMERATION_LIMIT: u128 = 10_000_000;

/// Exact law of the sequential restaurant over canonically labelled
/// `matrix[unit][period]` assignments.
pub fn enumerate_partition_distribution(
    n_units: usize,
    n_periods: usize,
    p: f64,
    gamma: Concentration,
) -> Result<BTreeMap<Vec<Vec<usize>>, f64>> {
    enumerate_partition_distribution_with_limit(n_units, n_periods, p, gamma, DEFAULT_ENUMERATION_LIMIT)
}

pub fn enumerate_partition_distribution_with_limit(
    n_units: usize,
    n_periods: usize,
    p: f64,
    gamma: Concentration,
    max_paths: u128,
) -> Result<BTreeMap<Vec<Vec<usize>>, f64>> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param("p", format!("must lie in [0, 1], got {p}")));
    }
    if n_units == 0 || n_periods == 0 {
        return Err(Error::param("n_units", "enumeration needs at least one unit and one period"));
    }
    // Draw number j has at most j + 1 label choices, and every draw after the
    // first period may also take the sticky branch.
    let mut paths: u128 = 1;
    for j in 0..n_units * n_periods {
        let branches = (j as u128 + 1) + u128::from(j >= n_units);
        paths = paths.saturating_mul(branches);
        if paths > max_paths {
            return Err(Error::EnumerationTooLarge {
                paths,
                limit: max_paths,
            });
        }
    }

    let mut walker = Enumerator {
        n_units,
        n_periods,
        p,
        gamma: gamma.value(),
        matrix: vec![vec![0; n_periods]; n_units],
        out: BTreeMap::new(),
    };
    walker.visit(0, 0, Vec::new(), 0, 1.0);
    Ok(walker.out)
}

struct Enumerator {
    n_units: usize,
    n_periods: usize,
    p: f64,
    gamma: f64,
    matrix: Vec<Vec<usize>>,
    out: BTreeMap<Vec<Vec<usize>>, f64>,
}

impl Enumerator {
    /// `counts` holds the seat counts visible to unit `i` of period `t`:
    /// the previous generation plus non-sticky units seated so far.
    fn visit(&mut self, t: usize, i: usize, counts: Vec<usize>, n_labels: usize, prob: f64) {
        if t == self.n_periods {
            *self.out.entry(self.matrix.clone()).or_insert(0.0) += prob;
            return;
        }

        if t > 0 && self.p > 0.0 {
            self.matrix[i][t] = self.matrix[i][t - 1];
            self.advance(t, i, counts.clone(), n_labels, prob * self.p);
        }

        let enter = if t == 0 { 1.0 } else { 1.0 - self.p };
        if enter <= 0.0 {
            return;
        }
        let total: usize = counts.iter().sum();
        let denom = total as f64 + self.gamma;
        for k in 0..n_labels {
            if counts[k] == 0 {
                continue;
            }
            let mut next_counts = counts.clone();
            next_counts[k] += 1;
            self.matrix[i][t] = k;
            self.advance(t, i, next_counts, n_labels, prob * enter * counts[k] as f64 / denom);
        }
        let new_prob = if total == 0 { 1.0 } else { self.gamma / denom };
        let mut next_counts = counts;
        next_counts.resize(n_labels + 1, 0);
        next_counts[n_labels] += 1;
        self.matrix[i][t] = n_labels;
        self.advance(t, i, next_counts, n_labels + 1, prob * enter * new_prob);
    }

    /// Moves to the next draw; at the end of a generation the seat counts are
    /// replaced by that generation's occupancy.
    fn advance(&mut self, t: usize, i: usize, counts: Vec<usize>, n_labels: usize, prob: f64) {
        if i + 1 < self.n_units {
            self.visit(t, i + 1, counts, n_labels, prob);
        } else {
            let mut fresh = vec![0; n_labels];
            for row in &self.matrix {
                fresh[row[t]] += 1;
            }
            self.visit(t + 1, 0, fresh, n_labels, prob);
        }
    }
}
