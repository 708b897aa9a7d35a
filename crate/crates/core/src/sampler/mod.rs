//! Blocked Gibbs sampler over cluster parameters, sticky indicators, the
//! stickiness probability, per-period stick weights and whole assignment
//! trajectories.
//!
//! One iteration runs, in order: parameters, sticky indicators (against the
//! weights carried from the previous iteration), stickiness, stick weights,
//! then a forward-filter backward-sample draw of every unit's trajectory.

mod ffbs;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::PanelDataset;
use crate::emissions::{all_cluster_stats, sample_cluster_params, ChannelPrior, ClusterParams, EmissionModel};
use crate::error::{Error, Result};
use crate::prior::{
    sample_prior_path, stick_break, stick_posterior_params, AssignmentState, Concentration, StickWeights,
};
use crate::util::{draw_beta, ln_beta_density};

pub use ffbs::{backward_sample, emission_table, filter_log_potentials, forward_filter, FilterTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitMode {
    /// Assignments, weights and parameters drawn from the prior.
    Prior,
    /// Everyone in cluster 0; weights and parameters from the prior.
    SingleCluster,
}

/// How trajectories are redrawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryUpdate {
    /// Units are updated one after another, and each unit's filter includes
    /// how its period-`t` cluster shifts the Beta prior of the period-`t+1`
    /// sticks. This is the exact full conditional.
    Coupled,
    /// Units are filtered independently given the weights, ignoring that
    /// factor.
    Independent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerConfig {
    /// Truncation level K.
    pub truncation: usize,
    pub n_iterations: usize,
    pub burn_in: usize,
    pub thinning: usize,
    pub chains: usize,
    pub seed: u64,
    pub gamma: f64,
    pub alpha_p: f64,
    pub beta_p: f64,
    /// Holds the stickiness at this value instead of sampling it.
    pub fixed_stickiness: Option<f64>,
    pub channel_priors: BTreeMap<String, ChannelPrior>,
    pub init: InitMode,
    pub trajectory_update: TrajectoryUpdate,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            truncation: 10,
            n_iterations: 4000,
            burn_in: 1000,
            thinning: 1,
            chains: 1,
            seed: 0,
            gamma: 1.0,
            alpha_p: 1.0,
            beta_p: 1.0,
            fixed_stickiness: None,
            channel_priors: BTreeMap::new(),
            init: InitMode::Prior,
            trajectory_update: TrajectoryUpdate::Coupled,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.truncation < 2 {
            return Err(Error::param("truncation", format!("must be at least 2, got {}", self.truncation)));
        }
        if self.burn_in >= self.n_iterations {
            return Err(Error::param(
                "burn_in",
                format!("must be below n_iterations ({} ≥ {})", self.burn_in, self.n_iterations),
            ));
        }
        if self.thinning == 0 {
            return Err(Error::param("thinning", "must be at least 1"));
        }
        if self.chains == 0 {
            return Err(Error::param("chains", "must be at least 1"));
        }
        Concentration::new(self.gamma)?;
        for (name, v) in [("alpha_p", self.alpha_p), ("beta_p", self.beta_p)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        if let Some(p) = self.fixed_stickiness {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::param("fixed_stickiness", format!("must lie in [0, 1], got {p}")));
            }
        }
        for prior in self.channel_priors.values() {
            prior.validate()?;
        }
        Ok(())
    }

    /// Number of draws a chain stores.
    pub fn n_stored(&self) -> usize {
        (self.n_iterations - self.burn_in).div_ceil(self.thinning)
    }
}

/// Complete state of one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplerState {
    pub assignments: AssignmentState,
    pub weights: StickWeights,
    pub p: f64,
    pub params: Vec<ClusterParams>,
    pub log_joint: f64,
}

/// Fixed pieces of a model: emission channels, hyperparameters and settings.
#[derive(Debug, Clone)]
pub struct GibbsSampler {
    model: EmissionModel,
    config: SamplerConfig,
    gamma: Concentration,
}

impl GibbsSampler {
    pub fn new(model: EmissionModel, config: SamplerConfig) -> Result<Self> {
        config.validate()?;
        let gamma = Concentration::new(config.gamma)?;
        Ok(GibbsSampler { model, config, gamma })
    }

    pub fn for_dataset(dataset: &PanelDataset, config: SamplerConfig) -> Result<Self> {
        let model = EmissionModel::for_dataset(dataset, &config.channel_priors)?;
        GibbsSampler::new(model, config)
    }

    pub fn model(&self) -> &EmissionModel {
        &self.model
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.config
    }

    fn check_dataset(&self, dataset: &PanelDataset) -> Result<()> {
        let channels = dataset.channels();
        let ok = channels.len() == self.model.len()
            && channels
                .iter()
                .zip(self.model.channels())
                .all(|(d, s)| d.name == s.name && d.kind == s.kind());
        if ok {
            Ok(())
        } else {
            Err(Error::DimensionMismatch("dataset channels do not match the emission model".into()))
        }
    }

    /// A draw of every latent quantity from the prior (no data involved).
    pub fn sample_prior_state<R: Rng + ?Sized>(
        &self,
        n_units: usize,
        n_periods: usize,
        rng: &mut R,
    ) -> Result<SamplerState> {
        let k = self.config.truncation;
        let p = match self.config.fixed_stickiness {
            Some(p) => p,
            None => draw_beta(self.config.alpha_p, self.config.beta_p, rng),
        };
        let draw = sample_prior_path(n_units, n_periods, k, self.gamma, p, rng)?;
        let params = (0..k).map(|_| self.model.sample_prior_params(rng)).collect();
        Ok(SamplerState {
            assignments: draw.assignments,
            weights: draw.weights,
            p,
            params,
            log_joint: f64::NAN,
        })
    }

    pub fn initialize<R: Rng + ?Sized>(&self, dataset: &PanelDataset, rng: &mut R) -> Result<SamplerState> {
        self.check_dataset(dataset)?;
        let (n, t) = (dataset.n_units(), dataset.n_periods());
        let mut state = self.sample_prior_state(n, t, rng)?;
        if self.config.init == InitMode::SingleCluster {
            state.assignments = AssignmentState::new(n, t);
            let k = self.config.truncation;
            let mut rows = Vec::with_capacity(t);
            let mut counts = vec![0; k];
            for period in 0..t {
                rows.push(crate::prior::sample_stick_weights_prior(&counts, self.gamma, k, rng)?);
                counts = state.assignments.counts(period, k);
            }
            state.weights = StickWeights::from_pi_rows(rows)?;
        }
        state.assignments.clear_indicators();
        state.log_joint = self.log_joint(dataset, &state);
        Ok(state)
    }

    /// Redraws every cluster's parameters from its conjugate posterior;
    /// unoccupied clusters get prior draws.
    pub fn sweep_params<R: Rng + ?Sized>(&self, state: &mut SamplerState, dataset: &PanelDataset, rng: &mut R) -> Result<()> {
        let stats = all_cluster_stats(&self.model, dataset, &state.assignments, self.config.truncation)?;
        state.params = stats.iter().map(|s| sample_cluster_params(&self.model, s, rng)).collect();
        Ok(())
    }

    /// Redraws all trajectories.
    pub fn sweep_assignments<R: Rng + ?Sized>(&self, state: &mut SamplerState, dataset: &PanelDataset, rng: &mut R) -> Result<()> {
        let k = self.config.truncation;
        let n_periods = dataset.n_periods();
        let coupled = self.config.trajectory_update == TrajectoryUpdate::Coupled;
        // counts[t][k]: occupancy at t, kept current as units move.
        let mut counts: Vec<Vec<usize>> = (0..n_periods).map(|t| state.assignments.counts(t, k)).collect();
        for unit in 0..dataset.n_units() {
            let mut potentials = emission_table(dataset, unit, &state.params);
            if coupled {
                for t in 0..n_periods.saturating_sub(1) {
                    let own = state.assignments.cluster(unit, t);
                    counts[t][own] -= 1;
                    let shift = stick_prior_shift(&counts[t], state.weights.pi_row(t + 1), self.gamma.value());
                    for (j, s) in shift.iter().enumerate() {
                        potentials[t * k + j] += s;
                    }
                }
            }
            let filter = filter_log_potentials(&potentials, &state.weights, state.p)
                .map_err(|period| Error::FilterUnderflow { unit, period })?;
            let path = backward_sample(&filter, &state.weights, state.p, rng);
            if coupled {
                for t in 0..n_periods.saturating_sub(1) {
                    counts[t][path[t]] += 1;
                }
            }
            state.assignments.set_trajectory(unit, &path);
        }
        Ok(())
    }

    /// One full iteration: parameters, stickiness, weights, trajectories
    /// (indicators summed out), then indicators given the new trajectories.
    pub fn step<R: Rng + ?Sized>(&self, state: &mut SamplerState, dataset: &PanelDataset, rng: &mut R) -> Result<()> {
        self.sweep_params(state, dataset, rng)?;
        if self.config.fixed_stickiness.is_none() {
            state.p = sample_stickiness(&state.assignments, self.config.alpha_p, self.config.beta_p, rng);
        }
        sweep_stick_weights(state, self.gamma, self.config.truncation, rng)?;
        self.sweep_assignments(state, dataset, rng)?;
        sweep_sticky_indicators(state, rng);
        state.log_joint = self.log_joint(dataset, state);
        Ok(())
    }

    /// Log joint density of data, parameters, weights, stickiness and
    /// assignments, with the sticky indicators summed out.
    pub fn log_joint(&self, dataset: &PanelDataset, state: &SamplerState) -> f64 {
        let k = self.config.truncation;
        let gamma = self.gamma.value();
        let a = &state.assignments;
        let mut lj = 0.0;
        if self.config.fixed_stickiness.is_none() {
            lj += ln_beta_density(state.p, self.config.alpha_p, self.config.beta_p);
        }
        for params in &state.params {
            lj += self.model.log_prior(params);
        }
        let mut prev_counts = vec![0usize; k];
        for t in 0..a.n_periods() {
            for (j, &(alpha, beta)) in stick_posterior_params(&prev_counts, gamma, k).iter().enumerate() {
                lj += ln_beta_density(state.weights.pi_row(t)[j], alpha, beta);
            }
            for i in 0..a.n_units() {
                let g = a.cluster(i, t);
                let q = state.weights.q(t, g);
                lj += if t == 0 {
                    q.ln()
                } else {
                    let stay = if a.cluster(i, t - 1) == g { state.p } else { 0.0 };
                    ((1.0 - state.p) * q + stay).ln()
                };
                if let Some(cell) = dataset.cell(i, t) {
                    lj += crate::emissions::log_likelihood(cell, &state.params[g]);
                }
            }
            prev_counts = a.counts(t, k);
        }
        lj
    }
}

/// Change in the log Beta prior of next period's sticks when one unit is
/// added to cluster `k`, for every `k`, given the other units' counts.
///
/// Adding to cluster `k` raises the first shape of stick `k` and the second
/// shape of every earlier stick.
fn stick_prior_shift(counts_without: &[usize], next_pi: &[f64], gamma: f64) -> Vec<f64> {
    let k = next_pi.len();
    let params = stick_posterior_params(counts_without, gamma, k);
    let mut out = vec![0.0; k];
    let mut earlier = 0.0;
    for (j, slot) in out.iter_mut().enumerate() {
        if j + 1 < k {
            let (a, b) = params[j];
            let pi = next_pi[j];
            *slot = earlier + pi.ln() + ((a + b) / a).ln();
            earlier += (1.0 - pi).ln() + ((a + b) / b).ln();
        } else {
            *slot = earlier;
        }
    }
    out
}

/// Sticky indicators for every unit and period after the first:
/// `P(d = 1) = p / (p + (1 - p) q_k^t)` when the unit stayed in `k`, else 0.
pub fn sweep_sticky_indicators<R: Rng + ?Sized>(state: &mut SamplerState, rng: &mut R) {
    let p = state.p;
    let a = &mut state.assignments;
    for i in 0..a.n_units() {
        a.set_sticky(i, 0, false);
        for t in 1..a.n_periods() {
            let k = a.cluster(i, t);
            let d = if k == a.cluster(i, t - 1) && p > 0.0 {
                let prob = p / (p + (1.0 - p) * state.weights.q(t, k));
                rng.random::<f64>() < prob
            } else {
                false
            };
            a.set_sticky(i, t, d);
        }
    }
}

/// `p ~ Beta(alpha_p + N1, beta_p + N2)` with `N1`, `N2` the numbers of sticky
/// and non-sticky indicators over periods after the first.
pub fn sample_stickiness<R: Rng + ?Sized>(assignments: &AssignmentState, alpha_p: f64, beta_p: f64, rng: &mut R) -> f64 {
    let (a, b) = stickiness_posterior(assignments, alpha_p, beta_p);
    draw_beta(a, b, rng)
}

pub fn stickiness_posterior(assignments: &AssignmentState, alpha_p: f64, beta_p: f64) -> (f64, f64) {
    let mut sticky = 0usize;
    let mut total = 0usize;
    for i in 0..assignments.n_units() {
        for t in 1..assignments.n_periods() {
            total += 1;
            sticky += usize::from(assignments.sticky(i, t));
        }
    }
    (alpha_p + sticky as f64, beta_p + (total - sticky) as f64)
}

/// Beta parameters of period `t`'s sticks given the previous period's
/// occupancy and this period's non-sticky occupancy.
pub fn stick_weight_posterior(assignments: &AssignmentState, t: usize, gamma: f64, truncation: usize) -> Vec<(f64, f64)> {
    let mut counts = assignments.nonsticky_counts(t, truncation);
    if t > 0 {
        for (c, prev) in counts.iter_mut().zip(assignments.counts(t - 1, truncation)) {
            *c += prev;
        }
    }
    stick_posterior_params(&counts, gamma, truncation)
}

/// Redraws every period's sticks from their Beta conditionals and
/// recomputes the weights; the last stick stays pinned at 1.
pub fn sweep_stick_weights<R: Rng + ?Sized>(
    state: &mut SamplerState,
    gamma: Concentration,
    truncation: usize,
    rng: &mut R,
) -> Result<()> {
    for t in 0..state.assignments.n_periods() {
        let mut row: Vec<f64> = stick_weight_posterior(&state.assignments, t, gamma.value(), truncation)
            .into_iter()
            .map(|(a, b)| draw_beta(a, b, rng))
            .collect();
        row.push(1.0);
        debug_assert!((stick_break(&row)?.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        state.weights.set_pi_row(t, &row)?;
    }
    Ok(())
}

/// One stored posterior draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Draw {
    pub iteration: usize,
    /// Cluster indices, unit-major `N × T`.
    pub g: Vec<usize>,
    /// Sticky indicators, unit-major `N × T`.
    pub d: Vec<bool>,
    pub p: f64,
    pub log_joint: f64,
    /// Parameters of occupied clusters only.
    pub params: BTreeMap<usize, Vec<f64>>,
}

impl Draw {
    fn capture(iteration: usize, state: &SamplerState) -> Self {
        let g = state.assignments.raw_clusters().to_vec();
        let mut params = BTreeMap::new();
        for &k in &g {
            params.entry(k).or_insert_with(|| state.params[k].values.clone());
        }
        Draw {
            iteration,
            g,
            d: state.assignments.raw_indicators().to_vec(),
            p: state.p,
            log_joint: state.log_joint,
            params,
        }
    }
}

/// Stored draws of one or more chains over the same panel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorDraws {
    pub n_units: usize,
    pub n_periods: usize,
    pub draws: Vec<Draw>,
}

impl PosteriorDraws {
    pub fn new(n_units: usize, n_periods: usize, draws: Vec<Draw>) -> Result<Self> {
        for (idx, d) in draws.iter().enumerate() {
            if d.g.len() != n_units * n_periods || d.d.len() != n_units * n_periods {
                return Err(Error::DimensionMismatch(format!(
                    "draw {idx} does not cover {n_units}×{n_periods} cells"
                )));
            }
        }
        Ok(PosteriorDraws {
            n_units,
            n_periods,
            draws,
        })
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    #[inline]
    pub fn cluster(&self, draw: usize, unit: usize, period: usize) -> usize {
        self.draws[draw].g[unit * self.n_periods + period]
    }

    /// Pools the draws of several chains.
    pub fn concat(parts: Vec<PosteriorDraws>) -> Result<Self> {
        let mut iter = parts.into_iter();
        let mut first = iter.next().ok_or(Error::EmptyDraws)?;
        for part in iter {
            if part.n_units != first.n_units || part.n_periods != first.n_periods {
                return Err(Error::DimensionMismatch("chains cover different panels".into()));
            }
            first.draws.extend(part.draws);
        }
        Ok(first)
    }
}

/// Per-sweep scalar traces of a chain, burn-in included.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ChainTrace {
    pub log_joint: Vec<f64>,
    pub p: Vec<f64>,
    pub n_occupied: Vec<usize>,
    pub max_cluster: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct ChainOutput {
    pub chain: usize,
    pub seed: u64,
    pub draws: PosteriorDraws,
    pub trace: ChainTrace,
    /// Fraction of post-burn-in sweeps whose highest occupied cluster was the
    /// last one available.
    pub truncation_hit_rate: f64,
}

impl ChainOutput {
    /// Raised when the truncation level was reached in more than 1% of
    /// post-burn-in sweeps.
    pub fn truncation_alarm(&self) -> bool {
        self.truncation_hit_rate > 0.01
    }
}

/// The random stream of chain `chain` under `seed`.
pub fn chain_rng(seed: u64, chain: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain as u64);
    rng
}

/// Runs one chain and keeps its thinned post-burn-in draws.
pub fn run_chain(dataset: &PanelDataset, config: &SamplerConfig, chain: usize) -> Result<ChainOutput> {
    let sampler = GibbsSampler::for_dataset(dataset, config.clone())?;
    let mut rng = chain_rng(config.seed, chain);
    let mut state = sampler.initialize(dataset, &mut rng)?;
    let mut draws = Vec::with_capacity(config.n_stored());
    let mut trace = ChainTrace::default();
    let mut hits = 0usize;
    for iteration in 0..config.n_iterations {
        sampler.step(&mut state, dataset, &mut rng)?;
        let max_cluster = state.assignments.max_cluster();
        trace.log_joint.push(state.log_joint);
        trace.p.push(state.p);
        trace.n_occupied.push(state.assignments.n_occupied());
        trace.max_cluster.push(max_cluster);
        if iteration >= config.burn_in {
            hits += usize::from(max_cluster + 1 == config.truncation);
            if (iteration - config.burn_in) % config.thinning == 0 {
                draws.push(Draw::capture(iteration, &state));
            }
        }
    }
    let truncation_hit_rate = hits as f64 / (config.n_iterations - config.burn_in) as f64;
    let out = ChainOutput {
        chain,
        seed: config.seed,
        draws: PosteriorDraws::new(dataset.n_units(), dataset.n_periods(), draws)?,
        trace,
        truncation_hit_rate,
    };
    if out.truncation_alarm() {
        log::warn!(
            "chain {chain}: the truncation level K = {} was reached in {:.1}% of post-burn-in sweeps; consider raising K",
            config.truncation,
            100.0 * truncation_hit_rate
        );
    }
    Ok(out)
}

/// Runs `config.chains` chains concurrently, one random stream each.
/// Results are ordered by chain and do not depend on the thread count.
pub fn run_chains(dataset: &PanelDataset, config: &SamplerConfig) -> Result<Vec<ChainOutput>> {
    config.validate()?;
    (0..config.chains)
        .into_par_iter()
        .map(|c| run_chain(dataset, config, c))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{ChannelDecl, Unit};
    use crate::emissions::{CellObservations, ChannelKind, ChannelObs, ChannelSpec};

    fn small_dataset(n_units: usize, n_periods: usize) -> PanelDataset {
        let cells = (0..n_units * n_periods)
            .map(|c| Some(CellObservations::new(vec![ChannelObs::binary((c % 3) as u64, 2).unwrap()])))
            .collect();
        PanelDataset::new(
            vec![ChannelDecl::new("v", ChannelKind::Bernoulli)],
            (1..=n_periods as i64).collect(),
            vec![],
            (0..n_units).map(|i| Unit { id: format!("u{i}"), attributes: vec![] }).collect(),
            cells,
        )
        .unwrap()
    }

    fn state_with(assign: &[Vec<usize>], pi_rows: Vec<Vec<f64>>, p: f64) -> SamplerState {
        SamplerState {
            assignments: AssignmentState::from_matrix(assign).unwrap(),
            weights: StickWeights::from_pi_rows(pi_rows).unwrap(),
            p,
            params: vec![],
            log_joint: 0.0,
        }
    }

    #[test]
    fn config_validation() {
        assert!(SamplerConfig::default().validate().is_ok());
        let bad = [
            SamplerConfig { truncation: 1, ..Default::default() },
            SamplerConfig { burn_in: 10, n_iterations: 10, ..Default::default() },
            SamplerConfig { thinning: 0, ..Default::default() },
            SamplerConfig { gamma: 0.0, ..Default::default() },
            SamplerConfig { fixed_stickiness: Some(1.5), ..Default::default() },
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }

    #[test]
    fn single_cluster_init() {
        let ds = small_dataset(3, 4);
        let cfg = SamplerConfig { init: InitMode::SingleCluster, truncation: 4, ..Default::default() };
        let sampler = GibbsSampler::for_dataset(&ds, cfg).unwrap();
        let mut rng = chain_rng(1, 0);
        let s = sampler.initialize(&ds, &mut rng).unwrap();
        assert!(s.assignments.raw_clusters().iter().all(|&k| k == 0));
        assert!(s.assignments.raw_indicators().iter().all(|&d| !d));
        assert!(s.log_joint.is_finite());
    }

    #[test]
    fn forced_full_stickiness_gives_constant_trajectories() {
        let ds = small_dataset(6, 5);
        let cfg = SamplerConfig { fixed_stickiness: Some(1.0), truncation: 5, ..Default::default() };
        let sampler = GibbsSampler::for_dataset(&ds, cfg).unwrap();
        let mut rng = chain_rng(2, 0);
        for _ in 0..50 {
            let s = sampler.initialize(&ds, &mut rng).unwrap();
            for i in 0..6 {
                let tr = s.assignments.trajectory(i);
                assert!(tr.iter().all(|&k| k == tr[0]));
            }
        }
    }

    #[test]
    fn sticky_indicator_probability() {
        // p = 0.5, q = 0.5, unit stayed → 0.5 / 0.75 = 2/3
        let mut rng = chain_rng(3, 0);
        let n = 60_000;
        let mut ones = 0;
        for _ in 0..n {
            let mut s = state_with(&[vec![0, 0]], vec![vec![0.5, 1.0], vec![0.5, 1.0]], 0.5);
            sweep_sticky_indicators(&mut s, &mut rng);
            ones += usize::from(s.assignments.sticky(0, 1));
            assert!(!s.assignments.sticky(0, 0));
        }
        let rate = ones as f64 / n as f64;
        assert!((rate - 2.0 / 3.0).abs() < 0.01, "{rate}");
    }

    #[test]
    fn sticky_indicator_zero_cases() {
        let mut rng = chain_rng(4, 0);
        let mut moved = state_with(&[vec![0, 1]], vec![vec![0.5, 1.0]; 2], 0.9);
        let mut unsticky = state_with(&[vec![0, 0]], vec![vec![0.5, 1.0]; 2], 0.0);
        for _ in 0..1000 {
            sweep_sticky_indicators(&mut moved, &mut rng);
            sweep_sticky_indicators(&mut unsticky, &mut rng);
            assert!(!moved.assignments.sticky(0, 1));
            assert!(!unsticky.assignments.sticky(0, 1));
        }
    }

    #[test]
    fn stickiness_posterior_counts() {
        // N = 2, T = 3, three of four indicators set → Beta(4, 2)
        let mut a = AssignmentState::from_matrix(&[vec![0, 0, 0], vec![1, 1, 1]]).unwrap();
        a.set_sticky(0, 1, true);
        a.set_sticky(0, 2, true);
        a.set_sticky(1, 2, true);
        assert_eq!(stickiness_posterior(&a, 1.0, 1.0), (4.0, 2.0));
        let all = AssignmentState::from_matrix(&vec![vec![0; 5]; 3]).unwrap();
        assert_eq!(stickiness_posterior(&all, 1.0, 1.0), (1.0, 13.0));
    }

    #[test]
    fn stick_weight_posterior_examples() {
        // period 0 has no predecessor: Beta(1 + n_k, gamma + tail of n)
        let a = AssignmentState::from_matrix(&[vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 0]]).unwrap();
        assert_eq!(stick_weight_posterior(&a, 0, 1.0, 3)[0], (3.0, 3.0));
        // n^{t-1} = [2, 2, 0], non-sticky n^t = [1, 0, 0] (others sticky)
        let mut b = a.clone();
        b.set_sticky(0, 1, true);
        b.set_sticky(2, 1, false);
        b.set_sticky(3, 1, true);
        b.set_cluster(1, 1, 1);
        b.set_sticky(1, 1, true);
        b.set_cluster(0, 1, 0);
        // unit 2 moved 1 → 0 non-sticky
        assert_eq!(stick_weight_posterior(&b, 1, 1.0, 3)[0], (4.0, 3.0));
        // all sticky → only previous counts remain
        let mut c = a.clone();
        for i in 0..4 {
            c.set_cluster(i, 1, c.cluster(i, 0));
            c.set_sticky(i, 1, true);
        }
        assert_eq!(stick_weight_posterior(&c, 1, 1.0, 3), vec![(3.0, 3.0), (3.0, 1.0)]);
    }

    #[test]
    fn stick_prior_shift_matches_direct_difference() {
        let counts = [3usize, 0, 2, 1];
        let pi = [0.4, 0.2, 0.7, 1.0];
        let gamma = 1.3;
        let shift = stick_prior_shift(&counts, &pi, gamma);
        let log_prior = |c: &[usize]| -> f64 {
            stick_posterior_params(c, gamma, 4)
                .iter()
                .zip(&pi)
                .map(|(&(a, b), &x)| ln_beta_density(x, a, b))
                .sum()
        };
        let base = log_prior(&counts);
        for k in 0..4 {
            let mut c = counts;
            c[k] += 1;
            assert!((shift[k] - (log_prior(&c) - base)).abs() < 1e-12, "k = {k}");
        }
    }

    #[test]
    fn params_sweep_draws_every_cluster() {
        let ds = small_dataset(2, 2);
        let sampler = GibbsSampler::for_dataset(&ds, SamplerConfig { truncation: 3, ..Default::default() }).unwrap();
        let mut rng = chain_rng(5, 0);
        let mut s = sampler.initialize(&ds, &mut rng).unwrap();
        sampler.sweep_params(&mut s, &ds, &mut rng).unwrap();
        assert_eq!(s.params.len(), 3);
    }

    #[test]
    fn emission_model_mismatch_rejected() {
        let ds = small_dataset(2, 2);
        let model = EmissionModel::new(vec![ChannelSpec::poisson("v", 1.0, 1.0).unwrap()]).unwrap();
        let sampler = GibbsSampler::new(model, SamplerConfig::default()).unwrap();
        let mut rng = chain_rng(6, 0);
        assert!(sampler.initialize(&ds, &mut rng).is_err());
    }

    #[test]
    fn stored_draw_count() {
        let ds = small_dataset(2, 3);
        let cfg = SamplerConfig { n_iterations: 11, burn_in: 10, thinning: 1, truncation: 3, ..Default::default() };
        let out = run_chain(&ds, &cfg, 0).unwrap();
        assert_eq!(out.draws.len(), 1);
        assert_eq!(out.trace.log_joint.len(), 11);
        assert!(out.trace.log_joint.iter().all(|l| l.is_finite()));
        let cfg = SamplerConfig { n_iterations: 20, burn_in: 5, thinning: 4, truncation: 3, ..Default::default() };
        assert_eq!(run_chain(&ds, &cfg, 0).unwrap().draws.len(), cfg.n_stored());
        assert_eq!(cfg.n_stored(), 4);
    }
}
