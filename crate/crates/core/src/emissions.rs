//! Conjugate observation channels.
//!
//! Binary channels are Bernoulli with a Beta prior on the success probability;
//! count channels are Poisson with a Gamma(shape, rate) prior on the rate.
//! Cells store only aggregated sufficient statistics, so a channel with zero
//! trials or zero exposures contributes nothing.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::dataset::PanelDataset;
use crate::error::{Error, Result};
use crate::prior::AssignmentState;
use crate::util::{draw_beta, draw_gamma_rate, ln_beta_density, xlny};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    Bernoulli,
    Poisson,
}

impl ChannelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ChannelKind::Bernoulli => "bernoulli",
            ChannelKind::Poisson => "poisson",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "bernoulli" => Some(ChannelKind::Bernoulli),
            "poisson" => Some(ChannelKind::Poisson),
            _ => None,
        }
    }

    pub fn default_prior(self) -> ChannelPrior {
        match self {
            ChannelKind::Bernoulli => ChannelPrior::Bernoulli { alpha: 1.0, beta: 1.0 },
            ChannelKind::Poisson => ChannelPrior::Poisson { shape: 1.0, rate: 1.0 },
        }
    }
}

/// Conjugate prior of one channel. The Gamma prior uses the shape–rate
/// convention, so its mean is `shape / rate`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelPrior {
    Bernoulli { alpha: f64, beta: f64 },
    Poisson { shape: f64, rate: f64 },
}

impl ChannelPrior {
    pub fn kind(&self) -> ChannelKind {
        match self {
            ChannelPrior::Bernoulli { .. } => ChannelKind::Bernoulli,
            ChannelPrior::Poisson { .. } => ChannelKind::Poisson,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b) = match *self {
            ChannelPrior::Bernoulli { alpha, beta } => (alpha, beta),
            ChannelPrior::Poisson { shape, rate } => (shape, rate),
        };
        if a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite() {
            Ok(())
        } else {
            Err(Error::param("channel prior", format!("hyperparameters must be positive, got ({a}, {b})")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub name: String,
    pub prior: ChannelPrior,
}

impl ChannelSpec {
    pub fn bernoulli(name: impl Into<String>, alpha: f64, beta: f64) -> Result<Self> {
        let prior = ChannelPrior::Bernoulli { alpha, beta };
        prior.validate()?;
        Ok(ChannelSpec { name: name.into(), prior })
    }

    pub fn poisson(name: impl Into<String>, shape: f64, rate: f64) -> Result<Self> {
        let prior = ChannelPrior::Poisson { shape, rate };
        prior.validate()?;
        Ok(ChannelSpec { name: name.into(), prior })
    }

    pub fn kind(&self) -> ChannelKind {
        self.prior.kind()
    }
}

/// Ordered channel specs; cell observations and parameters align with it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmissionModel {
    channels: Vec<ChannelSpec>,
}

impl EmissionModel {
    pub fn new(channels: Vec<ChannelSpec>) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::param("channels", "at least one channel is required"));
        }
        for (i, c) in channels.iter().enumerate() {
            c.prior.validate()?;
            if channels[..i].iter().any(|o| o.name == c.name) {
                return Err(Error::param("channels", format!("duplicate channel `{}`", c.name)));
            }
        }
        Ok(EmissionModel { channels })
    }

    /// Channels of `dataset` with priors looked up by name, falling back to
    /// Beta(1, 1) and Gamma(1, 1).
    pub fn for_dataset(dataset: &PanelDataset, priors: &BTreeMap<String, ChannelPrior>) -> Result<Self> {
        EmissionModel::for_channels(dataset.channels().iter().map(|c| (c.name.as_str(), c.kind)), priors)
    }

    pub fn for_channels<'a>(
        decls: impl IntoIterator<Item = (&'a str, ChannelKind)>,
        priors: &BTreeMap<String, ChannelPrior>,
    ) -> Result<Self> {
        let decls: Vec<(&str, ChannelKind)> = decls.into_iter().collect();
        for name in priors.keys() {
            if !decls.iter().any(|(n, _)| n == name) {
                return Err(Error::param("channel_priors", format!("unknown channel `{name}`")));
            }
        }
        let channels = decls
            .iter()
            .map(|&(name, kind)| {
                let prior = priors.get(name).copied().unwrap_or_else(|| kind.default_prior());
                if prior.kind() != kind {
                    return Err(Error::param(
                        "channel_priors",
                        format!("channel `{name}` is {} but its prior is {}", kind.as_str(), prior.kind().as_str()),
                    ));
                }
                Ok(ChannelSpec {
                    name: name.to_string(),
                    prior,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        EmissionModel::new(channels)
    }

    pub fn channels(&self) -> &[ChannelSpec] {
        &self.channels
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn empty_stats(&self) -> ClusterStats {
        ClusterStats {
            channels: self
                .channels
                .iter()
                .map(|c| match c.kind() {
                    ChannelKind::Bernoulli => ChannelStats::Binary { successes: 0, failures: 0 },
                    ChannelKind::Poisson => ChannelStats::Count { total: 0, exposures: 0 },
                })
                .collect(),
        }
    }

    /// Log prior density of a parameter vector.
    pub fn log_prior(&self, params: &ClusterParams) -> f64 {
        self.channels
            .iter()
            .zip(&params.values)
            .map(|(c, &v)| match c.prior {
                ChannelPrior::Bernoulli { alpha, beta } => ln_beta_density(v, alpha, beta),
                ChannelPrior::Poisson { shape, rate } => {
                    shape * rate.ln() - ln_gamma(shape) + xlny(shape - 1.0, v) - rate * v
                }
            })
            .sum()
    }

    pub fn sample_prior_params<R: Rng + ?Sized>(&self, rng: &mut R) -> ClusterParams {
        sample_cluster_params(self, &self.empty_stats(), rng)
    }
}

/// Aggregated observations of one channel in one cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelObs {
    Binary {
        successes: u64,
        trials: u64,
    },
    /// `log_factorial_sum` is `sum_i ln(b_i!)` over the individual counts,
    /// the only part of the Poisson likelihood not recoverable from the total.
    Count {
        total: u64,
        exposures: u64,
        log_factorial_sum: f64,
    },
}

impl ChannelObs {
    pub fn binary(successes: u64, trials: u64) -> Result<Self> {
        if successes > trials {
            return Err(Error::param("successes", format!("{successes} successes exceed {trials} trials")));
        }
        Ok(ChannelObs::Binary { successes, trials })
    }

    /// Count channel from the individual counts, one per exposure.
    pub fn count_from_values(values: &[u64]) -> Self {
        ChannelObs::Count {
            total: values.iter().sum(),
            exposures: values.len() as u64,
            log_factorial_sum: values.iter().map(|&b| ln_factorial(b)).sum(),
        }
    }

    pub fn count(total: u64, exposures: u64, log_factorial_sum: f64) -> Result<Self> {
        if exposures == 0 && total > 0 {
            return Err(Error::param("exposures", format!("count {total} recorded with zero exposures")));
        }
        if !(log_factorial_sum >= 0.0 && log_factorial_sum.is_finite()) {
            return Err(Error::param("log_factorial_sum", format!("must be finite and nonnegative, got {log_factorial_sum}")));
        }
        Ok(ChannelObs::Count {
            total,
            exposures,
            log_factorial_sum,
        })
    }

    pub fn kind(&self) -> ChannelKind {
        match self {
            ChannelObs::Binary { .. } => ChannelKind::Bernoulli,
            ChannelObs::Count { .. } => ChannelKind::Poisson,
        }
    }

    /// An observation carrying no data: zero trials or zero exposures.
    pub fn empty(kind: ChannelKind) -> Self {
        match kind {
            ChannelKind::Bernoulli => ChannelObs::Binary { successes: 0, trials: 0 },
            ChannelKind::Poisson => ChannelObs::Count {
                total: 0,
                exposures: 0,
                log_factorial_sum: 0.0,
            },
        }
    }

    fn merge(&self, other: &ChannelObs) -> Result<ChannelObs> {
        match (*self, *other) {
            (ChannelObs::Binary { successes: s1, trials: n1 }, ChannelObs::Binary { successes: s2, trials: n2 }) => {
                Ok(ChannelObs::Binary {
                    successes: s1 + s2,
                    trials: n1 + n2,
                })
            }
            (
                ChannelObs::Count {
                    total: c1,
                    exposures: e1,
                    log_factorial_sum: l1,
                },
                ChannelObs::Count {
                    total: c2,
                    exposures: e2,
                    log_factorial_sum: l2,
                },
            ) => Ok(ChannelObs::Count {
                total: c1 + c2,
                exposures: e1 + e2,
                log_factorial_sum: l1 + l2,
            }),
            _ => Err(Error::DimensionMismatch("cannot merge channels of different kinds".into())),
        }
    }
}

pub fn ln_factorial(n: u64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    ln_gamma(n as f64 + 1.0).max(0.0)
}

/// All channels of one (unit, period) cell, in model order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellObservations {
    pub channels: Vec<ChannelObs>,
}

impl CellObservations {
    pub fn new(channels: Vec<ChannelObs>) -> Self {
        CellObservations { channels }
    }

    /// Pools two cells' observations channel by channel.
    pub fn merge(&self, other: &CellObservations) -> Result<CellObservations> {
        if self.channels.len() != other.channels.len() {
            return Err(Error::DimensionMismatch("cells have different channel counts".into()));
        }
        Ok(CellObservations {
            channels: self
                .channels
                .iter()
                .zip(&other.channels)
                .map(|(a, b)| a.merge(b))
                .collect::<Result<_>>()?,
        })
    }
}

/// Per-channel parameters of one cluster: a success probability for each
/// binary channel, a rate for each count channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterParams {
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelStats {
    Binary { successes: u64, failures: u64 },
    Count { total: u64, exposures: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterStats {
    pub channels: Vec<ChannelStats>,
}

impl ClusterStats {
    pub fn add_cell(&mut self, cell: &CellObservations) {
        for (stat, obs) in self.channels.iter_mut().zip(&cell.channels) {
            match (stat, obs) {
                (ChannelStats::Binary { successes, failures }, ChannelObs::Binary { successes: s, trials }) => {
                    *successes += s;
                    *failures += trials - s;
                }
                (ChannelStats::Count { total, exposures }, ChannelObs::Count { total: c, exposures: e, .. }) => {
                    *total += c;
                    *exposures += e;
                }
                _ => debug_assert!(false, "channel kind mismatch"),
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.channels.iter().all(|c| match *c {
            ChannelStats::Binary { successes, failures } => successes + failures == 0,
            ChannelStats::Count { exposures, .. } => exposures == 0,
        })
    }
}

/// Log-likelihood of a cell under one cluster's parameters.
///
/// Bernoulli channels contribute `s ln(theta) + (n - s) ln(1 - theta)`;
/// Poisson channels contribute `C ln(lambda) - E lambda - sum ln(b!)`.
/// Returns `-inf` only when an impossible event is observed.
pub fn log_likelihood(cell: &CellObservations, params: &ClusterParams) -> f64 {
    debug_assert_eq!(cell.channels.len(), params.values.len());
    cell.channels
        .iter()
        .zip(&params.values)
        .map(|(obs, &v)| match *obs {
            ChannelObs::Binary { successes, trials } => {
                xlny(successes as f64, v) + xlny((trials - successes) as f64, 1.0 - v)
            }
            ChannelObs::Count {
                total,
                exposures,
                log_factorial_sum,
            } => xlny(total as f64, v) - exposures as f64 * v - log_factorial_sum,
        })
        .sum()
}

/// Aggregate statistics of every observed cell assigned to cluster `k`.
pub fn sufficient_stats(
    model: &EmissionModel,
    dataset: &PanelDataset,
    assignments: &AssignmentState,
    k: usize,
) -> Result<ClusterStats> {
    check_dims(dataset, assignments)?;
    let mut stats = model.empty_stats();
    for i in 0..dataset.n_units() {
        for t in 0..dataset.n_periods() {
            if assignments.cluster(i, t) == k {
                if let Some(cell) = dataset.cell(i, t) {
                    stats.add_cell(cell);
                }
            }
        }
    }
    Ok(stats)
}

/// Statistics for clusters `0..truncation` in one pass.
pub fn all_cluster_stats(
    model: &EmissionModel,
    dataset: &PanelDataset,
    assignments: &AssignmentState,
    truncation: usize,
) -> Result<Vec<ClusterStats>> {
    check_dims(dataset, assignments)?;
    let mut stats = vec![model.empty_stats(); truncation];
    for i in 0..dataset.n_units() {
        for t in 0..dataset.n_periods() {
            if let Some(cell) = dataset.cell(i, t) {
                let k = assignments.cluster(i, t);
                if k >= truncation {
                    return Err(Error::OutOfRange(format!("cluster {k} at unit {i}, period {t} exceeds K = {truncation}")));
                }
                stats[k].add_cell(cell);
            }
        }
    }
    Ok(stats)
}

fn check_dims(dataset: &PanelDataset, assignments: &AssignmentState) -> Result<()> {
    if dataset.n_units() != assignments.n_units() || dataset.n_periods() != assignments.n_periods() {
        return Err(Error::DimensionMismatch(format!(
            "dataset is {}×{} but assignments are {}×{}",
            dataset.n_units(),
            dataset.n_periods(),
            assignments.n_units(),
            assignments.n_periods()
        )));
    }
    Ok(())
}

/// Draws cluster parameters from their conjugate posterior:
/// `theta ~ Beta(alpha + successes, beta + failures)` and
/// `lambda ~ Gamma(shape + C, rate + E)`.
pub fn sample_cluster_params<R: Rng + ?Sized>(model: &EmissionModel, stats: &ClusterStats, rng: &mut R) -> ClusterParams {
    let values = model
        .channels
        .iter()
        .zip(&stats.channels)
        .map(|(spec, stat)| match (spec.prior, *stat) {
            (ChannelPrior::Bernoulli { alpha, beta }, ChannelStats::Binary { successes, failures }) => {
                draw_beta(alpha + successes as f64, beta + failures as f64, rng)
            }
            (ChannelPrior::Poisson { shape, rate }, ChannelStats::Count { total, exposures }) => {
                draw_gamma_rate(shape + total as f64, rate + exposures as f64, rng)
            }
            _ => panic!("channel `{}` statistics do not match its prior", spec.name),
        })
        .collect();
    ClusterParams { values }
}

/// Observation design of one channel: how many trials (binary) or exposures
/// (count) a cell carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelDesign {
    pub kind: ChannelKind,
    pub size: u64,
}

/// Simulates one cell's observations given cluster parameters.
pub fn simulate_cell<R: Rng + ?Sized>(design: &[ChannelDesign], params: &ClusterParams, rng: &mut R) -> CellObservations {
    let channels = design
        .iter()
        .zip(&params.values)
        .map(|(d, &v)| match d.kind {
            ChannelKind::Bernoulli => {
                let successes = Binomial::new(d.size, v.clamp(0.0, 1.0)).map(|b| b.sample(rng)).unwrap_or(0);
                ChannelObs::Binary {
                    successes,
                    trials: d.size,
                }
            }
            ChannelKind::Poisson => {
                let values: Vec<u64> = (0..d.size)
                    .map(|_| if v > 0.0 { Poisson::new(v).map(|p| p.sample(rng) as u64).unwrap_or(0) } else { 0 })
                    .collect();
                ChannelObs::count_from_values(&values)
            }
        })
        .collect();
    CellObservations { channels }
}
