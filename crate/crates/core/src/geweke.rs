//! Joint-distribution check of the sampler.
//!
//! The marginal-conditional simulator draws latent quantities from the prior
//! independently. The successive-conditional simulator alternates one Gibbs
//! iteration with a fresh draw of the data given the current state. Both
//! target the prior, so the moments of any latent summary must agree.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{effective_sample_size, geweke_z, mean};
use crate::emissions::EmissionModel;
use crate::error::Result;
use crate::sampler::{GibbsSampler, SamplerConfig, SamplerState};
use crate::simulation::{simulate_panel, ChannelLayout};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GewekeSetup {
    pub n_units: usize,
    pub n_periods: usize,
    pub layout: Vec<ChannelLayout>,
    pub config: SamplerConfig,
    pub n_marginal: usize,
    pub n_successive: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GewekeRow {
    pub statistic: String,
    pub marginal_mean: f64,
    pub successive_mean: f64,
    pub marginal_ess: f64,
    pub successive_ess: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GewekeReport {
    pub rows: Vec<GewekeRow>,
}

impl GewekeReport {
    pub fn max_abs_z(&self) -> f64 {
        self.rows.iter().map(|r| r.z.abs()).fold(0.0, f64::max)
    }

    pub fn min_ess(&self) -> f64 {
        self.rows
            .iter()
            .flat_map(|r| [r.marginal_ess, r.successive_ess])
            .fold(f64::INFINITY, f64::min)
    }
}

const NAMES: [&str; 8] = ["p", "p^2", "theta_1", "theta_1^2", "occupied", "occupied^2", "sticky", "sticky^2"];

fn summaries(state: &SamplerState) -> [f64; 8] {
    let theta = state.params[0].values[0];
    let occ = state.assignments.n_occupied() as f64;
    let sticky = state.assignments.raw_indicators().iter().filter(|&&d| d).count() as f64;
    [state.p, state.p * state.p, theta, theta * theta, occ, occ * occ, sticky, sticky * sticky]
}

pub fn run_geweke(setup: &GewekeSetup) -> Result<GewekeReport> {
    let model = EmissionModel::for_channels(
        setup.layout.iter().map(|c| (c.name.as_str(), c.kind)),
        &setup.config.channel_priors,
    )?;
    let sampler = GibbsSampler::new(model, setup.config.clone())?;
    let mut marginal: Vec<Vec<f64>> = vec![Vec::with_capacity(setup.n_marginal); NAMES.len()];
    let mut successive: Vec<Vec<f64>> = vec![Vec::with_capacity(setup.n_successive); NAMES.len()];

    let mut rng = ChaCha8Rng::seed_from_u64(setup.seed);
    for _ in 0..setup.n_marginal {
        let state = sampler.sample_prior_state(setup.n_units, setup.n_periods, &mut rng)?;
        for (col, v) in marginal.iter_mut().zip(summaries(&state)) {
            col.push(v);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(setup.seed);
    rng.set_stream(1);
    let mut state = sampler.sample_prior_state(setup.n_units, setup.n_periods, &mut rng)?;
    for _ in 0..setup.n_successive {
        let data = simulate_panel(&setup.layout, &state.assignments, &state.params, &mut rng)?;
        sampler.step(&mut state, &data, &mut rng)?;
        for (col, v) in successive.iter_mut().zip(summaries(&state)) {
            col.push(v);
        }
    }

    let rows = NAMES
        .iter()
        .zip(marginal.iter().zip(&successive))
        .map(|(name, (m, s))| GewekeRow {
            statistic: name.to_string(),
            marginal_mean: mean(m),
            successive_mean: mean(s),
            marginal_ess: effective_sample_size(m),
            successive_ess: effective_sample_size(s),
            z: geweke_z(m, s),
        })
        .collect();
    Ok(GewekeReport { rows })
}
