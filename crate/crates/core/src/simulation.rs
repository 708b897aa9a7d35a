//! Synthetic panels with known memberships.
//!
//! The two fixed regimes share one layout: 50 units over 30 periods, three
//! starting groups of 20, 20 and 10 units, and four binary items per cell
//! with one trial each. Item probabilities are redrawn every period from
//! group-specific uniform ranges.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::dataset::{ChannelDecl, PanelDataset, Unit};
use crate::emissions::{simulate_cell, ChannelDesign, ChannelKind, ClusterParams, EmissionModel};
use crate::error::{Error, Result};
use crate::io::LegislativeRecord;
use crate::prior::AssignmentState;
use crate::sampler::{GibbsSampler, SamplerConfig};

pub const SIM_UNITS: usize = 50;
pub const SIM_PERIODS: usize = 30;
pub const SIM_ITEMS: usize = 4;
const GROUP_SIZES: [usize; 3] = [20, 20, 10];

/// Uniform ranges of the yea probability, by group then item.
pub const THETA_SUPPORT: [[(f64, f64); SIM_ITEMS]; 3] = [
    [(0.8, 1.0), (0.7, 1.0), (0.0, 0.2), (0.0, 0.3)],
    [(0.0, 0.2), (0.0, 0.3), (0.8, 1.0), (0.7, 1.0)],
    [(0.7, 1.0), (0.0, 0.2), (0.0, 0.3), (0.8, 1.0)],
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    StructuralBreak,
    GradualChange,
    PriorPredictive,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::StructuralBreak => "structural-break",
            Regime::GradualChange => "gradual-change",
            Regime::PriorPredictive => "prior-predictive",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "structural-break" => Some(Regime::StructuralBreak),
            "gradual-change" => Some(Regime::GradualChange),
            "prior-predictive" => Some(Regime::PriorPredictive),
            _ => None,
        }
    }
}

/// Ground truth behind a synthetic panel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationTruth {
    pub regime: Regime,
    pub seed: u64,
    /// Group of every unit and period, `N × T`.
    pub memberships: Vec<Vec<usize>>,
    /// `theta[group][channel][period]`.
    pub theta: Vec<Vec<Vec<f64>>>,
}

impl SimulationTruth {
    pub fn n_units(&self) -> usize {
        self.memberships.len()
    }

    pub fn n_periods(&self) -> usize {
        self.memberships.first().map_or(0, Vec::len)
    }

    /// Whether `unit` changed group entering `period` (0-based, ≥ 1).
    pub fn moved(&self, unit: usize, period: usize) -> bool {
        period > 0 && self.memberships[unit][period] != self.memberships[unit][period - 1]
    }

    /// Every `(unit, period)` at which a unit enters a new group.
    pub fn transitions(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n_units() {
            for t in 1..self.n_periods() {
                if self.moved(i, t) {
                    out.push((i, t));
                }
            }
        }
        out
    }
}

fn initial_groups() -> Vec<usize> {
    GROUP_SIZES.iter().enumerate().flat_map(|(g, &n)| std::iter::repeat_n(g, n)).collect()
}

fn sim_units(initial: &[usize]) -> Vec<Unit> {
    initial
        .iter()
        .enumerate()
        .map(|(i, g)| Unit {
            id: format!("u{:02}", i + 1),
            attributes: vec![format!("g{}", g + 1)],
        })
        .collect()
}

fn draw_sim_theta<R: Rng + ?Sized>(rng: &mut R) -> Vec<Vec<Vec<f64>>> {
    THETA_SUPPORT
        .iter()
        .map(|items| {
            items
                .iter()
                .map(|&(lo, hi)| (0..SIM_PERIODS).map(|_| rng.random_range(lo..hi)).collect())
                .collect()
        })
        .collect()
}

fn sim_dataset<R: Rng + ?Sized>(memberships: &[Vec<usize>], theta: &[Vec<Vec<f64>>], rng: &mut R) -> Result<PanelDataset> {
    let channels = (1..=SIM_ITEMS).map(|j| ChannelDecl::new(format!("item_{j}"), ChannelKind::Bernoulli)).collect();
    let design = vec![ChannelDesign { kind: ChannelKind::Bernoulli, size: 1 }; SIM_ITEMS];
    let mut cells = Vec::with_capacity(SIM_UNITS * SIM_PERIODS);
    for row in memberships {
        for (t, &g) in row.iter().enumerate() {
            let params = ClusterParams {
                values: (0..SIM_ITEMS).map(|j| theta[g][j][t]).collect(),
            };
            cells.push(Some(simulate_cell(&design, &params, rng)));
        }
    }
    let initial: Vec<usize> = memberships.iter().map(|r| r[0]).collect();
    PanelDataset::new(
        channels,
        (1..=SIM_PERIODS as i64).collect(),
        vec!["initial_group".into()],
        sim_units(&initial),
        cells,
    )
}

/// Two breaks. Entering period 10 (0-based): units 0-4 move 0→1 and units
/// 20-29 move 1→0. Entering period 20: units 5-9 move 0→1, units 40-44 move
/// 2→0 and units 45-49 move 2→1.
pub fn gen_structural_break(seed: u64) -> Result<(PanelDataset, SimulationTruth)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let initial = initial_groups();
    let mut memberships: Vec<Vec<usize>> = initial.iter().map(|&g| vec![g; SIM_PERIODS]).collect();
    let moves: [(usize, std::ops::Range<usize>, usize); 5] =
        [(10, 0..5, 1), (10, 20..30, 0), (20, 5..10, 1), (20, 40..45, 0), (20, 45..50, 1)];
    for (start, units, to) in moves {
        for i in units {
            memberships[i][start..].fill(to);
        }
    }
    let theta = draw_sim_theta(&mut rng);
    let dataset = sim_dataset(&memberships, &theta, &mut rng)?;
    Ok((
        dataset,
        SimulationTruth {
            regime: Regime::StructuralBreak,
            seed,
            memberships,
            theta,
        },
    ))
}

/// Gradual drift: units of groups 0 and 1 switch to the other group with
/// probability 0.5; every group-2 unit leaves, for group 0 or 1 with equal
/// odds. Each mover switches once, entering a period drawn uniformly from
/// 5..=24 (0-based).
pub fn gen_gradual_change(seed: u64) -> Result<(PanelDataset, SimulationTruth)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let initial = initial_groups();
    let mut memberships = Vec::with_capacity(SIM_UNITS);
    for &g in &initial {
        let mut row = vec![g; SIM_PERIODS];
        let target = match g {
            0 | 1 => rng.random_bool(0.5).then_some(1 - g),
            _ => Some(if rng.random_bool(0.5) { 0 } else { 1 }),
        };
        if let Some(to) = target {
            let start = rng.random_range(5..25);
            row[start..].fill(to);
        }
        memberships.push(row);
    }
    let theta = draw_sim_theta(&mut rng);
    let dataset = sim_dataset(&memberships, &theta, &mut rng)?;
    Ok((
        dataset,
        SimulationTruth {
            regime: Regime::GradualChange,
            seed,
            memberships,
            theta,
        },
    ))
}

/// One channel of a generated panel: its name, kind and per-cell size
/// (trials or exposures).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelLayout {
    pub name: String,
    pub kind: ChannelKind,
    pub size: u64,
}

impl ChannelLayout {
    pub fn new(name: impl Into<String>, kind: ChannelKind, size: u64) -> Self {
        ChannelLayout { name: name.into(), kind, size }
    }

    fn design(&self) -> ChannelDesign {
        ChannelDesign { kind: self.kind, size: self.size }
    }
}

/// Simulates every cell of an `N × T` panel given assignments and cluster
/// parameters.
pub fn simulate_panel<R: Rng + ?Sized>(
    layout: &[ChannelLayout],
    assignments: &AssignmentState,
    params: &[ClusterParams],
    rng: &mut R,
) -> Result<PanelDataset> {
    let design: Vec<ChannelDesign> = layout.iter().map(ChannelLayout::design).collect();
    let (n, t) = (assignments.n_units(), assignments.n_periods());
    let mut cells = Vec::with_capacity(n * t);
    for &k in assignments.raw_clusters() {
        let p = params
            .get(k)
            .ok_or_else(|| Error::OutOfRange(format!("cluster {k} has no parameters")))?;
        cells.push(Some(simulate_cell(&design, p, rng)));
    }
    PanelDataset::new(
        layout.iter().map(|c| ChannelDecl::new(c.name.clone(), c.kind)).collect(),
        (1..=t as i64).collect(),
        vec![],
        (0..n).map(|i| Unit { id: format!("u{}", i + 1), attributes: vec![] }).collect(),
        cells,
    )
}

/// A panel from the full generative model: stickiness, weights and
/// assignments from the prior, cluster parameters from the channel priors,
/// then data.
pub fn gen_prior_predictive(
    n_units: usize,
    n_periods: usize,
    layout: &[ChannelLayout],
    config: &SamplerConfig,
    seed: u64,
) -> Result<(PanelDataset, SimulationTruth)> {
    if n_units == 0 || n_periods == 0 {
        return Err(Error::param("n_units", "need at least one unit and one period"));
    }
    let model = EmissionModel::for_channels(layout.iter().map(|c| (c.name.as_str(), c.kind)), &config.channel_priors)?;
    let sampler = GibbsSampler::new(model, config.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let state = sampler.sample_prior_state(n_units, n_periods, &mut rng)?;
    let dataset = simulate_panel(layout, &state.assignments, &state.params, &mut rng)?;
    let theta = state
        .params
        .iter()
        .map(|p| p.values.iter().map(|&v| vec![v; n_periods]).collect())
        .collect();
    Ok((
        dataset,
        SimulationTruth {
            regime: Regime::PriorPredictive,
            seed,
            memberships: state.assignments.to_matrix(),
            theta,
        },
    ))
}

/// Civil-rights roll calls and discharge petitions per Congress, 73rd to
/// 92nd, and the Congresses with speech and bill-sponsorship data.
pub const ROLL_CALLS: [u32; 20] = [0, 0, 2, 2, 3, 2, 3, 1, 4, 0, 0, 1, 2, 5, 1, 2, 2, 0, 0, 0];
pub const PETITIONS: [u32; 20] = [1, 1, 2, 3, 4, 4, 4, 2, 3, 1, 2, 1, 2, 1, 0, 2, 0, 0, 1, 1];
pub const SPEECH_CONGRESSES: std::ops::RangeInclusive<i64> = 73..=90;
pub const BILL_CONGRESSES: std::ops::RangeInclusive<i64> = 80..=92;
pub const FIXTURE_STATES: [(&str, bool); 10] = [
    ("AL", true),
    ("GA", true),
    ("MS", true),
    ("TX", true),
    ("VA", true),
    ("IL", false),
    ("MA", false),
    ("NY", false),
    ("OH", false),
    ("PA", false),
];

/// Member-level records for 10 states and both parties over Congresses 73 to
/// 92, with the channel sparsity above. Northern Democrats drift from
/// moderate to strong support across the window; Southern Democrats stay
/// opposed; Republicans sit in between. Southern Republican delegations are
/// often vacant.
pub fn gen_legislative_records(seed: u64) -> Vec<LegislativeRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for (c, congress) in (73..=92i64).enumerate() {
        let progress = (c as f64 / 12.0).min(1.0);
        for &(state, south) in &FIXTURE_STATES {
            for party in ["D", "R"] {
                let support = match (south, party) {
                    (false, "D") => 0.35 + 0.55 * progress,
                    (false, _) => 0.6 - 0.2 * progress,
                    (true, "D") => 0.08,
                    (true, _) => 0.4,
                };
                let seats = if south && party == "R" {
                    if rng.random_bool(0.6) { 0 } else { 1 }
                } else {
                    rng.random_range(1..=4)
                };
                for m in 0..seats {
                    let member = format!("{state}{party}{congress}-{m}");
                    let mut push = |channel: &str, value: i64| {
                        out.push(LegislativeRecord {
                            congress,
                            state: state.to_string(),
                            party: party.to_string(),
                            member: member.clone(),
                            channel: channel.to_string(),
                            value,
                        })
                    };
                    for _ in 0..ROLL_CALLS[c] {
                        push("roll_call", i64::from(rng.random_bool(support)));
                    }
                    for _ in 0..PETITIONS[c] {
                        push("petition", i64::from(rng.random_bool(support * 0.5)));
                    }
                    if SPEECH_CONGRESSES.contains(&congress) {
                        push("speech", i64::from(rng.random_bool(support * 0.6)));
                    }
                    if BILL_CONGRESSES.contains(&congress) {
                        let bills = Poisson::new(2.0 * support).map_or(0.0, |d| d.sample(&mut rng));
                        push("bill", bills as i64);
                    }
                }
            }
        }
    }
    out
}
