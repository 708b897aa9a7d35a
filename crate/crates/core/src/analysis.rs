//! Posterior summaries that depend on draws only through whether two cells
//! share a cluster, so cluster labels never matter.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampler::PosteriorDraws;

/// A (unit, period) cell, both 0-based.
pub type Cell = (usize, usize);

fn check_cell(draws: &PosteriorDraws, (unit, period): Cell) -> Result<()> {
    if unit >= draws.n_units || period >= draws.n_periods {
        return Err(Error::OutOfRange(format!(
            "cell ({unit}, {period}) outside {}×{}",
            draws.n_units, draws.n_periods
        )));
    }
    Ok(())
}

fn nonempty(draws: &PosteriorDraws) -> Result<()> {
    if draws.is_empty() {
        Err(Error::EmptyDraws)
    } else {
        Ok(())
    }
}

/// Fraction of draws in which cells `a` and `b` share a cluster.
pub fn cocluster_probability(draws: &PosteriorDraws, a: Cell, b: Cell) -> Result<f64> {
    nonempty(draws)?;
    check_cell(draws, a)?;
    check_cell(draws, b)?;
    if a == b {
        return Err(Error::Query(format!("cell ({}, {}) paired with itself", a.0, a.1)));
    }
    let same = (0..draws.len())
        .filter(|&d| draws.cluster(d, a.0, a.1) == draws.cluster(d, b.0, b.1))
        .count();
    Ok(same as f64 / draws.len() as f64)
}

/// Fraction of draws in which `unit` sits in a different cluster at
/// `period` than at `period - 1`.
pub fn change_probability(draws: &PosteriorDraws, unit: usize, period: usize) -> Result<f64> {
    nonempty(draws)?;
    check_cell(draws, (unit, period))?;
    if period == 0 {
        return Err(Error::Query("the first period has no predecessor".into()));
    }
    let moved = (0..draws.len())
        .filter(|&d| draws.cluster(d, unit, period) != draws.cluster(d, unit, period - 1))
        .count();
    Ok(moved as f64 / draws.len() as f64)
}

/// Change probabilities of every unit, `N × (T - 1)`; column `j` is period
/// `j + 1`.
pub fn change_probability_matrix(draws: &PosteriorDraws) -> Result<Vec<Vec<f64>>> {
    nonempty(draws)?;
    let (n, t) = (draws.n_units, draws.n_periods);
    let mut counts = vec![vec![0usize; t.saturating_sub(1)]; n];
    for draw in &draws.draws {
        for (i, row) in counts.iter_mut().enumerate() {
            let g = &draw.g[i * t..(i + 1) * t];
            for (c, w) in row.iter_mut().zip(g.windows(2)) {
                *c += usize::from(w[0] != w[1]);
            }
        }
    }
    let m = draws.len() as f64;
    Ok(counts
        .into_iter()
        .map(|row| row.into_iter().map(|c| c as f64 / m).collect())
        .collect())
}

/// Co-clustering probabilities of all units at one period, `N × N`.
pub fn cocluster_matrix(draws: &PosteriorDraws, period: usize) -> Result<Vec<Vec<f64>>> {
    nonempty(draws)?;
    check_cell(draws, (0, period))?;
    let n = draws.n_units;
    let mut counts = vec![vec![0usize; n]; n];
    for d in 0..draws.len() {
        for i in 0..n {
            let gi = draws.cluster(d, i, period);
            for j in i..n {
                if draws.cluster(d, j, period) == gi {
                    counts[i][j] += 1;
                }
            }
        }
    }
    let m = draws.len() as f64;
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            out[i][j] = counts[i][j] as f64 / m;
            out[j][i] = out[i][j];
        }
    }
    Ok(out)
}

/// Equal-tailed interval from empirical quantiles at `(1 - level) / 2` and
/// `(1 + level) / 2`.
///
/// Quantiles interpolate linearly between order statistics: with sorted
/// `x_1..x_n`, quantile `q` sits at position `h = (n - 1) q` (0-based) and
/// equals `x_floor(h) + (h - floor(h)) (x_floor(h)+1 - x_floor(h))`.
pub fn credible_interval(samples: &[f64], level: f64) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::EmptyDraws);
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::param("level", format!("must lie strictly between 0 and 1, got {level}")));
    }
    if samples.iter().any(|v| v.is_nan()) {
        return Err(Error::param("samples", "NaN in samples"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    Ok((quantile_sorted(&sorted, tail), quantile_sorted(&sorted, 1.0 - tail)))
}

fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    quantile_sorted(&sorted, 0.5)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlignmentMode {
    /// Every cross pair of a unit in group A and a unit in group B.
    #[default]
    Pooled,
    /// Only pairs whose units share a key (such as a state).
    WithinKey,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntervalKind {
    /// Quantiles across draws of the draw's share of co-clustered pairs.
    #[default]
    PerDrawMean,
    /// Quantiles across pairs of each pair's co-clustering probability.
    PairLevel,
}

/// Which pairs to average and how to summarise them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentQuery {
    pub group_a: Vec<usize>,
    pub group_b: Vec<usize>,
    pub mode: AlignmentMode,
    /// One key per unit; required for [`AlignmentMode::WithinKey`].
    pub keys: Option<Vec<String>>,
    pub level: f64,
    pub interval: IntervalKind,
    /// `N × T` flags; when given, a pair counts at a period only if both of
    /// its cells are observed.
    pub observed: Option<Vec<Vec<bool>>>,
}

impl AlignmentQuery {
    pub fn pooled(group_a: Vec<usize>, group_b: Vec<usize>) -> Self {
        AlignmentQuery {
            group_a,
            group_b,
            mode: AlignmentMode::Pooled,
            keys: None,
            level: 0.95,
            interval: IntervalKind::PerDrawMean,
            observed: None,
        }
    }

    pub fn within_key(group_a: Vec<usize>, group_b: Vec<usize>, keys: Vec<String>) -> Self {
        AlignmentQuery {
            mode: AlignmentMode::WithinKey,
            keys: Some(keys),
            ..AlignmentQuery::pooled(group_a, group_b)
        }
    }

    /// Unordered unit pairs the query compares.
    pub fn pairs(&self, n_units: usize) -> Result<Vec<(usize, usize)>> {
        if self.group_a.is_empty() || self.group_b.is_empty() {
            return Err(Error::Query("both groups need at least one unit".into()));
        }
        if let Some(&u) = self.group_a.iter().chain(&self.group_b).find(|&&u| u >= n_units) {
            return Err(Error::OutOfRange(format!("unit {u} of {n_units}")));
        }
        let keys = match self.mode {
            AlignmentMode::Pooled => None,
            AlignmentMode::WithinKey => {
                let keys = self
                    .keys
                    .as_ref()
                    .ok_or_else(|| Error::Query("within-key mode needs unit keys".into()))?;
                if keys.len() != n_units {
                    return Err(Error::DimensionMismatch(format!("{} keys for {n_units} units", keys.len())));
                }
                Some(keys)
            }
        };
        let mut pairs = BTreeSet::new();
        for &a in &self.group_a {
            for &b in &self.group_b {
                if a == b || keys.is_some_and(|k| k[a] != k[b]) {
                    continue;
                }
                pairs.insert((a.min(b), a.max(b)));
            }
        }
        if pairs.is_empty() {
            return Err(Error::Query("the groups form no pairs".into()));
        }
        Ok(pairs.into_iter().collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub period: usize,
    pub n_pairs: usize,
    /// `None` when no pair is available at this period.
    pub estimate: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummarySeries {
    pub level: f64,
    pub points: Vec<SeriesPoint>,
}

/// Same-period co-clustering between two groups of units, averaged over
/// pairs, with a credible interval per period.
pub fn grouped_alignment_series(draws: &PosteriorDraws, query: &AlignmentQuery) -> Result<SummarySeries> {
    nonempty(draws)?;
    let pairs = query.pairs(draws.n_units)?;
    if let Some(obs) = &query.observed {
        if obs.len() != draws.n_units || obs.iter().any(|r| r.len() != draws.n_periods) {
            return Err(Error::DimensionMismatch("observed flags do not match the draws".into()));
        }
    }
    let m = draws.len();
    let points = (0..draws.n_periods)
        .into_par_iter()
        .map(|t| {
            let active: Vec<(usize, usize)> = pairs
                .iter()
                .copied()
                .filter(|&(a, b)| query.observed.as_ref().is_none_or(|o| o[a][t] && o[b][t]))
                .collect();
            if active.is_empty() {
                return Ok(SeriesPoint {
                    period: t,
                    n_pairs: 0,
                    estimate: None,
                    lower: None,
                    upper: None,
                });
            }
            let same = |d: usize, (a, b): (usize, usize)| draws.cluster(d, a, t) == draws.cluster(d, b, t);
            let (estimate, (lower, upper)) = match query.interval {
                IntervalKind::PerDrawMean => {
                    let per_draw: Vec<f64> = (0..m)
                        .map(|d| active.iter().filter(|&&pr| same(d, pr)).count() as f64 / active.len() as f64)
                        .collect();
                    (per_draw.iter().sum::<f64>() / m as f64, credible_interval(&per_draw, query.level)?)
                }
                IntervalKind::PairLevel => {
                    let per_pair: Vec<f64> = active
                        .iter()
                        .map(|&pr| (0..m).filter(|&d| same(d, pr)).count() as f64 / m as f64)
                        .collect();
                    (
                        per_pair.iter().sum::<f64>() / per_pair.len() as f64,
                        credible_interval(&per_pair, query.level)?,
                    )
                }
            };
            Ok(SeriesPoint {
                period: t,
                n_pairs: active.len(),
                estimate: Some(estimate),
                lower: Some(lower.min(estimate)),
                upper: Some(upper.max(estimate)),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SummarySeries {
        level: query.level,
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairSetSummary {
    pub n_pairs: usize,
    pub mean: f64,
    pub median: f64,
}

/// Co-clustering of all cell pairs split by whether the cells share a true
/// group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRecovery {
    pub same_group: PairSetSummary,
    pub different_group: PairSetSummary,
}

/// Co-clustering probabilities over every unordered pair of distinct cells,
/// across periods as well as within them, compared with true memberships.
pub fn cell_pair_recovery(draws: &PosteriorDraws, truth: &[Vec<usize>]) -> Result<PairRecovery> {
    nonempty(draws)?;
    let (n, t) = (draws.n_units, draws.n_periods);
    if truth.len() != n || truth.iter().any(|r| r.len() != t) {
        return Err(Error::DimensionMismatch("truth does not match the draws".into()));
    }
    let cells = n * t;
    let labels: Vec<usize> = truth.iter().flatten().copied().collect();
    let m = draws.len() as f64;
    // Each row c collects pairs (c, c') with c' > c.
    let (same, different): (Vec<Vec<f64>>, Vec<Vec<f64>>) = (0..cells)
        .into_par_iter()
        .map(|c| {
            let mut counts = vec![0u32; cells - c - 1];
            for draw in &draws.draws {
                let gc = draw.g[c];
                for (slot, &g) in counts.iter_mut().zip(&draw.g[c + 1..]) {
                    *slot += u32::from(g == gc);
                }
            }
            let mut same = Vec::new();
            let mut different = Vec::new();
            for (offset, &k) in counts.iter().enumerate() {
                let prob = f64::from(k) / m;
                if labels[c + 1 + offset] == labels[c] {
                    same.push(prob);
                } else {
                    different.push(prob);
                }
            }
            (same, different)
        })
        .unzip();
    let summarize = |rows: Vec<Vec<f64>>| -> Result<PairSetSummary> {
        let all: Vec<f64> = rows.into_iter().flatten().collect();
        if all.is_empty() {
            return Err(Error::Query("no pairs in this set".into()));
        }
        Ok(PairSetSummary {
            n_pairs: all.len(),
            mean: all.iter().sum::<f64>() / all.len() as f64,
            median: median(&all),
        })
    };
    Ok(PairRecovery {
        same_group: summarize(same)?,
        different_group: summarize(different)?,
    })
}
