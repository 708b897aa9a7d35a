//! Python module `stickydp`.

use std::collections::BTreeMap;
use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use stickydp::analysis::{
    change_probability_matrix, cocluster_matrix, grouped_alignment_series, AlignmentQuery, IntervalKind,
};
use stickydp::geweke::{run_geweke, GewekeSetup};
use stickydp::io::{ingest_legislative_files, read_draws_file, read_panel, read_panel_file, write_panel, LegislativeSchema};
use stickydp::prior::{canonical_labels, enumerate_partition_distribution, sample_restaurant_path};
use stickydp::sampler::TrajectoryUpdate;
use stickydp::simulation::{gen_gradual_change, gen_prior_predictive, gen_structural_break, ChannelLayout};
use stickydp::{ChannelKind, Concentration, PanelDataset, PosteriorDraws, SamplerConfig};

const VERSION: &str = env!("CARGO_PKG_VERSION");

fn py_err(e: stickydp::Error) -> PyErr {
    match e {
        stickydp::Error::Io { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

type Matrix = Vec<Vec<usize>>;

/// A panel of units observed over periods.
#[pyclass(name = "Panel", module = "stickydp", frozen)]
struct PyPanel {
    inner: PanelDataset,
}

#[pymethods]
impl PyPanel {
    #[staticmethod]
    fn read(path: PathBuf) -> PyResult<Self> {
        Ok(PyPanel {
            inner: read_panel_file(&path).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(PyPanel {
            inner: read_panel(text, "<string>").map_err(py_err)?,
        })
    }

    fn to_text(&self) -> PyResult<String> {
        write_panel(&self.inner).map_err(py_err)
    }

    #[getter]
    fn n_units(&self) -> usize {
        self.inner.n_units()
    }

    #[getter]
    fn n_periods(&self) -> usize {
        self.inner.n_periods()
    }

    #[getter]
    fn unit_ids(&self) -> Vec<String> {
        self.inner.units().iter().map(|u| u.id.clone()).collect()
    }

    #[getter]
    fn periods(&self) -> Vec<i64> {
        self.inner.periods().to_vec()
    }

    #[getter]
    fn channels(&self) -> Vec<(String, String)> {
        self.inner
            .channels()
            .iter()
            .map(|c| (c.name.clone(), c.kind.as_str().to_string()))
            .collect()
    }

    /// Indices of units whose attributes match every `name=value` pair.
    #[pyo3(signature = (**filters))]
    fn select(&self, filters: Option<BTreeMap<String, String>>) -> PyResult<Vec<usize>> {
        self.inner.select_units(&filters.unwrap_or_default()).map_err(py_err)
    }

    /// Per-unit values of one attribute.
    fn attribute(&self, name: &str) -> PyResult<Vec<String>> {
        (0..self.inner.n_units())
            .map(|i| {
                self.inner
                    .attribute(i, name)
                    .map(str::to_string)
                    .ok_or_else(|| PyValueError::new_err(format!("unknown unit attribute `{name}`")))
            })
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Panel(units={}, periods={}, channels={})",
            self.inner.n_units(),
            self.inner.n_periods(),
            self.inner.channels().len()
        )
    }
}

/// Pooled posterior draws of one or more chains.
#[pyclass(name = "Posterior", module = "stickydp", frozen)]
struct PyPosterior {
    inner: PosteriorDraws,
}

#[pymethods]
impl PyPosterior {
    /// Loads and pools draw files written by `stickydp fit`.
    #[staticmethod]
    fn read(paths: Vec<PathBuf>) -> PyResult<Self> {
        let parts = paths
            .iter()
            .map(|p| read_draws_file(p).map(|(_, d)| d))
            .collect::<stickydp::Result<Vec<_>>>()
            .map_err(py_err)?;
        Ok(PyPosterior {
            inner: PosteriorDraws::concat(parts).map_err(py_err)?,
        })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn n_units(&self) -> usize {
        self.inner.n_units
    }

    #[getter]
    fn n_periods(&self) -> usize {
        self.inner.n_periods
    }

    #[getter]
    fn p(&self) -> Vec<f64> {
        self.inner.draws.iter().map(|d| d.p).collect()
    }

    #[getter]
    fn log_joint(&self) -> Vec<f64> {
        self.inner.draws.iter().map(|d| d.log_joint).collect()
    }

    /// Cluster matrix `[unit][period]` of one draw.
    fn assignments(&self, draw: usize) -> PyResult<Matrix> {
        if draw >= self.inner.len() {
            return Err(PyValueError::new_err(format!("draw {draw} of {}", self.inner.len())));
        }
        Ok((0..self.inner.n_units)
            .map(|i| (0..self.inner.n_periods).map(|t| self.inner.cluster(draw, i, t)).collect())
            .collect())
    }

    /// `[unit][period - 1]` probability that the unit's cluster changed.
    fn change_probability(&self) -> PyResult<Vec<Vec<f64>>> {
        change_probability_matrix(&self.inner).map_err(py_err)
    }

    fn cocluster(&self, period: usize) -> PyResult<Vec<Vec<f64>>> {
        cocluster_matrix(&self.inner, period).map_err(py_err)
    }

    /// Between-group alignment per period as `(estimate, lower, upper,
    /// n_pairs)`, `None` where no pair is available. Passing `keys` restricts
    /// pairs to units sharing a key.
    #[pyo3(signature = (group_a, group_b, keys=None, level=0.95, pair_level=false))]
    fn alignment(
        &self,
        group_a: Vec<usize>,
        group_b: Vec<usize>,
        keys: Option<Vec<String>>,
        level: f64,
        pair_level: bool,
    ) -> PyResult<Vec<Option<(f64, f64, f64, usize)>>> {
        let mut query = match keys {
            Some(k) => AlignmentQuery::within_key(group_a, group_b, k),
            None => AlignmentQuery::pooled(group_a, group_b),
        };
        query.level = level;
        if pair_level {
            query.interval = IntervalKind::PairLevel;
        }
        let series = grouped_alignment_series(&self.inner, &query).map_err(py_err)?;
        Ok(series
            .points
            .into_iter()
            .map(|p| Some((p.estimate?, p.lower?, p.upper?, p.n_pairs)))
            .collect())
    }
}

fn parse_layout(channels: Vec<(String, String, u64)>) -> PyResult<Vec<ChannelLayout>> {
    channels
        .into_iter()
        .map(|(name, kind, size)| {
            let kind = ChannelKind::parse(&kind).ok_or_else(|| PyValueError::new_err(format!("unknown channel kind `{kind}`")))?;
            Ok(ChannelLayout::new(name, kind, size))
        })
        .collect()
}

/// Synthetic panel and its true memberships `[unit][period]`.
///
/// `regime` is `structural-break`, `gradual-change` or `prior-predictive`;
/// the last uses `n_units`, `n_periods` and `channels`, a list of
/// `(name, kind, size)`.
#[pyfunction]
#[pyo3(signature = (regime, seed=0, n_units=20, n_periods=10, channels=None))]
fn simulate(
    regime: &str,
    seed: u64,
    n_units: usize,
    n_periods: usize,
    channels: Option<Vec<(String, String, u64)>>,
) -> PyResult<(PyPanel, Matrix)> {
    let (ds, truth) = match regime {
        "structural-break" => gen_structural_break(seed),
        "gradual-change" => gen_gradual_change(seed),
        "prior-predictive" => {
            let layout = parse_layout(channels.unwrap_or_else(|| vec![("votes".into(), "bernoulli".into(), 5)]))?;
            gen_prior_predictive(n_units, n_periods, &layout, &SamplerConfig::default(), seed)
        }
        other => return Err(PyValueError::new_err(format!("unknown regime `{other}`"))),
    }
    .map_err(py_err)?;
    Ok((PyPanel { inner: ds }, truth.memberships))
}

/// Runs the sampler and pools the stored draws of all chains.
#[pyfunction]
#[pyo3(signature = (
    panel, *, truncation=10, n_iterations=4000, burn_in=1000, thinning=1, chains=1, seed=0,
    gamma=1.0, alpha_p=1.0, beta_p=1.0, stickiness=None, trajectory_update="coupled"
))]
#[allow(clippy::too_many_arguments)]
fn fit(
    py: Python<'_>,
    panel: &PyPanel,
    truncation: usize,
    n_iterations: usize,
    burn_in: usize,
    thinning: usize,
    chains: usize,
    seed: u64,
    gamma: f64,
    alpha_p: f64,
    beta_p: f64,
    stickiness: Option<f64>,
    trajectory_update: &str,
) -> PyResult<PyPosterior> {
    let trajectory_update = match trajectory_update {
        "coupled" => TrajectoryUpdate::Coupled,
        "independent" => TrajectoryUpdate::Independent,
        other => return Err(PyValueError::new_err(format!("unknown trajectory update `{other}`"))),
    };
    let config = SamplerConfig {
        truncation,
        n_iterations,
        burn_in,
        thinning,
        chains,
        seed,
        gamma,
        alpha_p,
        beta_p,
        fixed_stickiness: stickiness,
        trajectory_update,
        ..Default::default()
    };
    let dataset = &panel.inner;
    let outputs = py.detach(|| stickydp::run_chains(dataset, &config)).map_err(py_err)?;
    let draws = PosteriorDraws::concat(outputs.into_iter().map(|c| c.draws).collect()).map_err(py_err)?;
    Ok(PyPosterior { inner: draws })
}

/// Exact law of the sequential restaurant as `(matrix, probability)` pairs,
/// labels in first-appearance order.
#[pyfunction]
fn enumerate_prior(n_units: usize, n_periods: usize, p: f64, gamma: f64) -> PyResult<Vec<(Matrix, f64)>> {
    let gamma = Concentration::new(gamma).map_err(py_err)?;
    Ok(enumerate_partition_distribution(n_units, n_periods, p, gamma)
        .map_err(py_err)?
        .into_iter()
        .collect())
}

/// Assignment matrices drawn from the sequential restaurant.
#[pyfunction]
#[pyo3(signature = (n_units, n_periods, p, gamma=1.0, draws=1, seed=0))]
fn prior_sample(n_units: usize, n_periods: usize, p: f64, gamma: f64, draws: usize, seed: u64) -> PyResult<Vec<Matrix>> {
    use rand::SeedableRng;
    if !(0.0..=1.0).contains(&p) {
        return Err(PyValueError::new_err(format!("p must lie in [0, 1], got {p}")));
    }
    let gamma = Concentration::new(gamma).map_err(py_err)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    Ok((0..draws)
        .map(|_| canonical_labels(&sample_restaurant_path(n_units, n_periods, p, gamma, &mut rng).to_matrix()))
        .collect())
}

/// Joint-distribution check of the sampler on a small Bernoulli model.
/// Returns one `(statistic, marginal_mean, successive_mean, z)` per row.
#[pyfunction]
#[pyo3(signature = (steps=20000, seed=1, n_units=4, n_periods=3, truncation=3))]
fn geweke(
    py: Python<'_>,
    steps: usize,
    seed: u64,
    n_units: usize,
    n_periods: usize,
    truncation: usize,
) -> PyResult<Vec<(String, f64, f64, f64)>> {
    let setup = GewekeSetup {
        n_units,
        n_periods,
        layout: vec![ChannelLayout::new("v", ChannelKind::Bernoulli, 2)],
        config: SamplerConfig {
            truncation,
            ..Default::default()
        },
        n_marginal: steps,
        n_successive: steps,
        seed,
    };
    let report = py.detach(|| run_geweke(&setup)).map_err(py_err)?;
    Ok(report
        .rows
        .into_iter()
        .map(|r| (r.statistic, r.marginal_mean, r.successive_mean, r.z))
        .collect())
}

/// Collapses member-level legislative records into a state-party panel.
#[pyfunction]
#[pyo3(signature = (records, regions=None))]
fn ingest_legislative(records: PathBuf, regions: Option<PathBuf>) -> PyResult<PyPanel> {
    let inner = ingest_legislative_files(&records, &LegislativeSchema::default(), regions.as_deref()).map_err(py_err)?;
    Ok(PyPanel { inner })
}

#[pymodule(name = "stickydp")]
fn stickydp_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", VERSION)?;
    m.add_class::<PyPanel>()?;
    m.add_class::<PyPosterior>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_prior, m)?)?;
    m.add_function(wrap_pyfunction!(prior_sample, m)?)?;
    m.add_function(wrap_pyfunction!(geweke, m)?)?;
    m.add_function(wrap_pyfunction!(ingest_legislative, m)?)?;
    Ok(())
}
