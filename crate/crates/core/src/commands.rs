//! The batch commands behind the `stickydp` binary. Each command builds all
//! of its outputs in memory and returns them as one [`OutputBatch`]; the
//! caller commits the batch, so a failing command writes nothing.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    cell_pair_recovery, change_probability_matrix, cocluster_matrix, grouped_alignment_series, AlignmentMode,
    AlignmentQuery, IntervalKind, PairRecovery,
};
use crate::dataset::PanelDataset;
use crate::diagnostics::{drift_test, effective_sample_size, split_rhat, DriftTest};
use crate::error::{Error, Result};
use crate::io::{
    change_matrix_tsv, cocluster_matrix_tsv, config_hash, ingest_legislative_files, read_draws_file, read_panel_file,
    read_text, series_tsv, sha256_hex, write_draws, write_panel, DrawFileHeader, LegislativeSchema, OutputBatch,
    Provenance, RunConfig, DRAWS_FORMAT, DRAWS_VERSION,
};
use crate::prior::{canonical_labels, Concentration};
use crate::sampler::{run_chains, ChainOutput, PosteriorDraws, SamplerConfig};
use crate::simulation::{gen_gradual_change, gen_prior_predictive, gen_structural_break, ChannelLayout, Regime, SimulationTruth};

pub const MANIFEST_FORMAT: &str = "stickydp-manifest";
pub const MANIFEST_VERSION: u32 = 1;

fn pretty<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Generator settings for `simulate`.
#[derive(Debug, Clone)]
pub struct SimulateArgs {
    pub regime: Regime,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Prior-predictive only.
    pub n_units: usize,
    pub n_periods: usize,
    pub layout: Vec<ChannelLayout>,
    pub config: SamplerConfig,
}

pub fn simulate(args: &SimulateArgs) -> Result<(OutputBatch, PanelDataset, SimulationTruth)> {
    let (dataset, truth) = match args.regime {
        Regime::StructuralBreak => gen_structural_break(args.seed)?,
        Regime::GradualChange => gen_gradual_change(args.seed)?,
        Regime::PriorPredictive => {
            if args.layout.is_empty() {
                return Err(Error::param("channel", "prior-predictive simulation needs at least one --channel"));
            }
            gen_prior_predictive(args.n_units, args.n_periods, &args.layout, &args.config, args.seed)?
        }
    };
    let mut batch = OutputBatch::new();
    batch.add(args.out_dir.join("panel.tsv"), write_panel(&dataset)?);
    batch.add(args.out_dir.join("truth.json"), pretty(&truth)?);
    Ok((batch, dataset, truth))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSummary {
    pub chain: usize,
    pub draws_file: String,
    pub trace_file: String,
    pub n_draws: usize,
    pub truncation_hit_rate: f64,
    pub truncation_alarm: bool,
    pub ess_log_joint: f64,
    pub ess_p: f64,
    pub ess_occupied: f64,
    pub log_joint_drift: Option<DriftTest>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub rhat_log_joint: f64,
    pub rhat_p: f64,
    pub rhat_occupied: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub version: u32,
    pub config_hash: String,
    pub seed: u64,
    pub config: SamplerConfig,
    pub dataset: String,
    pub dataset_sha256: String,
    pub workers: usize,
    pub wall_time_seconds: f64,
    pub chains: Vec<ChainSummary>,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone)]
pub struct FitArgs {
    pub dataset: PathBuf,
    pub config: SamplerConfig,
    pub out_dir: PathBuf,
    pub workers: usize,
}

impl FitArgs {
    /// Settings that reproduce the run a manifest describes.
    pub fn from_manifest(path: &Path, out_dir: PathBuf) -> Result<Self> {
        let m: Manifest = serde_json::from_str(&read_text(path)?).map_err(|e| Error::Format {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        if m.format != MANIFEST_FORMAT || m.version != MANIFEST_VERSION {
            return Err(Error::Format {
                path: path.display().to_string(),
                message: format!("not a {MANIFEST_FORMAT} version {MANIFEST_VERSION} file"),
            });
        }
        Ok(FitArgs {
            dataset: PathBuf::from(m.dataset),
            config: m.config,
            out_dir,
            workers: m.workers,
        })
    }
}

fn post_burn_in<T: Copy + Into<f64>>(xs: &[T], burn_in: usize) -> Vec<f64> {
    xs[burn_in..].iter().map(|&x| x.into()).collect()
}

fn occupied_f64(out: &ChainOutput, burn_in: usize) -> Vec<f64> {
    out.trace.n_occupied[burn_in..].iter().map(|&k| k as f64).collect()
}

fn trace_tsv(out: &ChainOutput) -> String {
    let mut s = String::from("iteration\tlog_joint\tp\tn_occupied\tmax_cluster\n");
    let t = &out.trace;
    for i in 0..t.log_joint.len() {
        s.push_str(&format!("{i}\t{}\t{}\t{}\t{}\n", t.log_joint[i], t.p[i], t.n_occupied[i], t.max_cluster[i]));
    }
    s
}

pub fn fit(args: &FitArgs) -> Result<(OutputBatch, Vec<ChainOutput>, Manifest)> {
    args.config.validate()?;
    let start = Instant::now();
    let text = read_text(&args.dataset)?;
    let dataset = crate::io::read_panel(&text, &args.dataset.display().to_string())?;
    let chains = run_chains(&dataset, &args.config)?;
    let hash = config_hash(&args.config);
    let burn_in = args.config.burn_in;
    let mut batch = OutputBatch::new();
    let mut summaries = Vec::new();
    for out in &chains {
        let header = DrawFileHeader {
            format: DRAWS_FORMAT.into(),
            version: DRAWS_VERSION,
            chain: out.chain,
            seed: args.config.seed,
            config_hash: hash.clone(),
            config: args.config.clone(),
            n_units: dataset.n_units(),
            n_periods: dataset.n_periods(),
            unit_ids: dataset.units().iter().map(|u| u.id.clone()).collect(),
            periods: dataset.periods().to_vec(),
        };
        let draws_file = format!("chain-{}.draws.jsonl", out.chain);
        let trace_file = format!("chain-{}.trace.tsv", out.chain);
        batch.add(args.out_dir.join(&draws_file), write_draws(&header, &out.draws)?);
        batch.add(args.out_dir.join(&trace_file), trace_tsv(out));
        let lj = post_burn_in(&out.trace.log_joint, burn_in);
        summaries.push(ChainSummary {
            chain: out.chain,
            draws_file,
            trace_file,
            n_draws: out.draws.len(),
            truncation_hit_rate: out.truncation_hit_rate,
            truncation_alarm: out.truncation_alarm(),
            ess_log_joint: effective_sample_size(&lj),
            ess_p: effective_sample_size(&post_burn_in(&out.trace.p, burn_in)),
            ess_occupied: effective_sample_size(&occupied_f64(out, burn_in)),
            log_joint_drift: drift_test(&lj, 20),
        });
    }
    let rhat = |f: &dyn Fn(&ChainOutput) -> Vec<f64>| {
        let series: Vec<Vec<f64>> = chains.iter().map(f).collect();
        let refs: Vec<&[f64]> = series.iter().map(Vec::as_slice).collect();
        split_rhat(&refs)
    };
    let diagnostics = Diagnostics {
        rhat_log_joint: rhat(&|c| post_burn_in(&c.trace.log_joint, burn_in)),
        rhat_p: rhat(&|c| post_burn_in(&c.trace.p, burn_in)),
        rhat_occupied: rhat(&|c| occupied_f64(c, burn_in)),
    };
    let manifest = Manifest {
        format: MANIFEST_FORMAT.into(),
        version: MANIFEST_VERSION,
        config_hash: hash,
        seed: args.config.seed,
        config: args.config.clone(),
        dataset: args.dataset.display().to_string(),
        dataset_sha256: sha256_hex(text.as_bytes()),
        workers: args.workers,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        chains: summaries,
        diagnostics,
    };
    batch.add(args.out_dir.join("manifest.json"), pretty(&manifest)?);
    Ok((batch, chains, manifest))
}

/// One alignment series requested from `summarize`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesSpec {
    pub name: String,
    #[serde(default)]
    pub mode: AlignmentMode,
    /// Attribute whose value pairs units in within-key mode.
    pub key: Option<String>,
    pub group_a: BTreeMap<String, String>,
    pub group_b: BTreeMap<String, String>,
}

/// Query file for `summarize`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SummaryQuery {
    pub level: f64,
    pub interval: IntervalKind,
    /// Count a pair at a period only when both cells hold observations.
    pub observed_only: bool,
    /// Period labels for which to write unit-by-unit co-clustering matrices.
    pub cocluster_periods: Vec<i64>,
    pub series: Vec<SeriesSpec>,
}

impl Default for SummaryQuery {
    fn default() -> Self {
        SummaryQuery {
            level: 0.95,
            interval: IntervalKind::PerDrawMean,
            observed_only: true,
            cocluster_periods: Vec::new(),
            series: Vec::new(),
        }
    }
}

impl SummaryQuery {
    pub fn from_toml(text: &str, path: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            path: path.to_string(),
            line: e.span().map_or(0, |s| text[..s.start.min(text.len())].matches('\n').count() + 1),
            message: e.message().to_string(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct SummarizeArgs {
    pub draws: Vec<PathBuf>,
    pub dataset: PathBuf,
    pub query: SummaryQuery,
    pub truth: Option<PathBuf>,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub mean_change_at_transitions: Option<f64>,
    pub mean_change_elsewhere: f64,
    pub pairs: PairRecovery,
}

/// Change-probability recovery against known transitions plus cell-pair
/// co-clustering split by true group.
pub fn recovery_report(draws: &PosteriorDraws, truth: &SimulationTruth) -> Result<RecoveryReport> {
    if truth.n_units() != draws.n_units || truth.n_periods() != draws.n_periods {
        return Err(Error::DimensionMismatch("truth does not match the draws".into()));
    }
    let change = change_probability_matrix(draws)?;
    let (mut at, mut n_at, mut away, mut n_away) = (0.0, 0usize, 0.0, 0usize);
    for (i, row) in change.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if truth.moved(i, j + 1) {
                at += v;
                n_at += 1;
            } else {
                away += v;
                n_away += 1;
            }
        }
    }
    Ok(RecoveryReport {
        mean_change_at_transitions: (n_at > 0).then(|| at / n_at as f64),
        mean_change_elsewhere: away / n_away.max(1) as f64,
        pairs: cell_pair_recovery(draws, &truth.memberships)?,
    })
}

fn valid_series_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || "_-".contains(c))
}

pub fn summarize(args: &SummarizeArgs) -> Result<OutputBatch> {
    if args.draws.is_empty() {
        return Err(Error::param("draws", "no draw files given"));
    }
    let dataset = read_panel_file(&args.dataset)?;
    let mut parts = Vec::new();
    let mut first: Option<DrawFileHeader> = None;
    for path in &args.draws {
        let (header, draws) = read_draws_file(path)?;
        let unit_ids: Vec<&str> = dataset.units().iter().map(|u| u.id.as_str()).collect();
        if header.unit_ids != unit_ids || header.periods != dataset.periods() {
            return Err(Error::Format {
                path: path.display().to_string(),
                message: format!("draws were not produced from {}", args.dataset.display()),
            });
        }
        if let Some(f) = &first {
            if f.config_hash != header.config_hash {
                return Err(Error::Format {
                    path: path.display().to_string(),
                    message: "draw files come from different configurations".into(),
                });
            }
        }
        first.get_or_insert(header);
        parts.push(draws);
    }
    let header = first.expect("at least one draw file");
    let draws = PosteriorDraws::concat(parts)?;
    let prov = Provenance {
        config_hash: header.config_hash.clone(),
        seed: header.seed,
    };
    let ids: Vec<String> = dataset.units().iter().map(|u| u.id.clone()).collect();
    let periods = dataset.periods();

    let mut batch = OutputBatch::new();
    let change = change_probability_matrix(&draws)?;
    batch.add(args.out_dir.join("change_probability.tsv"), change_matrix_tsv(&change, &ids, periods, &prov));

    for &label in &args.query.cocluster_periods {
        let t = dataset
            .period_index(label)
            .ok_or_else(|| Error::Query(format!("period {label} is not in the dataset")))?;
        let m = cocluster_matrix(&draws, t)?;
        batch.add(args.out_dir.join(format!("cocluster_{label}.tsv")), cocluster_matrix_tsv(&m, &ids, label, &prov));
    }

    let observed: Option<Vec<Vec<bool>>> = args.query.observed_only.then(|| {
        (0..dataset.n_units())
            .map(|i| (0..dataset.n_periods()).map(|t| dataset.cell(i, t).is_some()).collect())
            .collect()
    });
    for spec in &args.query.series {
        if !valid_series_name(&spec.name) {
            return Err(Error::Query(format!("series name `{}` must be letters, digits, `_` or `-`", spec.name)));
        }
        let keys = match (spec.mode, &spec.key) {
            (AlignmentMode::WithinKey, Some(key)) => Some(
                (0..dataset.n_units())
                    .map(|i| {
                        dataset
                            .attribute(i, key)
                            .map(str::to_string)
                            .ok_or_else(|| Error::Query(format!("unknown unit attribute `{key}`")))
                    })
                    .collect::<Result<Vec<_>>>()?,
            ),
            (AlignmentMode::WithinKey, None) => {
                return Err(Error::Query(format!("series `{}`: within-key mode needs `key`", spec.name)))
            }
            (AlignmentMode::Pooled, _) => None,
        };
        let query = AlignmentQuery {
            group_a: dataset.select_units(&spec.group_a)?,
            group_b: dataset.select_units(&spec.group_b)?,
            mode: spec.mode,
            keys,
            level: args.query.level,
            interval: args.query.interval,
            observed: observed.clone(),
        };
        let series = grouped_alignment_series(&draws, &query)
            .map_err(|e| Error::Query(format!("series `{}`: {e}", spec.name)))?;
        batch.add(args.out_dir.join(format!("series_{}.tsv", spec.name)), series_tsv(&series, periods, &prov));
    }

    if let Some(path) = &args.truth {
        let truth: SimulationTruth = serde_json::from_str(&read_text(path)?).map_err(|e| Error::Format {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        batch.add(args.out_dir.join("recovery.json"), pretty(&recovery_report(&draws, &truth)?)?);
    }
    Ok(batch)
}

#[derive(Debug, Clone)]
pub struct PriorSampleArgs {
    pub n_units: usize,
    pub n_periods: usize,
    pub n_draws: usize,
    pub gamma: f64,
    pub p: f64,
    pub seed: u64,
    pub out_dir: PathBuf,
}

/// Assignment matrices from the sequential restaurant process, labels in
/// first-appearance order. One row per (draw, unit).
pub fn prior_sample(args: &PriorSampleArgs) -> Result<OutputBatch> {
    if !(0.0..=1.0).contains(&args.p) {
        return Err(Error::param("p", format!("must lie in [0, 1], got {}", args.p)));
    }
    if args.n_units == 0 || args.n_periods == 0 {
        return Err(Error::param("units", "need at least one unit and one period"));
    }
    let gamma = Concentration::new(args.gamma)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut out = format!(
        "# stickydp-prior-sample\t1\n# seed\t{}\n# gamma\t{}\n# p\t{}\ndraw\tunit",
        args.seed, args.gamma, args.p
    );
    for t in 1..=args.n_periods {
        out.push_str(&format!("\tt{t}"));
    }
    out.push('\n');
    for d in 0..args.n_draws {
        let state = crate::prior::sample_restaurant_path(args.n_units, args.n_periods, args.p, gamma, &mut rng);
        for (i, row) in canonical_labels(&state.to_matrix()).iter().enumerate() {
            out.push_str(&format!("{d}\t{i}"));
            for k in row {
                out.push_str(&format!("\t{k}"));
            }
            out.push('\n');
        }
    }
    let mut batch = OutputBatch::new();
    batch.add(args.out_dir.join("prior_assignments.tsv"), out);
    Ok(batch)
}

#[derive(Debug, Clone)]
pub struct IngestArgs {
    pub records: PathBuf,
    pub regions: Option<PathBuf>,
    pub schema: LegislativeSchema,
    pub output: PathBuf,
}

pub fn ingest(args: &IngestArgs) -> Result<(OutputBatch, PanelDataset)> {
    let dataset = ingest_legislative_files(&args.records, &args.schema, args.regions.as_deref())?;
    let mut batch = OutputBatch::new();
    batch.add(args.output.clone(), write_panel(&dataset)?);
    Ok((batch, dataset))
}

/// Loads a run config file, or the defaults when no path is given.
pub fn load_run_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::from_file(p),
        None => Ok(RunConfig::default()),
    }
}
