//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! cargo test --release --test acceptance

mod common;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{Beta, ContinuousCDF, Gamma};

use common::*;
use stickydp::commands::{self, recovery_report, FitArgs, IngestArgs, SummarizeArgs, SummaryQuery};
use stickydp::diagnostics::drift_test;
use stickydp::emissions::{sample_cluster_params, ChannelStats, ClusterStats};
use stickydp::geweke::{run_geweke, GewekeSetup};
use stickydp::io::{read_draws_file, write_draws, write_legislative_records, LegislativeSchema};
use stickydp::prior::sample_prior_path;
use stickydp::sampler::{backward_sample, emission_table, filter_log_potentials, forward_filter};
use stickydp::simulation::{gen_gradual_change, gen_legislative_records, gen_structural_break, ChannelLayout};
use stickydp::{
    run_chains, CellObservations, ChannelDecl, ChannelKind, ChannelObs, ChannelSpec, ClusterParams, Concentration,
    EmissionModel, PanelDataset, SamplerConfig, StickWeights, Unit,
};

// Tolerances.
const PRIOR_TV: f64 = 0.02;
const PRIOR_SAMPLES: usize = 200_000;
const FILTER_TOL: f64 = 1e-10;
const BACKWARD_TV: f64 = 0.01;
const BACKWARD_DRAWS: usize = 100_000;
const GEWEKE_Z: f64 = 4.0;
const GEWEKE_ESS: f64 = 1e4;
const GEWEKE_STEPS: usize = 200_000;
const KS_DRAWS: usize = 10_000;
const MOVER_MIN: f64 = 0.8;
const STAYER_MAX: f64 = 0.1;
const SAME_MIN: f64 = 0.7;
const DIFF_MAX: f64 = 0.3;
const MEDIAN_GAP: f64 = 0.5;
const LEGISLATIVE_SWEEPS: usize = 500;

struct Outcome {
    pass: bool,
    summary: String,
    notes: Vec<String>,
}

impl Outcome {
    fn new(pass: bool, summary: impl Into<String>) -> Self {
        Outcome {
            pass,
            summary: summary.into(),
            notes: Vec::new(),
        }
    }

    fn note(mut self, s: impl Into<String>) -> Self {
        self.notes.push(s.into());
        self
    }
}

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn recovery_config(seed: u64) -> SamplerConfig {
    SamplerConfig {
        truncation: 10,
        n_iterations: 4_000,
        burn_in: 1_000,
        chains: 1,
        seed,
        ..Default::default()
    }
}

fn c1_prior_equivalence() -> Outcome {
    let run = |k: usize| -> Vec<(f64, f64, f64, f64)> {
        let mut rows = Vec::new();
        for (gi, gamma) in [0.5, 1.0, 2.0].into_iter().enumerate() {
            for (pi, p) in [0.0, 0.5, 0.9].into_iter().enumerate() {
                let start = Instant::now();
                let exact = sequential_law(3, 2, p, gamma);
                let mut rng = ChaCha8Rng::seed_from_u64(100 + 10 * gi as u64 + pi as u64);
                let g = Concentration::new(gamma).unwrap();
                let samples = (0..PRIOR_SAMPLES).map(|_| {
                    let draw = sample_prior_path(3, 2, k, g, p, &mut rng).unwrap();
                    relabel_period_major(&draw.assignments.to_matrix())
                });
                let tv = total_variation(&empirical(samples), &exact);
                rows.push((gamma, p, tv, start.elapsed().as_secs_f64()));
            }
        }
        rows
    };
    let main = run(4);
    let pass = main.iter().all(|r| r.2 <= PRIOR_TV && r.3 <= 120.0);
    let worst = main.iter().cloned().fold((0.0, 0.0, 0.0, 0.0), |a, r| if r.2 > a.2 { r } else { a });
    let mut out = Outcome::new(
        pass,
        format!(
            "prior representation equivalence, K=4: max TV {:.4} at gamma={}, p={} (limit {PRIOR_TV})",
            worst.2, worst.0, worst.1
        ),
    );
    for (gamma, p, tv, secs) in &main {
        let mark = if *tv <= PRIOR_TV { "ok" } else { "over" };
        out = out.note(format!("gamma={gamma:<3} p={p:<3} TV {tv:.4} {mark} ({secs:.1}s)"));
    }
    let wide = run(12);
    let wide_max = wide.iter().map(|r| r.2).fold(0.0, f64::max);
    out.note(format!(
        "supplementary K=12: max TV {wide_max:.4} ({})",
        if wide_max <= PRIOR_TV { "within limit" } else { "over limit" }
    ))
}

struct FilterFixture {
    dataset: PanelDataset,
    values: Vec<Vec<Option<(u64, u64, Vec<u64>)>>>,
    params: Vec<ClusterParams>,
    pi: Vec<Vec<f64>>,
}

fn filter_fixture(n: usize, t_len: usize, k: usize, seed: u64) -> FilterFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::new();
    let mut cells = Vec::new();
    for i in 0..n {
        let mut row = Vec::new();
        for t in 0..t_len {
            // One hole when the panel is big enough.
            if n == 2 && t_len == 3 && i == 1 && t == 1 {
                row.push(None);
                cells.push(None);
                continue;
            }
            let trials = rng.random_range(1..=6u64);
            let s = rng.random_range(0..=trials);
            let counts: Vec<u64> = (0..rng.random_range(1..=3)).map(|_| rng.random_range(0..=5)).collect();
            cells.push(Some(CellObservations::new(vec![
                ChannelObs::binary(s, trials).unwrap(),
                ChannelObs::count_from_values(&counts),
            ])));
            row.push(Some((s, trials, counts)));
        }
        values.push(row);
    }
    let dataset = PanelDataset::new(
        vec![ChannelDecl::new("v", ChannelKind::Bernoulli), ChannelDecl::new("c", ChannelKind::Poisson)],
        (1..=t_len as i64).collect(),
        vec![],
        (0..n)
            .map(|i| Unit {
                id: format!("u{i}"),
                attributes: vec![],
            })
            .collect(),
        cells,
    )
    .unwrap();
    let params = (0..k)
        .map(|_| ClusterParams {
            values: vec![rng.random_range(0.05..0.95), rng.random_range(0.2..5.0)],
        })
        .collect();
    let pi = (0..t_len)
        .map(|_| {
            let mut row: Vec<f64> = (0..k - 1).map(|_| rng.random_range(0.1..0.9)).collect();
            row.push(1.0);
            row
        })
        .collect();
    FilterFixture {
        dataset,
        values,
        params,
        pi,
    }
}

fn oracle_q(pi: &[Vec<f64>]) -> Vec<Vec<f64>> {
    pi.iter()
        .map(|row| {
            let mut rest = 1.0;
            row.iter()
                .map(|&x| {
                    let w = x * rest;
                    rest *= 1.0 - x;
                    w
                })
                .collect()
        })
        .collect()
}

fn c2_filter_exactness() -> Outcome {
    let start = Instant::now();
    let mut max_err: f64 = 0.0;
    let mut max_tv: f64 = 0.0;
    let mut n_fixtures = 0;
    let mut seed = 0u64;
    for n in 1..=2 {
        for t_len in 1..=3 {
            for k in 2..=3 {
                for p in [0.0, 0.4, 0.9] {
                    seed += 1;
                    let fx = filter_fixture(n, t_len, k, seed);
                    let weights = StickWeights::from_pi_rows(fx.pi.clone()).unwrap();
                    let q = oracle_q(&fx.pi);
                    let mut rng = ChaCha8Rng::seed_from_u64(1_000 + seed);
                    for unit in 0..n {
                        let emis: Vec<Vec<f64>> = (0..t_len)
                            .map(|t| {
                                fx.params
                                    .iter()
                                    .map(|par| match &fx.values[unit][t] {
                                        None => 0.0,
                                        Some((s, tr, counts)) => {
                                            bernoulli_loglik(*s, *tr, par.values[0]) + poisson_loglik(counts, par.values[1])
                                        }
                                    })
                                    .collect()
                            })
                            .collect();
                        // Plain emissions, then emissions plus arbitrary node factors.
                        let extra: Vec<Vec<f64>> =
                            (0..t_len).map(|_| (0..k).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
                        for with_extra in [false, true] {
                            let log_pot: Vec<Vec<f64>> = emis
                                .iter()
                                .zip(&extra)
                                .map(|(e, x)| e.iter().zip(x).map(|(a, b)| a + if with_extra { *b } else { 0.0 }).collect())
                                .collect();
                            let filter = if with_extra {
                                let flat: Vec<f64> = emission_table(&fx.dataset, unit, &fx.params)
                                    .iter()
                                    .zip(extra.iter().flatten())
                                    .map(|(a, b)| a + b)
                                    .collect();
                                filter_log_potentials(&flat, &weights, p).unwrap()
                            } else {
                                forward_filter(unit, &fx.dataset, &fx.params, &weights, p).unwrap()
                            };
                            let oracle = PathOracle {
                                log_pot,
                                q: q.clone(),
                                p,
                            };
                            for t in 0..t_len {
                                for (a, b) in filter.probabilities(t).iter().zip(oracle.filtered(t)) {
                                    max_err = max_err.max((a - b).abs());
                                }
                            }
                            let sampled = empirical((0..BACKWARD_DRAWS).map(|_| backward_sample(&filter, &weights, p, &mut rng)));
                            max_tv = max_tv.max(total_variation(&sampled, &oracle.posterior()));
                            n_fixtures += 1;
                        }
                    }
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome::new(
        max_err <= FILTER_TOL && max_tv <= BACKWARD_TV && secs <= 60.0,
        format!(
            "filter/backward sampler vs path enumeration over {n_fixtures} unit fixtures: max filter error {max_err:.1e} (limit {FILTER_TOL:.0e}), max backward TV {max_tv:.4} (limit {BACKWARD_TV}), {secs:.1}s"
        ),
    )
}

fn c3_geweke() -> Outcome {
    let start = Instant::now();
    let setup = GewekeSetup {
        n_units: 4,
        n_periods: 3,
        layout: vec![ChannelLayout::new("v", ChannelKind::Bernoulli, 2)],
        config: SamplerConfig {
            truncation: 3,
            gamma: 1.0,
            alpha_p: 1.0,
            beta_p: 1.0,
            ..Default::default()
        },
        n_marginal: GEWEKE_STEPS,
        n_successive: GEWEKE_STEPS,
        seed: 1,
    };
    let report = run_geweke(&setup).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let (z, ess) = (report.max_abs_z(), report.min_ess());
    let mut out = Outcome::new(
        z < GEWEKE_Z && ess >= GEWEKE_ESS && secs <= 600.0,
        format!("Geweke joint-distribution test: max |z| {z:.2} (limit {GEWEKE_Z}), min ESS {ess:.0} (need {GEWEKE_ESS:.0}), {secs:.1}s"),
    );
    for r in &report.rows {
        out = out.note(format!(
            "{:<11} marginal {:.4} successive {:.4} z {:+.2}",
            r.statistic, r.marginal_mean, r.successive_mean, r.z
        ));
    }
    out
}

fn c4_conjugate() -> Outcome {
    // (alpha, beta, successes, failures, shape, rate, total, exposures)
    let configs: [(f64, f64, u64, u64, f64, f64, u64, u64); 6] = [
        (1.0, 1.0, 0, 0, 1.0, 1.0, 0, 0),
        (10.0, 2.0, 0, 0, 3.0, 4.0, 0, 0),
        (2.0, 3.0, 7, 3, 2.0, 0.5, 14, 6),
        (0.5, 0.5, 0, 40, 1.0, 1.0, 0, 25),
        (1.0, 1.0, 900, 100, 0.5, 0.1, 2_000, 400),
        (3.0, 1.0, 1, 0, 5.0, 2.0, 1, 1),
    ];
    let crit = ks_critical_01(KS_DRAWS);
    let mut worst: f64 = 0.0;
    let mut out_notes = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for (a, b, s, f, shape, rate, c, e) in configs {
        let model = EmissionModel::new(vec![
            ChannelSpec::bernoulli("v", a, b).unwrap(),
            ChannelSpec::poisson("c", shape, rate).unwrap(),
        ])
        .unwrap();
        let stats = ClusterStats {
            channels: vec![
                ChannelStats::Binary {
                    successes: s,
                    failures: f,
                },
                ChannelStats::Count { total: c, exposures: e },
            ],
        };
        let draws: Vec<ClusterParams> = (0..KS_DRAWS).map(|_| sample_cluster_params(&model, &stats, &mut rng)).collect();
        let mut theta: Vec<f64> = draws.iter().map(|d| d.values[0]).collect();
        let mut lambda: Vec<f64> = draws.iter().map(|d| d.values[1]).collect();
        let beta = Beta::new(a + s as f64, b + f as f64).unwrap();
        let gamma = Gamma::new(shape + c as f64, rate + e as f64).unwrap();
        let d_theta = ks_statistic(&mut theta, |x| beta.cdf(x));
        let d_lambda = ks_statistic(&mut lambda, |x| gamma.cdf(x));
        worst = worst.max(d_theta).max(d_lambda);
        out_notes.push(format!(
            "Beta({a},{b}) + {s}/{} -> D {d_theta:.4}; Gamma({shape},{rate}) + {c}/{e} -> D {d_lambda:.4}",
            s + f
        ));
    }
    let mut out = Outcome::new(
        worst < crit,
        format!(
            "conjugate posteriors, {} configurations: max KS D {worst:.4} (critical {crit:.4} at 0.01)",
            configs.len()
        ),
    );
    out.notes = out_notes;
    out
}

fn drift_note(trace: &[f64]) -> String {
    match drift_test(trace, 20) {
        Some(d) => format!(
            "log-joint drift over the second half: slope {:+.3e}, p = {:.3} ({})",
            d.slope,
            d.p_value,
            if d.drifts(0.01) { "drift" } else { "no drift" }
        ),
        None => "log-joint drift: trace too short".into(),
    }
}

fn c5_structural_break() -> Outcome {
    let start = Instant::now();
    let (dataset, truth) = gen_structural_break(1).unwrap();
    let config = recovery_config(11);
    let chain = run_chains(&dataset, &config).unwrap().remove(0);
    let r = recovery_report(&chain.draws, &truth).unwrap();
    let movers = r.mean_change_at_transitions.unwrap();
    let secs = start.elapsed().as_secs_f64();
    Outcome::new(
        movers >= MOVER_MIN && r.mean_change_elsewhere <= STAYER_MAX && secs <= 900.0,
        format!(
            "structural-break recovery: change probability {movers:.3} at true transitions (need {MOVER_MIN}), {:.4} elsewhere (limit {STAYER_MAX}), {secs:.1}s",
            r.mean_change_elsewhere
        ),
    )
    .note(drift_note(&chain.trace.log_joint[config.burn_in..]))
}

fn c6_gradual_change() -> Outcome {
    let start = Instant::now();
    let (dataset, truth) = gen_gradual_change(2).unwrap();
    let config = recovery_config(12);
    let chain = run_chains(&dataset, &config).unwrap().remove(0);
    let r = recovery_report(&chain.draws, &truth).unwrap();
    let (same, diff) = (r.pairs.same_group, r.pairs.different_group);
    let gap = same.median - diff.median;
    let secs = start.elapsed().as_secs_f64();
    Outcome::new(
        same.mean >= SAME_MIN && diff.mean <= DIFF_MAX && gap >= MEDIAN_GAP && secs <= 900.0,
        format!(
            "gradual-change recovery: same-group mean {:.3} (need {SAME_MIN}), different-group mean {:.3} (limit {DIFF_MAX}), median gap {gap:.3} (need {MEDIAN_GAP}), {secs:.1}s",
            same.mean, diff.mean
        ),
    )
    .note(drift_note(&chain.trace.log_joint[config.burn_in..]))
}

fn read_dir_sorted(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect()
}

fn c7_invariance_and_determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    let (dataset, truth) = gen_gradual_change(7).unwrap();
    let panel = root.join("panel.tsv");
    std::fs::write(&panel, stickydp::io::write_panel(&dataset).unwrap()).unwrap();
    std::fs::write(root.join("truth.json"), serde_json::to_string(&truth).unwrap()).unwrap();
    let config = SamplerConfig {
        truncation: 10,
        n_iterations: 400,
        burn_in: 100,
        chains: 2,
        seed: 77,
        ..Default::default()
    };

    // Determinism: two runs per worker count.
    let fit_in = |dir: &str, workers: usize| -> BTreeMap<String, Vec<u8>> {
        let out = root.join(dir);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().unwrap();
        pool.install(|| {
            let args = FitArgs {
                dataset: panel.clone(),
                config: config.clone(),
                out_dir: out.clone(),
                workers,
            };
            commands::fit(&args).unwrap().0.commit().unwrap();
        });
        read_dir_sorted(&out)
            .into_iter()
            .filter(|(name, _)| name.ends_with(".draws.jsonl"))
            .collect()
    };
    let mut identical = true;
    let mut runs = Vec::new();
    for workers in [1, 2] {
        let a = fit_in(&format!("fit-{workers}-a"), workers);
        let b = fit_in(&format!("fit-{workers}-b"), workers);
        identical &= !a.is_empty() && a == b;
        runs.push(a);
    }
    let across_workers = runs[0] == runs[1];

    // Invariance: relabel every draw with a random injection and compare all
    // summary outputs byte for byte.
    let query = SummaryQuery::from_toml(
        r#"
cocluster_periods = [1, 15, 30]
[[series]]
name = "pooled"
group_a = { initial_group = "g1" }
group_b = { initial_group = "g2" }
[[series]]
name = "within"
mode = "within-key"
key = "initial_group"
group_a = {}
group_b = {}
"#,
        "query",
    )
    .unwrap();
    let fit_dir = root.join("fit-1-a");
    let mut rng = ChaCha8Rng::seed_from_u64(70);
    let mut relabelled = Vec::new();
    for c in 0..config.chains {
        let (header, mut draws) = read_draws_file(&fit_dir.join(format!("chain-{c}.draws.jsonl"))).unwrap();
        for d in &mut draws.draws {
            let mut perm: Vec<usize> = (0..1_000).collect();
            perm.shuffle(&mut rng);
            for g in &mut d.g {
                *g = perm[*g];
            }
            d.params = std::mem::take(&mut d.params).into_iter().map(|(k, v)| (perm[k], v)).collect();
        }
        let path = root.join(format!("relabelled-{c}.draws.jsonl"));
        std::fs::write(&path, write_draws(&header, &draws).unwrap()).unwrap();
        relabelled.push(path);
    }
    let summarize = |draws: Vec<PathBuf>, dir: &str| {
        let out = root.join(dir);
        commands::summarize(&SummarizeArgs {
            draws,
            dataset: panel.clone(),
            query: query.clone(),
            truth: Some(root.join("truth.json")),
            out_dir: out.clone(),
        })
        .unwrap()
        .commit()
        .unwrap();
        read_dir_sorted(&out)
    };
    let original = summarize(
        (0..config.chains).map(|c| fit_dir.join(format!("chain-{c}.draws.jsonl"))).collect(),
        "sum-original",
    );
    let permuted = summarize(relabelled, "sum-relabelled");
    let invariant = original == permuted && original.len() >= 6;

    Outcome::new(
        invariant && identical,
        format!(
            "label invariance: {} summary files {}; determinism: draw files {} across repeated runs at 1 and 2 workers",
            original.len(),
            if invariant { "identical after relabelling" } else { "DIFFER after relabelling" },
            if identical { "byte-identical" } else { "DIFFER" }
        ),
    )
    .note(format!(
        "draw files {} across worker counts",
        if across_workers { "also identical" } else { "differ" }
    ))
}

fn parse_series(text: &str) -> Vec<(i64, Option<[f64; 3]>)> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("period"))
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            let v = if f[1] == "NA" {
                None
            } else {
                Some([f[1].parse().unwrap(), f[2].parse().unwrap(), f[3].parse().unwrap()])
            };
            (f[0].parse().unwrap(), v)
        })
        .collect()
}

fn c8_legislative() -> Outcome {
    let start = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    let records = root.join("records.csv");
    std::fs::write(&records, write_legislative_records(&gen_legislative_records(3))).unwrap();
    let panel = root.join("panel.tsv");
    let (batch, dataset) = commands::ingest(&IngestArgs {
        records,
        regions: Some(data_dir().join("south_states.tsv")),
        schema: LegislativeSchema::default(),
        output: panel.clone(),
    })
    .unwrap();
    batch.commit().unwrap();

    let roll = dataset.channels().iter().position(|c| c.name == "roll_call").unwrap();
    let zero_roll_calls = (0..dataset.n_periods())
        .filter(|&t| {
            (0..dataset.n_units()).all(|i| {
                dataset
                    .cell(i, t)
                    .is_none_or(|c| matches!(c.channels[roll], ChannelObs::Binary { trials: 0, .. }))
            })
        })
        .count();
    let shape_ok = dataset.n_periods() == 20 && dataset.n_units() == 20 && zero_roll_calls > 0;

    let config = SamplerConfig {
        truncation: 10,
        n_iterations: LEGISLATIVE_SWEEPS,
        burn_in: 100,
        chains: 2,
        seed: 8,
        ..Default::default()
    };
    let fit_dir = root.join("fit");
    commands::fit(&FitArgs {
        dataset: panel.clone(),
        config: config.clone(),
        out_dir: fit_dir.clone(),
        workers: 1,
    })
    .unwrap()
    .0
    .commit()
    .unwrap();
    let query_path = data_dir().join("legislative/query.toml");
    let query = SummaryQuery::from_toml(&std::fs::read_to_string(&query_path).unwrap(), "query.toml").unwrap();
    let sum_dir = root.join("summary");
    commands::summarize(&SummarizeArgs {
        draws: (0..config.chains).map(|c| fit_dir.join(format!("chain-{c}.draws.jsonl"))).collect(),
        dataset: panel,
        query: query.clone(),
        truth: None,
        out_dir: sum_dir.clone(),
    })
    .unwrap()
    .commit()
    .unwrap();

    let mut well_formed = true;
    let mut n_points = 0;
    let mut modes = Vec::new();
    for spec in &query.series {
        let text = std::fs::read_to_string(sum_dir.join(format!("series_{}.tsv", spec.name))).unwrap();
        let rows = parse_series(&text);
        well_formed &= rows.len() == 20;
        for (_, v) in rows {
            if let Some([est, lo, hi]) = v {
                n_points += 1;
                well_formed &= lo <= est && est <= hi && (0.0..=1.0).contains(&lo) && hi <= 1.0;
            }
        }
        modes.push(spec.mode);
    }
    let both_modes = modes.contains(&stickydp::analysis::AlignmentMode::Pooled)
        && modes.contains(&stickydp::analysis::AlignmentMode::WithinKey);
    let secs = start.elapsed().as_secs_f64();
    Outcome::new(
        shape_ok && well_formed && both_modes && secs <= 600.0,
        format!(
            "legislative schema: {} units x {} Congresses, {zero_roll_calls} without roll calls; {} series ({} pooled/within-state), {n_points} points {}, {secs:.1}s",
            dataset.n_units(),
            dataset.n_periods(),
            query.series.len(),
            if both_modes { "both" } else { "missing" },
            if well_formed { "with lower <= mean <= upper" } else { "MALFORMED" }
        ),
    )
}

fn main() {
    // Under `cargo test -- --list` and similar, just report the target.
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let mut results: Vec<(u8, Outcome)> = Vec::new();
    let mut report = |id: u8, outcome: Outcome| {
        println!("{} criterion {id}: {}", if outcome.pass { "PASS" } else { "FAIL" }, outcome.summary);
        for n in &outcome.notes {
            println!("    {n}");
        }
        results.push((id, outcome));
    };
    report(1, c1_prior_equivalence());
    report(2, c2_filter_exactness());
    report(3, c3_geweke());
    report(4, c4_conjugate());
    report(5, c5_structural_break());
    report(6, c6_gradual_change());
    report(7, c7_invariance_and_determinism());
    report(8, c8_legislative());
    let failed: Vec<u8> = results.iter().filter(|(_, o)| !o.pass).map(|(id, _)| *id).collect();
    println!(
        "acceptance: {} passed, {} failed{}",
        results.len() - failed.len(),
        failed.len(),
        if failed.is_empty() { String::new() } else { format!(" ({failed:?})") }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
