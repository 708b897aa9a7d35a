//! Tab-separated summary tables. Each starts with `#` comment lines naming
//! the config hash and seed behind the draws, then a header row. Missing
//! values are written `NA`.

use serde::{Deserialize, Serialize};

use crate::analysis::SummarySeries;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
}

impl Provenance {
    fn preamble(&self, kind: &str) -> String {
        format!("# stickydp-{kind}\t1\n# config_hash\t{}\n# seed\t{}\n", self.config_hash, self.seed)
    }
}

fn num(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x}"))
}

/// One row per period: label, estimate, lower, upper, pair count.
pub fn series_tsv(series: &SummarySeries, period_labels: &[i64], prov: &Provenance) -> String {
    let mut out = prov.preamble("series");
    out.push_str(&format!("# level\t{}\n", series.level));
    out.push_str("period\testimate\tlower\tupper\tn_pairs\n");
    for pt in &series.points {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            period_labels[pt.period],
            num(pt.estimate),
            num(pt.lower),
            num(pt.upper),
            pt.n_pairs
        ));
    }
    out
}

/// Units by periods; the first period has no predecessor and is `NA`.
pub fn change_matrix_tsv(matrix: &[Vec<f64>], unit_ids: &[String], period_labels: &[i64], prov: &Provenance) -> String {
    let mut out = prov.preamble("change-probability");
    out.push_str("unit");
    for p in period_labels {
        out.push_str(&format!("\t{p}"));
    }
    out.push('\n');
    for (id, row) in unit_ids.iter().zip(matrix) {
        out.push_str(id);
        out.push_str("\tNA");
        for v in row {
            out.push_str(&format!("\t{v}"));
        }
        out.push('\n');
    }
    out
}

pub fn cocluster_matrix_tsv(matrix: &[Vec<f64>], unit_ids: &[String], period_label: i64, prov: &Provenance) -> String {
    let mut out = prov.preamble("cocluster");
    out.push_str(&format!("# period\t{period_label}\nunit"));
    for id in unit_ids {
        out.push_str(&format!("\t{id}"));
    }
    out.push('\n');
    for (id, row) in unit_ids.iter().zip(matrix) {
        out.push_str(id);
        for v in row {
            out.push_str(&format!("\t{v}"));
        }
        out.push('\n');
    }
    out
}
