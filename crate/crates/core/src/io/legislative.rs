//! Member-level legislative records collapsed into (state, party) cells.
//!
//! Input is CSV with header `congress,state,party,member,channel,value`.
//! Per-item channels (roll calls, petitions) carry one record per member and
//! item; their trials are the record count. Per-member channels carry at most
//! one record per member. A binary per-member channel (speech) has trials
//! equal to the members seated in the cell, and a count channel (bills) has
//! exposure equal to that member count. Members without a record add zero.
//! When a per-member channel has no record at all in a Congress, its data
//! is treated as unavailable there and the cell gets zero trials or exposure.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{ChannelDecl, PanelDataset, Unit};
use crate::emissions::{ln_factorial, CellObservations, ChannelKind, ChannelObs};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LegislativeRecord {
    pub congress: i64,
    pub state: String,
    pub party: String,
    pub member: String,
    pub channel: String,
    pub value: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LegislativeChannel {
    pub name: String,
    pub kind: ChannelKind,
    pub per_member: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LegislativeSchema {
    pub first_congress: i64,
    pub last_congress: i64,
    pub channels: Vec<LegislativeChannel>,
}

impl Default for LegislativeSchema {
    fn default() -> Self {
        let ch = |name: &str, kind, per_member| LegislativeChannel {
            name: name.into(),
            kind,
            per_member,
        };
        LegislativeSchema {
            first_congress: 73,
            last_congress: 92,
            channels: vec![
                ch("roll_call", ChannelKind::Bernoulli, false),
                ch("petition", ChannelKind::Bernoulli, false),
                ch("speech", ChannelKind::Bernoulli, true),
                ch("bill", ChannelKind::Poisson, true),
            ],
        }
    }
}

const PARTIES: [&str; 2] = ["D", "R"];

#[derive(Deserialize)]
struct Row {
    congress: String,
    state: String,
    party: String,
    member: String,
    channel: String,
    value: String,
}

/// Parses and validates records; `path` only labels error messages.
pub fn parse_legislative_records(text: &str, path: &str, schema: &LegislativeSchema) -> Result<Vec<LegislativeRecord>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut out = Vec::new();
    for row in reader.deserialize::<Row>() {
        let row = row.map_err(|e| Error::Parse {
            path: path.to_string(),
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = out.len() + 2;
        let err = |message: String| Error::Parse {
            path: path.to_string(),
            line,
            message,
        };
        let congress: i64 = row
            .congress
            .parse()
            .map_err(|_| err(format!("congress `{}` is not an integer", row.congress)))?;
        if congress < schema.first_congress || congress > schema.last_congress {
            return Err(err(format!(
                "congress {congress} outside the declared range {}..={}",
                schema.first_congress, schema.last_congress
            )));
        }
        if !PARTIES.contains(&row.party.as_str()) {
            return Err(err(format!("unknown party code `{}` (expected D or R)", row.party)));
        }
        if row.state.is_empty() || row.member.is_empty() {
            return Err(err("state and member must be non-empty".into()));
        }
        let channel = schema
            .channels
            .iter()
            .find(|c| c.name == row.channel)
            .ok_or_else(|| err(format!("unknown channel `{}`", row.channel)))?;
        let value: i64 = row.value.parse().map_err(|_| err(format!("value `{}` is not an integer", row.value)))?;
        if value < 0 {
            return Err(err(format!("negative value {value}")));
        }
        if channel.kind == ChannelKind::Bernoulli && value > 1 {
            return Err(err(format!("channel `{}` is binary but value is {value}", channel.name)));
        }
        out.push(LegislativeRecord {
            congress,
            state: row.state,
            party: row.party,
            member: row.member,
            channel: row.channel,
            value,
        });
    }
    Ok(out)
}

pub fn write_legislative_records(records: &[LegislativeRecord]) -> String {
    let mut out = String::from("congress,state,party,member,channel,value\n");
    for r in records {
        out.push_str(&format!("{},{},{},{},{},{}\n", r.congress, r.state, r.party, r.member, r.channel, r.value));
    }
    out
}

/// Two-column TSV `state<TAB>region` with a header row.
pub fn read_region_table(text: &str, path: &str) -> Result<BTreeMap<String, String>> {
    let mut reader = csv::ReaderBuilder::new().delimiter(b'\t').comment(Some(b'#')).from_reader(text.as_bytes());
    let mut out = BTreeMap::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Parse {
            path: path.to_string(),
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != 2 {
            return Err(Error::Parse {
                path: path.to_string(),
                line,
                message: "expected state and region".into(),
            });
        }
        if out.insert(rec[0].to_string(), rec[1].to_string()).is_some() {
            return Err(Error::Parse {
                path: path.to_string(),
                line,
                message: format!("state `{}` listed twice", &rec[0]),
            });
        }
    }
    Ok(out)
}

#[derive(Default)]
struct Acc {
    members: BTreeSet<String>,
    // per channel: per-member values keyed by member, or per-item values
    values: Vec<Vec<(String, i64)>>,
}

/// One unit per (state, party) with attributes `state`, `party` and, when a
/// region table is given, `region`. Cells with no seated member are empty.
pub fn ingest_legislative(
    records: &[LegislativeRecord],
    schema: &LegislativeSchema,
    regions: Option<&BTreeMap<String, String>>,
) -> Result<PanelDataset> {
    if records.is_empty() {
        return Err(Error::param("records", "no legislative records"));
    }
    let periods: Vec<i64> = (schema.first_congress..=schema.last_congress).collect();
    let n_channels = schema.channels.len();
    let mut cells: BTreeMap<(String, String), BTreeMap<i64, Acc>> = BTreeMap::new();
    // Congresses in which each per-member channel has any record.
    let mut available: Vec<BTreeSet<i64>> = vec![BTreeSet::new(); n_channels];
    for r in records {
        let c = schema
            .channels
            .iter()
            .position(|c| c.name == r.channel)
            .ok_or_else(|| Error::Query(format!("unknown channel `{}`", r.channel)))?;
        available[c].insert(r.congress);
        let acc = cells
            .entry((r.state.clone(), r.party.clone()))
            .or_default()
            .entry(r.congress)
            .or_insert_with(|| Acc {
                members: BTreeSet::new(),
                values: vec![Vec::new(); n_channels],
            });
        acc.members.insert(r.member.clone());
        if schema.channels[c].per_member && acc.values[c].iter().any(|(m, _)| m == &r.member) {
            return Err(Error::Query(format!(
                "member `{}` has two `{}` records in congress {}",
                r.member, r.channel, r.congress
            )));
        }
        acc.values[c].push((r.member.clone(), r.value));
    }

    let mut attribute_names = vec!["state".to_string(), "party".to_string()];
    if regions.is_some() {
        attribute_names.push("region".into());
    }
    let mut units = Vec::new();
    let mut out_cells = Vec::new();
    for ((state, party), by_congress) in &cells {
        let mut attributes = vec![state.clone(), party.clone()];
        if let Some(table) = regions {
            let region = table
                .get(state)
                .ok_or_else(|| Error::Query(format!("state `{state}` missing from the region table")))?;
            attributes.push(region.clone());
        }
        units.push(Unit {
            id: format!("{state}-{party}"),
            attributes,
        });
        for &congress in &periods {
            let cell = by_congress.get(&congress).map(|acc| {
                let n_members = acc.members.len() as u64;
                let channels = schema
                    .channels
                    .iter()
                    .enumerate()
                    .map(|(c, ch)| {
                        let vals = &acc.values[c];
                        let total: u64 = vals.iter().map(|(_, v)| *v as u64).sum();
                        let size = match (ch.per_member, available[c].contains(&congress)) {
                            (false, _) => vals.len() as u64,
                            (true, true) => n_members,
                            (true, false) => 0,
                        };
                        match ch.kind {
                            ChannelKind::Bernoulli => ChannelObs::Binary { successes: total, trials: size },
                            ChannelKind::Poisson => ChannelObs::Count {
                                total,
                                exposures: size,
                                log_factorial_sum: vals.iter().map(|(_, v)| ln_factorial(*v as u64)).sum(),
                            },
                        }
                    })
                    .collect();
                CellObservations::new(channels)
            });
            out_cells.push(cell);
        }
    }
    let channels = schema.channels.iter().map(|c| ChannelDecl::new(c.name.clone(), c.kind)).collect();
    PanelDataset::new(channels, periods, attribute_names, units, out_cells)
}

/// Reads records and an optional region table from disk.
pub fn ingest_legislative_files(
    records: &Path,
    schema: &LegislativeSchema,
    regions: Option<&Path>,
) -> Result<PanelDataset> {
    let recs = parse_legislative_records(&super::read_text(records)?, &records.display().to_string(), schema)?;
    let table = regions
        .map(|p| read_region_table(&super::read_text(p)?, &p.display().to_string()))
        .transpose()?;
    ingest_legislative(&recs, schema, table.as_ref())
}
