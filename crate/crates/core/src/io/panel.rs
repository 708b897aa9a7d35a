//! Tab-separated panel files.
//!
//! ```text
//! stickydp-panel  1
//! channels        roll_call:bernoulli  bills:poisson
//! periods         73  74
//! attributes      state  party
//! unit            AL-D  AL  D
//! cell            AL-D  73  4/6  3/2/1.791759469228055
//! cell            AL-D  74  -
//! ```
//!
//! Binary fields are `successes/trials`; count fields are
//! `total/exposures/log_factorial_sum`. A lone `-` marks a cell with no
//! observations. Every (unit, period) pair appears exactly once.

use std::path::Path;

use csv::{ReaderBuilder, StringRecord, WriterBuilder};

use crate::dataset::{ChannelDecl, PanelDataset, Unit};
use crate::emissions::{CellObservations, ChannelKind, ChannelObs};
use crate::error::{Error, Result};

pub const PANEL_FORMAT: &str = "stickydp-panel";
pub const PANEL_VERSION: u32 = 1;

fn valid_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || "_.-".contains(c))
}

fn valid_field(s: &str) -> bool {
    !s.is_empty() && !s.chars().any(|c| c.is_control())
}

pub fn write_panel(dataset: &PanelDataset) -> Result<String> {
    let bad = |m: String| Error::Format { path: "<panel>".into(), message: m };
    for c in dataset.channels() {
        if !valid_name(&c.name) {
            return Err(bad(format!("channel name `{}` must be ASCII letters, digits, `_`, `.` or `-`", c.name)));
        }
    }
    for s in dataset.attribute_names().iter().chain(dataset.units().iter().flat_map(|u| {
        std::iter::once(&u.id).chain(&u.attributes)
    })) {
        if !valid_field(s) {
            return Err(bad(format!("identifier `{s}` is empty or holds control characters")));
        }
    }
    let mut w = WriterBuilder::new().delimiter(b'\t').flexible(true).from_writer(Vec::new());
    let mut row = |fields: Vec<String>| w.write_record(&fields).map_err(|e| bad(e.to_string()));
    row(vec![PANEL_FORMAT.into(), PANEL_VERSION.to_string()])?;
    row(std::iter::once("channels".to_string())
        .chain(dataset.channels().iter().map(|c| format!("{}:{}", c.name, c.kind.as_str())))
        .collect())?;
    row(std::iter::once("periods".to_string())
        .chain(dataset.periods().iter().map(i64::to_string))
        .collect())?;
    row(std::iter::once("attributes".to_string())
        .chain(dataset.attribute_names().iter().cloned())
        .collect())?;
    for u in dataset.units() {
        row(["unit".to_string(), u.id.clone()].into_iter().chain(u.attributes.iter().cloned()).collect())?;
    }
    for (i, u) in dataset.units().iter().enumerate() {
        for (t, label) in dataset.periods().iter().enumerate() {
            let mut fields = vec!["cell".to_string(), u.id.clone(), label.to_string()];
            match dataset.cell(i, t) {
                None => fields.push("-".into()),
                Some(cell) => fields.extend(cell.channels.iter().map(|obs| match *obs {
                    ChannelObs::Binary { successes, trials } => format!("{successes}/{trials}"),
                    ChannelObs::Count {
                        total,
                        exposures,
                        log_factorial_sum,
                    } => format!("{total}/{exposures}/{:?}", log_factorial_sum + 0.0), // no `-0.0` from empty sums
                })),
            }
            row(fields)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| bad(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| bad(e.to_string()))
}

struct Parser<'a> {
    path: &'a str,
}

impl Parser<'_> {
    fn err(&self, line: u64, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.to_string(),
            line: line as usize,
            message: message.into(),
        }
    }

    fn obs(&self, line: u64, field: &str, decl: &ChannelDecl) -> Result<ChannelObs> {
        let parts: Vec<&str> = field.split('/').collect();
        let int = |s: &str, what: &str| -> Result<u64> {
            s.parse::<u64>()
                .map_err(|_| self.err(line, format!("channel `{}`: {what} `{s}` is not a nonnegative integer", decl.name)))
        };
        match (decl.kind, parts.as_slice()) {
            (ChannelKind::Bernoulli, [s, n]) => {
                ChannelObs::binary(int(s, "successes")?, int(n, "trials")?).map_err(|e| self.err(line, e.to_string()))
            }
            (ChannelKind::Poisson, [c, e, l]) => {
                let lfs: f64 = l
                    .parse()
                    .map_err(|_| self.err(line, format!("channel `{}`: log-factorial sum `{l}` is not a number", decl.name)))?;
                ChannelObs::count(int(c, "count")?, int(e, "exposure")?, lfs).map_err(|e| self.err(line, e.to_string()))
            }
            (ChannelKind::Bernoulli, _) => Err(self.err(line, format!("channel `{}` expects successes/trials, got `{field}`", decl.name))),
            (ChannelKind::Poisson, _) => Err(self.err(
                line,
                format!("channel `{}` expects count/exposure/log_factorial_sum, got `{field}`", decl.name),
            )),
        }
    }
}

fn line_of(rec: &StringRecord) -> u64 {
    rec.position().map_or(0, |p| p.line())
}

/// Parses a panel file's text; `path` only labels error messages.
pub fn read_panel(text: &str, path: &str) -> Result<PanelDataset> {
    let p = Parser { path };
    let mut reader = ReaderBuilder::new()
        .delimiter(b'\t')
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| p.err(e.position().map_or(0, |q| q.line()), e.to_string()))?;
        if rec.len() == 1 && rec[0].trim().is_empty() {
            continue;
        }
        records.push(rec);
    }
    let mut it = records.into_iter();
    let mut next_meta = |tag: &str| -> Result<StringRecord> {
        let rec = it.next().ok_or_else(|| p.err(0, format!("missing `{tag}` line")))?;
        if &rec[0] != tag {
            return Err(p.err(line_of(&rec), format!("expected `{tag}`, found `{}`", &rec[0])));
        }
        Ok(rec)
    };
    let head = next_meta(PANEL_FORMAT)?;
    if head.len() != 2 || head[1] != *PANEL_VERSION.to_string() {
        return Err(p.err(line_of(&head), format!("unsupported panel version (this build reads version {PANEL_VERSION})")));
    }
    let ch = next_meta("channels")?;
    let mut channels = Vec::new();
    for f in ch.iter().skip(1) {
        let (name, kind) = f
            .split_once(':')
            .ok_or_else(|| p.err(line_of(&ch), format!("channel `{f}` must be name:kind")))?;
        let kind = ChannelKind::parse(kind)
            .ok_or_else(|| p.err(line_of(&ch), format!("unknown channel kind `{kind}` (bernoulli or poisson)")))?;
        channels.push(ChannelDecl::new(name, kind));
    }
    let pr = next_meta("periods")?;
    let periods = pr
        .iter()
        .skip(1)
        .map(|s| s.parse::<i64>().map_err(|_| p.err(line_of(&pr), format!("period `{s}` is not an integer"))))
        .collect::<Result<Vec<_>>>()?;
    let at = next_meta("attributes")?;
    let attribute_names: Vec<String> = at.iter().skip(1).map(str::to_string).collect();

    let mut units: Vec<Unit> = Vec::new();
    let mut cells: Vec<Option<Option<CellObservations>>> = Vec::new();
    let n_periods = periods.len();
    let mut seen_cell = false;
    for rec in it {
        let line = line_of(&rec);
        match &rec[0] {
            "unit" => {
                if seen_cell {
                    return Err(p.err(line, "unit lines must precede cell lines"));
                }
                if rec.len() != 2 + attribute_names.len() {
                    return Err(p.err(line, format!("unit line needs an id and {} attribute values", attribute_names.len())));
                }
                units.push(Unit {
                    id: rec[1].to_string(),
                    attributes: rec.iter().skip(2).map(str::to_string).collect(),
                });
                cells.resize(units.len() * n_periods, None);
            }
            "cell" => {
                seen_cell = true;
                if rec.len() < 4 {
                    return Err(p.err(line, "cell line needs a unit, a period and observations"));
                }
                let i = units
                    .iter()
                    .position(|u| u.id == rec[1])
                    .ok_or_else(|| p.err(line, format!("unknown unit `{}`", &rec[1])))?;
                let label: i64 = rec[2].parse().map_err(|_| p.err(line, format!("period `{}` is not an integer", &rec[2])))?;
                let t = periods
                    .iter()
                    .position(|&x| x == label)
                    .ok_or_else(|| p.err(line, format!("period {label} is not declared")))?;
                let slot = &mut cells[i * n_periods + t];
                if slot.is_some() {
                    return Err(p.err(line, format!("duplicate cell ({}, {label})", &rec[1])));
                }
                *slot = Some(if rec.len() == 4 && &rec[3] == "-" {
                    None
                } else {
                    if rec.len() != 3 + channels.len() {
                        return Err(p.err(line, format!("cell has {} fields, expected {}", rec.len() - 3, channels.len())));
                    }
                    let obs = rec
                        .iter()
                        .skip(3)
                        .zip(&channels)
                        .map(|(f, d)| p.obs(line, f, d))
                        .collect::<Result<Vec<_>>>()?;
                    Some(CellObservations::new(obs))
                });
            }
            other => return Err(p.err(line, format!("unknown record type `{other}`"))),
        }
    }
    if let Some(idx) = cells.iter().position(Option::is_none) {
        let (i, t) = (idx / n_periods, idx % n_periods);
        return Err(p.err(0, format!("cell ({}, {}) is neither present nor marked empty", units[i].id, periods[t])));
    }
    PanelDataset::new(channels, periods, attribute_names, units, cells.into_iter().flatten().collect()).map_err(|e| {
        Error::Format {
            path: path.to_string(),
            message: e.to_string(),
        }
    })
}

pub fn read_panel_file(path: &Path) -> Result<PanelDataset> {
    read_panel(&super::read_text(path)?, &path.display().to_string())
}
