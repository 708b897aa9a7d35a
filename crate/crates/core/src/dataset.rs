//! Panel of (unit, period) cells, ragged in what each cell carries.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::emissions::{CellObservations, ChannelKind, ChannelObs};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelDecl {
    pub name: String,
    pub kind: ChannelKind,
}

impl ChannelDecl {
    pub fn new(name: impl Into<String>, kind: ChannelKind) -> Self {
        ChannelDecl { name: name.into(), kind }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Unit {
    pub id: String,
    /// Values aligned with [`PanelDataset::attribute_names`].
    pub attributes: Vec<String>,
}

/// Observations per (unit, period). A cell is `None` when the unit has no
/// observations that period; its latent trajectory still runs through it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelDataset {
    channels: Vec<ChannelDecl>,
    periods: Vec<i64>,
    attribute_names: Vec<String>,
    units: Vec<Unit>,
    cells: Vec<Option<CellObservations>>,
}

impl PanelDataset {
    /// `cells` is unit-major, `units.len() × periods.len()`.
    pub fn new(
        channels: Vec<ChannelDecl>,
        periods: Vec<i64>,
        attribute_names: Vec<String>,
        units: Vec<Unit>,
        cells: Vec<Option<CellObservations>>,
    ) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::param("channels", "a dataset needs at least one channel"));
        }
        if units.is_empty() || periods.is_empty() {
            return Err(Error::param("dataset", "a dataset needs at least one unit and one period"));
        }
        if cells.len() != units.len() * periods.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} cells for {} units × {} periods",
                cells.len(),
                units.len(),
                periods.len()
            )));
        }
        for (i, c) in channels.iter().enumerate() {
            if channels[..i].iter().any(|o| o.name == c.name) {
                return Err(Error::param("channels", format!("duplicate channel `{}`", c.name)));
            }
        }
        for (i, p) in periods.iter().enumerate() {
            if i > 0 && *p <= periods[i - 1] {
                return Err(Error::param("periods", "period labels must be strictly increasing"));
            }
        }
        for (i, u) in units.iter().enumerate() {
            if u.attributes.len() != attribute_names.len() {
                return Err(Error::DimensionMismatch(format!(
                    "unit `{}` has {} attributes, expected {}",
                    u.id,
                    u.attributes.len(),
                    attribute_names.len()
                )));
            }
            if units[..i].iter().any(|o| o.id == u.id) {
                return Err(Error::param("units", format!("duplicate unit id `{}`", u.id)));
            }
        }
        for (idx, cell) in cells.iter().enumerate() {
            let Some(cell) = cell else { continue };
            if cell.channels.len() != channels.len() {
                return Err(Error::DimensionMismatch(format!(
                    "cell {idx} has {} channels, expected {}",
                    cell.channels.len(),
                    channels.len()
                )));
            }
            for (obs, decl) in cell.channels.iter().zip(&channels) {
                if obs.kind() != decl.kind {
                    return Err(Error::DimensionMismatch(format!("cell {idx}: channel `{}` has the wrong kind", decl.name)));
                }
                if let ChannelObs::Binary { successes, trials } = *obs {
                    if successes > trials {
                        return Err(Error::param("successes", format!("cell {idx}: {successes} successes of {trials} trials")));
                    }
                }
            }
        }
        Ok(PanelDataset {
            channels,
            periods,
            attribute_names,
            units,
            cells,
        })
    }

    pub fn channels(&self) -> &[ChannelDecl] {
        &self.channels
    }

    pub fn periods(&self) -> &[i64] {
        &self.periods
    }

    pub fn attribute_names(&self) -> &[String] {
        &self.attribute_names
    }

    pub fn units(&self) -> &[Unit] {
        &self.units
    }

    pub fn n_units(&self) -> usize {
        self.units.len()
    }

    pub fn n_periods(&self) -> usize {
        self.periods.len()
    }

    #[inline]
    pub fn cell(&self, unit: usize, period: usize) -> Option<&CellObservations> {
        self.cells[unit * self.periods.len() + period].as_ref()
    }

    pub fn cells(&self) -> &[Option<CellObservations>] {
        &self.cells
    }

    pub fn unit_index(&self, id: &str) -> Option<usize> {
        self.units.iter().position(|u| u.id == id)
    }

    pub fn period_index(&self, label: i64) -> Option<usize> {
        self.periods.iter().position(|&p| p == label)
    }

    pub fn attribute(&self, unit: usize, name: &str) -> Option<&str> {
        let col = self.attribute_names.iter().position(|n| n == name)?;
        Some(self.units[unit].attributes[col].as_str())
    }

    /// Units whose attributes match every `(name, value)` filter.
    pub fn select_units(&self, filters: &BTreeMap<String, String>) -> Result<Vec<usize>> {
        for name in filters.keys() {
            if !self.attribute_names.contains(name) {
                return Err(Error::Query(format!("unknown unit attribute `{name}`")));
            }
        }
        Ok((0..self.n_units())
            .filter(|&i| filters.iter().all(|(n, v)| self.attribute(i, n) == Some(v.as_str())))
            .collect())
    }
}
