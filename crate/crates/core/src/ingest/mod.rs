//! Loading and validation of the three input datasets.
//!
//! Cases and populations are CSV (header row required); boundaries are a
//! GeoJSON `FeatureCollection`. Everything that is recoverable but worth a
//! human look (corrections clamped during differencing, excluded source
//! categories, geometry that did not match the roster) is collected in a
//! [`QualityReport`] instead of failing the load.

mod boundaries;
mod cases;
mod populations;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use boundaries::{load_boundaries, parse_boundaries, BoundarySet, Polygon, Ring};
pub use cases::{load_cases, read_cases, write_canonical_cases, CaseSchema};
pub use populations::{load_populations, read_populations, write_populations};

/// Number of analysed population groups.
pub const K: usize = 4;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{path}: row {row}, column `{column}`: {message}")]
    Field {
        path: String,
        row: u64,
        column: String,
        message: String,
    },
    #[error("{path}: missing required column `{column}`")]
    MissingColumn { path: String, column: String },
    #[error("{path}: row {row}: unknown group label `{label}`")]
    UnknownGroup { path: String, row: u64, label: String },
    #[error("{path}: row {row}: duplicate entry for {what}")]
    Duplicate { path: String, row: u64, what: String },
    #[error("{path}: no row for municipality `{municipality_id}`, group {group} on {date}")]
    MissingRow {
        path: String,
        date: NaiveDate,
        municipality_id: String,
        group: GroupId,
    },
    #[error("{path}: municipality `{municipality_id}` has inconsistent {field} (`{first}` vs `{second}`)")]
    InconsistentMetadata {
        path: String,
        municipality_id: String,
        field: &'static str,
        first: String,
        second: String,
    },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("{path}: no population rows for municipality `{municipality_id}`")]
    MissingMunicipality { path: String, municipality_id: String },
    #[error("{path}: municipality `{municipality_id}` has no {group} population")]
    MissingGroup {
        path: String,
        municipality_id: String,
        group: GroupId,
    },
    #[error("{path}: row {row}: municipality `{municipality_id}` is not in the case roster")]
    UnknownMunicipality {
        path: String,
        row: u64,
        municipality_id: String,
    },
    #[error("{path}: row {row}: negative population {value}")]
    NegativePopulation { path: String, row: u64, value: i64 },
    #[error("{path}: feature {index}: {message}")]
    Geometry {
        path: String,
        index: usize,
        message: String,
    },
    #[error("invalid municipality: {0}")]
    InvalidMunicipality(String),
    #[error("{0}")]
    Write(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Municipality {
    pub id: String,
    pub name: String,
    pub county: String,
}

/// The four analysed groups, in the fixed order BAA, HL, OTH, W.
///
/// OTH merges the Asian, Pacific Islander and American Indian/Alaska Native
/// source categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GroupId {
    #[serde(rename = "BAA")]
    Baa,
    #[serde(rename = "HL")]
    Hl,
    #[serde(rename = "OTH")]
    Oth,
    #[serde(rename = "W")]
    W,
}

impl GroupId {
    pub const ALL: [GroupId; K] = [GroupId::Baa, GroupId::Hl, GroupId::Oth, GroupId::W];
    /// Groups compared against the reference group W.
    pub const MINORITIES: [GroupId; 3] = [GroupId::Baa, GroupId::Hl, GroupId::Oth];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(k: usize) -> Option<GroupId> {
        Self::ALL.get(k).copied()
    }

    pub fn label(self) -> &'static str {
        match self {
            GroupId::Baa => "BAA",
            GroupId::Hl => "HL",
            GroupId::Oth => "OTH",
            GroupId::W => "W",
        }
    }

    /// Lowercase form used in file names and CLI flags.
    pub fn slug(self) -> &'static str {
        match self {
            GroupId::Baa => "baa",
            GroupId::Hl => "hl",
            GroupId::Oth => "oth",
            GroupId::W => "w",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            GroupId::Baa => "Black/African American",
            GroupId::Hl => "Hispanic/Latino",
            GroupId::Oth => "Other races",
            GroupId::W => "White",
        }
    }
}

impl fmt::Display for GroupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for GroupId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "BAA" => Ok(GroupId::Baa),
            "HL" => Ok(GroupId::Hl),
            "OTH" => Ok(GroupId::Oth),
            "W" => Ok(GroupId::W),
            other => Err(format!("unknown group `{other}` (expected BAA, HL, OTH or W)")),
        }
    }
}

/// Contiguous daily axis. Day `j` (1-based) is `start_date + (j - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DateAxis {
    pub start_date: NaiveDate,
    pub n_days: usize,
}

impl DateAxis {
    pub fn new(start_date: NaiveDate, n_days: usize) -> Result<Self, IngestError> {
        if n_days == 0 {
            return Err(IngestError::Dimension("date axis needs at least one day".into()));
        }
        Ok(DateAxis { start_date, n_days })
    }

    /// Date of 1-based day `day`.
    pub fn date(&self, day: usize) -> NaiveDate {
        self.start_date + chrono::Duration::days(day as i64 - 1)
    }

    /// 0-based offset of `date`, if it lies on the axis.
    pub fn offset(&self, date: NaiveDate) -> Option<usize> {
        let delta = (date - self.start_date).num_days();
        (delta >= 0 && (delta as usize) < self.n_days).then_some(delta as usize)
    }
}

/// Daily new case counts S(i, j, k).
///
/// Stored municipality-major with each (i, k) series contiguous, so that
/// `series(i, k)` is a plain slice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseCube {
    axis: DateAxis,
    municipalities: Vec<Municipality>,
    counts: Vec<u64>,
}

impl CaseCube {
    /// `counts` is laid out as `[(i * K + k) * n_days + j]`.
    pub fn new(
        axis: DateAxis,
        municipalities: Vec<Municipality>,
        counts: Vec<u64>,
    ) -> Result<Self, IngestError> {
        validate_roster(&municipalities)?;
        let expected = municipalities.len() * K * axis.n_days;
        if counts.len() != expected {
            return Err(IngestError::Dimension(format!(
                "expected {} x {} x {K} = {expected} counts, got {}",
                municipalities.len(),
                axis.n_days,
                counts.len()
            )));
        }
        Ok(CaseCube {
            axis,
            municipalities,
            counts,
        })
    }

    /// Builds a cube from a closure over 0-based (i, j, k).
    pub fn from_fn(
        axis: DateAxis,
        municipalities: Vec<Municipality>,
        mut f: impl FnMut(usize, usize, usize) -> u64,
    ) -> Result<Self, IngestError> {
        let n = axis.n_days;
        let mut counts = Vec::with_capacity(municipalities.len() * K * n);
        for i in 0..municipalities.len() {
            for k in 0..K {
                for j in 0..n {
                    counts.push(f(i, j, k));
                }
            }
        }
        Self::new(axis, municipalities, counts)
    }

    pub fn axis(&self) -> DateAxis {
        self.axis
    }

    pub fn n_municipalities(&self) -> usize {
        self.municipalities.len()
    }

    pub fn n_days(&self) -> usize {
        self.axis.n_days
    }

    pub fn municipalities(&self) -> &[Municipality] {
        &self.municipalities
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.municipalities.iter().position(|m| m.id == id)
    }

    /// Count for 0-based municipality `i`, day offset `j` and group index `k`.
    pub fn count(&self, i: usize, j: usize, k: usize) -> u64 {
        self.counts[(i * K + k) * self.axis.n_days + j]
    }

    pub fn series(&self, i: usize, k: usize) -> &[u64] {
        let n = self.axis.n_days;
        let start = (i * K + k) * n;
        &self.counts[start..start + n]
    }

    /// Window total Cp(i, k).
    pub fn total(&self, i: usize, k: usize) -> u64 {
        self.series(i, k).iter().sum()
    }

    pub fn grand_total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Group population sizes P(i, k), aligned to a case roster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PopulationTable {
    pops: Vec<[u64; K]>,
}

impl PopulationTable {
    pub fn new(pops: Vec<[u64; K]>) -> Self {
        PopulationTable { pops }
    }

    pub fn n_municipalities(&self) -> usize {
        self.pops.len()
    }

    pub fn get(&self, i: usize, k: usize) -> u64 {
        self.pops[i][k]
    }

    pub fn row(&self, i: usize) -> [u64; K] {
        self.pops[i]
    }

    pub fn group_total(&self, k: usize) -> u64 {
        self.pops.iter().map(|row| row[k]).sum()
    }

    pub fn check_aligned(&self, cube: &CaseCube) -> Result<(), IngestError> {
        if self.pops.len() != cube.n_municipalities() {
            return Err(IngestError::Dimension(format!(
                "population table has {} municipalities, case cube has {}",
                self.pops.len(),
                cube.n_municipalities()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClampEvent {
    pub municipality_id: String,
    pub group: GroupId,
    pub date: NaiveDate,
    /// The negative day-over-day change that was replaced by zero.
    pub delta: i64,
}

/// Data-quality report shared by all loaders.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub clamps: Vec<ClampEvent>,
    /// Source categories dropped from the analysis, keyed by dataset
    /// (`cases`, `populations`) then category label.
    pub excluded_groups_totals: BTreeMap<String, BTreeMap<String, u64>>,
    /// Boundary features whose id is not in the case roster.
    pub unmatched_geometry_ids: Vec<String>,
    /// Roster municipalities with no boundary feature.
    pub missing_geometry_ids: Vec<String>,
    pub warnings: Vec<String>,
}

impl QualityReport {
    /// Anything that should turn a clean exit into "completed with
    /// warnings". Excluded categories alone are expected and do not count.
    pub fn has_warnings(&self) -> bool {
        !self.clamps.is_empty()
            || !self.unmatched_geometry_ids.is_empty()
            || !self.missing_geometry_ids.is_empty()
            || !self.warnings.is_empty()
    }

    pub(crate) fn add_excluded(&mut self, dataset: &str, category: &str, amount: u64) {
        *self
            .excluded_groups_totals
            .entry(dataset.to_string())
            .or_default()
            .entry(category.to_string())
            .or_default() += amount;
    }
}

fn validate_roster(municipalities: &[Municipality]) -> Result<(), IngestError> {
    let mut seen = HashSet::with_capacity(municipalities.len());
    for m in municipalities {
        if m.id.is_empty() {
            return Err(IngestError::InvalidMunicipality("empty municipality id".into()));
        }
        if !seen.insert(m.id.as_str()) {
            return Err(IngestError::InvalidMunicipality(format!(
                "duplicate municipality id `{}`",
                m.id
            )));
        }
    }
    Ok(())
}

/// Accepts `YYYY-MM-DD`, `YYYY/MM/DD`, and either followed by a time part.
pub(crate) fn parse_date(raw: &str) -> Option<NaiveDate> {
    let raw = raw.trim();
    let head = raw.get(..10)?;
    let rest = &raw[10..];
    if !(rest.is_empty() || rest.starts_with([' ', 'T'])) {
        return None;
    }
    NaiveDate::parse_from_str(&head.replace('/', "-"), "%Y-%m-%d").ok()
}

#[cfg(test)]
pub(crate) fn test_municipality(id: &str) -> Municipality {
    Municipality {
        id: id.to_string(),
        name: format!("Town {id}"),
        county: "Test".to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_order_and_labels() {
        let labels: Vec<_> = GroupId::ALL.iter().map(|g| g.label()).collect();
        assert_eq!(labels, ["BAA", "HL", "OTH", "W"]);
        assert_eq!("baa".parse::<GroupId>().unwrap(), GroupId::Baa);
        assert!("MO".parse::<GroupId>().is_err());
    }

    #[test]
    fn date_axis_maps_days() {
        let axis = DateAxis::new(NaiveDate::from_ymd_opt(2020, 10, 1).unwrap(), 365).unwrap();
        assert_eq!(axis.date(1), NaiveDate::from_ymd_opt(2020, 10, 1).unwrap());
        assert_eq!(axis.date(365), NaiveDate::from_ymd_opt(2021, 9, 30).unwrap());
        assert_eq!(axis.offset(NaiveDate::from_ymd_opt(2021, 10, 1).unwrap()), None);
        assert!(DateAxis::new(axis.start_date, 0).is_err());
    }

    #[test]
    fn cube_rejects_bad_dimensions_and_ids() {
        let axis = DateAxis::new(NaiveDate::from_ymd_opt(2020, 10, 1).unwrap(), 2).unwrap();
        let roster = vec![test_municipality("a")];
        assert!(CaseCube::new(axis, roster.clone(), vec![0; 7]).is_err());
        assert!(CaseCube::new(axis, roster, vec![0; 8]).is_ok());
        let dup = vec![test_municipality("a"), test_municipality("a")];
        assert!(CaseCube::new(axis, dup, vec![0; 16]).is_err());
        let empty = vec![test_municipality("")];
        assert!(CaseCube::new(axis, empty, vec![0; 8]).is_err());
    }

    #[test]
    fn parses_dhs_style_dates() {
        let d = NaiveDate::from_ymd_opt(2020, 10, 1).unwrap();
        assert_eq!(parse_date("2020-10-01"), Some(d));
        assert_eq!(parse_date("2020/10/01 19:00:00+00"), Some(d));
        assert_eq!(parse_date("2020-10-01x"), None);
        assert_eq!(parse_date("10/01/2020"), None);
    }
}
