use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{
    parse_date, CaseCube, ClampEvent, DateAxis, GroupId, IngestError, Municipality, QualityReport,
    K,
};

const CANONICAL_HEADER: [&str; 6] = [
    "date",
    "municipality_id",
    "municipality_name",
    "county",
    "group",
    "count",
];

/// Input layouts understood by [`load_cases`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseSchema {
    /// Long form, one row per (date, municipality, group) of daily new cases.
    #[default]
    Canonical,
    /// Wide WI-DHS style export with one row per (municipality, date) and
    /// cumulative `POS_*_CP` columns per source category.
    WidhsCumulative,
}

impl FromStr for CaseSchema {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "canonical" => Ok(CaseSchema::Canonical),
            "widhs-cumulative" => Ok(CaseSchema::WidhsCumulative),
            other => Err(format!(
                "unknown case schema `{other}` (expected canonical or widhs-cumulative)"
            )),
        }
    }
}

/// Cumulative source columns of the WI-DHS adapter and where they land.
enum Source {
    Group(GroupId),
    Excluded(&'static str),
}

const WIDHS_SOURCES: [(&str, Source, bool); 7] = [
    ("POS_BLK_CP", Source::Group(GroupId::Baa), true),
    ("POS_E_HSP_CP", Source::Group(GroupId::Hl), true),
    ("POS_ASN_CP", Source::Group(GroupId::Oth), true),
    ("POS_AIAN_CP", Source::Group(GroupId::Oth), true),
    ("POS_WHT_CP", Source::Group(GroupId::W), true),
    ("POS_MLTOTH_CP", Source::Excluded("MO"), false),
    ("POS_UNK_CP", Source::Excluded("UNK"), false),
];
const EXCLUDED: [&str; 2] = ["MO", "UNK"];

pub fn load_cases(
    path: impl AsRef<Path>,
    schema: CaseSchema,
    report: &mut QualityReport,
) -> Result<CaseCube, IngestError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_cases(file, &path.display().to_string(), schema, report)
}

/// Like [`load_cases`] but from any reader; `label` names the source in
/// diagnostics.
pub fn read_cases<R: Read>(
    reader: R,
    label: &str,
    schema: CaseSchema,
    report: &mut QualityReport,
) -> Result<CaseCube, IngestError> {
    let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    match schema {
        CaseSchema::Canonical => read_canonical(&mut csv, label),
        CaseSchema::WidhsCumulative => read_widhs(&mut csv, label, report),
    }
}

pub fn write_canonical_cases<W: Write>(cube: &CaseCube, writer: W) -> Result<(), IngestError> {
    let mut out = csv::Writer::from_writer(writer);
    let err = |e: csv::Error| IngestError::Write(e.to_string());
    out.write_record(CANONICAL_HEADER).map_err(err)?;
    let axis = cube.axis();
    for j in 0..axis.n_days {
        let date = axis.date(j + 1).format("%Y-%m-%d").to_string();
        for (i, m) in cube.municipalities().iter().enumerate() {
            for g in GroupId::ALL {
                let count = cube.count(i, j, g.index()).to_string();
                out.write_record([&date, &m.id, &m.name, &m.county, g.label(), &count])
                    .map_err(err)?;
            }
        }
    }
    out.flush().map_err(|e| IngestError::Write(e.to_string()))
}

fn read_canonical<R: Read>(csv: &mut csv::Reader<R>, path: &str) -> Result<CaseCube, IngestError> {
    let headers = headers(csv, path)?;
    let col = |name: &str| column(&headers, name, path, false);
    let [c_date, c_id, c_name, c_county, c_group, c_count] = [
        col(CANONICAL_HEADER[0])?,
        col(CANONICAL_HEADER[1])?,
        col(CANONICAL_HEADER[2])?,
        col(CANONICAL_HEADER[3])?,
        col(CANONICAL_HEADER[4])?,
        col(CANONICAL_HEADER[5])?,
    ];

    let mut grid = Grid::new(path);
    for record in csv.records() {
        let record = record.map_err(|e| parse_error(path, e))?;
        let row = row_number(&record);
        let field = |c: usize| record.get(c).unwrap_or("");
        let date = field_date(path, row, CANONICAL_HEADER[0], field(c_date))?;
        let id = field(c_id);
        if id.is_empty() {
            return Err(field_error(path, row, CANONICAL_HEADER[1], "empty municipality id"));
        }
        let group: GroupId = field(c_group).parse().map_err(|_| IngestError::UnknownGroup {
            path: path.to_string(),
            row,
            label: field(c_group).to_string(),
        })?;
        let count = field_count(path, row, CANONICAL_HEADER[5], field(c_count))?;
        grid.meta(id, field(c_name), field(c_county))?;
        let cell = grid.cell(id, date);
        if cell[group.index()].replace(count).is_some() {
            return Err(IngestError::Duplicate {
                path: path.to_string(),
                row,
                what: format!("municipality `{id}`, group {group} on {date}"),
            });
        }
    }
    let (axis, roster, counts) = grid.finish()?;
    CaseCube::new(axis, roster, counts)
}

fn read_widhs<R: Read>(
    csv: &mut csv::Reader<R>,
    path: &str,
    report: &mut QualityReport,
) -> Result<CaseCube, IngestError> {
    let headers = headers(csv, path)?;
    let c_id = column(&headers, "GEOID", path, true)?;
    let c_name = column(&headers, "NAME", path, true)?;
    let c_date = column(&headers, "DATE", path, true)?;
    let c_county = headers.iter().position(|h| h.eq_ignore_ascii_case("COUNTY"));
    let mut sources = Vec::new();
    for (name, source, required) in &WIDHS_SOURCES {
        match headers.iter().position(|h| h.eq_ignore_ascii_case(name)) {
            Some(c) => sources.push((c, *name, source)),
            None if *required => {
                return Err(IngestError::MissingColumn {
                    path: path.to_string(),
                    column: name.to_string(),
                })
            }
            None => {}
        }
    }

    let mut grid = Grid::new(path);
    let mut excluded: HashMap<(String, NaiveDate), [u64; 2]> = HashMap::new();
    for record in csv.records() {
        let record = record.map_err(|e| parse_error(path, e))?;
        let row = row_number(&record);
        let field = |c: usize| record.get(c).unwrap_or("");
        let id = field(c_id);
        if id.is_empty() {
            return Err(field_error(path, row, "GEOID", "empty municipality id"));
        }
        let date = field_date(path, row, "DATE", field(c_date))?;
        grid.meta(id, field(c_name), c_county.map_or("", field))?;

        let mut cumulative = [0u64; K];
        let mut other = [0u64; 2];
        for &(c, name, source) in &sources {
            let value = field_count(path, row, name, field(c))?;
            match source {
                Source::Group(g) => cumulative[g.index()] += value,
                Source::Excluded(cat) => {
                    let slot = EXCLUDED.iter().position(|e| e == cat).unwrap_or(0);
                    other[slot] += value;
                }
            }
        }
        let cell = grid.cell(id, date);
        if cell.iter().any(Option::is_some) {
            return Err(IngestError::Duplicate {
                path: path.to_string(),
                row,
                what: format!("municipality `{id}` on {date}"),
            });
        }
        *cell = cumulative.map(Some);
        excluded.insert((id.to_string(), date), other);
    }

    let (axis, roster, mut counts) = grid.finish()?;
    let n = axis.n_days;
    for (i, m) in roster.iter().enumerate() {
        for g in GroupId::ALL {
            let start = (i * K + g.index()) * n;
            let series = &mut counts[start..start + n];
            for (j, delta) in difference(series) {
                report.clamps.push(ClampEvent {
                    municipality_id: m.id.clone(),
                    group: g,
                    date: axis.date(j + 1),
                    delta,
                });
            }
        }
        for (slot, cat) in EXCLUDED.iter().enumerate() {
            if !sources.iter().any(|(_, _, s)| matches!(s, Source::Excluded(c) if c == cat)) {
                continue;
            }
            let mut series: Vec<u64> = (1..=n)
                .map(|day| excluded[&(m.id.clone(), axis.date(day))][slot])
                .collect();
            difference(&mut series);
            report.add_excluded("cases", cat, series.iter().sum());
        }
    }
    CaseCube::new(axis, roster, counts)
}

/// Replaces a cumulative series by its first differences in place, the
/// first element being kept as the first day's count. Negative differences
/// are clamped to zero and returned as `(offset, delta)`.
pub(crate) fn difference(series: &mut [u64]) -> Vec<(usize, i64)> {
    let mut clamps = Vec::new();
    let mut previous = 0u64;
    for (j, value) in series.iter_mut().enumerate() {
        let current = *value;
        let delta = current as i64 - previous as i64;
        if delta < 0 {
            clamps.push((j, delta));
            *value = 0;
        } else {
            *value = delta as u64;
        }
        previous = current;
    }
    clamps
}

/// Sparse (municipality, date) grid that is densified once every row was
/// seen, rejecting gaps.
struct Grid<'a> {
    path: &'a str,
    meta: BTreeMap<String, (String, String)>,
    cells: HashMap<(String, NaiveDate), [Option<u64>; K]>,
    dates: BTreeSet<NaiveDate>,
}

impl<'a> Grid<'a> {
    fn new(path: &'a str) -> Self {
        Grid {
            path,
            meta: BTreeMap::new(),
            cells: HashMap::new(),
            dates: BTreeSet::new(),
        }
    }

    fn meta(&mut self, id: &str, name: &str, county: &str) -> Result<(), IngestError> {
        match self.meta.get(id) {
            None => {
                self.meta
                    .insert(id.to_string(), (name.to_string(), county.to_string()));
            }
            Some((known_name, known_county)) => {
                for (field, first, second) in
                    [("name", known_name, name), ("county", known_county, county)]
                {
                    if first != second {
                        return Err(IngestError::InconsistentMetadata {
                            path: self.path.to_string(),
                            municipality_id: id.to_string(),
                            field,
                            first: first.clone(),
                            second: second.to_string(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    fn cell(&mut self, id: &str, date: NaiveDate) -> &mut [Option<u64>; K] {
        self.dates.insert(date);
        self.cells.entry((id.to_string(), date)).or_insert([None; K])
    }

    /// Roster sorted by id; counts laid out for [`CaseCube::new`].
    fn finish(self) -> Result<(DateAxis, Vec<Municipality>, Vec<u64>), IngestError> {
        let (Some(&first), Some(&last)) = (self.dates.first(), self.dates.last()) else {
            return Err(IngestError::Parse {
                path: self.path.to_string(),
                message: "no data rows".into(),
            });
        };
        let axis = DateAxis::new(first, (last - first).num_days() as usize + 1)?;
        let roster: Vec<Municipality> = self
            .meta
            .into_iter()
            .map(|(id, (name, county))| Municipality { id, name, county })
            .collect();
        let n = axis.n_days;
        let mut counts = vec![0u64; roster.len() * K * n];
        for (i, m) in roster.iter().enumerate() {
            for j in 0..n {
                let date = axis.date(j + 1);
                let cell = self.cells.get(&(m.id.clone(), date));
                for g in GroupId::ALL {
                    let value = cell.and_then(|c| c[g.index()]).ok_or_else(|| {
                        IngestError::MissingRow {
                            path: self.path.to_string(),
                            date,
                            municipality_id: m.id.clone(),
                            group: g,
                        }
                    })?;
                    counts[(i * K + g.index()) * n + j] = value;
                }
            }
        }
        Ok((axis, roster, counts))
    }
}

pub(super) fn headers<R: Read>(
    csv: &mut csv::Reader<R>,
    path: &str,
) -> Result<Vec<String>, IngestError> {
    Ok(csv
        .headers()
        .map_err(|e| parse_error(path, e))?
        .iter()
        .map(|h| h.trim_start_matches('\u{feff}').to_string())
        .collect())
}

pub(super) fn column(
    headers: &[String],
    name: &str,
    path: &str,
    ignore_case: bool,
) -> Result<usize, IngestError> {
    headers
        .iter()
        .position(|h| if ignore_case { h.eq_ignore_ascii_case(name) } else { h == name })
        .ok_or_else(|| IngestError::MissingColumn {
            path: path.to_string(),
            column: name.to_string(),
        })
}

pub(super) fn row_number(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

pub(super) fn parse_error(path: &str, e: csv::Error) -> IngestError {
    IngestError::Parse {
        path: path.to_string(),
        message: e.to_string(),
    }
}

pub(super) fn field_error(path: &str, row: u64, column: &str, message: &str) -> IngestError {
    IngestError::Field {
        path: path.to_string(),
        row,
        column: column.to_string(),
        message: message.to_string(),
    }
}

fn field_date(path: &str, row: u64, column: &str, raw: &str) -> Result<NaiveDate, IngestError> {
    parse_date(raw)
        .ok_or_else(|| field_error(path, row, column, &format!("invalid date `{raw}`")))
}

fn field_count(path: &str, row: u64, column: &str, raw: &str) -> Result<u64, IngestError> {
    match raw.parse::<i64>() {
        Ok(v) if v >= 0 => Ok(v as u64),
        Ok(v) => Err(field_error(path, row, column, &format!("negative count {v}"))),
        Err(_) => Err(field_error(path, row, column, &format!("invalid count `{raw}`"))),
    }
}
