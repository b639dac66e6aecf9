use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::cases::{column, field_error, headers, parse_error, row_number};
use super::{GroupId, IngestError, Municipality, PopulationTable, QualityReport, K};

const HEADER: [&str; 3] = ["municipality_id", "group", "population"];

/// Where a population source category goes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Category {
    Group(GroupId),
    /// Component summed into OTH.
    OthPart,
    Excluded(&'static str),
}

fn category(label: &str) -> Option<Category> {
    let upper = label.trim().to_ascii_uppercase();
    if let Ok(g) = upper.parse::<GroupId>() {
        return Some(Category::Group(g));
    }
    Some(match upper.as_str() {
        "A" | "ASIAN" | "ASN" => Category::OthPart,
        "HPI" | "NHPI" | "PI" => Category::OthPart,
        "AIAN" => Category::OthPart,
        "MO" | "MULTI" | "MLTOTH" => Category::Excluded("MO"),
        "UNK" | "UNKNOWN" => Category::Excluded("UNK"),
        _ => return None,
    })
}

/// Loads `municipality_id,group,population` rows aligned to `roster`.
///
/// Group labels BAA, HL, W and OTH are taken as is; Asian, HPI and AIAN
/// rows are summed into OTH; MO and UNK rows are dropped and their totals
/// recorded in `report`.
pub fn load_populations(
    path: impl AsRef<Path>,
    roster: &[Municipality],
    report: &mut QualityReport,
) -> Result<PopulationTable, IngestError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_populations(file, &path.display().to_string(), roster, report)
}

pub fn read_populations<R: Read>(
    reader: R,
    path: &str,
    roster: &[Municipality],
    report: &mut QualityReport,
) -> Result<PopulationTable, IngestError> {
    let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = headers(&mut csv, path)?;
    let c_id = column(&headers, HEADER[0], path, false)?;
    let c_group = column(&headers, HEADER[1], path, false)?;
    let c_pop = column(&headers, HEADER[2], path, false)?;

    let index: HashMap<&str, usize> = roster
        .iter()
        .enumerate()
        .map(|(i, m)| (m.id.as_str(), i))
        .collect();
    let mut pops = vec![[0u64; K]; roster.len()];
    let mut seen = vec![[false; K]; roster.len()];
    let mut labels_seen: HashMap<(usize, String), u64> = HashMap::new();

    for record in csv.records() {
        let record = record.map_err(|e| parse_error(path, e))?;
        let row = row_number(&record);
        let field = |c: usize| record.get(c).unwrap_or("");
        let id = field(c_id);
        let &i = index.get(id).ok_or_else(|| IngestError::UnknownMunicipality {
            path: path.to_string(),
            row,
            municipality_id: id.to_string(),
        })?;
        let label = field(c_group);
        let cat = category(label).ok_or_else(|| IngestError::UnknownGroup {
            path: path.to_string(),
            row,
            label: label.to_string(),
        })?;
        let raw = field(c_pop);
        let value = match raw.parse::<i64>() {
            Ok(v) if v < 0 => {
                return Err(IngestError::NegativePopulation {
                    path: path.to_string(),
                    row,
                    value: v,
                })
            }
            Ok(v) => v as u64,
            Err(_) => {
                return Err(field_error(
                    path,
                    row,
                    HEADER[2],
                    &format!("invalid population `{raw}`"),
                ))
            }
        };
        let key = (i, label.trim().to_ascii_uppercase());
        if labels_seen.insert(key, row).is_some() {
            return Err(IngestError::Duplicate {
                path: path.to_string(),
                row,
                what: format!("municipality `{id}`, group `{label}`"),
            });
        }
        match cat {
            Category::Group(g) => {
                pops[i][g.index()] += value;
                seen[i][g.index()] = true;
            }
            Category::OthPart => {
                pops[i][GroupId::Oth.index()] += value;
                seen[i][GroupId::Oth.index()] = true;
            }
            Category::Excluded(name) => report.add_excluded("populations", name, value),
        }
    }

    for (i, m) in roster.iter().enumerate() {
        if seen[i].iter().all(|s| !s) {
            return Err(IngestError::MissingMunicipality {
                path: path.to_string(),
                municipality_id: m.id.clone(),
            });
        }
        if let Some(g) = GroupId::ALL.into_iter().find(|g| !seen[i][g.index()]) {
            return Err(IngestError::MissingGroup {
                path: path.to_string(),
                municipality_id: m.id.clone(),
                group: g,
            });
        }
    }
    Ok(PopulationTable::new(pops))
}

pub fn write_populations<W: Write>(
    table: &PopulationTable,
    roster: &[Municipality],
    writer: W,
) -> Result<(), IngestError> {
    let mut out = csv::Writer::from_writer(writer);
    let err = |e: csv::Error| IngestError::Write(e.to_string());
    out.write_record(HEADER).map_err(err)?;
    for (i, m) in roster.iter().enumerate() {
        for g in GroupId::ALL {
            out.write_record([&m.id, g.label(), &table.get(i, g.index()).to_string()])
                .map_err(err)?;
        }
    }
    out.flush().map_err(|e| IngestError::Write(e.to_string()))
}
