use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use geojson::{GeoJson, GeometryValue, PolygonType};
use serde_json::Value;

use super::{IngestError, Municipality, QualityReport};

/// Closed ring of (longitude, latitude) pairs in degrees.
pub type Ring = Vec<[f64; 2]>;

/// Exterior ring followed by any holes.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    pub rings: Vec<Ring>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BoundarySet {
    /// Roster municipalities with geometry, keyed by id.
    pub municipalities: BTreeMap<String, Vec<Polygon>>,
    /// County outlines (features with `"level": "county"`), keyed by id.
    pub counties: BTreeMap<String, Vec<Polygon>>,
    /// Features whose id is not in the roster, kept for reporting.
    pub unmatched: BTreeMap<String, Vec<Polygon>>,
}

impl BoundarySet {
    pub fn len(&self) -> usize {
        self.municipalities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.municipalities.is_empty()
    }

    /// (min_lon, min_lat, max_lon, max_lat) over every stored ring.
    pub fn bounds(&self) -> Option<[f64; 4]> {
        let mut it = self
            .municipalities
            .values()
            .chain(self.counties.values())
            .flatten()
            .flat_map(|p| p.rings.iter().flatten());
        let first = it.next()?;
        let init = [first[0], first[1], first[0], first[1]];
        Some(it.fold(init, |b, p| {
            [b[0].min(p[0]), b[1].min(p[1]), b[2].max(p[0]), b[3].max(p[1])]
        }))
    }
}

pub fn load_boundaries(
    path: impl AsRef<Path>,
    roster: &[Municipality],
    report: &mut QualityReport,
) -> Result<BoundarySet, IngestError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_boundaries(&text, &path.display().to_string(), roster, report)
}

/// Parses a GeoJSON `FeatureCollection` of Polygon/MultiPolygon features.
///
/// The municipality id is read from the `municipality_id` or `GEOID`
/// property, falling back to the feature id. Unclosed rings are closed and
/// noted in `report.warnings`.
pub fn parse_boundaries(
    text: &str,
    path: &str,
    roster: &[Municipality],
    report: &mut QualityReport,
) -> Result<BoundarySet, IngestError> {
    let parsed: GeoJson = text.parse().map_err(|e: geojson::Error| IngestError::Parse {
        path: path.to_string(),
        message: e.to_string(),
    })?;
    let GeoJson::FeatureCollection(collection) = parsed else {
        return Err(IngestError::Parse {
            path: path.to_string(),
            message: "expected a FeatureCollection".into(),
        });
    };

    let known: HashSet<&str> = roster.iter().map(|m| m.id.as_str()).collect();
    let mut set = BoundarySet::default();
    for (index, feature) in collection.features.iter().enumerate() {
        let geo_err = |message: String| IngestError::Geometry {
            path: path.to_string(),
            index,
            message,
        };
        let props = feature.properties.as_ref();
        let prop = |key: &str| props.and_then(|p| p.get(key)).and_then(value_string);
        let id = prop("municipality_id")
            .or_else(|| prop("GEOID"))
            .or_else(|| {
                feature.id.as_ref().map(|id| match id {
                    geojson::feature::Id::String(s) => s.clone(),
                    geojson::feature::Id::Number(n) => n.to_string(),
                })
            })
            .filter(|id| !id.is_empty())
            .ok_or_else(|| geo_err("feature has no municipality id".into()))?;
        let geometry = feature
            .geometry
            .as_ref()
            .ok_or_else(|| geo_err(format!("feature `{id}` has no geometry")))?;
        let raw: Vec<&PolygonType> = match &geometry.value {
            GeometryValue::Polygon { coordinates } => vec![coordinates],
            GeometryValue::MultiPolygon { coordinates } => coordinates.iter().collect(),
            other => {
                return Err(geo_err(format!(
                    "feature `{id}`: unsupported geometry type {}",
                    other.type_name()
                )))
            }
        };
        let mut polygons = Vec::with_capacity(raw.len());
        for rings in raw {
            let mut out = Vec::with_capacity(rings.len());
            for ring in rings {
                let mut points: Ring = Vec::with_capacity(ring.len() + 1);
                for pos in ring {
                    if pos.len() < 2 || !pos[0].is_finite() || !pos[1].is_finite() {
                        return Err(geo_err(format!("feature `{id}`: invalid position")));
                    }
                    points.push([pos[0], pos[1]]);
                }
                if points.first() != points.last() {
                    points.push(points[0]);
                    report
                        .warnings
                        .push(format!("{path}: feature `{id}`: unclosed ring was closed"));
                }
                if points.len() < 4 {
                    return Err(geo_err(format!(
                        "feature `{id}`: ring needs at least three distinct positions"
                    )));
                }
                out.push(points);
            }
            if !out.is_empty() {
                polygons.push(Polygon { rings: out });
            }
        }

        let is_county = prop("level").is_some_and(|l| l.eq_ignore_ascii_case("county"));
        let target = if is_county {
            &mut set.counties
        } else if known.contains(id.as_str()) {
            &mut set.municipalities
        } else {
            &mut set.unmatched
        };
        target.entry(id).or_default().extend(polygons);
    }

    report.unmatched_geometry_ids.extend(set.unmatched.keys().cloned());
    report.missing_geometry_ids.extend(
        roster
            .iter()
            .filter(|m| !set.municipalities.contains_key(&m.id))
            .map(|m| m.id.clone()),
    );
    Ok(set)
}

fn value_string(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::test_municipality;

    fn square(id: &str, closed: bool) -> String {
        let close = if closed { ",[0,0]" } else { "" };
        format!(
            r#"{{"type":"Feature","properties":{{"municipality_id":"{id}"}},
               "geometry":{{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,1]{close}]]}}}}"#
        )
    }

    fn collection(features: &[String]) -> String {
        format!(r#"{{"type":"FeatureCollection","features":[{}]}}"#, features.join(","))
    }

    fn parse(text: &str, ids: &[&str]) -> (Result<BoundarySet, IngestError>, QualityReport) {
        let roster: Vec<_> = ids.iter().map(|id| test_municipality(id)).collect();
        let mut report = QualityReport::default();
        let set = parse_boundaries(text, "b.geojson", &roster, &mut report);
        (set, report)
    }

    #[test]
    fn single_square() {
        let (set, report) = parse(&collection(&[square("a", true)]), &["a"]);
        let set = set.unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.municipalities["a"][0].rings[0].len(), 5);
        assert!(!report.has_warnings());
        assert_eq!(set.bounds(), Some([0.0, 0.0, 1.0, 1.0]));
    }

    #[test]
    fn unclosed_ring_is_closed_with_warning() {
        let (set, report) = parse(&collection(&[square("a", false)]), &["a"]);
        let ring = &set.unwrap().municipalities["a"][0].rings[0];
        assert_eq!(ring.first(), ring.last());
        assert_eq!(report.warnings.len(), 1);
    }

    #[test]
    fn unknown_ids_are_kept_and_reported() {
        let (set, report) = parse(&collection(&[square("a", true), square("x", true)]), &["a", "b"]);
        let set = set.unwrap();
        assert!(set.unmatched.contains_key("x"));
        assert_eq!(report.unmatched_geometry_ids, ["x"]);
        assert_eq!(report.missing_geometry_ids, ["b"]);
    }

    #[test]
    fn rejects_points_and_garbage() {
        let point = r#"{"type":"Feature","id":"a","properties":{},"geometry":{"type":"Point","coordinates":[0,0]}}"#;
        let (set, _) = parse(&collection(&[point.to_string()]), &["a"]);
        assert!(matches!(set, Err(IngestError::Geometry { .. })));
        let (set, _) = parse("{not json", &["a"]);
        assert!(matches!(set, Err(IngestError::Parse { .. })));
    }

    #[test]
    fn feature_id_fallback_and_counties() {
        let county = r#"{"type":"Feature","id":"dane","properties":{"level":"county"},
            "geometry":{"type":"MultiPolygon","coordinates":[[[[0,0],[2,0],[2,2],[0,0]]]]}}"#;
        let muni = r#"{"type":"Feature","id":55,"properties":{},
            "geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,0]]]}}"#;
        let (set, _) = parse(&collection(&[county.into(), muni.into()]), &["55"]);
        let set = set.unwrap();
        assert!(set.counties.contains_key("dane"));
        assert!(set.municipalities.contains_key("55"));
    }
}
