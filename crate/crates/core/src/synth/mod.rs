//! Seeded synthetic fixtures with planted incidence structure.
//!
//! Daily counts are Poisson with mean `λ(i,k) · P(i,k) · base_rate`, drawn
//! in (municipality, group, day) order from a single ChaCha stream, so a
//! spec (seed included) fully determines its output.

pub mod oracle;

use chrono::NaiveDate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::ingest::{CaseCube, DateAxis, IngestError, Municipality, PopulationTable, K};

pub use oracle::{oracle_stats, OracleStats};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid spec: {0}")]
    Spec(String),
    #[error(transparent)]
    Ingest(#[from] IngestError),
}

/// Either one row applied to every municipality or one row per
/// municipality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerMunicipality<T> {
    Uniform([T; K]),
    Each(Vec<[T; K]>),
}

impl<T: Copy> PerMunicipality<T> {
    fn row(&self, i: usize) -> [T; K] {
        match self {
            PerMunicipality::Uniform(row) => *row,
            PerMunicipality::Each(rows) => rows[i],
        }
    }

    fn check_len(&self, m: usize, what: &str) -> Result<(), SynthError> {
        match self {
            PerMunicipality::Each(rows) if rows.len() != m => Err(SynthError::Spec(format!(
                "`{what}` has {} rows, expected {m}",
                rows.len()
            ))),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub municipalities: usize,
    pub days: usize,
    /// Must be 4 when given.
    #[serde(default = "default_groups")]
    pub groups: usize,
    pub seed: u64,
    #[serde(default = "default_start")]
    pub start_date: NaiveDate,
    /// Expected daily cases per person at λ = 1.
    pub base_rate: f64,
    pub populations: PerMunicipality<u64>,
    /// Incidence multipliers λ(i, k); all ones if omitted.
    #[serde(default = "default_incidence")]
    pub incidence: PerMunicipality<f64>,
}

fn default_groups() -> usize {
    K
}

fn default_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2020, 10, 1).expect("valid date")
}

fn default_incidence() -> PerMunicipality<f64> {
    PerMunicipality::Uniform([1.0; K])
}

impl SynthSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.municipalities == 0 || self.days == 0 {
            return Err(SynthError::Spec("municipalities and days must be positive".into()));
        }
        if self.groups != K {
            return Err(SynthError::Spec(format!("groups must be {K}, got {}", self.groups)));
        }
        if !(self.base_rate.is_finite() && self.base_rate >= 0.0) {
            return Err(SynthError::Spec("base_rate must be finite and non-negative".into()));
        }
        self.populations.check_len(self.municipalities, "populations")?;
        self.incidence.check_len(self.municipalities, "incidence")?;
        for i in 0..self.municipalities {
            if self.incidence.row(i).iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
                return Err(SynthError::Spec(format!(
                    "incidence row {i} must be finite and non-negative"
                )));
            }
        }
        Ok(())
    }

    /// Roster of generated municipalities; ids sort in index order.
    pub fn roster(&self) -> Vec<Municipality> {
        let width = self.municipalities.to_string().len().max(3);
        (0..self.municipalities)
            .map(|i| Municipality {
                id: format!("S{:0width$}", i + 1),
                name: format!("Synthetic {}", i + 1),
                county: format!("County {}", (b'A' + (i % 6) as u8) as char),
            })
            .collect()
    }
}

pub fn generate(spec: &SynthSpec) -> Result<(CaseCube, PopulationTable), SynthError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (m, n) = (spec.municipalities, spec.days);
    let mut counts = Vec::with_capacity(m * K * n);
    for i in 0..m {
        let pops = spec.populations.row(i);
        let lambda = spec.incidence.row(i);
        for k in 0..K {
            let mean = lambda[k] * pops[k] as f64 * spec.base_rate;
            if mean > 0.0 {
                let poisson = Poisson::new(mean).map_err(|e| SynthError::Spec(e.to_string()))?;
                counts.extend((0..n).map(|_| poisson.sample(&mut rng) as u64));
            } else {
                counts.extend(std::iter::repeat_n(0, n));
            }
        }
    }
    let axis = DateAxis::new(spec.start_date, n)?;
    let cube = CaseCube::new(axis, spec.roster(), counts)?;
    let pops = PopulationTable::new((0..m).map(|i| spec.populations.row(i)).collect());
    Ok((cube, pops))
}

/// Square-cell GeoJSON grid covering `roster`, one feature per municipality
/// plus one county outline per distinct county.
pub fn grid_boundaries(roster: &[Municipality]) -> serde_json::Value {
    const ORIGIN: (f64, f64) = (-92.5, 46.5);
    const CELL: f64 = 0.25;
    let cols = (roster.len() as f64).sqrt().ceil().max(1.0) as usize;
    let square = |x0: f64, y0: f64, w: f64, h: f64| {
        json!([[[x0, y0], [x0 + w, y0], [x0 + w, y0 - h], [x0, y0 - h], [x0, y0]]])
    };
    let mut features: Vec<serde_json::Value> = roster
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let (col, row) = ((i % cols) as f64, (i / cols) as f64);
            json!({
                "type": "Feature",
                "properties": {"municipality_id": m.id, "name": m.name},
                "geometry": {
                    "type": "Polygon",
                    "coordinates": square(ORIGIN.0 + col * CELL, ORIGIN.1 - row * CELL, CELL, CELL),
                }
            })
        })
        .collect();
    let rows = roster.len().div_ceil(cols) as f64;
    features.push(json!({
        "type": "Feature",
        "properties": {"municipality_id": "state", "level": "county"},
        "geometry": {
            "type": "Polygon",
            "coordinates": square(ORIGIN.0, ORIGIN.1, cols as f64 * CELL, rows * CELL),
        }
    }));
    json!({"type": "FeatureCollection", "features": features})
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(incidence: PerMunicipality<f64>) -> SynthSpec {
        SynthSpec {
            municipalities: 4,
            days: 20,
            groups: K,
            seed: 11,
            start_date: default_start(),
            base_rate: 0.01,
            populations: PerMunicipality::Uniform([100, 200, 300, 400]),
            incidence,
        }
    }

    #[test]
    fn zero_incidence_gives_zero_cube() {
        let (cube, pops) = generate(&spec(PerMunicipality::Uniform([0.0; K]))).unwrap();
        assert_eq!(cube.grand_total(), 0);
        assert_eq!(pops.row(2), [100, 200, 300, 400]);
    }

    #[test]
    fn seed_fixes_output() {
        let s = spec(default_incidence());
        assert_eq!(generate(&s).unwrap(), generate(&s).unwrap());
        let other = SynthSpec { seed: 12, ..s.clone() };
        assert_ne!(generate(&s).unwrap().0, generate(&other).unwrap().0);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(generate(&spec(PerMunicipality::Uniform([-1.0, 1.0, 1.0, 1.0]))).is_err());
        assert!(generate(&spec(PerMunicipality::Each(vec![[1.0; K]; 3]))).is_err());
        let s = SynthSpec { groups: 7, ..spec(default_incidence()) };
        assert!(s.validate().is_err());
    }

    #[test]
    fn spec_json_accepts_uniform_and_per_row() {
        let s: SynthSpec = serde_json::from_str(
            r#"{"municipalities":2,"days":3,"seed":1,"base_rate":0.1,
                "populations":[[1,2,3,4],[5,6,7,8]],"incidence":[1,1,1,2]}"#,
        )
        .unwrap();
        assert_eq!(s.populations.row(1), [5, 6, 7, 8]);
        assert_eq!(s.incidence.row(0)[3], 2.0);
        assert_eq!(s.roster()[1].id, "S002");
    }

    #[test]
    fn grid_covers_roster() {
        let s = spec(default_incidence());
        let grid = grid_boundaries(&s.roster());
        let mut report = crate::ingest::QualityReport::default();
        let set = crate::ingest::parse_boundaries(&grid.to_string(), "grid", &s.roster(), &mut report)
            .unwrap();
        assert_eq!(set.len(), 4);
        assert_eq!(set.counties.len(), 1);
        assert!(!report.has_warnings());
    }
}
