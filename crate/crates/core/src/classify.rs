//! Rule-based partition of municipalities in (skewness, persistence) space.
//!
//! Rules are applied in order, first match wins:
//!
//! 1. undefined skewness → `Unclassified`
//! 2. `|skew| < g0_skew_max` → `G0` (near-symmetric)
//! 3. `skew ∈ [g1_skew_min, g1_skew_max]` and `per ≥ g1_per_min` → `G1`
//! 4. `skew ∈ [g2_skew_min, g2_skew_max]` and `per < g2_per_max` → `G2`
//! 5. anything else → `G3`

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::GroupStats;

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("threshold `{0}` must be finite")]
    NonFinite(&'static str),
    #[error("`{min_name}` ({min}) must be below `{max_name}` ({max})")]
    Unordered {
        min_name: &'static str,
        min: f64,
        max_name: &'static str,
        max: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClassLabel {
    G0,
    G1,
    G2,
    G3,
    #[serde(rename = "unclassified")]
    Unclassified,
}

impl ClassLabel {
    pub const ALL: [ClassLabel; 5] = [
        ClassLabel::G0,
        ClassLabel::G1,
        ClassLabel::G2,
        ClassLabel::G3,
        ClassLabel::Unclassified,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassLabel::G0 => "G0",
            ClassLabel::G1 => "G1",
            ClassLabel::G2 => "G2",
            ClassLabel::G3 => "G3",
            ClassLabel::Unclassified => "unclassified",
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierConfig {
    pub g0_skew_max: f64,
    pub g1_per_min: f64,
    pub g1_skew_min: f64,
    pub g1_skew_max: f64,
    pub g2_skew_min: f64,
    pub g2_skew_max: f64,
    pub g2_per_max: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            g0_skew_max: 1.0,
            g1_per_min: 90.0,
            g1_skew_min: 1.0,
            g1_skew_max: 5.0,
            g2_skew_min: 2.0,
            g2_skew_max: 4.0,
            g2_per_max: 90.0,
        }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<(), ClassifyError> {
        let fields = [
            ("g0_skew_max", self.g0_skew_max),
            ("g1_per_min", self.g1_per_min),
            ("g1_skew_min", self.g1_skew_min),
            ("g1_skew_max", self.g1_skew_max),
            ("g2_skew_min", self.g2_skew_min),
            ("g2_skew_max", self.g2_skew_max),
            ("g2_per_max", self.g2_per_max),
        ];
        if let Some((name, _)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(ClassifyError::NonFinite(name));
        }
        for (min_name, min, max_name, max) in [
            ("g1_skew_min", self.g1_skew_min, "g1_skew_max", self.g1_skew_max),
            ("g2_skew_min", self.g2_skew_min, "g2_skew_max", self.g2_skew_max),
        ] {
            if min >= max {
                return Err(ClassifyError::Unordered {
                    min_name,
                    min,
                    max_name,
                    max,
                });
            }
        }
        Ok(())
    }
}

pub fn classify_one(skewness: Option<f64>, persistence_pct: f64, cfg: &ClassifierConfig) -> ClassLabel {
    let Some(skew) = skewness else {
        return ClassLabel::Unclassified;
    };
    if skew.abs() < cfg.g0_skew_max {
        ClassLabel::G0
    } else if (cfg.g1_skew_min..=cfg.g1_skew_max).contains(&skew) && persistence_pct >= cfg.g1_per_min {
        ClassLabel::G1
    } else if (cfg.g2_skew_min..=cfg.g2_skew_max).contains(&skew) && persistence_pct < cfg.g2_per_max {
        ClassLabel::G2
    } else {
        ClassLabel::G3
    }
}

pub fn classify(stats: &[GroupStats], cfg: &ClassifierConfig) -> Vec<ClassLabel> {
    stats
        .iter()
        .map(|s| classify_one(s.skewness, s.persistence_pct, cfg))
        .collect()
}
