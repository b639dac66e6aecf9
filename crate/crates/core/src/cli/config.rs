use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::classify::ClassifierConfig;
use crate::ingest::{CaseSchema, GroupId};
use crate::metrics::{RankBasis, RegimeConfig};

/// Optional persistence bounds as written in the config file; a missing
/// bound falls back to the (0, M] default.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegimeBounds {
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
}

impl RegimeBounds {
    pub fn resolve(&self, m: usize) -> Result<RegimeConfig, CliError> {
        let default = RegimeConfig::positive(m);
        let t_min = self.t_min.unwrap_or(default.t_min);
        let t_max = self.t_max.unwrap_or(default.t_max);
        RegimeConfig::new(t_min, t_max).map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub cases: PathBuf,
    #[serde(default)]
    pub cases_schema: CaseSchema,
    pub populations: PathBuf,
    #[serde(default)]
    pub boundaries: Option<PathBuf>,
    #[serde(default)]
    pub basis: RankBasis,
    #[serde(default)]
    pub regime: RegimeBounds,
    #[serde(default)]
    pub classifier: ClassifierConfig,
    /// Group used for the map and the index page.
    #[serde(default = "default_group")]
    pub group: GroupId,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    /// When set, also renders the rank overlay for this 1-based day.
    #[serde(default)]
    pub overlay_day: Option<usize>,
}

fn default_group() -> GroupId {
    GroupId::Baa
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub basis: Option<RankBasis>,
    pub regime_min: Option<f64>,
    pub regime_max: Option<f64>,
    pub group: Option<GroupId>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    /// Reads a JSON config; relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        rebase(&mut cfg.cases);
        rebase(&mut cfg.populations);
        if let Some(b) = cfg.boundaries.as_mut() {
            rebase(b);
        }
        rebase(&mut cfg.out);
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(b) = o.basis {
            self.basis = b;
        }
        if let Some(v) = o.regime_min {
            self.regime.t_min = Some(v);
        }
        if let Some(v) = o.regime_max {
            self.regime.t_max = Some(v);
        }
        if let Some(g) = o.group {
            self.group = g;
        }
        if let Some(out) = &o.out {
            self.out = out.clone();
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.classifier
            .validate()
            .map_err(|e| CliError::Config(format!("classifier: {e}")))?;
        for (what, p) in [("cases", Some(&self.cases)), ("populations", Some(&self.populations)), ("boundaries", self.boundaries.as_ref())] {
            if let Some(p) = p {
                if !p.is_file() {
                    return Err(CliError::Config(format!("{what} file `{}` does not exist", p.display())));
                }
            }
        }
        Ok(())
    }
}
