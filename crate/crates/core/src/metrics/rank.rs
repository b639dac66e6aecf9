use std::cmp::Reverse;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::ingest::{CaseCube, Municipality, PopulationTable, K};

/// Quantity ranked on each day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankBasis {
    /// That day's new cases.
    #[default]
    #[serde(alias = "raw_daily")]
    Raw,
    /// Trailing 7-day mean (window truncated at the series start).
    Ma7,
    /// Cases accumulated since day 1.
    Cumulative,
}

impl FromStr for RankBasis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "raw" | "raw_daily" => Ok(RankBasis::Raw),
            "ma7" => Ok(RankBasis::Ma7),
            "cumulative" => Ok(RankBasis::Cumulative),
            other => Err(format!("unknown basis `{other}` (expected raw, ma7 or cumulative)")),
        }
    }
}

impl RankBasis {
    pub fn name(self) -> &'static str {
        match self {
            RankBasis::Raw => "raw",
            RankBasis::Ma7 => "ma7",
            RankBasis::Cumulative => "cumulative",
        }
    }
}

/// Population rank R_p(i, k): 1 for the largest group population.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PopRank {
    ranks: Vec<[u32; K]>,
}

impl PopRank {
    pub fn n_municipalities(&self) -> usize {
        self.ranks.len()
    }

    pub fn get(&self, i: usize, k: usize) -> u32 {
        self.ranks[i][k]
    }

    /// Municipality indices in increasing rank order for group `k`, i.e.
    /// the ordered index i_ok.
    pub fn order(&self, k: usize) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.ranks.len()).collect();
        order.sort_by_key(|&i| self.ranks[i][k]);
        order
    }
}

/// Case rank R_c(i, j, k), laid out like the case cube.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseRank {
    m: usize,
    n: usize,
    ranks: Vec<u32>,
}

impl CaseRank {
    pub fn n_municipalities(&self) -> usize {
        self.m
    }

    pub fn n_days(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> u32 {
        self.ranks[(i * K + k) * self.n + j]
    }

    pub fn series(&self, i: usize, k: usize) -> &[u32] {
        let start = (i * K + k) * self.n;
        &self.ranks[start..start + self.n]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankTable {
    pub pop_rank: PopRank,
    pub case_rank: CaseRank,
}

/// Ranks `values` in descending order; equal values are ordered by
/// ascending municipality id. Returns 1-based ranks in input order.
pub fn rank_descending<T: Ord + Copy>(values: &[T], roster: &[Municipality]) -> Vec<u32> {
    debug_assert_eq!(values.len(), roster.len());
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_unstable_by(|&a, &b| {
        (Reverse(values[a]), roster[a].id.as_str()).cmp(&(Reverse(values[b]), roster[b].id.as_str()))
    });
    let mut ranks = vec![0u32; values.len()];
    for (pos, i) in order.into_iter().enumerate() {
        ranks[i] = pos as u32 + 1;
    }
    ranks
}

pub fn rank_population(pops: &PopulationTable, roster: &[Municipality]) -> PopRank {
    let mut ranks = vec![[0u32; K]; pops.n_municipalities()];
    for k in 0..K {
        let column: Vec<u64> = (0..pops.n_municipalities()).map(|i| pops.get(i, k)).collect();
        for (i, r) in rank_descending(&column, roster).into_iter().enumerate() {
            ranks[i][k] = r;
        }
    }
    PopRank { ranks }
}

/// Per-day basis values for one (i, k) series.
///
/// The 7-day basis is expressed as trailing window sums: on any given day
/// every municipality shares the same window length, so ordering by sum is
/// the same as ordering by mean and stays exact in integers.
pub(crate) fn basis_series(series: &[u64], basis: RankBasis) -> Vec<u64> {
    match basis {
        RankBasis::Raw => series.to_vec(),
        RankBasis::Cumulative => series
            .iter()
            .scan(0u64, |acc, &v| {
                *acc += v;
                Some(*acc)
            })
            .collect(),
        RankBasis::Ma7 => super::series::trailing_sums(series, 7),
    }
}

pub fn rank_cases(cube: &CaseCube, basis: RankBasis) -> CaseRank {
    let (m, n) = (cube.n_municipalities(), cube.n_days());
    let mut ranks = vec![0u32; m * K * n];
    let mut day = vec![0u64; m];
    for k in 0..K {
        let values: Vec<Vec<u64>> = (0..m).map(|i| basis_series(cube.series(i, k), basis)).collect();
        for j in 0..n {
            for (i, slot) in day.iter_mut().enumerate() {
                *slot = values[i][j];
            }
            for (i, r) in rank_descending(&day, cube.municipalities()).into_iter().enumerate() {
                ranks[(i * K + k) * n + j] = r;
            }
        }
    }
    CaseRank { m, n, ranks }
}

/// Rank difference rd(i, j, k) = R_p(i, k) − R_c(i, j, k).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankDiffSeries {
    m: usize,
    n: usize,
    rd: Vec<i32>,
}

impl RankDiffSeries {
    pub fn n_municipalities(&self) -> usize {
        self.m
    }

    pub fn n_days(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> i32 {
        self.rd[(i * K + k) * self.n + j]
    }

    pub fn series(&self, i: usize, k: usize) -> &[i32] {
        let start = (i * K + k) * self.n;
        &self.rd[start..start + self.n]
    }
}

pub fn rank_diff(pop_rank: &PopRank, case_rank: &CaseRank) -> Result<RankDiffSeries, MetricsError> {
    if pop_rank.n_municipalities() != case_rank.n_municipalities() {
        return Err(MetricsError::Dimension(format!(
            "population ranks cover {} municipalities, case ranks {}",
            pop_rank.n_municipalities(),
            case_rank.n_municipalities()
        )));
    }
    let (m, n) = (case_rank.m, case_rank.n);
    let mut rd = Vec::with_capacity(m * K * n);
    for i in 0..m {
        for k in 0..K {
            let p = pop_rank.get(i, k) as i32;
            rd.extend(case_rank.series(i, k).iter().map(|&c| p - c as i32));
        }
    }
    Ok(RankDiffSeries { m, n, rd })
}

#[cfg(test)]
pub(crate) fn case_rank_from_parts(m: usize, n: usize, ranks: Vec<u32>) -> CaseRank {
    assert_eq!(ranks.len(), m * K * n);
    CaseRank { m, n, ranks }
}
