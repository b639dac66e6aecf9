//! Ranks, rank-difference series and per-(municipality, group) summaries.
//!
//! All functions are pure over the immutable ingest types. [`analyze`]
//! strings them together and fans out across municipalities.

mod rank;
mod relative;
mod series;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{CaseCube, GroupId, IngestError, PopulationTable, K};

pub use rank::{
    rank_cases, rank_descending, rank_diff, rank_population, CaseRank, PopRank, RankBasis,
    RankDiffSeries, RankTable,
};
pub use relative::{relative_change, Marker, RelativeChange, SpecialCase};
pub use series::{
    moving_average_7d, persistence_index, skewness, statewide_aggregate, trailing_mean_7,
    RegimeConfig, Scope,
};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid regime ({t_min}, {t_max}]: t_min must be below t_max")]
    InvalidRegime { t_min: f64, t_max: f64 },
    #[error("cannot scale by population: total {group} population is zero")]
    ZeroPopulation { group: GroupId },
    #[error(transparent)]
    Ingest(#[from] IngestError),
}

/// Summary of one municipality's series for one group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub persistence_pct: f64,
    pub skewness: Option<f64>,
    /// Against group W; `None` for W itself.
    pub relative_change: Option<RelativeChange>,
    pub special: SpecialCase,
    pub cases_total: u64,
    pub population: u64,
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub basis: RankBasis,
    pub regime: RegimeConfig,
    pub ranks: RankTable,
    pub rd: RankDiffSeries,
    /// Indexed by municipality, then group.
    pub stats: Vec<[GroupStats; K]>,
}

impl Analysis {
    pub fn group_stats(&self, group: GroupId) -> Vec<GroupStats> {
        self.stats.iter().map(|row| row[group.index()]).collect()
    }
}

pub fn group_stats(
    cube: &CaseCube,
    pops: &PopulationTable,
    rd: &RankDiffSeries,
    regime: &RegimeConfig,
    i: usize,
) -> [GroupStats; K] {
    let w = GroupId::W.index();
    let (ref_cases, ref_pop) = (cube.total(i, w), pops.get(i, w));
    std::array::from_fn(|k| {
        let cases_total = cube.total(i, k);
        let population = pops.get(i, k);
        let series = rd.series(i, k);
        GroupStats {
            persistence_pct: persistence_index(series, regime),
            skewness: skewness(series),
            relative_change: (k != w)
                .then(|| relative_change(cases_total, population, ref_cases, ref_pop)),
            special: SpecialCase::of(cases_total, population),
            cases_total,
            population,
        }
    })
}

/// Full metric pass over a cube.
pub fn analyze(
    cube: &CaseCube,
    pops: &PopulationTable,
    basis: RankBasis,
    regime: RegimeConfig,
) -> Result<Analysis, MetricsError> {
    pops.check_aligned(cube)?;
    let pop_rank = rank_population(pops, cube.municipalities());
    let case_rank = rank_cases(cube, basis);
    let rd = rank_diff(&pop_rank, &case_rank)?;
    let stats = (0..cube.n_municipalities())
        .into_par_iter()
        .map(|i| group_stats(cube, pops, &rd, &regime, i))
        .collect();
    Ok(Analysis {
        basis,
        regime,
        ranks: RankTable {
            pop_rank,
            case_rank,
        },
        rd,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{test_municipality, DateAxis};
    use chrono::NaiveDate;
    use proptest::prelude::*;

    fn small_cube(m: usize, n: usize, counts: &[u64]) -> CaseCube {
        let axis = DateAxis::new(NaiveDate::from_ymd_opt(2020, 10, 1).unwrap(), n).unwrap();
        let roster = (0..m).map(|i| test_municipality(&format!("m{i:02}"))).collect();
        CaseCube::new(axis, roster, counts.to_vec()).unwrap()
    }

    fn cube_strategy() -> impl Strategy<Value = (CaseCube, PopulationTable)> {
        (2usize..7, 1usize..10).prop_flat_map(|(m, n)| {
            (
                proptest::collection::vec(0u64..6, m * K * n),
                proptest::collection::vec(0u64..50, m * K),
            )
                .prop_map(move |(counts, pops)| {
                    let table = pops.chunks(K).map(|c| [c[0], c[1], c[2], c[3]]).collect();
                    (small_cube(m, n, &counts), PopulationTable::new(table))
                })
        })
    }

    #[test]
    fn analyze_rejects_misaligned_populations() {
        let cube = small_cube(2, 1, &[0; 8]);
        let pops = PopulationTable::new(vec![[1; K]]);
        assert!(analyze(&cube, &pops, RankBasis::Raw, RegimeConfig::positive(2)).is_err());
    }

    #[test]
    fn w_has_no_relative_change() {
        let cube = small_cube(1, 3, &[1; 12]);
        let pops = PopulationTable::new(vec![[10; K]]);
        let a = analyze(&cube, &pops, RankBasis::Raw, RegimeConfig::positive(1)).unwrap();
        assert!(a.stats[0][GroupId::W.index()].relative_change.is_none());
        assert_eq!(a.stats[0][0].relative_change.unwrap().pct, Some(0.0));
    }

    proptest! {
        #[test]
        fn ranks_are_permutations_and_rd_sums_to_zero((cube, pops) in cube_strategy(), basis in prop_oneof![
            Just(RankBasis::Raw), Just(RankBasis::Ma7), Just(RankBasis::Cumulative)
        ]) {
            let m = cube.n_municipalities();
            let a = analyze(&cube, &pops, basis, RegimeConfig::positive(m)).unwrap();
            for k in 0..K {
                let mut col: Vec<u32> = (0..m).map(|i| a.ranks.pop_rank.get(i, k)).collect();
                col.sort_unstable();
                prop_assert_eq!(col, (1..=m as u32).collect::<Vec<_>>());
                for j in 0..cube.n_days() {
                    let mut day: Vec<u32> = (0..m).map(|i| a.ranks.case_rank.get(i, j, k)).collect();
                    day.sort_unstable();
                    prop_assert_eq!(day, (1..=m as u32).collect::<Vec<_>>());
                    let sum: i32 = (0..m).map(|i| a.rd.get(i, j, k)).sum();
                    prop_assert_eq!(sum, 0);
                    for i in 0..m {
                        prop_assert!(a.rd.get(i, j, k).unsigned_abs() as usize <= m - 1);
                    }
                }
            }
        }

        #[test]
        fn larger_value_ranks_strictly_better((cube, _) in cube_strategy()) {
            let cr = rank_cases(&cube, RankBasis::Raw);
            let m = cube.n_municipalities();
            for k in 0..K {
                for j in 0..cube.n_days() {
                    for a in 0..m {
                        for b in 0..m {
                            if cube.count(a, j, k) > cube.count(b, j, k) {
                                prop_assert!(cr.get(a, j, k) < cr.get(b, j, k));
                            }
                        }
                    }
                }
            }
        }

        #[test]
        fn scaling_a_day_keeps_its_ranks((cube, _) in cube_strategy(), factor in 2u64..5) {
            let scaled = CaseCube::from_fn(cube.axis(), cube.municipalities().to_vec(), |i, j, k| {
                cube.count(i, j, k) * factor
            }).unwrap();
            prop_assert_eq!(rank_cases(&cube, RankBasis::Raw), rank_cases(&scaled, RankBasis::Raw));
        }
    }
}
