//! Straight-line re-implementation of every metric, for small inputs only.
//!
//! Nothing here calls into `crate::metrics`: ranks are counted pairwise
//! instead of sorted, moving averages are re-summed per window, and
//! skewness goes through the sample standard deviation form
//! n/((n−1)(n−2)) · Σ((x−x̄)/s)³ rather than central moments.

#![allow(clippy::needless_range_loop)]

use crate::ingest::{CaseCube, PopulationTable};

const GROUPS: usize = 4;
const REFERENCE: usize = 3;

/// Everything the engine derives from a cube, indexed `[i][k]` or
/// `[i][j][k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleStats {
    pub pop_rank: Vec<[u32; GROUPS]>,
    pub case_rank: Vec<Vec<[u32; GROUPS]>>,
    pub rd: Vec<Vec<[i32; GROUPS]>>,
    /// Statewide trailing 7-day mean, `[k][j]`.
    pub ma7_statewide: Vec<Vec<f64>>,
    /// Same scaled to percent of statewide group population; `None` when a
    /// group's total population is zero.
    pub ma7_statewide_scaled: Vec<Option<Vec<f64>>>,
    pub persistence: Vec<[f64; GROUPS]>,
    pub skewness: Vec<[Option<f64>; GROUPS]>,
    /// H(i, k) for the three non-reference groups.
    pub relative_change: Vec<[Option<f64>; 3]>,
    /// "normal", "cross", "star" or "triangle".
    pub special: Vec<[&'static str; GROUPS]>,
}

/// Which per-day quantity is ranked: "raw", "ma7" or "cumulative".
pub fn oracle_stats(
    cube: &CaseCube,
    pops: &PopulationTable,
    basis: &str,
    t_min: f64,
    t_max: f64,
) -> OracleStats {
    let m = cube.n_municipalities();
    let n = cube.n_days();
    let ids: Vec<&str> = cube.municipalities().iter().map(|x| x.id.as_str()).collect();

    let mut value = vec![vec![[0f64; GROUPS]; n]; m];
    for i in 0..m {
        for k in 0..GROUPS {
            for j in 0..n {
                value[i][j][k] = match basis {
                    "raw" => cube.count(i, j, k) as f64,
                    "cumulative" => (0..=j).map(|t| cube.count(i, t, k) as f64).sum(),
                    "ma7" => {
                        let lo = j.saturating_sub(6);
                        let total: f64 = (lo..=j).map(|t| cube.count(i, t, k) as f64).sum();
                        total / (j - lo + 1) as f64
                    }
                    other => panic!("oracle: unknown basis {other}"),
                };
            }
        }
    }

    // rank = 1 + number of municipalities that beat i outright or tie with a smaller id
    let rank_of = |vals: &dyn Fn(usize) -> f64, i: usize| -> u32 {
        let mut r = 1;
        for o in 0..m {
            if o != i && (vals(o) > vals(i) || (vals(o) == vals(i) && ids[o] < ids[i])) {
                r += 1;
            }
        }
        r
    };

    let mut pop_rank = vec![[0u32; GROUPS]; m];
    let mut case_rank = vec![vec![[0u32; GROUPS]; n]; m];
    let mut rd = vec![vec![[0i32; GROUPS]; n]; m];
    for k in 0..GROUPS {
        for i in 0..m {
            pop_rank[i][k] = rank_of(&|o| pops.get(o, k) as f64, i);
        }
        for j in 0..n {
            for i in 0..m {
                case_rank[i][j][k] = rank_of(&|o| value[o][j][k], i);
                rd[i][j][k] = pop_rank[i][k] as i32 - case_rank[i][j][k] as i32;
            }
        }
    }

    let mut ma7_statewide = vec![vec![0f64; n]; GROUPS];
    let mut ma7_statewide_scaled = vec![None; GROUPS];
    for k in 0..GROUPS {
        for j in 0..n {
            let lo = j.saturating_sub(6);
            let mut total = 0u64;
            for t in lo..=j {
                for i in 0..m {
                    total += cube.count(i, t, k);
                }
            }
            ma7_statewide[k][j] = total as f64 / (j - lo + 1) as f64;
        }
        let population: u64 = (0..m).map(|i| pops.get(i, k)).sum();
        if population > 0 {
            ma7_statewide_scaled[k] = Some(
                ma7_statewide[k]
                    .iter()
                    .map(|v| v / population as f64 * 100.0)
                    .collect(),
            );
        }
    }

    let mut persistence = vec![[0f64; GROUPS]; m];
    let mut skewness = vec![[None; GROUPS]; m];
    let mut relative_change = vec![[None; 3]; m];
    let mut special = vec![["normal"; GROUPS]; m];
    for i in 0..m {
        let totals: Vec<u64> = (0..GROUPS)
            .map(|k| (0..n).map(|j| cube.count(i, j, k)).sum())
            .collect();
        for k in 0..GROUPS {
            let xs: Vec<f64> = (0..n).map(|j| rd[i][j][k] as f64).collect();
            let inside = xs.iter().filter(|&&x| x > t_min && x <= t_max).count();
            persistence[i][k] = inside as f64 * 100.0 / n as f64;
            skewness[i][k] = sample_sd_skewness(&xs);

            let (c, p) = (totals[k], pops.get(i, k));
            special[i][k] = if c == 0 && p == 0 {
                "cross"
            } else if p == 0 {
                "star"
            } else if c > p {
                "triangle"
            } else {
                "normal"
            };
        }
        let (rc, rp) = (totals[REFERENCE], pops.get(i, REFERENCE));
        for k in 0..3 {
            let (c, p) = (totals[k], pops.get(i, k));
            if p > 0 && rc > 0 && rp > 0 {
                let ratio = (c as f64 / p as f64) / (rc as f64 / rp as f64);
                relative_change[i][k] = Some((ratio - 1.0) * 100.0);
            }
        }
    }

    OracleStats {
        pop_rank,
        case_rank,
        rd,
        ma7_statewide,
        ma7_statewide_scaled,
        persistence,
        skewness,
        relative_change,
        special,
    }
}

/// Adjusted skewness in its sample-standard-deviation form.
pub fn sample_sd_skewness(xs: &[f64]) -> Option<f64> {
    let n = xs.len();
    if n < 3 {
        return None;
    }
    let nf = n as f64;
    let mean = xs.iter().sum::<f64>() / nf;
    let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    let s = (ss / (nf - 1.0)).sqrt();
    if s == 0.0 {
        return None;
    }
    let cubes: f64 = xs.iter().map(|x| ((x - mean) / s).powi(3)).sum();
    Some(nf / ((nf - 1.0) * (nf - 2.0)) * cubes)
}
