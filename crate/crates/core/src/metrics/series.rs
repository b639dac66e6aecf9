use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::ingest::{CaseCube, GroupId, PopulationTable, K};

/// Half-open regime (t_min, t_max] for persistence counting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeConfig {
    pub t_min: f64,
    pub t_max: f64,
}

impl RegimeConfig {
    pub fn new(t_min: f64, t_max: f64) -> Result<Self, MetricsError> {
        if t_min.is_nan() || t_max.is_nan() || t_min >= t_max {
            return Err(MetricsError::InvalidRegime { t_min, t_max });
        }
        Ok(RegimeConfig { t_min, t_max })
    }

    /// Strictly positive rank differences for `m` municipalities: (0, m].
    pub fn positive(m: usize) -> Self {
        RegimeConfig {
            t_min: 0.0,
            t_max: m.max(1) as f64,
        }
    }

    pub fn contains(&self, rd: f64) -> bool {
        self.t_min < rd && rd <= self.t_max
    }
}

/// Percentage of days whose rank difference lies in `regime`. An empty
/// series scores 0.
pub fn persistence_index(series: &[i32], regime: &RegimeConfig) -> f64 {
    if series.is_empty() {
        return 0.0;
    }
    let hits = series.iter().filter(|&&rd| regime.contains(rd as f64)).count();
    100.0 * hits as f64 / series.len() as f64
}

/// Adjusted Fisher-Pearson skewness √(n(n−1))/(n−2) · m₃/m₂^{3/2}.
///
/// `None` for fewer than three values or a constant series.
pub fn skewness<T: Copy + Into<f64>>(xs: &[T]) -> Option<f64> {
    let n = xs.len();
    if n < 3 {
        return None;
    }
    let nf = n as f64;
    let mean = xs.iter().map(|&x| x.into()).sum::<f64>() / nf;
    let (mut m2, mut m3) = (0.0, 0.0);
    for &x in xs {
        let d = x.into() - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
    }
    m2 /= nf;
    m3 /= nf;
    if m2 == 0.0 {
        return None;
    }
    let g1 = m3 / m2.powf(1.5);
    Some((nf * (nf - 1.0)).sqrt() / (nf - 2.0) * g1)
}

/// Trailing window sums; day `j` sums offsets `max(0, j+1-window)..=j`.
pub(crate) fn trailing_sums(series: &[u64], window: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(series.len());
    let mut acc = 0u64;
    for (j, &v) in series.iter().enumerate() {
        acc += v;
        if j >= window {
            acc -= series[j - window];
        }
        out.push(acc);
    }
    out
}

/// Trailing 7-day mean, truncated at the series start.
pub fn trailing_mean_7(series: &[u64]) -> Vec<f64> {
    trailing_sums(series, 7)
        .into_iter()
        .enumerate()
        .map(|(j, s)| s as f64 / (j + 1).min(7) as f64)
        .collect()
}

/// Daily per-group totals over all municipalities, indexed by group.
pub fn statewide_aggregate(cube: &CaseCube) -> [Vec<u64>; K] {
    let n = cube.n_days();
    std::array::from_fn(|k| {
        let mut totals = vec![0u64; n];
        for i in 0..cube.n_municipalities() {
            for (t, &v) in totals.iter_mut().zip(cube.series(i, k)) {
                *t += v;
            }
        }
        totals
    })
}

/// Which series a moving average is taken over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    Statewide,
    /// 0-based municipality index.
    Municipality(usize),
}

/// 7-day trailing mean per group. With `scale`, values are divided by the
/// matching group population and expressed in percent.
pub fn moving_average_7d(
    cube: &CaseCube,
    scale: Option<&PopulationTable>,
    scope: Scope,
) -> Result<[Vec<f64>; K], MetricsError> {
    let series: [Vec<u64>; K] = match scope {
        Scope::Statewide => statewide_aggregate(cube),
        Scope::Municipality(i) => {
            if i >= cube.n_municipalities() {
                return Err(MetricsError::Dimension(format!("municipality index {i} out of range")));
            }
            std::array::from_fn(|k| cube.series(i, k).to_vec())
        }
    };
    let mut out: [Vec<f64>; K] = std::array::from_fn(|k| trailing_mean_7(&series[k]));
    if let Some(pops) = scale {
        pops.check_aligned(cube)?;
        for (k, values) in out.iter_mut().enumerate() {
            let population = match scope {
                Scope::Statewide => pops.group_total(k),
                Scope::Municipality(i) => pops.get(i, k),
            };
            if population == 0 {
                return Err(MetricsError::ZeroPopulation {
                    group: GroupId::ALL[k],
                });
            }
            for v in values.iter_mut() {
                *v = 100.0 * *v / population as f64;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{test_municipality, DateAxis};
    use chrono::NaiveDate;
    use proptest::prelude::*;

    fn cube(series: &[&[u64]]) -> CaseCube {
        let n = series[0].len();
        let axis = DateAxis::new(NaiveDate::from_ymd_opt(2020, 10, 1).unwrap(), n).unwrap();
        let roster = (0..series.len()).map(|i| test_municipality(&format!("m{i}"))).collect();
        CaseCube::from_fn(axis, roster, |i, j, _| series[i][j]).unwrap()
    }

    #[test]
    fn persistence_full_and_empty() {
        let regime = RegimeConfig::positive(190);
        assert_eq!(persistence_index(&[5; 10], &regime), 100.0);
        assert_eq!(persistence_index(&[0; 10], &regime), 0.0);
        assert_eq!(persistence_index(&[190, 191], &regime), 50.0);
    }

    #[test]
    fn persistence_direct_count() {
        let series: Vec<i32> = (0..365).map(|j| if j % 5 == 0 { 3 } else { -2 }).collect();
        assert_eq!(persistence_index(&series, &RegimeConfig::positive(190)), 20.0);
    }

    #[test]
    fn unbounded_regime_counts_everything() {
        let regime = RegimeConfig::new(f64::NEG_INFINITY, f64::INFINITY).unwrap();
        assert_eq!(persistence_index(&[-189, 0, 189], &regime), 100.0);
    }

    #[test]
    fn regime_must_be_ordered() {
        assert!(RegimeConfig::new(1.0, 1.0).is_err());
        assert!(RegimeConfig::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn skewness_symmetric_and_degenerate() {
        assert_eq!(skewness(&[-2i32, -1, 0, 1, 2]), Some(0.0));
        assert_eq!(skewness(&[4i32; 6]), None);
        assert_eq!(skewness(&[1i32, 2]), None);
    }

    #[test]
    fn skewness_small_sample() {
        // (0,0,0,1): mean 1/4, m2 = 3/16, m3 = 3/32,
        // g1 = (3/32) / (3/16)^{3/2}, G1 = sqrt(12)/2 * g1
        let g1 = (3.0 / 32.0) / (3.0f64 / 16.0).powf(1.5);
        let expected = 12f64.sqrt() / 2.0 * g1;
        let got = skewness(&[0i32, 0, 0, 1]).unwrap();
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
        assert!((got - 2.0).abs() < 1e-12);
    }

    #[test]
    fn moving_average_window() {
        assert_eq!(trailing_mean_7(&[4; 10]), vec![4.0; 10]);
        assert_eq!(trailing_mean_7(&[0, 0, 0, 0, 0, 0, 7])[6], 1.0);
        assert_eq!(trailing_mean_7(&[2, 4]), [2.0, 3.0]);
    }

    #[test]
    fn statewide_sums() {
        let c = cube(&[&[3, 1], &[4, 0]]);
        let total = statewide_aggregate(&c);
        assert_eq!(total[0], [7, 1]);
        let zero = cube(&[&[0, 0]]);
        assert!(statewide_aggregate(&zero).iter().all(|s| s.iter().all(|&v| v == 0)));
    }

    #[test]
    fn scaled_average_in_percent() {
        let c = cube(&[&[10, 10], &[10, 10]]);
        let pops = PopulationTable::new(vec![[500; K], [500; K]]);
        let ma = moving_average_7d(&c, Some(&pops), Scope::Statewide).unwrap();
        assert_eq!(ma[0], [2.0, 2.0]);
        let ma = moving_average_7d(&c, Some(&pops), Scope::Municipality(1)).unwrap();
        assert_eq!(ma[3], [2.0, 2.0]);
        let zero = PopulationTable::new(vec![[0, 1, 1, 1], [0, 1, 1, 1]]);
        assert!(matches!(
            moving_average_7d(&c, Some(&zero), Scope::Statewide),
            Err(MetricsError::ZeroPopulation { group: GroupId::Baa })
        ));
    }

    proptest! {
        #[test]
        fn skewness_affine_invariance(
            xs in proptest::collection::vec(-50i32..50, 3..40),
            a in prop_oneof![-5.0f64..-0.2, 0.2f64..5.0],
            b in -100.0f64..100.0,
        ) {
            let base = skewness(&xs);
            let moved: Vec<f64> = xs.iter().map(|&x| a * x as f64 + b).collect();
            match (base, skewness(&moved)) {
                (Some(s), Some(t)) => prop_assert!((t - a.signum() * s).abs() < 1e-8 * (1.0 + s.abs())),
                (None, _) => {}
                (Some(s), None) => prop_assert!(false, "lost defined skewness {}", s),
            }
        }

        #[test]
        fn skewness_sign_antisymmetry(xs in proptest::collection::vec(-50i32..50, 3..40)) {
            let neg: Vec<i32> = xs.iter().map(|x| -x).collect();
            match (skewness(&xs), skewness(&neg)) {
                (Some(s), Some(t)) => prop_assert!((s + t).abs() < 1e-12 * (1.0 + s.abs())),
                (None, None) => {}
                other => prop_assert!(false, "{:?}", other),
            }
        }

        #[test]
        fn persistence_bounds(xs in proptest::collection::vec(-10i32..10, 1..50), lo in -10i32..10, width in 1i32..10) {
            let regime = RegimeConfig::new(lo as f64, (lo + width) as f64).unwrap();
            let per = persistence_index(&xs, &regime);
            prop_assert!((0.0..=100.0).contains(&per));
            let all_in = xs.iter().all(|&x| lo < x && x <= lo + width);
            prop_assert_eq!(per == 100.0, all_in);
        }
    }
}
