use std::time::Instant;

use rankdiff::ingest::K;
use rankdiff::metrics::{analyze, RankBasis, RegimeConfig};
use rankdiff::synth::{generate, PerMunicipality, SynthSpec};

fn spec(m: usize, n: usize, seed: u64, pops: [u64; K], lambda: [f64; K]) -> SynthSpec {
    serde_json::from_value(serde_json::json!({
        "municipalities": m, "days": n, "seed": seed, "base_rate": 0.01,
        "populations": pops, "incidence": lambda,
    }))
    .unwrap()
}

#[test]
fn empirical_mean_tracks_poisson_mean() {
    let s = spec(20, 200, 9, [100, 200, 400, 800], [1.0, 0.5, 2.0, 1.0]);
    let (cube, _) = generate(&s).unwrap();
    let expected = [1.0, 1.0, 8.0, 8.0];
    for k in 0..K {
        let total: u64 = (0..20).map(|i| cube.total(i, k)).sum();
        let mean = total as f64 / (20.0 * 200.0);
        // 4000 draws: five standard errors of a Poisson mean
        let se = (expected[k] / 4000.0f64).sqrt();
        assert!((mean - expected[k]).abs() < 5.0 * se, "group {k}: {mean} vs {}", expected[k]);
    }
}

#[test]
fn per_municipality_rows_are_respected() {
    let mut s = spec(3, 50, 1, [0; K], [1.0; K]);
    s.populations = PerMunicipality::Each(vec![[0, 0, 0, 0], [100, 0, 0, 0], [0, 0, 0, 100]]);
    let (cube, pops) = generate(&s).unwrap();
    assert_eq!(cube.total(0, 0) + cube.total(0, 3), 0);
    assert!(cube.total(1, 0) > 0 && cube.total(1, 3) == 0);
    assert!(cube.total(2, 3) > 0 && cube.total(2, 0) == 0);
    assert_eq!(pops.row(2), [0, 0, 0, 100]);
}

#[test]
fn state_sized_cube_runs_quickly() {
    let s = spec(190, 365, 2020, [500, 800, 300, 9000], [1.0; K]);
    let t = Instant::now();
    let (cube, pops) = generate(&s).unwrap();
    let analysis = analyze(&cube, &pops, RankBasis::Ma7, RegimeConfig::positive(190)).unwrap();
    assert_eq!(analysis.stats.len(), 190);
    assert!(t.elapsed().as_secs() < 20, "{:?}", t.elapsed());
}
