#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chrono::NaiveDate;
use rand::Rng;
use rankdiff::ingest::{CaseCube, DateAxis, Municipality, PopulationTable, K};
use rankdiff::synth::{generate, grid_boundaries, SynthSpec};

pub fn roster(m: usize) -> Vec<Municipality> {
    (0..m)
        .map(|i| Municipality {
            id: format!("m{i:02}"),
            name: format!("Town {i}"),
            county: format!("County {}", i % 3),
        })
        .collect()
}

/// Small random cube with deliberately coarse values so ties and zeros are
/// common.
pub fn random_cube(rng: &mut impl Rng, m: usize, n: usize) -> (CaseCube, PopulationTable) {
    let max_count = rng.random_range(1..=6u64);
    let axis = DateAxis::new(NaiveDate::from_ymd_opt(2020, 10, 1).unwrap(), n).unwrap();
    let cube = CaseCube::from_fn(axis, roster(m), |_, _, _| rng.random_range(0..=max_count)).unwrap();
    let pops = (0..m)
        .map(|_| std::array::from_fn(|_| if rng.random_bool(0.1) { 0 } else { rng.random_range(1..=8u64) * 5 }))
        .collect::<Vec<[u64; K]>>();
    (cube, PopulationTable::new(pops))
}

/// Writes a synthetic fixture (cases, populations, boundaries, config)
/// into `dir` through the library and returns the config path.
pub fn write_fixture(dir: &Path, spec: &SynthSpec) -> PathBuf {
    let (cube, pops) = generate(spec).unwrap();
    let mut cases = Vec::new();
    rankdiff::ingest::write_canonical_cases(&cube, &mut cases).unwrap();
    let mut populations = Vec::new();
    rankdiff::ingest::write_populations(&pops, cube.municipalities(), &mut populations).unwrap();
    std::fs::create_dir_all(dir).unwrap();
    std::fs::write(dir.join("cases.csv"), cases).unwrap();
    std::fs::write(dir.join("populations.csv"), populations).unwrap();
    std::fs::write(
        dir.join("boundaries.geojson"),
        serde_json::to_string(&grid_boundaries(cube.municipalities())).unwrap(),
    )
    .unwrap();
    let config = dir.join("config.json");
    std::fs::write(
        &config,
        r#"{"cases":"cases.csv","populations":"populations.csv","boundaries":"boundaries.geojson","overlay_day":3}"#,
    )
    .unwrap();
    config
}

pub fn small_spec(seed: u64) -> SynthSpec {
    serde_json::from_value(serde_json::json!({
        "municipalities": 7,
        "days": 21,
        "seed": seed,
        "base_rate": 0.004,
        "populations": [[900, 300, 150, 4000], [400, 800, 100, 2500], [50, 40, 30, 600],
                        [1200, 100, 90, 5000], [0, 0, 10, 300], [300, 300, 300, 300],
                        [700, 600, 200, 3300]],
        "incidence": [[1, 1, 1, 1], [2, 1, 1, 1], [1, 3, 1, 1], [1, 1, 1, 1],
                      [1, 1, 1, 1], [4, 1, 2, 1], [1, 1, 1, 1]]
    }))
    .unwrap()
}

pub fn rankdiff(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rankdiff"))
        .args(args)
        .env("RANKDIFF_THREADS", "2")
        .output()
        .expect("binary runs")
}

pub fn rankdiff_threads(args: &[&str], threads: usize) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rankdiff"))
        .args(args)
        .env("RANKDIFF_THREADS", threads.to_string())
        .output()
        .expect("binary runs")
}

/// Every file under `root`, keyed by relative path.
pub fn snapshot(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                out.insert(path.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
