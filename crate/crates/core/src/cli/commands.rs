use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::{json, Value};

use super::{CliError, RunConfig};
use crate::classify::{classify, ClassLabel};
use crate::ingest::{
    load_boundaries, load_cases, load_populations, write_canonical_cases, write_populations,
    BoundarySet, CaseCube, GroupId, PopulationTable, QualityReport, K,
};
use crate::metrics::{analyze, moving_average_7d, Analysis, Scope};
use crate::render::{
    build_choropleth, build_dashboard, file_stem, render_choropleth, render_dashboard,
    render_index, render_rank_overlay,
};
use crate::synth::{generate, grid_boundaries, SynthSpec};
use crate::Result;

/// How a command finished when it did not fail outright.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Clean,
    Warnings,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Clean => 0,
            Outcome::Warnings => 1,
        }
    }

    fn from_report(report: &QualityReport) -> Self {
        if report.has_warnings() {
            Outcome::Warnings
        } else {
            Outcome::Clean
        }
    }
}

pub struct Inputs {
    pub cube: CaseCube,
    pub pops: PopulationTable,
    pub boundaries: Option<BoundarySet>,
    pub report: QualityReport,
}

pub fn load_inputs(cfg: &RunConfig) -> Result<Inputs> {
    cfg.validate()?;
    let mut report = QualityReport::default();
    let cube = load_cases(&cfg.cases, cfg.cases_schema, &mut report)?;
    let pops = load_populations(&cfg.populations, cube.municipalities(), &mut report)?;
    let boundaries = match &cfg.boundaries {
        Some(path) => Some(load_boundaries(path, cube.municipalities(), &mut report)?),
        None => None,
    };
    Ok(Inputs {
        cube,
        pops,
        boundaries,
        report,
    })
}

/// Loads every input and returns the quality report as pretty JSON.
pub fn cmd_validate(cfg: &RunConfig) -> Result<(Outcome, String)> {
    let inputs = load_inputs(cfg)?;
    let text = to_json(&inputs.report)?;
    Ok((Outcome::from_report(&inputs.report), text))
}

struct Computed {
    inputs: Inputs,
    analysis: Analysis,
    labels: Vec<[ClassLabel; K]>,
}

fn compute(cfg: &RunConfig) -> Result<Computed> {
    let inputs = load_inputs(cfg)?;
    let regime = cfg.regime.resolve(inputs.cube.n_municipalities())?;
    let analysis = analyze(&inputs.cube, &inputs.pops, cfg.basis, regime)?;
    let per_group: Vec<Vec<ClassLabel>> = GroupId::ALL
        .iter()
        .map(|&g| classify(&analysis.group_stats(g), &cfg.classifier))
        .collect();
    let labels = (0..inputs.cube.n_municipalities())
        .map(|i| std::array::from_fn(|k| per_group[k][i]))
        .collect();
    Ok(Computed {
        inputs,
        analysis,
        labels,
    })
}

/// Runs the whole pipeline and writes the output tree under `cfg.out`.
/// Returns the outcome and the written paths, in write order.
pub fn cmd_run(cfg: &RunConfig) -> Result<(Outcome, Vec<PathBuf>)> {
    let mut c = compute(cfg)?;
    if c.inputs.boundaries.is_none() {
        c.inputs.report.warnings.push("no boundaries configured; choropleth skipped".into());
    }
    let out = &cfg.out;
    let mut written = Vec::new();
    let mut put = |rel: &str, bytes: &[u8]| -> Result<()> {
        let path = out.join(rel);
        write_file(&path, bytes)?;
        written.push(path);
        Ok(())
    };

    put("rd.csv", rd_csv(&c)?.as_bytes())?;
    put("labels.csv", labels_csv(&c)?.as_bytes())?;
    put("stats.json", to_json(&stats_document(cfg, &c))?.as_bytes())?;
    put("statewide_ma7.csv", statewide_csv(&c)?.as_bytes())?;
    put("quality.json", to_json(&c.inputs.report)?.as_bytes())?;

    let dashboards: Vec<(String, String)> = c
        .inputs
        .cube
        .municipalities()
        .par_iter()
        .map(|m| {
            let model = build_dashboard(&c.analysis, &c.inputs.cube, &c.inputs.pops, Some(&c.labels), &m.id)?;
            Ok((format!("dashboards/{}.svg", file_stem(&m.id)), render_dashboard(&model)))
        })
        .collect::<Result<_>>()?;
    for (rel, svg) in &dashboards {
        put(rel, svg.as_bytes())?;
    }

    let map_file = match &c.inputs.boundaries {
        Some(b) => {
            let name = map_name(cfg.group);
            put(&name, render_map(&c, b, cfg.group).as_bytes())?;
            Some(name)
        }
        None => None,
    };
    if let Some(day) = cfg.overlay_day {
        let svg = render_rank_overlay(&c.analysis.ranks.pop_rank, &c.analysis.ranks.case_rank, day, cfg.group)?;
        put(&format!("overlay_{}_day{day}.svg", cfg.group.slug()), svg.as_bytes())?;
    }
    let index = render_index(&c.inputs.cube, &c.analysis, &c.labels, cfg.group, map_file.as_deref());
    put("index.html", index.as_bytes())?;

    Ok((Outcome::from_report(&c.inputs.report), written))
}

pub fn cmd_render_map(cfg: &RunConfig) -> Result<(Outcome, PathBuf)> {
    let c = compute(cfg)?;
    let Some(b) = &c.inputs.boundaries else {
        return Err(CliError::Config("render-map needs `boundaries` in the config".into()).into());
    };
    let path = cfg.out.join(map_name(cfg.group));
    write_file(&path, render_map(&c, b, cfg.group).as_bytes())?;
    Ok((Outcome::from_report(&c.inputs.report), path))
}

pub fn cmd_render_dashboard(cfg: &RunConfig, id: &str) -> Result<(Outcome, PathBuf)> {
    let c = compute(cfg)?;
    let model = build_dashboard(&c.analysis, &c.inputs.cube, &c.inputs.pops, Some(&c.labels), id)?;
    let path = cfg.out.join(format!("dashboards/{}.svg", file_stem(id)));
    write_file(&path, render_dashboard(&model).as_bytes())?;
    Ok((Outcome::from_report(&c.inputs.report), path))
}

/// Writes `cases.csv`, `populations.csv`, `boundaries.geojson` and a
/// ready-to-run `config.json` into `out`.
pub fn cmd_synth(spec_path: &Path, out: &Path) -> Result<Vec<PathBuf>> {
    let text = std::fs::read_to_string(spec_path).map_err(|source| CliError::Io {
        path: spec_path.to_path_buf(),
        source,
    })?;
    let spec: SynthSpec = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", spec_path.display())))?;
    let (cube, pops) = generate(&spec)?;

    let mut cases = Vec::new();
    write_canonical_cases(&cube, &mut cases)?;
    let mut populations = Vec::new();
    write_populations(&pops, cube.municipalities(), &mut populations)?;
    let boundaries = to_json(&grid_boundaries(cube.municipalities()))?;
    let config = to_json(&json!({
        "cases": "cases.csv",
        "populations": "populations.csv",
        "boundaries": "boundaries.geojson",
        "out": "out",
    }))?;

    let files = [
        ("cases.csv", cases),
        ("populations.csv", populations),
        ("boundaries.geojson", boundaries.into_bytes()),
        ("config.json", config.into_bytes()),
    ];
    let mut written = Vec::new();
    for (name, bytes) in files {
        let path = out.join(name);
        write_file(&path, &bytes)?;
        written.push(path);
    }
    Ok(written)
}

fn map_name(group: GroupId) -> String {
    format!("map_{}.svg", group.slug())
}

fn render_map(c: &Computed, boundaries: &BoundarySet, group: GroupId) -> String {
    let labels: Vec<ClassLabel> = c.labels.iter().map(|l| l[group.index()]).collect();
    let model = build_choropleth(boundaries, c.inputs.cube.municipalities(), &labels, group);
    render_choropleth(&model)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(())
}

fn to_json<T: serde::Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Config(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn csv_bytes(rows: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    rows(&mut w).map_err(|e| CliError::Config(e.to_string()))?;
    let bytes = w.into_inner().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn rd_csv(c: &Computed) -> Result<String> {
    let cube = &c.inputs.cube;
    csv_bytes(|w| {
        w.write_record(["municipality_id", "group", "day", "rd"])?;
        for (i, m) in cube.municipalities().iter().enumerate() {
            for g in GroupId::ALL {
                for (j, rd) in c.analysis.rd.series(i, g.index()).iter().enumerate() {
                    w.write_record([m.id.as_str(), g.label(), &(j + 1).to_string(), &rd.to_string()])?;
                }
            }
        }
        Ok(())
    })
}

fn labels_csv(c: &Computed) -> Result<String> {
    csv_bytes(|w| {
        w.write_record(["municipality_id", "group", "label"])?;
        for (m, labels) in c.inputs.cube.municipalities().iter().zip(&c.labels) {
            for g in GroupId::ALL {
                w.write_record([m.id.as_str(), g.label(), labels[g.index()].as_str()])?;
            }
        }
        Ok(())
    })
}

fn statewide_csv(c: &Computed) -> Result<String> {
    let cube = &c.inputs.cube;
    let raw = moving_average_7d(cube, None, Scope::Statewide)?;
    let scaled: Vec<Option<Vec<f64>>> = GroupId::ALL
        .iter()
        .map(|g| (c.inputs.pops.group_total(g.index()) > 0).then_some(()))
        .map(|ok| ok.and_then(|_| moving_average_7d(cube, Some(&c.inputs.pops), Scope::Statewide).ok()))
        .enumerate()
        .map(|(k, all)| all.map(|a| a[k].clone()))
        .collect();
    let axis = cube.axis();
    csv_bytes(|w| {
        w.write_record(["day", "date", "group", "ma7", "ma7_pct"])?;
        for j in 0..axis.n_days {
            let date = axis.date(j + 1).format("%Y-%m-%d").to_string();
            for g in GroupId::ALL {
                let k = g.index();
                let pct = scaled[k].as_ref().map_or(String::new(), |s| s[j].to_string());
                w.write_record([&(j + 1).to_string(), &date, g.label(), &raw[k][j].to_string(), &pct])?;
            }
        }
        Ok(())
    })
}

fn stats_document(cfg: &RunConfig, c: &Computed) -> Value {
    let cube = &c.inputs.cube;
    let municipalities: Vec<Value> = cube
        .municipalities()
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let groups: BTreeMap<&str, Value> = GroupId::ALL
                .iter()
                .map(|&g| {
                    let k = g.index();
                    let s = &c.analysis.stats[i][k];
                    let rc = s.relative_change;
                    (
                        g.label(),
                        json!({
                            "persistence_pct": s.persistence_pct,
                            "skewness": s.skewness,
                            "relative_change": rc.and_then(|r| r.pct),
                            "reference_undefined": rc.map(|r| r.reference_undefined),
                            "special": s.special,
                            "marker": s.special.marker(),
                            "cases_total": s.cases_total,
                            "population": s.population,
                            "pop_rank": c.analysis.ranks.pop_rank.get(i, k),
                            "label": c.labels[i][k],
                        }),
                    )
                })
                .collect();
            json!({"id": m.id, "name": m.name, "county": m.county, "groups": groups})
        })
        .collect();
    let axis = cube.axis();
    json!({
        "start_date": axis.start_date,
        "n_days": axis.n_days,
        "n_municipalities": cube.n_municipalities(),
        "basis": c.analysis.basis,
        "regime": c.analysis.regime,
        "classifier": cfg.classifier,
        "analysis_group": cfg.group,
        "municipalities": municipalities,
    })
}
