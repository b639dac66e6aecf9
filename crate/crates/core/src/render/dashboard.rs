//! Per-municipality dashboard.
//!
//! Layout, top to bottom: a header with the municipality and analysis
//! window, a row with the population and case pies next to the
//! relative-change table, and a row of three rank-difference panels
//! (BAA, HL, OTH) each carrying its persistence badge.

use chrono::NaiveDate;
use serde::Serialize;

use super::svg::{num, Anchor, Svg};
use super::{group_color, RenderError};
use crate::classify::ClassLabel;
use crate::ingest::{CaseCube, GroupId, Municipality, PopulationTable, K};
use crate::metrics::{Analysis, Marker, RegimeConfig, SpecialCase};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RdPanel {
    pub group: GroupId,
    pub rd: Vec<i32>,
    pub persistence_pct: f64,
    pub skewness: Option<f64>,
    pub label: Option<ClassLabel>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelativeEntry {
    pub group: GroupId,
    pub pct: Option<f64>,
    pub special: SpecialCase,
    pub marker: Option<Marker>,
    pub reference_undefined: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DashboardModel {
    pub municipality: Municipality,
    pub start_date: NaiveDate,
    pub n_days: usize,
    pub n_municipalities: usize,
    pub regime: RegimeConfig,
    pub populations: [u64; K],
    pub cases: [u64; K],
    /// Percent shares by group; `None` when the total is zero.
    pub population_shares: Option<[f64; K]>,
    pub case_shares: Option<[f64; K]>,
    pub panels: Vec<RdPanel>,
    pub relative_change: Vec<RelativeEntry>,
}

fn shares(values: [u64; K]) -> Option<[f64; K]> {
    let total: u64 = values.iter().sum();
    (total > 0).then(|| values.map(|v| 100.0 * v as f64 / total as f64))
}

/// `labels`, when given, is indexed like `analysis.stats`.
pub fn build_dashboard(
    analysis: &Analysis,
    cube: &CaseCube,
    pops: &PopulationTable,
    labels: Option<&[[ClassLabel; K]]>,
    municipality_id: &str,
) -> Result<DashboardModel, RenderError> {
    let i = cube
        .position(municipality_id)
        .ok_or_else(|| RenderError::UnknownMunicipality(municipality_id.to_string()))?;
    let stats = &analysis.stats[i];
    let populations = pops.row(i);
    let cases: [u64; K] = std::array::from_fn(|k| cube.total(i, k));
    let panels = GroupId::MINORITIES
        .iter()
        .map(|&g| {
            let s = &stats[g.index()];
            RdPanel {
                group: g,
                rd: analysis.rd.series(i, g.index()).to_vec(),
                persistence_pct: s.persistence_pct,
                skewness: s.skewness,
                label: labels.map(|l| l[i][g.index()]),
            }
        })
        .collect();
    let relative_change = GroupId::MINORITIES
        .iter()
        .map(|&g| {
            let s = &stats[g.index()];
            let rc = s.relative_change;
            RelativeEntry {
                group: g,
                pct: rc.and_then(|r| r.pct),
                special: s.special,
                marker: s.special.marker(),
                reference_undefined: rc.is_some_and(|r| r.reference_undefined),
            }
        })
        .collect();
    Ok(DashboardModel {
        municipality: cube.municipalities()[i].clone(),
        start_date: cube.axis().start_date,
        n_days: cube.n_days(),
        n_municipalities: cube.n_municipalities(),
        regime: analysis.regime,
        populations,
        cases,
        population_shares: shares(populations),
        case_shares: shares(cases),
        panels,
        relative_change,
    })
}

/// Wedges `(group, start_deg, end_deg)` for non-zero shares, clockwise from
/// twelve o'clock. The last wedge always ends at exactly 360.
pub fn pie_wedges(shares: &[f64; K]) -> Vec<(GroupId, f64, f64)> {
    let total: f64 = shares.iter().sum();
    if total <= 0.0 {
        return Vec::new();
    }
    let last = shares.iter().rposition(|&s| s > 0.0);
    let mut acc = 0.0;
    let mut out = Vec::new();
    for (k, &s) in shares.iter().enumerate() {
        if s <= 0.0 {
            continue;
        }
        let start = 360.0 * acc / total;
        acc += s;
        let end = if Some(k) == last { 360.0 } else { 360.0 * acc / total };
        out.push((GroupId::ALL[k], start, end));
    }
    out
}

fn polar(cx: f64, cy: f64, r: f64, deg: f64) -> (f64, f64) {
    let rad = deg.to_radians();
    (cx + r * rad.sin(), cy - r * rad.cos())
}

fn pie(svg: &mut Svg, cx: f64, cy: f64, r: f64, title: &str, values: [u64; K], shares: Option<[f64; K]>) {
    svg.text(cx, cy - r - 14.0, 14.0, Anchor::Middle, true, title);
    let Some(shares) = shares else {
        svg.circle(cx, cy, r, "#eeeeee");
        svg.text(cx, cy + 4.0, 12.0, Anchor::Middle, false, "no data");
        return;
    };
    for (g, start, end) in pie_wedges(&shares) {
        if end - start >= 360.0 {
            svg.circle(cx, cy, r, group_color(g));
            continue;
        }
        let (x0, y0) = polar(cx, cy, r, start);
        let (x1, y1) = polar(cx, cy, r, end);
        let large = if end - start > 180.0 { 1 } else { 0 };
        let d = format!(
            "M {} {} L {} {} A {} {} 0 {large} 1 {} {} Z",
            num(cx, 2),
            num(cy, 2),
            num(x0, 2),
            num(y0, 2),
            num(r, 2),
            num(r, 2),
            num(x1, 2),
            num(y1, 2)
        );
        svg.path(&d, group_color(g), Some(("#ffffff", 1.0)), "");
    }
    for (k, g) in GroupId::ALL.iter().enumerate() {
        let y = cy + r + 22.0 + 16.0 * k as f64;
        svg.rect(cx - r, y - 10.0, 10.0, 10.0, group_color(*g), None);
        let text = format!("{} {}% ({})", g.label(), num(shares[k], 2), values[k]);
        svg.text(cx - r + 16.0, y, 11.0, Anchor::Start, false, &text);
    }
}

fn marker_shape(svg: &mut Svg, marker: Marker, x: f64, y: f64) {
    const S: f64 = 7.0;
    match marker {
        Marker::Cross => {
            svg.line(x - S, y - S, x + S, y + S, "#444444", 2.5);
            svg.line(x - S, y + S, x + S, y - S, "#444444", 2.5);
        }
        Marker::Star => {
            let pts: Vec<(f64, f64)> = (0..10)
                .map(|p| {
                    let r = if p % 2 == 0 { S + 1.0 } else { (S + 1.0) * 0.45 };
                    polar(x, y, r, 36.0 * p as f64)
                })
                .collect();
            svg.polygon(&pts, "#d4a017");
        }
        Marker::Triangle => {
            svg.polygon(&[(x, y - S), (x + S, y + S * 0.8), (x - S, y + S * 0.8)], "#c0392b");
        }
    }
}

fn special_note(entry: &RelativeEntry) -> &'static str {
    match entry.special {
        SpecialCase::UndefinedZeroZero => "undefined: no cases, no population",
        SpecialCase::PopZeroCasesNonzero => "cases with zero recorded population",
        SpecialCase::CasesExceedPop => "cases exceed population",
        SpecialCase::Normal if entry.reference_undefined => "undefined: no W reference incidence",
        SpecialCase::Normal => "",
    }
}

fn fmt_pct_signed(x: f64) -> String {
    let s = num(x, 1);
    if x > 0.0 && s != "0.0" {
        format!("+{s}%")
    } else {
        format!("{s}%")
    }
}

fn skew_text(s: Option<f64>) -> String {
    s.map_or_else(|| "n/a".to_string(), |v| num(v, 2))
}

#[allow(clippy::too_many_arguments)]
fn rd_panel(svg: &mut Svg, panel: &RdPanel, x0: f64, y0: f64, w: f64, h: f64, m: usize, regime: &RegimeConfig) {
    let color = group_color(panel.group);
    svg.text(x0, y0 - 30.0, 14.0, Anchor::Start, true, &format!("rank difference, {}", panel.group.display_name()));
    let label = panel.label.map_or(String::new(), |l| format!("   class {l}"));
    let badge = format!(
        "persistence {}%   skewness {}{label}",
        num(panel.persistence_pct, 1),
        skew_text(panel.skewness)
    );
    svg.rect(x0, y0 - 22.0, w, 16.0, "#f3f3f3", None);
    svg.text(x0 + 4.0, y0 - 10.0, 11.0, Anchor::Start, false, &badge);

    svg.rect(x0, y0, w, h, "#fcfcfc", Some("#cccccc"));
    let bound = m.saturating_sub(1).max(1) as f64;
    let y_of = |v: f64| y0 + h / 2.0 - (v.clamp(-bound, bound) / bound) * (h / 2.0);
    // regime band, clipped to the plotted range
    let (lo, hi) = (regime.t_min.max(-bound), regime.t_max.min(bound));
    if lo < hi {
        svg.rect(x0, y_of(hi), w, y_of(lo) - y_of(hi), "#fdebd0", None);
    }
    svg.line(x0, y_of(0.0), x0 + w, y_of(0.0), "#888888", 1.0);
    svg.text(x0 - 4.0, y0 + 10.0, 10.0, Anchor::End, false, &format!("+{}", bound as i64));
    svg.text(x0 - 4.0, y_of(0.0) + 4.0, 10.0, Anchor::End, false, "0");
    svg.text(x0 - 4.0, y0 + h, 10.0, Anchor::End, false, &format!("-{}", bound as i64));

    let n = panel.rd.len();
    let step = if n > 1 { w / (n - 1) as f64 } else { 0.0 };
    let points: Vec<(f64, f64)> = panel
        .rd
        .iter()
        .enumerate()
        .map(|(j, &v)| (x0 + step * j as f64, y_of(v as f64)))
        .collect();
    if points.len() == 1 {
        svg.circle(points[0].0, points[0].1, 2.0, color);
    } else {
        svg.polyline(&points, color, 1.2);
    }
    svg.text(x0, y0 + h + 14.0, 10.0, Anchor::Start, false, "day 1");
    svg.text(x0 + w, y0 + h + 14.0, 10.0, Anchor::End, false, &format!("day {n}"));
}

pub fn render_dashboard(model: &DashboardModel) -> String {
    const W: f64 = 1000.0;
    const H: f64 = 760.0;
    let mut svg = Svg::new(W, H);
    let m = &model.municipality;
    svg.title(&format!("{} dashboard", m.name));
    svg.text(30.0, 40.0, 24.0, Anchor::Start, true, &m.name);
    let end = model.start_date + chrono::Duration::days(model.n_days as i64 - 1);
    let sub = format!(
        "{} County · id {} · {} to {} ({} days)",
        m.county,
        m.id,
        model.start_date.format("%Y-%m-%d"),
        end.format("%Y-%m-%d"),
        model.n_days
    );
    svg.text(30.0, 62.0, 13.0, Anchor::Start, false, &sub);

    pie(&mut svg, 130.0, 190.0, 75.0, "Population by group", model.populations, model.population_shares);
    pie(&mut svg, 360.0, 190.0, 75.0, "Cases by group", model.cases, model.case_shares);

    let tx = 560.0;
    svg.text(tx, 106.0, 14.0, Anchor::Start, true, "Relative change vs W (per-capita cases)");
    for (row, entry) in model.relative_change.iter().enumerate() {
        let y = 140.0 + 44.0 * row as f64;
        svg.rect(tx, y - 12.0, 10.0, 10.0, group_color(entry.group), None);
        svg.text(tx + 16.0, y - 2.0, 13.0, Anchor::Start, true, entry.group.label());
        let value = entry.pct.map_or_else(|| "n/a".to_string(), fmt_pct_signed);
        svg.text(tx + 60.0, y - 2.0, 13.0, Anchor::Start, false, &value);
        if let Some(marker) = entry.marker {
            marker_shape(&mut svg, marker, tx + 160.0, y - 6.0);
        }
        let note = special_note(entry);
        if !note.is_empty() {
            svg.text(tx + 176.0, y - 2.0, 11.0, Anchor::Start, false, note);
        }
    }
    let legend_y = 140.0 + 44.0 * 3.0;
    marker_shape(&mut svg, Marker::Cross, tx + 6.0, legend_y);
    svg.text(tx + 18.0, legend_y + 4.0, 10.0, Anchor::Start, false, "Cp=0, P=0");
    marker_shape(&mut svg, Marker::Star, tx + 106.0, legend_y);
    svg.text(tx + 118.0, legend_y + 4.0, 10.0, Anchor::Start, false, "Cp>0, P=0");
    marker_shape(&mut svg, Marker::Triangle, tx + 206.0, legend_y);
    svg.text(tx + 218.0, legend_y + 4.0, 10.0, Anchor::Start, false, "Cp>P>0");

    let (pw, ph, gap) = (280.0, 200.0, 40.0);
    for (p, panel) in model.panels.iter().enumerate() {
        let x0 = 60.0 + (pw + gap) * p as f64;
        rd_panel(&mut svg, panel, x0, 480.0, pw, ph, model.n_municipalities, &model.regime);
    }
    let regime = format!(
        "persistence regime ({}, {}]",
        num(model.regime.t_min, 1),
        num(model.regime.t_max, 1)
    );
    svg.text(30.0, H - 20.0, 10.0, Anchor::Start, false, &regime);
    svg.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{test_municipality, DateAxis};
    use crate::metrics::{analyze, RankBasis};

    fn fixture(pops: Vec<[u64; K]>, per_day: Vec<[u64; K]>) -> (CaseCube, PopulationTable, Analysis) {
        let m = pops.len();
        let axis = DateAxis::new(NaiveDate::from_ymd_opt(2020, 10, 1).unwrap(), 5).unwrap();
        let roster = (0..m).map(|i| test_municipality(&format!("m{i}"))).collect();
        let cube = CaseCube::from_fn(axis, roster, |i, j, k| per_day[i][k] * (j as u64 % 2)).unwrap();
        let pops = PopulationTable::new(pops);
        let a = analyze(&cube, &pops, RankBasis::Raw, RegimeConfig::positive(m)).unwrap();
        (cube, pops, a)
    }

    #[test]
    fn all_zero_minorities_give_three_crosses() {
        let (cube, pops, a) = fixture(vec![[0, 0, 0, 100], [5, 5, 5, 100]], vec![[0, 0, 0, 2], [1, 1, 1, 1]]);
        let model = build_dashboard(&a, &cube, &pops, None, "m0").unwrap();
        let markers: Vec<_> = model.relative_change.iter().map(|e| e.marker).collect();
        assert_eq!(markers, [Some(Marker::Cross); 3]);
        let sum: f64 = model.population_shares.unwrap().iter().sum();
        assert!((sum - 100.0).abs() < 0.01);
    }

    #[test]
    fn star_keeps_persistence_badge() {
        let (cube, pops, a) = fixture(vec![[0, 5, 5, 100], [50, 5, 5, 100]], vec![[2, 0, 0, 2], [1, 1, 1, 1]]);
        let model = build_dashboard(&a, &cube, &pops, None, "m0").unwrap();
        assert_eq!(model.relative_change[0].marker, Some(Marker::Star));
        let svg = render_dashboard(&model);
        assert!(svg.contains("persistence"));
        assert!(svg.contains("cases with zero recorded population"));
    }

    #[test]
    fn shares_are_exact_fractions() {
        // 18 of 10000 people, 117 of 10000 cases
        let pops = [18, 500, 482, 9000];
        let cases = [117, 900, 383, 8600];
        let ps = shares(pops).unwrap();
        let cs = shares(cases).unwrap();
        assert!((ps[0] - 0.18).abs() < 1e-12);
        assert!((cs[0] - 1.17).abs() < 1e-12);
    }

    #[test]
    fn wedges_close_the_circle() {
        let w = pie_wedges(&[0.18, 4.0, 0.0, 95.82]);
        assert_eq!(w.len(), 3);
        let total: f64 = w.iter().map(|(_, s, e)| e - s).sum();
        assert!((total - 360.0).abs() < 0.1);
        assert_eq!(w.last().unwrap().2, 360.0);
        assert!(pie_wedges(&[0.0; K]).is_empty());
    }

    #[test]
    fn undefined_skew_renders_na_and_output_is_stable() {
        let (cube, pops, a) = fixture(vec![[9, 9, 9, 9]], vec![[0, 0, 0, 0]]);
        let model = build_dashboard(&a, &cube, &pops, None, "m0").unwrap();
        assert_eq!(model.panels[0].skewness, None);
        let first = render_dashboard(&model);
        assert!(first.contains("skewness n/a"));
        assert_eq!(first, render_dashboard(&model));
        assert!(!first.contains("href"));
    }

    #[test]
    fn unknown_id_is_an_error() {
        let (cube, pops, a) = fixture(vec![[1; K]], vec![[0; K]]);
        assert!(matches!(
            build_dashboard(&a, &cube, &pops, None, "zz"),
            Err(RenderError::UnknownMunicipality(_))
        ));
    }
}
