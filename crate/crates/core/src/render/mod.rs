//! Static SVG/HTML output. Every renderer is a pure function of its model
//! and produces byte-identical output for identical input; no document
//! references external resources or carries scripts.

mod choropleth;
mod dashboard;
mod overlay;
mod svg;

use std::fmt::Write;

use thiserror::Error;

use crate::classify::ClassLabel;
use crate::ingest::{CaseCube, GroupId, K};
use crate::metrics::Analysis;

pub use choropleth::{build_choropleth, label_color, render_choropleth, ChoroplethModel, Projection, Region};
pub use dashboard::{build_dashboard, pie_wedges, render_dashboard, DashboardModel, RdPanel, RelativeEntry};
pub use overlay::{overlay_points, render_rank_overlay};

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("unknown municipality id `{0}`")]
    UnknownMunicipality(String),
    #[error("day {day} outside 1..={n_days}")]
    DayOutOfRange { day: usize, n_days: usize },
}

pub fn group_color(group: GroupId) -> &'static str {
    match group {
        GroupId::Baa => "#ff7f0e",
        GroupId::Hl => "#2ca02c",
        GroupId::Oth => "#9467bd",
        GroupId::W => "#1f77b4",
    }
}

/// File stem for a municipality id; anything outside `[A-Za-z0-9._-]`
/// becomes `_`.
pub fn file_stem(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') { c } else { '_' })
        .collect()
}

/// Static index page linking every dashboard and embedding the map.
pub fn render_index(
    cube: &CaseCube,
    analysis: &Analysis,
    labels: &[[ClassLabel; K]],
    group: GroupId,
    map_file: Option<&str>,
) -> String {
    let k = group.index();
    let axis = cube.axis();
    let mut html = String::new();
    let _ = writeln!(html, "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">");
    let _ = writeln!(html, "<title>Rank-difference dashboards</title>");
    html.push_str(
        "<style>body{font-family:Helvetica,Arial,sans-serif;margin:2em}\
table{border-collapse:collapse}td,th{padding:2px 8px;border-bottom:1px solid #ddd;text-align:left}\
td.num{text-align:right}</style>\n</head>\n<body>\n",
    );
    let _ = writeln!(html, "<h1>Rank-difference dashboards</h1>");
    let _ = writeln!(
        html,
        "<p>{} municipalities, {} to {} ({} days), ranking basis {}, classification group {}.</p>",
        cube.n_municipalities(),
        axis.start_date.format("%Y-%m-%d"),
        axis.date(axis.n_days).format("%Y-%m-%d"),
        axis.n_days,
        analysis.basis.name(),
        group.label()
    );
    if let Some(map) = map_file {
        let _ = writeln!(html, "<p><img src=\"{}\" alt=\"classification map\"></p>", svg::escape(map));
    }
    let _ = writeln!(
        html,
        "<table>\n<tr><th>Municipality</th><th>County</th><th>Class ({0})</th><th>Persistence {0} (%)</th><th>Skewness {0}</th></tr>",
        group.label()
    );
    for (i, m) in cube.municipalities().iter().enumerate() {
        let s = &analysis.stats[i][k];
        let skew = s.skewness.map_or_else(|| "n/a".to_string(), |v| svg::num(v, 2));
        let _ = writeln!(
            html,
            "<tr><td><a href=\"dashboards/{}.svg\">{}</a></td><td>{}</td><td>{}</td><td class=\"num\">{}</td><td class=\"num\">{}</td></tr>",
            svg::escape(&file_stem(&m.id)),
            svg::escape(&m.name),
            svg::escape(&m.county),
            labels[i][k],
            svg::num(s.persistence_pct, 1),
            skew
        );
    }
    html.push_str("</table>\n</body>\n</html>\n");
    html
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stems_are_path_safe() {
        assert_eq!(file_stem("55025/48000"), "55025_48000");
        assert_eq!(file_stem("S001"), "S001");
    }
}
