use serde::Serialize;

use super::svg::{escape, num, Anchor, Svg};
use crate::classify::ClassLabel;
use crate::ingest::{BoundarySet, GroupId, Municipality, Polygon};

pub fn label_color(label: ClassLabel) -> &'static str {
    match label {
        ClassLabel::G0 => "#1f77b4",
        ClassLabel::G1 => "#ff7f0e",
        ClassLabel::G2 => "#2ca02c",
        ClassLabel::G3 => "#9467bd",
        ClassLabel::Unclassified => "#c7c7c7",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Region {
    pub id: String,
    pub name: String,
    pub label: ClassLabel,
    pub fill: &'static str,
    #[serde(skip)]
    pub polygons: Vec<Polygon>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChoroplethModel {
    pub group: GroupId,
    pub regions: Vec<Region>,
    #[serde(skip)]
    pub counties: Vec<Vec<Polygon>>,
    /// Labelled municipalities without geometry.
    pub omissions: Vec<String>,
    /// `(label, fill, count)` for every label, in legend order.
    pub legend: Vec<(ClassLabel, &'static str, usize)>,
}

/// `labels` is aligned with `roster`.
pub fn build_choropleth(
    boundaries: &BoundarySet,
    roster: &[Municipality],
    labels: &[ClassLabel],
    group: GroupId,
) -> ChoroplethModel {
    let mut regions = Vec::new();
    let mut omissions = Vec::new();
    for (m, &label) in roster.iter().zip(labels) {
        match boundaries.municipalities.get(&m.id) {
            Some(polygons) => regions.push(Region {
                id: m.id.clone(),
                name: m.name.clone(),
                label,
                fill: label_color(label),
                polygons: polygons.clone(),
            }),
            None => omissions.push(m.id.clone()),
        }
    }
    let legend = ClassLabel::ALL
        .iter()
        .map(|&l| (l, label_color(l), labels.iter().filter(|&&x| x == l).count()))
        .collect();
    ChoroplethModel {
        group,
        regions,
        counties: boundaries.counties.values().cloned().collect(),
        omissions,
        legend,
    }
}

/// Equirectangular projection with its standard parallel at the centre
/// latitude of the drawn extent, fitted into a box with aspect preserved.
#[derive(Debug, Clone, Copy)]
pub struct Projection {
    min_lon: f64,
    max_lat: f64,
    x_scale: f64,
    scale: f64,
    offset: (f64, f64),
}

impl Projection {
    pub fn fit(bounds: [f64; 4], origin: (f64, f64), width: f64, height: f64) -> Self {
        let [min_lon, min_lat, max_lon, max_lat] = bounds;
        let x_scale = ((min_lat + max_lat) / 2.0).to_radians().cos().max(1e-6);
        let span_x = ((max_lon - min_lon) * x_scale).max(1e-9);
        let span_y = (max_lat - min_lat).max(1e-9);
        let scale = (width / span_x).min(height / span_y);
        let pad = ((width - span_x * scale) / 2.0, (height - span_y * scale) / 2.0);
        Projection {
            min_lon,
            max_lat,
            x_scale,
            scale,
            offset: (origin.0 + pad.0, origin.1 + pad.1),
        }
    }

    pub fn project(&self, lon: f64, lat: f64) -> (f64, f64) {
        (
            self.offset.0 + (lon - self.min_lon) * self.x_scale * self.scale,
            self.offset.1 + (self.max_lat - lat) * self.scale,
        )
    }
}

fn path_data(polygons: &[Polygon], proj: &Projection) -> String {
    let mut d = String::new();
    for polygon in polygons {
        for ring in &polygon.rings {
            for (n, p) in ring.iter().enumerate() {
                let (x, y) = proj.project(p[0], p[1]);
                d.push_str(if n == 0 { "M" } else { "L" });
                d.push_str(&format!("{} {} ", num(x, 2), num(y, 2)));
            }
            d.push_str("Z ");
        }
    }
    d.trim_end().to_string()
}

pub fn render_choropleth(model: &ChoroplethModel) -> String {
    let (w, h) = (900.0, 820.0);
    let (map_x, map_y, map_w, map_h) = (20.0, 60.0, 640.0, 700.0);
    let mut svg = Svg::new(w, h);
    svg.title(&format!("{} classification map", model.group.label()));
    svg.text(20.0, 36.0, 18.0, Anchor::Start, true, &format!(
        "Persistence/skewness classes, {}",
        model.group.display_name()
    ));

    let all = model
        .regions
        .iter()
        .flat_map(|r| r.polygons.iter())
        .chain(model.counties.iter().flatten())
        .flat_map(|p| p.rings.iter().flatten());
    let bounds = all.fold(None, |acc: Option<[f64; 4]>, p| {
        Some(match acc {
            None => [p[0], p[1], p[0], p[1]],
            Some(b) => [b[0].min(p[0]), b[1].min(p[1]), b[2].max(p[0]), b[3].max(p[1])],
        })
    });

    if let Some(bounds) = bounds {
        let proj = Projection::fit(bounds, (map_x, map_y), map_w, map_h);
        svg.open_group(r#"id="municipalities""#);
        for region in &model.regions {
            let d = path_data(&region.polygons, &proj);
            let extra = format!(r#" fill-rule="evenodd" data-id="{}""#, escape(&region.id));
            svg.path(&d, region.fill, Some(("#ffffff", 0.4)), &extra);
        }
        svg.close_group();
        svg.open_group(r#"id="counties""#);
        for county in &model.counties {
            svg.path(&path_data(county, &proj), "none", Some(("#333333", 0.8)), "");
        }
        svg.close_group();
    } else {
        svg.text(map_x + map_w / 2.0, map_y + map_h / 2.0, 14.0, Anchor::Middle, false, "no geometry");
    }

    let lx = 690.0;
    svg.text(lx, 90.0, 14.0, Anchor::Start, true, "Legend");
    for (row, (label, fill, count)) in model.legend.iter().enumerate() {
        let y = 116.0 + 24.0 * row as f64;
        svg.rect(lx, y - 12.0, 16.0, 16.0, fill, Some("#666666"));
        svg.text(lx + 24.0, y + 1.0, 12.0, Anchor::Start, false, &format!("{label} ({count})"));
    }
    if !model.omissions.is_empty() {
        let y = h - 40.0;
        svg.text(20.0, y, 11.0, Anchor::Start, true, &format!(
            "Not drawn (no geometry): {} municipalities",
            model.omissions.len()
        ));
        // long lists wrap at a fixed count per line
        for (line, chunk) in model.omissions.chunks(12).enumerate() {
            svg.text(20.0, y + 14.0 * (line + 1) as f64, 10.0, Anchor::Start, false, &chunk.join(", "));
        }
    }
    svg.finish()
}
