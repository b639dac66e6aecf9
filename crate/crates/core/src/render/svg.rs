use std::fmt::Write;

/// Fixed-precision number formatting; never emits `-0`.
pub(crate) fn num(x: f64, decimals: usize) -> String {
    let s = format!("{x:.decimals$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

pub(crate) fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Anchor {
    Start,
    Middle,
    End,
}

impl Anchor {
    fn as_str(self) -> &'static str {
        match self {
            Anchor::Start => "start",
            Anchor::Middle => "middle",
            Anchor::End => "end",
        }
    }
}

/// Minimal append-only SVG writer. Coordinates are written with two
/// decimals so output is byte-stable.
pub(crate) struct Svg {
    buf: String,
}

impl Svg {
    pub fn new(width: f64, height: f64) -> Self {
        let mut buf = String::new();
        let (w, h) = (num(width, 0), num(height, 0));
        let _ = writeln!(
            buf,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="Helvetica, Arial, sans-serif">"#
        );
        let _ = writeln!(buf, r##"<rect x="0" y="0" width="{w}" height="{h}" fill="#ffffff"/>"##);
        Svg { buf }
    }

    pub fn title(&mut self, text: &str) {
        let _ = writeln!(self.buf, "<title>{}</title>", escape(text));
    }

    pub fn open_group(&mut self, attrs: &str) {
        let _ = writeln!(self.buf, "<g {attrs}>");
    }

    pub fn close_group(&mut self) {
        self.buf.push_str("</g>\n");
    }

    pub fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str, stroke: Option<&str>) {
        let stroke = stroke.map_or(String::new(), |s| format!(r#" stroke="{s}" stroke-width="1""#));
        let _ = writeln!(
            self.buf,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{fill}"{stroke}/>"#,
            num(x, 2),
            num(y, 2),
            num(w, 2),
            num(h, 2)
        );
    }

    pub fn text(&mut self, x: f64, y: f64, size: f64, anchor: Anchor, bold: bool, content: &str) {
        let weight = if bold { r#" font-weight="bold""# } else { "" };
        let _ = writeln!(
            self.buf,
            r##"<text x="{}" y="{}" font-size="{}" text-anchor="{}" fill="#222222"{weight}>{}</text>"##,
            num(x, 2),
            num(y, 2),
            num(size, 0),
            anchor.as_str(),
            escape(content)
        );
    }

    pub fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, width: f64) {
        let _ = writeln!(
            self.buf,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{stroke}" stroke-width="{}"/>"#,
            num(x1, 2),
            num(y1, 2),
            num(x2, 2),
            num(y2, 2),
            num(width, 1)
        );
    }

    pub fn polyline(&mut self, points: &[(f64, f64)], stroke: &str, width: f64) {
        let pts: Vec<String> = points
            .iter()
            .map(|(x, y)| format!("{},{}", num(*x, 2), num(*y, 2)))
            .collect();
        let _ = writeln!(
            self.buf,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="{}"/>"#,
            pts.join(" "),
            num(width, 1)
        );
    }

    pub fn polygon(&mut self, points: &[(f64, f64)], fill: &str) {
        let pts: Vec<String> = points
            .iter()
            .map(|(x, y)| format!("{},{}", num(*x, 2), num(*y, 2)))
            .collect();
        let _ = writeln!(self.buf, r#"<polygon points="{}" fill="{fill}"/>"#, pts.join(" "));
    }

    pub fn path(&mut self, d: &str, fill: &str, stroke: Option<(&str, f64)>, extra: &str) {
        let stroke = stroke.map_or(String::new(), |(s, w)| {
            format!(r#" stroke="{s}" stroke-width="{}""#, num(w, 2))
        });
        let _ = writeln!(self.buf, r#"<path d="{d}" fill="{fill}"{stroke}{extra}/>"#);
    }

    pub fn circle(&mut self, cx: f64, cy: f64, r: f64, fill: &str) {
        let _ = writeln!(
            self.buf,
            r#"<circle cx="{}" cy="{}" r="{}" fill="{fill}"/>"#,
            num(cx, 2),
            num(cy, 2),
            num(r, 2)
        );
    }

    pub fn finish(mut self) -> String {
        self.buf.push_str("</svg>\n");
        self.buf
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting() {
        assert_eq!(num(-0.001, 2), "0.00");
        assert_eq!(num(-1.5, 1), "-1.5");
        assert_eq!(escape("a<b & \"c\""), "a&lt;b &amp; &quot;c&quot;");
    }
}
