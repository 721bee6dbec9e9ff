//! SVG rendering of a solved layout.
use std::collections::BTreeMap;
use std::fmt::Write;

use orc_core::{LayoutProblem, SolutionView, Viewport};

#[derive(Clone, Debug, PartialEq)]
pub struct Style {
    pub fill: String,
    pub stroke: String,
}

/// Presentation only; geometry comes from the solution.
#[derive(Clone, Debug, PartialEq)]
pub struct RenderTheme {
    pub by_kind: BTreeMap<String, Style>,
    pub default: Style,
    pub font_size: f64,
    pub border_stroke: String,
    pub border_dash: Option<String>,
}

impl Default for RenderTheme {
    fn default() -> Self {
        let style = |f: &str, s: &str| Style { fill: f.into(), stroke: s.into() };
        RenderTheme {
            by_kind: BTreeMap::from([
                ("button".to_string(), style("#dbe9f6", "#2f6ea5")),
                ("image".to_string(), style("#f3e3c3", "#9c6b12")),
                ("label".to_string(), style("#eeeeee", "#777777")),
            ]),
            default: style("#e4f0e0", "#3f7a35"),
            font_size: 12.0,
            border_stroke: "#999999".into(),
            border_dash: Some("4 2".into()),
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// One `rect` and a centered `text` per visible widget, in declaration order.
/// The viewport border is a path so widget rects are the only rects.
pub fn render_svg(view: &SolutionView, problem: &LayoutProblem, theme: &RenderTheme) -> String {
    let Viewport { width: w, height: h } = problem.viewport;
    let mut out = String::new();
    writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#).unwrap();
    let dash = theme.border_dash.as_ref().map(|d| format!(r#" stroke-dasharray="{d}""#)).unwrap_or_default();
    writeln!(out, r#"  <path d="M0 0H{w}V{h}H0Z" fill="none" stroke="{}"{dash}/>"#, theme.border_stroke).unwrap();
    for wv in view.widgets.iter().filter(|v| v.visible) {
        let kind = problem.widget(&wv.id).map(|x| x.kind.as_str()).unwrap_or_default();
        let style = theme.by_kind.get(kind).unwrap_or(&theme.default);
        let id = escape(&wv.id);
        writeln!(
            out,
            r#"  <rect id="{id}" x="{}" y="{}" width="{}" height="{}" fill="{}" stroke="{}"/>"#,
            wv.left, wv.top, wv.width, wv.height, style.fill, style.stroke
        )
        .unwrap();
        writeln!(
            out,
            r#"  <text x="{}" y="{}" font-size="{}" text-anchor="middle" dominant-baseline="central">{id}</text>"#,
            wv.left + wv.width / 2.0,
            wv.top + wv.height / 2.0,
            theme.font_size
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}
