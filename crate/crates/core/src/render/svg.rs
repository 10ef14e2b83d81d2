//! SVG serialization of a scene.

use std::fmt::Write;

use super::geom::{sector_path, PathCmd};
use super::{Geometry, MarkRecord, Region, Scene, DEFAULT_FILL};

/// Rounds to three decimals and drops trailing zeros.
pub(crate) fn num(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('"', "&quot;").replace('<', "&lt;").replace('>', "&gt;")
}

pub(crate) fn path_data(cmds: &[PathCmd]) -> String {
    let mut d = String::new();
    for c in cmds {
        if !d.is_empty() {
            d.push(' ');
        }
        let p = |pt: (f64, f64)| format!("{} {}", num(pt.0), num(pt.1));
        match *c {
            PathCmd::MoveTo(a) => write!(d, "M{}", p(a)),
            PathCmd::LineTo(a) => write!(d, "L{}", p(a)),
            PathCmd::QuadTo(c, a) => write!(d, "Q{} {}", p(c), p(a)),
            PathCmd::CubicTo(c1, c2, a) => write!(d, "C{} {} {}", p(c1), p(c2), p(a)),
            PathCmd::ArcTo(r, large, sweep, a) => {
                write!(d, "A{} {} 0 {} {} {}", num(r), num(r), large as u8, sweep as u8, p(a))
            }
            PathCmd::Close => write!(d, "Z"),
        }
        .expect("writing to a string");
    }
    d
}

fn mark_element(m: &MarkRecord) -> String {
    let mut attrs = format!(
        r#"data-container="{}" data-scope="{}" data-group="{}" data-item="{}" data-mark="{}""#,
        m.container.id,
        m.container,
        m.group,
        m.item,
        m.mark_type.as_str()
    );
    let open = matches!(m.geometry, Geometry::Path { closed: false, .. });
    let fill = m.style.fill.clone().unwrap_or_else(|| DEFAULT_FILL.to_string());
    if open {
        let stroke = m.style.stroke.clone().unwrap_or(fill);
        write!(attrs, r#" fill="none" stroke="{}""#, esc(&stroke)).unwrap();
    } else {
        write!(attrs, r#" fill="{}""#, esc(&fill)).unwrap();
        if let Some(s) = &m.style.stroke {
            write!(attrs, r#" stroke="{}""#, esc(s)).unwrap();
        }
    }
    if let Some(w) = m.style.stroke_width {
        write!(attrs, r#" stroke-width="{}""#, num(w)).unwrap();
    }
    if let Some(o) = m.style.opacity {
        write!(attrs, r#" opacity="{}""#, num(o)).unwrap();
    }
    match &m.geometry {
        Geometry::Rect { x, y, w, h } => {
            let mut corners = String::new();
            if let Some(rx) = m.style.rx {
                write!(corners, r#" rx="{}""#, num(rx)).unwrap();
            }
            if let Some(ry) = m.style.ry {
                write!(corners, r#" ry="{}""#, num(ry)).unwrap();
            }
            format!(
                r#"<rect {attrs} x="{}" y="{}" width="{}" height="{}"{corners}/>"#,
                num(*x),
                num(*y),
                num(*w),
                num(*h)
            )
        }
        Geometry::Circle { cx, cy, r } => {
            format!(r#"<circle {attrs} cx="{}" cy="{}" r="{}"/>"#, num(*cx), num(*cy), num(*r))
        }
        Geometry::Arc { cx, cy, r_inner, r_outer, a_start, a_end } => format!(
            r#"<path {attrs} data-angles="{} {}" d="{}"/>"#,
            num(*a_start),
            num(*a_end),
            path_data(&sector_path(*cx, *cy, *r_inner, *r_outer, *a_start, *a_end))
        ),
        Geometry::Path { cmds, .. } => format!(r#"<path {attrs} d="{}"/>"#, path_data(cmds)),
    }
}

/// One `<g>` per leaf region (per template instance), marks in paint order.
pub fn emit_svg(scene: &Scene) -> String {
    let (w, h) = (num(scene.width), num(scene.height));
    let mut out = format!(r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    out.push('\n');
    for l in scene.layers.iter().filter(|l| l.frame.is_leaf) {
        let kind = match l.frame.region {
            Region::Rect { .. } => "cartesian",
            Region::Sector { .. } => "polar",
        };
        writeln!(out, r#"<g data-container="{}" data-coordinate="{kind}">"#, l.frame.id).unwrap();
        for m in &l.marks {
            out.push_str(&mark_element(m));
            out.push('\n');
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}
