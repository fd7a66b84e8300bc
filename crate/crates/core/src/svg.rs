//! Minimal SVG rendering: a three-panel figure (plane, x(t), y(t)) with one
//! polyline per curve per panel.

use crate::error::Result;
use crate::smoothing::{uniform_grid, SmoothCurve};

const PANEL: f64 = 300.0;
const MARGIN: f64 = 20.0;
const SAMPLES: usize = 512;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

struct Rect {
    x0: f64,
    y0: f64,
}

/// Map data coordinates into a panel, flipping y so larger values are higher.
fn map_point(
    rect: &Rect,
    (xmin, xmax): (f64, f64),
    (ymin, ymax): (f64, f64),
    x: f64,
    y: f64,
) -> (f64, f64) {
    let sx = if xmax > xmin { (x - xmin) / (xmax - xmin) } else { 0.5 };
    let sy = if ymax > ymin { (y - ymin) / (ymax - ymin) } else { 0.5 };
    (
        rect.x0 + MARGIN + sx * (PANEL - 2.0 * MARGIN),
        rect.y0 + PANEL - MARGIN - sy * (PANEL - 2.0 * MARGIN),
    )
}

fn extend(range: &mut (f64, f64), v: f64) {
    if v < range.0 {
        range.0 = v;
    }
    if v > range.1 {
        range.1 = v;
    }
}

/// Render closed curves as an SVG document with three side-by-side panels:
/// the planar trace, then each coordinate against the parameter. Every curve
/// contributes exactly one polyline to every panel; a constant (point) curve
/// additionally gets a circle marker in the planar panel so it stays visible.
pub fn svg_export(curves: &[SmoothCurve]) -> Result<String> {
    let grid = uniform_grid(SAMPLES);
    let mut traces: Vec<Vec<[f64; 2]>> = Vec::with_capacity(curves.len());
    let mut xy = ((f64::INFINITY, f64::NEG_INFINITY), (f64::INFINITY, f64::NEG_INFINITY));
    for curve in curves {
        let mut pts = Vec::with_capacity(SAMPLES);
        for &t in &grid {
            let p = curve.point_at(t)?;
            extend(&mut xy.0, p[0]);
            extend(&mut xy.1, p[1]);
            pts.push(p);
        }
        traces.push(pts);
    }
    if traces.is_empty() || xy.0 .0 > xy.0 .1 {
        xy = ((0.0, 1.0), (0.0, 1.0));
    }
    let mut yx = xy.0; // x(t) panel value range
    let mut yy = xy.1; // y(t) panel value range
    if yx.0 == yx.1 {
        yx = (yx.0 - 0.5, yx.1 + 0.5);
    }
    if yy.0 == yy.1 {
        yy = (yy.0 - 0.5, yy.1 + 0.5);
    }
    let mut px = xy.0;
    let mut py = xy.1;
    if px.0 == px.1 {
        px = (px.0 - 0.5, px.1 + 0.5);
    }
    if py.0 == py.1 {
        py = (py.0 - 0.5, py.1 + 0.5);
    }

    let width = 3.0 * PANEL;
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{PANEL}\" \
         viewBox=\"0 0 {width} {PANEL}\">\n"
    ));
    for i in 0..3 {
        out.push_str(&format!(
            "  <rect x=\"{}\" y=\"0\" width=\"{PANEL}\" height=\"{PANEL}\" fill=\"none\" \
             stroke=\"#cccccc\"/>\n",
            i as f64 * PANEL
        ));
    }
    let panels = [
        Rect { x0: 0.0, y0: 0.0 },
        Rect { x0: PANEL, y0: 0.0 },
        Rect { x0: 2.0 * PANEL, y0: 0.0 },
    ];
    for (idx, pts) in traces.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        // Panel 0: y against x.
        let mut attr = String::new();
        for p in pts {
            let (mx, my) = map_point(&panels[0], px, py, p[0], p[1]);
            attr.push_str(&format!("{mx:.2},{my:.2} "));
        }
        out.push_str(&format!(
            "  <polyline points=\"{}\" fill=\"none\" stroke=\"{color}\"/>\n",
            attr.trim_end()
        ));
        // Panels 1 and 2: coordinate against t.
        for (panel, coord, range) in [(1usize, 0usize, yx), (2, 1, yy)] {
            let mut attr = String::new();
            for (&t, p) in grid.iter().zip(pts) {
                let (mx, my) = map_point(&panels[panel], (0.0, 1.0), range, t, p[coord]);
                attr.push_str(&format!("{mx:.2},{my:.2} "));
            }
            out.push_str(&format!(
                "  <polyline points=\"{}\" fill=\"none\" stroke=\"{color}\"/>\n",
                attr.trim_end()
            ));
        }
        // A point curve collapses its polylines; mark it.
        let constant = pts.iter().all(|p| p == &pts[0]);
        if constant {
            let (mx, my) = map_point(&panels[0], px, py, pts[0][0], pts[0][1]);
            out.push_str(&format!(
                "  <circle cx=\"{mx:.2}\" cy=\"{my:.2}\" r=\"3\" fill=\"{color}\"/>\n"
            ));
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::CoefMatrix;

    fn circle_curve() -> SmoothCurve {
        let coefs = CoefMatrix::from_rows(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        SmoothCurve::new([0.0, 0.0], coefs)
    }

    fn point_curve() -> SmoothCurve {
        let coefs = CoefMatrix::from_rows(&[0.0, 0.0], &[0.0, 0.0]).unwrap();
        SmoothCurve::new([2.0, 3.0], coefs)
    }

    #[test]
    fn one_polyline_per_curve_per_panel() {
        let curves = vec![circle_curve(), circle_curve(), point_curve()];
        let svg = svg_export(&curves).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 3 * curves.len());
    }

    #[test]
    fn constant_curve_gets_a_marker() {
        let svg = svg_export(&[point_curve()]).unwrap();
        assert_eq!(svg.matches("<circle").count(), 1);
        let svg2 = svg_export(&[circle_curve()]).unwrap();
        assert_eq!(svg2.matches("<circle").count(), 0);
    }

    #[test]
    fn output_is_well_formed_xml() {
        let svg = svg_export(&[circle_curve(), point_curve()]).unwrap();
        // Cheap well-formedness checks: balanced tags, quoted attributes,
        // a single root element.
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<svg").count(), 1);
        for tag in ["polyline", "rect", "circle"] {
            let opens = svg.matches(&format!("<{tag}")).count();
            let closes = svg.matches("/>").count();
            assert!(opens <= closes, "unbalanced {tag}");
        }
        assert_eq!(svg.matches('"').count() % 2, 0);
    }

    #[test]
    fn empty_input_still_renders_panels() {
        let svg = svg_export(&[]).unwrap();
        assert_eq!(svg.matches("<rect").count(), 3);
        assert_eq!(svg.matches("<polyline").count(), 0);
    }

    #[test]
    fn coordinates_stay_inside_the_canvas() {
        let svg = svg_export(&[circle_curve()]).unwrap();
        for part in svg.split("points=\"").skip(1) {
            let coords = part.split('"').next().unwrap();
            for pair in coords.split_whitespace() {
                let (x, y) = pair.split_once(',').unwrap();
                let (x, y): (f64, f64) = (x.parse().unwrap(), y.parse().unwrap());
                assert!((0.0..=3.0 * PANEL).contains(&x));
                assert!((0.0..=PANEL).contains(&y));
            }
        }
    }
}
