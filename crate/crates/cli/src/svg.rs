//! Line-drawing SVG of a nodal graph: the unit circle, arcs as polylines,
//! interior critical points as filled dots and boundary zeros as open
//! circles. Output bytes depend only on the graph.

use std::fmt::Write as _;

use hopfseg::nodal::{NodalGraph, VertexKind};
use hopfseg::C64;

const PIXELS: u32 = 512;

/// Four decimals, without a negative zero.
fn num(x: f64) -> String {
    let s = format!("{x:.4}");
    if s == "-0.0000" {
        "0.0000".to_string()
    } else {
        s
    }
}

/// SVG y runs downward.
fn xy(z: C64) -> (String, String) {
    (num(z.re), num(-z.im))
}

pub fn render_svg(graph: &NodalGraph) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{PIXELS}" height="{PIXELS}" viewBox="-1.1000 -1.1000 2.2000 2.2000">"#
    );
    out.push_str(r#"<circle cx="0.0000" cy="0.0000" r="1.0000" fill="none" stroke="black" stroke-width="0.0060"/>"#);
    out.push('\n');
    out.push_str(r##"<g fill="none" stroke="#1f4e9a" stroke-width="0.0080" stroke-linejoin="round">"##);
    out.push('\n');
    for arc in &graph.arcs {
        let pts: Vec<String> = arc
            .points
            .iter()
            .map(|&p| {
                let (x, y) = xy(p);
                format!("{x},{y}")
            })
            .collect();
        let _ = writeln!(out, r#"<polyline points="{}"/>"#, pts.join(" "));
    }
    out.push_str("</g>\n");
    for v in &graph.vertices {
        let (x, y) = xy(v.location);
        match v.kind {
            VertexKind::InteriorCritical => {
                let _ = writeln!(out, r#"<circle cx="{x}" cy="{y}" r="0.0220" fill="black"/>"#);
            }
            VertexKind::BoundaryZero => {
                let _ = writeln!(
                    out,
                    r#"<circle cx="{x}" cy="{y}" r="0.0280" fill="white" stroke="black" stroke-width="0.0060"/>"#
                );
            }
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use hopfseg::nodal::trace;
    use hopfseg::segregation::reconstruct;
    use hopfseg::Func;

    fn graph(order: u32) -> NodalGraph {
        let f = if order == 0 {
            Func::constant(C64::new(0.25, 0.0)).unwrap()
        } else {
            Func::monomial(C64::new(0.25, 0.0), C64::new(0.0, 0.0), order).unwrap()
        };
        trace(&reconstruct(&f, C64::new(0.0, 0.0), 64).unwrap()).unwrap()
    }

    #[test]
    fn five_rays_and_five_open_circles() {
        let svg = render_svg(&graph(3));
        assert_eq!(svg.matches("<polyline").count(), 5);
        assert_eq!(svg.matches(r#"fill="white""#).count(), 5);
        assert_eq!(svg.matches(r#"fill="black""#).count(), 1);
    }

    #[test]
    fn constant_is_a_single_diameter() {
        let svg = render_svg(&graph(0));
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert_eq!(svg.matches(r#"fill="black""#).count(), 0);
        assert_eq!(svg.matches(r#"fill="white""#).count(), 2);
    }

    #[test]
    fn coordinates_have_four_decimals_and_output_is_stable() {
        let g = graph(3);
        let a = render_svg(&g);
        assert_eq!(a, render_svg(&graph(3)));
        assert!(!a.contains("-0.0000"));
        let first = a.split("points=\"").nth(1).unwrap().split(',').next().unwrap();
        assert_eq!(first.split('.').nth(1).unwrap().len(), 4);
    }

    #[test]
    fn negative_zero_is_normalised() {
        assert_eq!(num(-1e-9), "0.0000");
        assert_eq!(num(-0.25), "-0.2500");
    }
}
