//! SVG rendering of planar networks.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::network::{Network, SegmentSet};

const CANVAS: f64 = 1000.0;
const MARGIN: f64 = 50.0;

/// One `<path>` per edge on a fixed 1000x1000 canvas, terminals as circles.
pub fn to_svg(net: &Network) -> Result<String> {
    if net.norm().dim() != 2 {
        return Err(Error::InvalidInput("SVG export needs a planar network".into()));
    }
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for v in net.vertices() {
        for k in 0..2 {
            lo[k] = lo[k].min(v[k]);
            hi[k] = hi[k].max(v[k]);
        }
    }
    let extent = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
    let scale = (CANVAS - 2.0 * MARGIN) / extent;
    // y grows downwards in SVG
    let map = |v: &[f64]| {
        (
            MARGIN + (v[0] - lo[0]) * scale,
            CANVAS - MARGIN - (v[1] - lo[1]) * scale,
        )
    };

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 1000 1000" width="1000" height="1000">"#
    );
    let _ = writeln!(out, r#"<g fill="none" stroke="black" stroke-width="2">"#);
    for &[i, j] in net.edges() {
        let (x0, y0) = map(&net.vertices()[i]);
        let (x1, y1) = map(&net.vertices()[j]);
        let _ = writeln!(out, r#"<path d="M {x0:.2} {y0:.2} L {x1:.2} {y1:.2}"/>"#);
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, r#"<g fill="red">"#);
    for &t in net.terminals() {
        let (x, y) = map(&net.vertices()[t]);
        let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="6"/>"#);
    }
    let _ = writeln!(out, "</g>");
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norm::NormSpec;

    #[test]
    fn one_path_per_edge() {
        let e = NormSpec::euclidean(2).unwrap();
        let net = Network::new(
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, -1.0]],
            vec![[0, 1], [0, 2], [0, 3]],
            vec![1, 2, 3],
            e,
        )
        .unwrap();
        let svg = to_svg(&net).unwrap();
        assert_eq!(svg.matches("<path").count(), 3);
        assert!(svg.contains(r#"viewBox="0 0 1000 1000""#));
        assert!(svg.contains("M 500.00 500.00 L 950.00 500.00"));
    }

    #[test]
    fn rejects_three_dimensions() {
        let e = NormSpec::euclidean(3).unwrap();
        let net = Network::path(vec![vec![0.0; 3], vec![1.0, 0.0, 0.0]], e).unwrap();
        assert!(to_svg(&net).is_err());
    }
}
