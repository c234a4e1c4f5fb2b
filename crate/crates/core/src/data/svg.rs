use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::Result;
use crate::model::{GeometricParams, InputPoint, ModelKind};
use crate::pipeline::Structure;

const PALETTE: [&str; 10] = [
    "#d62728", "#2ca02c", "#1f77b4", "#17becf", "#bcbd22", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f",
];

pub fn color(rank: usize) -> &'static str {
    PALETTE[(rank.max(1) - 1) % PALETTE.len()]
}

#[derive(Debug, Clone, Default)]
pub struct SvgOptions {
    /// `[x, y, width, height]` of a 2D view; the point bounding box when absent.
    pub view: Option<[f64; 4]>,
    pub point_radius: Option<f64>,
}

fn bounds(points: &[InputPoint], a: usize, b: usize) -> [f64; 4] {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in points {
        for (k, axis) in [a, b].into_iter().enumerate() {
            lo[k] = lo[k].min(p.y[axis]);
            hi[k] = hi[k].max(p.y[axis]);
        }
    }
    if !lo[0].is_finite() {
        return [0.0, 0.0, 1.0, 1.0];
    }
    let (x0, y0) = (lo[0].floor(), lo[1].floor());
    [x0, y0, (hi[0].ceil() - x0).max(1.0), (hi[1].ceil() - y0).max(1.0)]
}

fn num(v: f64) -> String {
    let r = (v * 1000.0).round() / 1000.0;
    if r == r.trunc() {
        format!("{}", r as i64)
    } else {
        format!("{r}")
    }
}

/// Clips the line `n·y = c` to the rectangle `view`.
fn clip_line(normal: [f64; 2], offset: f64, view: [f64; 4]) -> Option<([f64; 2], [f64; 2])> {
    let [x0, y0, w, h] = view;
    let (x1, y1) = (x0 + w, y0 + h);
    let mut hits: Vec<[f64; 2]> = Vec::new();
    if normal[1].abs() > 1e-12 {
        for x in [x0, x1] {
            let y = (offset - normal[0] * x) / normal[1];
            if (y0..=y1).contains(&y) {
                hits.push([x, y]);
            }
        }
    }
    if normal[0].abs() > 1e-12 {
        for y in [y0, y1] {
            let x = (offset - normal[1] * y) / normal[0];
            if (x0..=x1).contains(&x) {
                hits.push([x, y]);
            }
        }
    }
    let first = *hits.first()?;
    let last = hits.iter().copied().max_by(|a, b| {
        let da = (a[0] - first[0]).hypot(a[1] - first[1]);
        let db = (b[0] - first[0]).hypot(b[1] - first[1]);
        da.total_cmp(&db)
    })?;
    Some((first, last))
}

fn locus_2d(out: &mut String, geometry: &Option<GeometricParams>, view: [f64; 4], stroke: &str, width: f64) {
    match geometry {
        Some(GeometricParams::Line { normal, offset }) => {
            if let Some((a, b)) = clip_line(*normal, *offset, view) {
                let _ = writeln!(
                    out,
                    r#"    <line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{stroke}" stroke-width="{}" fill="none"/>"#,
                    num(a[0]),
                    num(a[1]),
                    num(b[0]),
                    num(b[1]),
                    num(width)
                );
            }
        }
        Some(GeometricParams::Ellipse { center, semi_major, semi_minor, angle }) => {
            let _ = writeln!(
                out,
                r#"    <ellipse cx="{}" cy="{}" rx="{}" ry="{}" transform="rotate({} {} {})" stroke="{stroke}" stroke-width="{}" fill="none"/>"#,
                num(center[0]),
                num(center[1]),
                num(*semi_major),
                num(*semi_minor),
                num(angle.to_degrees()),
                num(center[0]),
                num(center[1]),
                num(width)
            );
        }
        _ => {}
    }
}

fn scatter(out: &mut String, points: &[InputPoint], idx: &[usize], a: usize, b: usize, fill: &str, r: f64) {
    for &i in idx {
        let p = &points[i].y;
        let _ = writeln!(out, r#"    <circle cx="{}" cy="{}" r="{}" fill="{fill}"/>"#, num(p[a]), num(p[b]), num(r));
    }
}

fn panel(
    out: &mut String,
    points: &[InputPoint],
    structures: &[Structure],
    axes: (usize, usize),
    view: [f64; 4],
    r: f64,
    draw_locus: bool,
) {
    let claimed: std::collections::HashSet<usize> =
        structures.iter().flat_map(|s| s.inliers.iter().copied()).collect();
    let free: Vec<usize> = (0..points.len()).filter(|i| !claimed.contains(i)).collect();
    let _ = writeln!(out, r#"  <g class="unclaimed">"#);
    scatter(out, points, &free, axes.0, axes.1, "#b0b0b0", r);
    let _ = writeln!(out, "  </g>");
    for s in structures {
        let c = color(s.rank);
        let _ = writeln!(
            out,
            r#"  <g class="structure" data-rank="{}" data-strength="{}" stroke="none">"#,
            s.rank,
            num(s.strength)
        );
        scatter(out, points, &s.inliers, axes.0, axes.1, c, r);
        if draw_locus {
            locus_2d(out, &s.geometry, view, c, r * 0.8);
        }
        let _ = writeln!(out, "  </g>");
    }
}

/// SVG overlay of the structures on the point scatter, colored by rank.
///
/// 2D models draw one panel in input coordinates; 3D models draw the xy, xz
/// and yz projections side by side; correspondences draw the first image.
pub fn render_svg(model: ModelKind, points: &[InputPoint], structures: &[Structure], opts: &SvgOptions) -> String {
    let mut out = String::new();
    let l = model.spec().input_dim;
    if l == 3 {
        let views: Vec<[f64; 4]> = [(0, 1), (0, 2), (1, 2)].iter().map(|&(a, b)| bounds(points, a, b)).collect();
        let side = views.iter().map(|v| v[2].max(v[3])).fold(1.0, f64::max);
        let gap = side * 0.05;
        let r = opts.point_radius.unwrap_or(side / 250.0);
        let total = 3.0 * side + 2.0 * gap;
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="0 0 {} {}">"#,
            num(total),
            num(side)
        );
        for (k, (&(a, b), v)) in [(0usize, 1usize), (0, 2), (1, 2)].iter().zip(&views).enumerate() {
            let names = ["x", "y", "z"];
            let _ = writeln!(
                out,
                r#"<g class="projection" data-axes="{}{}" transform="translate({} 0) translate({} {})">"#,
                names[a],
                names[b],
                num(k as f64 * (side + gap)),
                num(-v[0]),
                num(-v[1])
            );
            panel(&mut out, points, structures, (a, b), *v, r, false);
            let _ = writeln!(out, "</g>");
        }
        out.push_str("</svg>\n");
        return out;
    }
    let view = opts.view.unwrap_or_else(|| bounds(points, 0, 1));
    let r = opts.point_radius.unwrap_or(view[2].max(view[3]) / 250.0);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="{} {} {} {}">"#,
        num(view[0]),
        num(view[1]),
        num(view[2]),
        num(view[3])
    );
    let _ = writeln!(
        out,
        r#"  <rect x="{}" y="{}" width="{}" height="{}" fill="white"/>"#,
        num(view[0]),
        num(view[1]),
        num(view[2]),
        num(view[3])
    );
    panel(&mut out, points, structures, (0, 1), view, r, l == 2);
    out.push_str("</svg>\n");
    out
}

pub fn write_svg(path: &Path, model: ModelKind, points: &[InputPoint], structures: &[Structure], opts: &SvgOptions) -> Result<()> {
    fs::write(path, render_svg(model, points, structures, opts))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn structure(rank: usize, inliers: Vec<usize>) -> Structure {
        Structure {
            rank,
            extraction: rank - 1,
            model: ModelKind::Line2d,
            strength: 1.0,
            scale: 1.0,
            sigma_hat: 1.0,
            n_in: inliers.len(),
            theta: vec![0.0, 1.0],
            alpha: 350.0,
            geometry: Some(GeometricParams::Line { normal: [0.0, 1.0], offset: 350.0 }),
            exact: false,
            tls_fallback: false,
            inliers,
        }
    }

    #[test]
    fn explicit_view_and_groups() {
        let pts: Vec<InputPoint> = (0..4).map(|i| InputPoint::new(vec![100.0 * i as f64, 350.0])).collect();
        let opts = SvgOptions { view: Some([0.0, 0.0, 700.0, 700.0]), point_radius: None };
        let svg = render_svg(ModelKind::Line2d, &pts, &[structure(1, vec![0, 1]), structure(2, vec![2])], &opts);
        assert!(svg.contains(r#"viewBox="0 0 700 700""#));
        assert_eq!(svg.matches(r#"class="structure""#).count(), 2);
        assert!(svg.contains(r#"<line x1="0" y1="350" x2="700" y2="350""#));
    }

    #[test]
    fn three_projections_for_3d() {
        let pts: Vec<InputPoint> = (0..4).map(|i| InputPoint::new(vec![i as f64, 1.0, 2.0 * i as f64])).collect();
        let svg = render_svg(ModelKind::Plane3d, &pts, &[], &SvgOptions::default());
        assert_eq!(svg.matches(r#"class="projection""#).count(), 3);
    }

    #[test]
    fn empty_input_still_renders() {
        let svg = render_svg(ModelKind::Ellipse2d, &[], &[], &SvgOptions::default());
        assert!(svg.starts_with("<svg"));
    }
}
