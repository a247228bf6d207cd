//! Static SVG figures: the extended palate with pharyngeal walls, and the six
//! TV time series.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use super::tv_csv::{AngleUnit, ANGLE_COLUMNS, TV_NAMES};
use crate::anatomy::SpeakerAnatomy;
use crate::geometry::Point2D;
use crate::tract_variables::TvTrajectory;

const ANATOMY_SIZE: f64 = 600.0;
const MARGIN: f64 = 40.0;
const PANEL_WIDTH: f64 = 800.0;
const PANEL_HEIGHT: f64 = 110.0;
const PANEL_GAP: f64 = 20.0;

/// Writes `anatomy.svg` and `tvs.svg` into `output_dir`.
pub fn emit_plots(
    anatomy: &SpeakerAnatomy,
    trajectory: &TvTrajectory,
    unit: AngleUnit,
    output_dir: &Path,
) -> io::Result<()> {
    std::fs::create_dir_all(output_dir)?;
    std::fs::write(output_dir.join("anatomy.svg"), anatomy_svg(anatomy))?;
    std::fs::write(output_dir.join("tvs.svg"), tvs_svg(trajectory, unit))?;
    Ok(())
}

fn fmt_num(v: f64) -> String {
    format!("{v:.3}")
}

fn points_attr(points: &[(f64, f64)]) -> String {
    points
        .iter()
        .map(|&(x, y)| format!("{},{}", fmt_num(x), fmt_num(y)))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Palate, soft-palate line, both pharyngeal walls and the reference center.
pub fn anatomy_svg(anatomy: &SpeakerAnatomy) -> String {
    let velar = anatomy.velar_segment();
    let traces: [(&str, &[Point2D], &str); 4] = [
        ("palate", anatomy.palate.points(), "stroke:#1f4e9c;stroke-width:2.5;fill:none"),
        ("velar-extension", velar, "stroke:#d2691e;stroke-width:2;stroke-dasharray:6 3;fill:none"),
        ("anterior-wall", anatomy.anterior_wall.points(), "stroke:#2e8b57;stroke-width:2;fill:none"),
        ("posterior-wall", anatomy.posterior_wall.points(), "stroke:#555;stroke-width:1.5;stroke-dasharray:2 2;fill:none"),
    ];

    let all = traces
        .iter()
        .flat_map(|t| t.1.iter())
        .chain(std::iter::once(&anatomy.reference_center));
    let (mut lo, mut hi) = (Point2D::new(f64::MAX, f64::MAX), Point2D::new(f64::MIN, f64::MIN));
    for p in all {
        lo = Point2D::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point2D::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let span = (hi.x - lo.x).max(hi.y - lo.y).max(1e-9);
    let scale = (ANATOMY_SIZE - 2.0 * MARGIN) / span;
    // y flipped so superior is up
    let map = |p: &Point2D| {
        (
            MARGIN + (p.x - lo.x) * scale,
            ANATOMY_SIZE - MARGIN - (p.y - lo.y) * scale,
        )
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{s}" height="{s}" viewBox="0 0 {s} {s}">"##,
        s = ANATOMY_SIZE
    );
    let _ = writeln!(svg, r##"<rect width="100%" height="100%" fill="white"/>"##);
    let _ = writeln!(
        svg,
        r##"<text x="{MARGIN}" y="24" font-family="sans-serif" font-size="14">Extended palate, speaker {}</text>"##,
        xml_escape(&anatomy.speaker_id)
    );
    for (class, pts, style) in traces {
        let mapped: Vec<_> = pts.iter().map(map).collect();
        let _ = writeln!(
            svg,
            r##"<polyline class="{class}" style="{style}" points="{}"/>"##,
            points_attr(&mapped)
        );
    }
    let (cx, cy) = map(&anatomy.reference_center);
    let _ = writeln!(
        svg,
        r##"<circle class="reference-center" cx="{}" cy="{}" r="4" fill="black"/>"##,
        fmt_num(cx),
        fmt_num(cy)
    );
    for (i, (label, color)) in [
        ("palate", "#1f4e9c"),
        ("soft palate (inferred)", "#d2691e"),
        ("anterior pharyngeal wall (inferred)", "#2e8b57"),
        ("posterior pharyngeal wall", "#555"),
        ("palatal reference center", "black"),
    ]
    .iter()
    .enumerate()
    {
        let _ = writeln!(
            svg,
            r##"<text x="{}" y="{}" font-family="sans-serif" font-size="11" fill="{color}">{label}</text>"##,
            ANATOMY_SIZE - 230.0,
            48.0 + 14.0 * i as f64
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Six stacked panels, one per TV, sharing the time axis.
pub fn tvs_svg(trajectory: &TvTrajectory, unit: AngleUnit) -> String {
    let height = MARGIN * 2.0 + 6.0 * PANEL_HEIGHT + 5.0 * PANEL_GAP;
    let width = PANEL_WIDTH + 2.0 * MARGIN + 60.0;
    let frames = &trajectory.frames;
    let (t0, t1) = match (frames.first(), frames.last()) {
        (Some(a), Some(b)) if b.t > a.t => (a.t, b.t),
        (Some(a), _) => (a.t, a.t + 1.0),
        _ => (0.0, 1.0),
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"##
    );
    let _ = writeln!(svg, r##"<rect width="100%" height="100%" fill="white"/>"##);

    for (tv, name) in TV_NAMES.iter().enumerate() {
        let top = MARGIN + tv as f64 * (PANEL_HEIGHT + PANEL_GAP);
        let left = MARGIN + 60.0;
        let is_angle = ANGLE_COLUMNS.contains(&tv);
        let series: Vec<(f64, Option<f64>)> = frames
            .iter()
            .map(|f| {
                let v = f.values()[tv].map(|v| if is_angle { unit.convert(v) } else { v });
                (f.t, v)
            })
            .collect();
        let (mut lo, mut hi) = series
            .iter()
            .filter_map(|s| s.1)
            .fold((f64::MAX, f64::MIN), |(lo, hi), v| (lo.min(v), hi.max(v)));
        if lo > hi {
            (lo, hi) = (0.0, 1.0);
        } else if hi - lo < 1e-12 {
            (lo, hi) = (lo - 0.5, hi + 0.5);
        }
        let unit_label = if is_angle { unit.suffix() } else { "mm" };

        let _ = writeln!(svg, r##"<g class="panel" data-tv="{name}">"##);
        let _ = writeln!(
            svg,
            r##"<rect x="{left}" y="{top}" width="{PANEL_WIDTH}" height="{PANEL_HEIGHT}" fill="none" stroke="#999"/>"##
        );
        let _ = writeln!(
            svg,
            r##"<text x="{}" y="{}" font-family="sans-serif" font-size="12">{name} ({unit_label})</text>"##,
            MARGIN - 30.0,
            top + PANEL_HEIGHT / 2.0
        );
        let _ = writeln!(
            svg,
            r##"<text x="{}" y="{}" font-family="sans-serif" font-size="9" fill="#666">{}</text>"##,
            left + 2.0,
            top + 10.0,
            fmt_num(hi)
        );
        let _ = writeln!(
            svg,
            r##"<text x="{}" y="{}" font-family="sans-serif" font-size="9" fill="#666">{}</text>"##,
            left + 2.0,
            top + PANEL_HEIGHT - 2.0,
            fmt_num(lo)
        );

        let mut d = String::new();
        let mut pen_down = false;
        for (t, v) in &series {
            match v {
                Some(v) => {
                    let x = left + (t - t0) / (t1 - t0) * PANEL_WIDTH;
                    let y = top + PANEL_HEIGHT - (v - lo) / (hi - lo) * PANEL_HEIGHT;
                    let cmd = if pen_down { 'L' } else { 'M' };
                    let _ = write!(d, "{cmd}{} {} ", fmt_num(x), fmt_num(y));
                    pen_down = true;
                }
                None => pen_down = false,
            }
        }
        if !d.is_empty() {
            let _ = writeln!(
                svg,
                r##"<path d="{}" fill="none" stroke="#1f4e9c" stroke-width="1.2"/>"##,
                d.trim_end()
            );
        }
        svg.push_str("</g>\n");
    }
    let _ = writeln!(
        svg,
        r##"<text x="{}" y="{}" font-family="sans-serif" font-size="11">time (s), {} to {}</text>"##,
        MARGIN + 60.0,
        height - 10.0,
        fmt_num(t0),
        fmt_num(t1)
    );
    svg.push_str("</svg>\n");
    svg
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}
