//! SVG rendering of an environment and, optionally, a plan on it.

use std::fmt::Write as _;

use crate::alphabet::Atom;
use crate::environment::Environment;
use crate::error::{Error, Result};
use crate::planner::Plan;

const CELL: f64 = 48.0;
const MARGIN: f64 = 12.0;
const ROI_COLORS: [&str; 6] = ["#f4c7c3", "#c6dafc", "#c8e6c9", "#fff3b0", "#e1bee7", "#ffe0b2"];
const ROBOT_COLORS: [&str; 8] = [
    "#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

fn roi_color(a: Atom) -> &'static str {
    ROI_COLORS[(a.0 as usize + ROI_COLORS.len() - 1) % ROI_COLORS.len()]
}

/// One color per robot; past the fixed palette, hues are spread by the golden angle.
pub fn robot_color(r: usize) -> String {
    match ROBOT_COLORS.get(r) {
        Some(c) => (*c).to_string(),
        None => format!("hsl({:.0}, 70%, 45%)", (r as f64 * 137.508) % 360.0),
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn star(cx: f64, cy: f64, r: f64) -> String {
    (0..10)
        .map(|k| {
            let rad = if k % 2 == 0 { r } else { r * 0.45 };
            let a = std::f64::consts::PI * (k as f64) / 5.0 - std::f64::consts::FRAC_PI_2;
            format!("{:.1},{:.1}", cx + rad * a.cos(), cy + rad * a.sin())
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn check_matches(env: &Environment, plan: &Plan) -> Result<()> {
    let names: Vec<&str> = env.cells.iter().map(|c| c.name.as_str()).collect();
    let plan_names: Vec<&str> = plan.cell_names.iter().map(String::as_str).collect();
    let prefixed = names.len() == plan_names.len()
        && names.iter().zip(&plan_names).all(|(a, b)| b.strip_prefix('p') == Some(a) || a == b);
    if !prefixed {
        return Err(Error::contract("plan cells do not match the environment"));
    }
    if plan.robots != env.robot_count() || plan.trajectories.len() != plan.robots {
        return Err(Error::contract("plan robot count does not match the environment"));
    }
    let bad = plan.trajectories.iter().flat_map(|t| t.prefix.iter().chain(&t.suffix)).any(|&c| c >= names.len());
    if bad {
        return Err(Error::contract("plan refers to a cell outside the environment"));
    }
    Ok(())
}

/// Renders cells colored by their regions, one polyline per robot and a star at
/// every robot position of every synchronization tick.
pub fn render_svg(env: &Environment, plan: Option<&Plan>) -> Result<String> {
    if let Some(p) = plan {
        check_matches(env, p)?;
    }
    let (min_x, max_x) = (env.cells.iter().map(|c| c.x).min().unwrap_or(0), env.cells.iter().map(|c| c.x).max().unwrap_or(0));
    let (min_y, max_y) = (env.cells.iter().map(|c| c.y).min().unwrap_or(0), env.cells.iter().map(|c| c.y).max().unwrap_or(0));
    let width = (max_x - min_x + 1) as f64 * CELL + 2.0 * MARGIN;
    let height = (max_y - min_y + 1) as f64 * CELL + 2.0 * MARGIN;
    let corner = |c: usize| -> (f64, f64) {
        let cell = &env.cells[c];
        (MARGIN + (cell.x - min_x) as f64 * CELL, MARGIN + (cell.y - min_y) as f64 * CELL)
    };
    let center = |c: usize| -> (f64, f64) {
        let (x, y) = corner(c);
        (x + CELL / 2.0, y + CELL / 2.0)
    };

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{width:.0}" height="{height:.0}" fill="white"/>"#);
    out.push_str("<g id=\"cells\" font-family=\"sans-serif\" font-size=\"10\">\n");
    for (i, cell) in env.cells.iter().enumerate() {
        let (x, y) = corner(i);
        let fill = cell.labels.iter().next().map_or("#f7f7f7", |&a| roi_color(a));
        let _ = writeln!(
            out,
            r##"<rect x="{x:.1}" y="{y:.1}" width="{CELL:.1}" height="{CELL:.1}" fill="{fill}" stroke="#888" stroke-width="1"/>"##
        );
        let mut label = escape(&cell.name);
        if !cell.labels.is_empty() {
            let rois: Vec<String> = cell.labels.iter().map(|a| a.to_string()).collect();
            label = format!("{label} {}", rois.join("+"));
        }
        let _ = writeln!(out, r##"<text x="{:.1}" y="{:.1}" fill="#444">{label}</text>"##, x + 3.0, y + 12.0);
    }
    out.push_str("</g>\n");

    if let Some(p) = plan {
        let timeline = p.timeline();
        out.push_str("<g id=\"trajectories\" fill=\"none\" stroke-width=\"3\" stroke-linejoin=\"round\">\n");
        for r in 0..p.robots {
            let mut cells: Vec<usize> = timeline.iter().map(|tick| tick[r]).collect();
            cells.dedup();
            if cells.len() == 1 {
                cells.push(cells[0]);
            }
            // small offset per robot so overlapping paths stay visible
            let off = (r as f64 - (p.robots as f64 - 1.0) / 2.0) * 3.0;
            let points: Vec<String> = cells
                .iter()
                .map(|&c| {
                    let (x, y) = center(c);
                    format!("{:.1},{:.1}", x + off, y + off)
                })
                .collect();
            let _ = writeln!(
                out,
                r#"<polyline id="robot{}" points="{}" stroke="{}"/>"#,
                r + 1,
                points.join(" "),
                robot_color(r)
            );
        }
        out.push_str("</g>\n<g id=\"robots\">\n");
        for r in 0..p.robots {
            let (x, y) = center(timeline[0][r]);
            let _ = writeln!(out, r##"<circle cx="{x:.1}" cy="{y:.1}" r="6" fill="{}" stroke="#000"/>"##, robot_color(r));
        }
        out.push_str("</g>\n<g id=\"sync\" fill=\"black\">\n");
        for &t in &p.sync_points {
            let Some(tick) = timeline.get(t) else { continue };
            for &c in tick {
                let (x, y) = center(c);
                let _ = writeln!(out, r#"<polygon points="{}"/>"#, star(x, y - CELL / 4.0, 6.0));
            }
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::parse_environment;

    #[test]
    fn environment_only() {
        let env = parse_environment("grid 2 1 1\ny1 .@r1\n").unwrap();
        let svg = render_svg(&env, None).unwrap();
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<polyline").count(), 0);
        assert_eq!(svg.matches("<rect").count(), 3);
    }

    #[test]
    fn colors_are_distinct() {
        let colors: std::collections::BTreeSet<String> = (0..12).map(robot_color).collect();
        assert_eq!(colors.len(), 12);
    }
}
