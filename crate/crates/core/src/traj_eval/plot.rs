//! Top-down (x–z) SVG plot of an estimated and a ground-truth trajectory.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::kitti_io::Trajectory;

const CANVAS: f64 = 800.0;
const MARGIN: f64 = 60.0;

/// Uniform meters-to-pixels mapping that fits all trajectories into the
/// canvas interior, centered. SVG y grows downward, so z is flipped.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlotLayout {
    pub scale: f64,
    x_min: f64,
    z_min: f64,
    x_pad: f64,
    z_pad: f64,
}

impl PlotLayout {
    pub const CANVAS: f64 = CANVAS;
    pub const MARGIN: f64 = MARGIN;

    pub fn fit(trajs: &[&Trajectory]) -> Self {
        let mut x = (f64::INFINITY, f64::NEG_INFINITY);
        let mut z = (f64::INFINITY, f64::NEG_INFINITY);
        for p in trajs.iter().flat_map(|t| t.poses()) {
            x = (x.0.min(p[(0, 3)]), x.1.max(p[(0, 3)]));
            z = (z.0.min(p[(2, 3)]), z.1.max(p[(2, 3)]));
        }
        if !x.0.is_finite() {
            x = (0.0, 0.0);
            z = (0.0, 0.0);
        }
        let inner = CANVAS - 2.0 * MARGIN;
        // a degenerate extent is shown as 1 m
        let span = (x.1 - x.0).max(z.1 - z.0).max(1.0);
        let scale = inner / span;
        PlotLayout {
            scale,
            x_min: x.0,
            z_min: z.0,
            x_pad: (inner - (x.1 - x.0) * scale) / 2.0,
            z_pad: (inner - (z.1 - z.0) * scale) / 2.0,
        }
    }

    /// Pixel position of world point `(x, z)`.
    pub fn to_px(&self, x: f64, z: f64) -> (f64, f64) {
        (
            MARGIN + self.x_pad + (x - self.x_min) * self.scale,
            CANVAS - MARGIN - self.z_pad - (z - self.z_min) * self.scale,
        )
    }
}

fn nice_bar_length(max_m: f64) -> f64 {
    let mut best = 1e-3;
    for exp in -3..7 {
        for m in [1.0, 2.0, 5.0] {
            let v = m * 10f64.powi(exp);
            if v <= max_m {
                best = v;
            }
        }
    }
    best
}

fn polyline(out: &mut String, layout: &PlotLayout, t: &Trajectory, color: &str, id: &str) {
    let _ = write!(
        out,
        r#"<polyline id="{id}" fill="none" stroke="{color}" stroke-width="1.5" points=""#
    );
    for (i, p) in t.poses().iter().enumerate() {
        let (x, y) = layout.to_px(p[(0, 3)], p[(2, 3)]);
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{x:.2},{y:.2}");
    }
    out.push_str("\"/>\n");
    let (x, y) = layout.to_px(t.poses()[0][(0, 3)], t.poses()[0][(2, 3)]);
    let _ = writeln!(
        out,
        r#"<circle class="marker" cx="{x:.2}" cy="{y:.2}" r="4" fill="{color}"/>"#
    );
}

/// Renders the plot. Output is a pure function of the poses.
pub fn render_svg(est: &Trajectory, gt: &Trajectory) -> Result<String> {
    if est.is_empty() || gt.is_empty() {
        return Err(Error::EmptyEvaluation(
            "cannot plot an empty trajectory".into(),
        ));
    }
    let layout = PlotLayout::fit(&[est, gt]);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{CANVAS}" height="{CANVAS}" viewBox="0 0 {CANVAS} {CANVAS}">"#
    );
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{w}" height="{w}" fill="none" stroke="gray"/>"#,
        w = CANVAS - 2.0 * MARGIN
    );
    polyline(&mut s, &layout, gt, "black", "ground-truth");
    polyline(&mut s, &layout, est, "red", "estimate");

    // scale bar, bottom left
    let bar_m = nice_bar_length((CANVAS - 2.0 * MARGIN) / 4.0 / layout.scale);
    let bar_px = bar_m * layout.scale;
    let y = CANVAS - MARGIN / 2.0;
    let _ = writeln!(
        s,
        r#"<line id="scale-bar" x1="{MARGIN}" y1="{y}" x2="{x2:.2}" y2="{y}" stroke="black" stroke-width="2"/>"#,
        x2 = MARGIN + bar_px
    );
    let _ = writeln!(
        s,
        r#"<text x="{x:.2}" y="{ty}" font-family="sans-serif" font-size="12">{bar_m} m</text>"#,
        x = MARGIN + bar_px + 6.0,
        ty = y + 4.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{cx}" y="{ty}" font-family="sans-serif" font-size="12" text-anchor="middle">x [m]</text>"#,
        cx = CANVAS / 2.0,
        ty = CANVAS - 8.0
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{cy}" font-family="sans-serif" font-size="12" transform="rotate(-90 14 {cy})" text-anchor="middle">z [m]</text>"#,
        cy = CANVAS / 2.0
    );

    // legend, top left
    for (i, (label, color)) in [("Ground truth", "black"), ("Estimate", "red")]
        .iter()
        .enumerate()
    {
        let ly = MARGIN / 2.0 - 8.0 + i as f64 * 16.0;
        let _ = writeln!(
            s,
            r#"<line x1="{MARGIN}" y1="{ly}" x2="{x2}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            x2 = MARGIN + 24.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{x}" y="{ty}" font-family="sans-serif" font-size="12">{label}</text>"#,
            x = MARGIN + 30.0,
            ty = ly + 4.0
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn plot_trajectory(est: &Trajectory, gt: &Trajectory, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let svg = render_svg(est, gt)?;
    fs::write(path, svg).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Translation3;

    fn traj(pts: &[(f64, f64)]) -> Trajectory {
        Trajectory::new(
            pts.iter()
                .map(|&(x, z)| Translation3::new(x, 0.0, z).to_homogeneous())
                .collect(),
        )
        .unwrap()
    }

    fn polyline_points<'a>(svg: &'a str, id: &str) -> &'a str {
        let start = svg.find(&format!("id=\"{id}\"")).unwrap();
        let rest = &svg[start..];
        let p = rest.find("points=\"").unwrap() + 8;
        let end = rest[p..].find('"').unwrap();
        &rest[p..p + end]
    }

    #[test]
    fn single_pose_has_two_markers() {
        let svg = render_svg(&traj(&[(1.0, 2.0)]), &traj(&[(3.0, 4.0)])).unwrap();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("class=\"marker\"").count(), 2);
    }

    #[test]
    fn identical_trajectories_overlap() {
        let t = traj(&[(0.0, 0.0), (5.0, 1.0), (7.0, 9.0)]);
        let svg = render_svg(&t, &t).unwrap();
        assert_eq!(
            polyline_points(&svg, "estimate"),
            polyline_points(&svg, "ground-truth")
        );
    }

    #[test]
    fn deterministic() {
        let t = traj(&[(0.0, 0.0), (5.0, 1.0)]);
        let e = traj(&[(0.0, 0.0), (5.5, 1.2)]);
        assert_eq!(render_svg(&e, &t).unwrap(), render_svg(&e, &t).unwrap());
    }

    #[test]
    fn square_path_fills_plot_area() {
        // 900 frames around a 225 m square, 1 m per frame
        let side = 225.0;
        let pts: Vec<(f64, f64)> = (0..900)
            .map(|i| {
                let s = i as f64;
                match i / 225 {
                    0 => (s, 0.0),
                    1 => (side, s - side),
                    2 => (3.0 * side - s, side),
                    _ => (0.0, 4.0 * side - s),
                }
            })
            .collect();
        let t = traj(&pts);
        let svg = render_svg(&t, &t).unwrap();
        let coords: Vec<(f64, f64)> = polyline_points(&svg, "ground-truth")
            .split(' ')
            .map(|p| {
                let (x, y) = p.split_once(',').unwrap();
                (x.parse().unwrap(), y.parse().unwrap())
            })
            .collect();
        let min_x = coords.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
        let max_x = coords.iter().map(|c| c.0).fold(f64::NEG_INFINITY, f64::max);
        let min_y = coords.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
        let max_y = coords.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
        // square extent maps onto the full 680 px interior
        for (got, want) in [(min_x, 60.0), (max_x, 740.0), (min_y, 60.0), (max_y, 740.0)] {
            assert!((got - want).abs() <= 1.0, "{got} vs {want}");
        }
    }

    #[test]
    fn empty_rejected() {
        let e = Trajectory::new(vec![]).unwrap();
        assert!(render_svg(&e, &traj(&[(0.0, 0.0)])).is_err());
    }
}
