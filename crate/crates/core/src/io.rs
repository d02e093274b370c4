//! Flat-file emission: CSV schemas shared by the CLI subcommands and the
//! (dependency-free) SVG trajectory renderer.
//!
//! Floats are serialized with 17 significant digits so every f64 round-trips
//! losslessly and reruns are byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::trajectories::TrajectoryBundle;

/// 17 significant digits: one before the point, sixteen after.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_text(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| LabError::io(parent, e))?;
        }
    }
    fs::write(path, content).map_err(|e| LabError::io(path, e))
}

/// Rows `model,trial,t,re,im` for spectra.
pub struct SpectrumCsv {
    buf: String,
}

impl SpectrumCsv {
    pub fn new() -> Self {
        SpectrumCsv { buf: String::from("model,trial,t,re,im\n") }
    }

    pub fn push(&mut self, model: &str, trial: u64, t: f64, values: &[Complex64]) {
        for z in values {
            let _ = writeln!(
                self.buf,
                "{model},{trial},{},{},{}",
                fmt_f64(t),
                fmt_f64(z.re),
                fmt_f64(z.im)
            );
        }
    }

    pub fn finish(self, path: &Path) -> Result<()> {
        write_text(path, &self.buf)
    }
}

impl Default for SpectrumCsv {
    fn default() -> Self {
        Self::new()
    }
}

/// Rows `model,trial,t,path_index,re,im` for trajectory bundles; only the
/// points of the requested uniform grid are emitted (refinement midpoints
/// stay internal), so the row count is exactly paths x grid x trials.
pub struct TrajectoryCsv {
    buf: String,
}

impl TrajectoryCsv {
    pub fn new() -> Self {
        TrajectoryCsv { buf: String::from("model,trial,t,path_index,re,im\n") }
    }

    pub fn push(&mut self, model: &str, trial: u64, bundle: &TrajectoryBundle, grid_indices: &[usize]) {
        for &k in grid_indices {
            let t = bundle.grid[k];
            for (j, path) in bundle.paths.iter().enumerate() {
                let z = path[k];
                let _ = writeln!(
                    self.buf,
                    "{model},{trial},{},{j},{},{}",
                    fmt_f64(t),
                    fmt_f64(z.re),
                    fmt_f64(z.im)
                );
            }
        }
    }

    pub fn finish(self, path: &Path) -> Result<()> {
        write_text(path, &self.buf)
    }
}

impl Default for TrajectoryCsv {
    fn default() -> Self {
        Self::new()
    }
}

/// Indices of the originally requested uniform grid inside a possibly
/// refined bundle grid.
pub fn base_grid_indices(bundle: &TrajectoryBundle, initial_steps: usize) -> Vec<usize> {
    let t0 = bundle.grid[0];
    let t1 = *bundle.grid.last().unwrap();
    let h = (t1 - t0) / initial_steps as f64;
    let tol = 1e-9 * (t1 - t0).abs().max(1.0);
    let mut indices = Vec::with_capacity(initial_steps + 1);
    let mut cursor = 0usize;
    for k in 0..=initial_steps {
        let target = if k == initial_steps { t1 } else { t0 + h * k as f64 };
        while cursor < bundle.grid.len() && (bundle.grid[cursor] - target).abs() > tol {
            cursor += 1;
        }
        if cursor < bundle.grid.len() {
            indices.push(cursor);
        }
    }
    indices
}

/// Rows `trial,index,re_lambda,im_lambda,overlap_diag`.
pub struct OverlapCsv {
    buf: String,
}

impl OverlapCsv {
    pub fn new() -> Self {
        OverlapCsv { buf: String::from("trial,index,re_lambda,im_lambda,overlap_diag\n") }
    }

    pub fn push(&mut self, trial: u64, values: &[Complex64], diag: &[f64]) {
        for (index, (z, d)) in values.iter().zip(diag.iter()).enumerate() {
            let _ = writeln!(
                self.buf,
                "{trial},{index},{},{},{}",
                fmt_f64(z.re),
                fmt_f64(z.im),
                fmt_f64(*d)
            );
        }
    }

    pub fn finish(self, path: &Path) -> Result<()> {
        write_text(path, &self.buf)
    }
}

impl Default for OverlapCsv {
    fn default() -> Self {
        Self::new()
    }
}

/// Rows `trial,re,im` for zero clouds and other point sets.
pub struct PointCsv {
    buf: String,
}

impl PointCsv {
    pub fn new() -> Self {
        PointCsv { buf: String::from("trial,re,im\n") }
    }

    pub fn push(&mut self, trial: u64, points: &[Complex64]) {
        for z in points {
            let _ = writeln!(self.buf, "{trial},{},{}", fmt_f64(z.re), fmt_f64(z.im));
        }
    }

    pub fn finish(self, path: &Path) -> Result<()> {
        write_text(path, &self.buf)
    }
}

impl Default for PointCsv {
    fn default() -> Self {
        Self::new()
    }
}

fn lerp(a: f64, b: f64, s: f64) -> f64 {
    a + (b - a) * s
}

/// Color ramp over the parameter: light blue through grey to dark blue.
fn ramp_color(s: f64) -> String {
    let stops = [(166.0, 206.0, 227.0), (140.0, 140.0, 140.0), (8.0, 48.0, 107.0)];
    let s = s.clamp(0.0, 1.0);
    let (lo, hi, u) = if s < 0.5 { (stops[0], stops[1], 2.0 * s) } else { (stops[1], stops[2], 2.0 * s - 1.0) };
    format!(
        "#{:02x}{:02x}{:02x}",
        lerp(lo.0, hi.0, u) as u8,
        lerp(lo.1, hi.1, u) as u8,
        lerp(lo.2, hi.2, u) as u8
    )
}

/// Render trajectory bundles as an SVG: one polyline segment per grid step,
/// stroke colored by the parameter value, with the unit circle for scale.
pub fn trajectory_svg(bundles: &[TrajectoryBundle]) -> String {
    let size = 900.0;
    let margin = 40.0;

    let mut t_min = f64::INFINITY;
    let mut t_max = f64::NEG_INFINITY;
    let mut extent = 1.2f64;
    for bundle in bundles {
        for &t in &bundle.grid {
            t_min = t_min.min(t);
            t_max = t_max.max(t);
        }
        for path in &bundle.paths {
            for z in path {
                extent = extent.max(z.re.abs()).max(z.im.abs());
            }
        }
    }
    let extent = extent * 1.05;
    let scale = (size - 2.0 * margin) / (2.0 * extent);
    let map = |z: Complex64| -> (f64, f64) {
        (size / 2.0 + z.re * scale, size / 2.0 - z.im * scale)
    };
    let t_span = (t_max - t_min).max(f64::MIN_POSITIVE);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">"
    );
    let _ = writeln!(svg, "<rect width=\"{size}\" height=\"{size}\" fill=\"white\"/>");
    let _ = writeln!(
        svg,
        "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"none\" stroke=\"#dddddd\" stroke-width=\"1\"/>",
        size / 2.0,
        size / 2.0,
        scale
    );
    for bundle in bundles {
        for path in &bundle.paths {
            for k in 0..bundle.grid.len().saturating_sub(1) {
                let (x1, y1) = map(path[k]);
                let (x2, y2) = map(path[k + 1]);
                let s = (0.5 * (bundle.grid[k] + bundle.grid[k + 1]) - t_min) / t_span;
                let _ = writeln!(
                    svg,
                    "<line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" stroke=\"{}\" stroke-width=\"0.8\"/>",
                    ramp_color(s)
                );
            }
        }
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_is_lossless() {
        for &x in &[0.1, -3.25e-7, 2.0960000000000001e-2, 1.0 / 3.0, 1e300] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back, x, "{s}");
        }
    }

    #[test]
    fn base_grid_selection_skips_refinement_points() {
        let bundle = TrajectoryBundle {
            grid: vec![0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0],
            paths: vec![vec![Complex64::new(0.0, 0.0); 7]],
            min_gap: f64::INFINITY,
            refinements: 2,
        };
        let indices = base_grid_indices(&bundle, 4);
        let ts: Vec<f64> = indices.iter().map(|&k| bundle.grid[k]).collect();
        assert_eq!(ts, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn svg_renders_segments() {
        let bundle = TrajectoryBundle {
            grid: vec![0.0, 1.0],
            paths: vec![vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 1.0)]],
            min_gap: f64::INFINITY,
            refinements: 0,
        };
        let svg = trajectory_svg(&[bundle]);
        assert!(svg.contains("<svg"));
        assert!(svg.contains("<line"));
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn ramp_endpoints() {
        assert_eq!(ramp_color(0.0), "#a6cee3");
        assert_eq!(ramp_color(1.0), "#08306b");
    }
}
