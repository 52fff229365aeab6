//! Grayscale SVG heatmaps of `n x n` matrices.
//!
//! Values are clamped to `[0, 1]` and mapped linearly from white (0) to
//! black (1). Undefined cells are drawn in [`UNDEFINED_FILL`]. Each row is
//! run-length encoded: consecutive cells with the same fill share one rect.
//! The drawing always occupies an 800 x 800 viewport.

use std::fmt::Write;
use std::path::Path;

use super::write_artifact;
use crate::error::{Error, Result};

pub const UNDEFINED_FILL: &str = "#d62728";
const SIZE: f64 = 800.0;

fn fill(value: Option<f64>) -> String {
    match value {
        Some(v) if v.is_finite() => {
            let level = (255.0 * (1.0 - v.clamp(0.0, 1.0))).round() as u8;
            format!("#{level:02x}{level:02x}{level:02x}")
        }
        _ => UNDEFINED_FILL.to_string(),
    }
}

/// Renders a row-major `n x n` matrix.
pub fn render_heatmap(values: &[Option<f64>], n: usize) -> Result<String> {
    if n == 0 || values.len() != n * n {
        return Err(Error::DimensionMismatch(format!(
            "heatmap needs {} cells, got {}",
            n * n,
            values.len()
        )));
    }
    let cell = SIZE / n as f64;
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"800\" viewBox=\"0 0 800 800\" shape-rendering=\"crispEdges\">"
    );
    for row in 0..n {
        let fills: Vec<String> = values[row * n..(row + 1) * n].iter().map(|&v| fill(v)).collect();
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && fills[end] == fills[start] {
                end += 1;
            }
            let _ = writeln!(
                out,
                "<rect x=\"{:.4}\" y=\"{:.4}\" width=\"{:.4}\" height=\"{:.4}\" fill=\"{}\"/>",
                start as f64 * cell,
                row as f64 * cell,
                (end - start) as f64 * cell,
                cell,
                fills[start]
            );
            start = end;
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn emit_heatmap(values: &[Option<f64>], n: usize, path: &Path) -> Result<()> {
    write_artifact(path, &render_heatmap(values, n)?)
}
