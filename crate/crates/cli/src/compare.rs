use crate::results::{sci, Format, ResultTable, Row};
use anyhow::{bail, Result};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparePoint {
    pub t: f64,
    pub observable: String,
    pub a_re: f64,
    pub a_im: f64,
    pub b_re: f64,
    pub b_im: f64,
    pub diff_re: f64,
    pub diff_im: f64,
    pub abs_diff: f64,
    /// Larger of the real and imaginary z-scores, over the components that
    /// carry a nonzero combined standard error.
    pub z: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub engine_a: String,
    pub engine_b: String,
    pub points: Vec<ComparePoint>,
    pub max_abs: f64,
    pub max_z: Option<f64>,
}

/// Rows used for comparison: everything except the ratio estimator lines.
fn primary(t: &ResultTable) -> Vec<&Row> {
    t.rows.iter().filter(|r| !r.engine.ends_with("-ratio")).collect()
}

fn engine_of(rows: &[&Row]) -> String {
    rows.first().map(|r| r.engine.clone()).unwrap_or_default()
}

fn same_time(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

fn component_z(diff: f64, sa: f64, sb: f64) -> Option<f64> {
    let s = (sa * sa + sb * sb).sqrt();
    (s > 0.0).then(|| diff.abs() / s)
}

pub fn compare_report(a: &ResultTable, b: &ResultTable) -> Result<CompareReport> {
    let (ra, rb) = (primary(a), primary(b));
    if ra.len() != rb.len() {
        bail!("grid mismatch: {} points against {}", ra.len(), rb.len());
    }
    let mut points = Vec::with_capacity(ra.len());
    for (x, y) in ra.iter().zip(&rb) {
        if !same_time(x.t, y.t) || x.observable != y.observable {
            bail!(
                "grid mismatch: ({}, {}) against ({}, {})",
                sci(x.t),
                x.observable,
                sci(y.t),
                y.observable
            );
        }
        let (dr, di) = (x.mean_re - y.mean_re, x.mean_im - y.mean_im);
        let z = match (component_z(dr, x.se_re, y.se_re), component_z(di, x.se_im, y.se_im)) {
            (Some(p), Some(q)) => Some(p.max(q)),
            (p, q) => p.or(q),
        };
        points.push(ComparePoint {
            t: x.t,
            observable: x.observable.clone(),
            a_re: x.mean_re,
            a_im: x.mean_im,
            b_re: y.mean_re,
            b_im: y.mean_im,
            diff_re: dr,
            diff_im: di,
            abs_diff: dr.hypot(di),
            z,
        });
    }
    let max_abs = points.iter().map(|p| p.abs_diff).fold(0.0, f64::max);
    let max_z = points.iter().filter_map(|p| p.z).reduce(f64::max);
    Ok(CompareReport {
        engine_a: engine_of(&ra),
        engine_b: engine_of(&rb),
        points,
        max_abs,
        max_z,
    })
}

impl CompareReport {
    pub fn render(&self, format: Format) -> Result<String> {
        if format == Format::Json {
            return Ok(serde_json::to_string_pretty(self)? + "\n");
        }
        let mut s = String::new();
        let _ = writeln!(s, "# engine_a: {}", self.engine_a);
        let _ = writeln!(s, "# engine_b: {}", self.engine_b);
        let _ = writeln!(s, "# max_abs: {}", sci(self.max_abs));
        let _ = writeln!(s, "# max_z: {}", self.max_z.map(sci).unwrap_or_else(|| "none".into()));
        let _ = writeln!(s, "t,observable,a_re,a_im,b_re,b_im,diff_re,diff_im,abs_diff,z");
        for p in &self.points {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{}",
                sci(p.t),
                p.observable,
                sci(p.a_re),
                sci(p.a_im),
                sci(p.b_re),
                sci(p.b_im),
                sci(p.diff_re),
                sci(p.diff_im),
                sci(p.abs_diff),
                p.z.map(sci).unwrap_or_default()
            );
        }
        Ok(s)
    }

    pub fn summary(&self) -> String {
        match self.max_z {
            Some(z) => format!("{} points, max |diff| {:.3e}, max |z| {:.2}", self.points.len(), self.max_abs, z),
            None => format!("{} points, max |diff| {:.3e}", self.points.len(), self.max_abs),
        }
    }
}
