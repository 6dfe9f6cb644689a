//! Deterministic CSV and SVG emission plus the run manifest.
//!
//! CSV grammar: optional `# key = value` comment prelude, then a header
//! row, then data rows; floats are written in scientific notation with 17
//! significant digits so re-runs are byte-identical. SVG plots are built as
//! plain strings with fixed formatting for the same reason.

use crate::error::{Error, Result};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// 17-significant-digit float formatting shared by all outputs.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Builds a CSV document: comment prelude, header, rows.
pub struct CsvDoc {
    text: String,
    columns: usize,
}

impl CsvDoc {
    pub fn new(comments: &[(&str, String)], header: &[&str]) -> CsvDoc {
        let mut text = String::new();
        for (k, v) in comments {
            let _ = writeln!(text, "# {k} = {v}");
        }
        let _ = writeln!(text, "{}", header.join(","));
        CsvDoc {
            text,
            columns: header.len(),
        }
    }

    pub fn row(&mut self, cells: &[String]) {
        debug_assert_eq!(cells.len(), self.columns);
        let _ = writeln!(self.text, "{}", cells.join(","));
    }

    pub fn row_f64(&mut self, values: &[f64]) {
        let cells: Vec<String> = values.iter().map(|&v| fmt_f64(v)).collect();
        self.row(&cells);
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

/// One labeled line of an SVG plot.
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

const PALETTE: [&str; 6] = [
    "#1b6ca8", "#c8401f", "#2e8540", "#7d3c98", "#b7950b", "#1f618d",
];

/// Self-contained SVG line plot with axes, tick labels and a legend.
/// Byte-deterministic for identical inputs; rejects empty or non-finite
/// series.
pub fn emit_plot(series: &[Series], title: &str, xlabel: &str, ylabel: &str) -> Result<String> {
    if series.is_empty() {
        return Err(Error::InvalidParameter("no series to plot".into()));
    }
    for s in series {
        if s.xs.is_empty() || s.xs.len() != s.ys.len() {
            return Err(Error::InvalidParameter(format!(
                "series '{}' is empty or ragged",
                s.label
            )));
        }
        if s.xs.iter().chain(s.ys.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "series '{}' contains non-finite values",
                s.label
            )));
        }
    }
    let (mut x_lo, mut x_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in series {
        for &x in &s.xs {
            x_lo = x_lo.min(x);
            x_hi = x_hi.max(x);
        }
        for &y in &s.ys {
            y_lo = y_lo.min(y);
            y_hi = y_hi.max(y);
        }
    }
    if x_hi == x_lo {
        x_hi = x_lo + 1.0;
    }
    if y_hi == y_lo {
        y_hi = y_lo + 1.0;
    }
    let (w, h) = (800.0, 520.0);
    let (ml, mr, mt, mb) = (80.0, 24.0, 44.0, 56.0);
    let px = |x: f64| ml + (x - x_lo) / (x_hi - x_lo) * (w - ml - mr);
    let py = |y: f64| h - mb - (y - y_lo) / (y_hi - y_lo) * (h - mt - mb);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="24" font-family="monospace" font-size="16" text-anchor="middle">{}</text>"#,
        w / 2.0,
        escape(title)
    );
    // Axes.
    let _ = writeln!(
        svg,
        r#"<line x1="{ml}" y1="{0}" x2="{1}" y2="{0}" stroke="black"/>"#,
        h - mb,
        w - mr
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{0}" stroke="black"/>"#,
        h - mb
    );
    // Ticks: 5 per axis.
    for i in 0..=4 {
        let fx = x_lo + (x_hi - x_lo) * i as f64 / 4.0;
        let fy = y_lo + (y_hi - y_lo) * i as f64 / 4.0;
        let tx = px(fx);
        let ty = py(fy);
        let _ = writeln!(
            svg,
            r#"<line x1="{tx:.2}" y1="{0}" x2="{tx:.2}" y2="{1}" stroke="black"/>"#,
            h - mb,
            h - mb + 5.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{tx:.2}" y="{0}" font-family="monospace" font-size="11" text-anchor="middle">{1}</text>"#,
            h - mb + 18.0,
            format_tick(fx)
        );
        let _ = writeln!(
            svg,
            r#"<line x1="{0}" y1="{ty:.2}" x2="{ml}" y2="{ty:.2}" stroke="black"/>"#,
            ml - 5.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{0}" y="{1:.2}" font-family="monospace" font-size="11" text-anchor="end">{2}</text>"#,
            ml - 8.0,
            ty + 4.0,
            format_tick(fy)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" font-family="monospace" font-size="13" text-anchor="middle">{}</text>"#,
        (ml + w - mr) / 2.0,
        h - 12.0,
        escape(xlabel)
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{:.1}" font-family="monospace" font-size="13" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
        (mt + h - mb) / 2.0,
        (mt + h - mb) / 2.0,
        escape(ylabel)
    );
    // Polylines.
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut points = String::new();
        for (&x, &y) in s.xs.iter().zip(&s.ys) {
            let _ = write!(points, "{:.2},{:.2} ", px(x), py(y));
        }
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.trim_end()
        );
    }
    // Legend.
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let y = mt + 14.0 + 18.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{0}" y1="{y:.1}" x2="{1}" y2="{y:.1}" stroke="{color}" stroke-width="2"/>"#,
            w - mr - 150.0,
            w - mr - 120.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{0}" y="{y:.1}" font-family="monospace" font-size="12" dominant-baseline="middle">{1}</text>"#,
            w - mr - 112.0,
            escape(&s.label)
        );
    }
    let _ = writeln!(svg, "</svg>");
    Ok(svg)
}

fn format_tick(v: f64) -> String {
    format!("{v:.3e}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Hex SHA-256 of a byte string.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        let _ = write!(out, "{b:02x}");
    }
    out
}

/// One PASS/FAIL row of the manifest.
#[derive(Debug, Clone)]
pub struct CheckRow {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl CheckRow {
    pub fn new(name: &str, pass: bool, detail: String) -> Self {
        CheckRow {
            name: name.to_string(),
            pass,
            detail,
        }
    }
}

/// Collects output files and checks, then writes `manifest.txt`.
pub struct RunManifest {
    pub experiment: String,
    pub seed: u64,
    pub config_text: String,
    pub checks: Vec<CheckRow>,
    pub files: Vec<(PathBuf, String)>,
    pub started: std::time::Instant,
}

impl RunManifest {
    pub fn new(experiment: &str, seed: u64, config_text: &str) -> Self {
        RunManifest {
            experiment: experiment.to_string(),
            seed,
            config_text: config_text.to_string(),
            checks: Vec::new(),
            files: Vec::new(),
            started: std::time::Instant::now(),
        }
    }

    /// Writes a file and records its digest.
    pub fn write_file(&mut self, dir: &Path, name: &str, contents: &str) -> std::io::Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, contents)?;
        self.files.push((PathBuf::from(name), sha256_hex(contents.as_bytes())));
        Ok(())
    }

    pub fn check(&mut self, row: CheckRow) {
        self.checks.push(row);
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# reglab run manifest");
        let _ = writeln!(out, "experiment = {}", self.experiment);
        let _ = writeln!(out, "version = {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(
            out,
            "duration_seconds = {:.3}",
            self.started.elapsed().as_secs_f64()
        );
        let _ = writeln!(
            out,
            "config_sha256 = {}",
            sha256_hex(self.config_text.as_bytes())
        );
        let _ = writeln!(out, "\n[checks]");
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{} = {} ({})",
                c.name,
                if c.pass { "PASS" } else { "FAIL" },
                c.detail
            );
        }
        let _ = writeln!(out, "\n[files]");
        for (path, digest) in &self.files {
            let _ = writeln!(out, "{} sha256={}", path.display(), digest);
        }
        out
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::write(dir.join("manifest.txt"), self.render())
    }
}
