//! Check reports: CSV rows `check,sigma,quantity,value,tolerance,pass`, a text
//! summary and optional SVG line plots.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::Result;

/// One measured quantity.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub check: String,
    /// `σ` as printed, or `all` for rows comparing a whole sweep.
    pub sigma: String,
    pub quantity: String,
    pub value: f64,
    /// Threshold the value was compared against (NaN when informational).
    pub tolerance: f64,
    pub pass: bool,
}

/// Rows of one run, in insertion order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RegularityReport {
    rows: Vec<ReportRow>,
}

impl RegularityReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, check: &str, sigma: impl ToString, quantity: &str, value: f64, tolerance: f64, pass: bool) {
        self.rows.push(ReportRow {
            check: check.into(),
            sigma: sigma.to_string(),
            quantity: quantity.into(),
            value,
            tolerance,
            pass,
        });
    }

    /// Informational row; passes iff the value is finite.
    pub fn note(&mut self, check: &str, sigma: impl ToString, quantity: &str, value: f64) {
        self.push(check, sigma, quantity, value, f64::NAN, value.is_finite());
    }

    pub fn extend(&mut self, other: RegularityReport) {
        self.rows.extend(other.rows);
    }

    pub fn rows(&self) -> &[ReportRow] {
        &self.rows
    }

    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["check", "sigma", "quantity", "value", "tolerance", "pass"])?;
        for r in &self.rows {
            w.write_record([
                r.check.as_str(),
                r.sigma.as_str(),
                r.quantity.as_str(),
                &r.value.to_string(),
                &r.tolerance.to_string(),
                if r.pass { "true" } else { "false" },
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// One line per check with its pass count, then every failing row.
    pub fn summary(&self) -> String {
        let mut checks: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !checks.contains(&r.check.as_str()) {
                checks.push(&r.check);
            }
        }
        let mut out = String::new();
        for c in checks {
            let rows: Vec<&ReportRow> = self.rows.iter().filter(|r| r.check == c).collect();
            let ok = rows.iter().filter(|r| r.pass).count();
            let _ = writeln!(out, "{c:<20} {ok}/{} {}", rows.len(), if ok == rows.len() { "pass" } else { "FAIL" });
        }
        for r in self.failures() {
            let _ = writeln!(
                out,
                "  failed: {} sigma={} {} = {} (tolerance {})",
                r.check, r.sigma, r.quantity, r.value, r.tolerance
            );
        }
        out
    }
}

/// Line plot of `log10(y)` against the index for each named series.
pub fn write_decay_svg(path: &Path, title: &str, series: &[(String, Vec<f64>)]) -> Result<()> {
    let (w, h, pad) = (640.0, 400.0, 50.0);
    let logs: Vec<(String, Vec<f64>)> = series
        .iter()
        .map(|(n, v)| (n.clone(), v.iter().map(|x| if *x > 0.0 { x.log10() } else { f64::NAN }).collect()))
        .collect();
    let finite = logs.iter().flat_map(|(_, v)| v.iter().copied()).filter(|v| v.is_finite());
    let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let (lo, hi) = if lo.is_finite() && hi > lo { (lo, hi) } else { (lo.min(0.0) - 1.0, hi.max(0.0) + 1.0) };
    let len = logs.iter().map(|(_, v)| v.len()).max().unwrap_or(1).max(2);
    let sx = |i: usize| pad + (w - 2.0 * pad) * i as f64 / (len - 1) as f64;
    let sy = |v: f64| h - pad - (h - 2.0 * pad) * (v - lo) / (hi - lo);
    let colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"];
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#, w / 2.0, escape(title));
    let _ = writeln!(
        svg,
        r#"<path d="M{pad},{pad} L{pad},{} L{},{}" stroke="black" fill="none"/>"#,
        h - pad,
        w - pad,
        h - pad
    );
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">scale index k</text>"#, w / 2.0, h - 12.0);
    let _ = writeln!(
        svg,
        r#"<text x="14" y="{}" transform="rotate(-90 14 {})" text-anchor="middle">log10 M_k</text>"#,
        h / 2.0,
        h / 2.0
    );
    for (j, (name, vals)) in logs.iter().enumerate() {
        let color = colors[j % colors.len()];
        let pts: Vec<String> = vals
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_finite())
            .map(|(i, v)| format!("{:.2},{:.2}", sx(i), sy(*v)))
            .collect();
        if !pts.is_empty() {
            let _ = writeln!(
                svg,
                r#"<polyline points="{}" stroke="{color}" fill="none" stroke-width="1.5"/>"#,
                pts.join(" ")
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            w - pad - 120.0,
            pad + 16.0 * j as f64,
            escape(name)
        );
    }
    svg.push_str("</svg>\n");
    fs::write(path, svg)?;
    Ok(())
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
