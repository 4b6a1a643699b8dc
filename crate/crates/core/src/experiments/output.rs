//! CSV and SVG writers for rate results.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use super::runner::{RateResult, RateRow};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "N,m,lambda,metric,mean,stderr,trials";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Svg,
}

/// Shortest decimal that parses back to the same `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:?}")
}

/// The rows as CSV text (LF line endings).
pub fn to_csv(result: &RateResult) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in result.rows() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.n,
            r.m,
            format_float(r.lambda),
            r.metric,
            format_float(r.mean),
            format_float(r.stderr),
            r.trials
        );
    }
    out
}

/// Slope fits as CSV: `metric,series,slope,slope_stderr,intercept,points`.
pub fn slopes_csv(result: &RateResult) -> String {
    let mut out = String::from("metric,series,slope,slope_stderr,intercept,points\n");
    for f in &result.fits {
        match &f.fit {
            Some(fit) => {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    f.metric,
                    f.series,
                    format_float(fit.slope),
                    format_float(fit.stderr),
                    format_float(fit.intercept),
                    fit.points
                );
            }
            None => {
                let _ = writeln!(out, "{},{},,,,0", f.metric, f.series);
            }
        }
    }
    out
}

/// Write `result` to `path` in the given format.
pub fn emit(result: &RateResult, format: OutputFormat, path: impl AsRef<Path>) -> Result<()> {
    let text = match format {
        OutputFormat::Csv => to_csv(result),
        OutputFormat::Svg => to_svg(result),
    };
    let mut file = std::fs::File::create(path.as_ref())?;
    file.write_all(text.as_bytes())?;
    Ok(())
}

/// Read rows written by [`emit`].
pub fn parse_csv(path: impl AsRef<Path>) -> Result<Vec<RateRow>> {
    let mut reader = csv::ReaderBuilder::new().from_path(path.as_ref())?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != CSV_HEADER {
        return Err(Error::arg(format!("unexpected header {:?}", header.join(","))));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let field = |i: usize| record.get(i).unwrap_or_default();
        let num = |i: usize| -> Result<f64> {
            field(i)
                .parse()
                .map_err(|_| Error::arg(format!("bad number {:?} in column {i}", field(i))))
        };
        let int = |i: usize| -> Result<usize> {
            field(i)
                .parse()
                .map_err(|_| Error::arg(format!("bad integer {:?} in column {i}", field(i))))
        };
        rows.push(RateRow {
            n: int(0)?,
            m: int(1)?,
            lambda: num(2)?,
            metric: field(3).to_string(),
            mean: num(4)?,
            stderr: num(5)?,
            trials: int(6)?,
        });
    }
    Ok(rows)
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

/// Log-log scatter of mean vs `N` with one fitted line per metric and series.
pub fn to_svg(result: &RateResult) -> String {
    let (w, h) = (720.0, 480.0);
    let (left, right, top, bottom) = (70.0, 220.0, 20.0, 50.0);
    let points: Vec<(f64, f64)> = result
        .rows()
        .filter(|r| r.mean > 0.0 && r.mean.is_finite())
        .map(|r| ((r.n as f64).log10(), r.mean.log10()))
        .collect();
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    if points.is_empty() {
        let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">no positive data</text>"#, w / 2.0, h / 2.0);
        svg.push_str("</svg>\n");
        return svg;
    }
    let pad = |lo: f64, hi: f64| if hi - lo < 1e-9 { (lo - 0.5, hi + 0.5) } else { (lo - 0.05 * (hi - lo), hi + 0.05 * (hi - lo)) };
    let (x0, x1) = pad(
        points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min),
        points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max),
    );
    let (y0, y1) = pad(
        points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min),
        points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max),
    );
    let px = |x: f64| left + (x - x0) / (x1 - x0) * (w - left - right);
    let py = |y: f64| h - bottom - (y - y0) / (y1 - y0) * (h - top - bottom);

    let _ = writeln!(
        svg,
        r#"<rect x="{left}" y="{top}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - left - right,
        h - top - bottom
    );
    for (x, label) in result_ns(result).into_iter().map(|n| ((n as f64).log10(), n.to_string())) {
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{label}</text>"#,
            px(x),
            h - bottom + 18.0
        );
    }
    for e in (y0.ceil() as i32)..=(y1.floor() as i32) {
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">1e{e}</text>"#,
            left - 6.0,
            py(e as f64) + 4.0
        );
    }
    let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">N</text>"#, left + (w - left - right) / 2.0, h - 10.0);

    for (i, fit) in result.fits.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let series: Vec<&RateRow> = result
            .cells
            .iter()
            .filter(|c| c.series == fit.series && c.row.metric == fit.metric && c.row.mean > 0.0)
            .map(|c| &c.row)
            .collect();
        if series.is_empty() {
            continue;
        }
        for r in &series {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.1}" cy="{:.1}" r="3.5" fill="{color}"/>"#,
                px((r.n as f64).log10()),
                py(r.mean.log10())
            );
        }
        let mut label = format!("{} {}", fit.metric, fit.series);
        if let Some(f) = &fit.fit {
            let (a, b) = (series[0].n as f64, series[series.len() - 1].n as f64);
            // fit is in natural logs; convert endpoints to log10 for plotting
            let y = |n: f64| (f.intercept + f.slope * n.ln()) / std::f64::consts::LN_10;
            let _ = writeln!(
                svg,
                r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{color}" stroke-width="1.5"/>"#,
                px(a.log10()),
                py(y(a)),
                px(b.log10()),
                py(y(b))
            );
            let _ = write!(label, " slope {:.3}", f.slope);
        }
        let ly = top + 14.0 + 16.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<rect x="{:.1}" y="{:.1}" width="10" height="10" fill="{color}"/><text x="{:.1}" y="{:.1}" font-size="10">{label}</text>"#,
            w - right + 10.0,
            ly - 9.0,
            w - right + 24.0,
            ly
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn result_ns(result: &RateResult) -> Vec<usize> {
    let mut ns: Vec<usize> = result.rows().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    ns
}
