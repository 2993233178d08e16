//! Files written for a run: CSV tables, the JSON report and SVG plots.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::run::{RunOutput, Table};

/// Full round-trip precision: 17 significant digits.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn csv(table: &Table) -> String {
    let mut out = table.header.join(",");
    out.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(|v| format_value(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// A line plot of `ys` against `xs`.
pub fn svg(title: &str, x_label: &str, xs: &[f64], ys: &[f64]) -> String {
    let (w, h, pad) = (640.0, 400.0, 50.0);
    let finite = |v: &&f64| v.is_finite();
    let range = |v: &[f64]| {
        let lo = v.iter().filter(finite).copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().filter(finite).copied().fold(f64::NEG_INFINITY, f64::max);
        if !lo.is_finite() {
            (0.0, 1.0)
        } else if hi > lo {
            (lo, hi)
        } else {
            (lo - 0.5, lo + 0.5)
        }
    };
    let (x0, x1) = range(xs);
    let (y0, y1) = range(ys);
    let px = |x: f64| pad + (x - x0) / (x1 - x0) * (w - 2.0 * pad);
    let py = |y: f64| h - pad - (y - y0) / (y1 - y0) * (h - 2.0 * pad);
    let mut points = String::new();
    for (x, y) in xs.iter().zip(ys).filter(|(x, y)| x.is_finite() && y.is_finite()) {
        let _ = write!(points, "{:.2},{:.2} ", px(*x), py(*y));
    }
    format!(
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n",
            "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
            "<text x=\"{cx}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">{title}</text>\n",
            "<rect x=\"{pad}\" y=\"{pad}\" width=\"{pw}\" height=\"{ph}\" fill=\"none\" stroke=\"#888\"/>\n",
            "<polyline fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"1.5\" points=\"{points}\"/>\n",
            "<text x=\"{pad}\" y=\"{by}\" font-family=\"sans-serif\" font-size=\"11\">{x0:.4}</text>\n",
            "<text x=\"{rx}\" y=\"{by}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">{x1:.4} {x_label}</text>\n",
            "<text x=\"4\" y=\"{ty}\" font-family=\"sans-serif\" font-size=\"11\">{y1:.4e}</text>\n",
            "<text x=\"4\" y=\"{ly}\" font-family=\"sans-serif\" font-size=\"11\">{y0:.4e}</text>\n",
            "</svg>\n"
        ),
        w = w,
        h = h,
        cx = w / 2.0,
        pad = pad,
        pw = w - 2.0 * pad,
        ph = h - 2.0 * pad,
        points = points.trim_end(),
        by = h - pad + 16.0,
        rx = w - pad,
        ty = pad - 4.0,
        ly = h - pad - 4.0,
        title = title,
        x_label = x_label,
        x0 = x0,
        x1 = x1,
        y0 = y0,
        y1 = y1,
    )
}

/// Writes every table, `report.json` and, when asked, one SVG per column.
pub fn write_run(dir: &Path, out: &RunOutput, plots: bool) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for table in &out.tables {
        let path = dir.join(&table.file);
        fs::write(&path, csv(table))?;
        written.push(path);
        if plots {
            let xs: Vec<f64> = table.rows.iter().map(|r| r[0]).collect();
            for (j, name) in table.header.iter().enumerate().skip(1) {
                let ys: Vec<f64> = table.rows.iter().map(|r| r[j]).collect();
                let path = dir.join(format!("{name}.svg"));
                fs::write(&path, svg(name, &table.header[0], &xs, &ys))?;
                written.push(path);
            }
        }
    }
    let path = dir.join("report.json");
    let mut text = serde_json::to_string_pretty(&out.report).expect("reports serialize");
    text.push('\n');
    fs::write(&path, text)?;
    written.push(path);
    Ok(written)
}
