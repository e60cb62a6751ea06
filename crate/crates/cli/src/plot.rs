//! Time-series CSV export and minimal SVG line plots.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nlslab::harness::{EstimateReport, Series};

use crate::output::write_atomic;

/// `report.json` files under `dir`: the directory itself and one level of
/// subdirectories, sorted by path.
pub fn find_reports(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut found = Vec::new();
    let direct = dir.join("report.json");
    if direct.is_file() {
        found.push(direct);
    }
    let mut stack = vec![dir.to_path_buf()];
    if dir.join("runs").is_dir() {
        stack.push(dir.join("runs"));
    }
    for d in stack {
        for entry in fs::read_dir(&d)? {
            let p = entry?.path().join("report.json");
            if p.is_file() {
                found.push(p);
            }
        }
    }
    found.sort();
    found.dedup();
    Ok(found)
}

fn run_name(report_path: &Path, root: &Path) -> String {
    let parent = report_path.parent().unwrap_or(root);
    let rel = parent.strip_prefix(root).unwrap_or(parent);
    let s = rel.to_string_lossy().replace(['/', '\\'], "_");
    if s.is_empty() {
        "run".to_string()
    } else {
        s
    }
}

/// Conservation series joined with the action column (if any) and a relative
/// energy drift column.
pub fn timeseries(report: &EstimateReport) -> Option<Series> {
    let cons = report.series.get("conservation")?;
    let mut columns = cons.columns.clone();
    columns.push("energy_drift".into());
    let action = report.series.get("action").and_then(|s| s.column("M"));
    if action.is_some() {
        columns.push("M_a".into());
    }
    let e = cons.column("energy")?;
    let e0 = e[0];
    let base = if e0 != 0.0 { e0.abs() } else { 1.0 };
    let rows = cons
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.push((e[i] - e0).abs() / base);
            if let Some(a) = &action {
                row.push(a.get(i).copied().unwrap_or(f64::NAN));
            }
            row
        })
        .collect();
    Some(Series { columns, rows })
}

/// Line plot of every column against the first.
pub fn svg(series: &Series, title: &str) -> String {
    let (w, h, pad) = (640.0, 400.0, 50.0);
    let xs: Vec<f64> = series.rows.iter().map(|r| r[0]).collect();
    let (x0, x1) = bounds(xs.iter().copied());
    let colours = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{pad}" y="20" font-family="sans-serif" font-size="14">{title}</text>"#);
    let _ = writeln!(
        out,
        r#"<rect x="{pad}" y="{pad}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - 2.0 * pad,
        h - 2.0 * pad
    );
    for j in 1..series.columns.len() {
        let ys: Vec<f64> = series.rows.iter().map(|r| r[j]).collect();
        let (y0, y1) = bounds(ys.iter().copied());
        let pts: Vec<String> = xs
            .iter()
            .zip(&ys)
            .filter(|(_, y)| y.is_finite())
            .map(|(x, y)| {
                let px = pad + (x - x0) / (x1 - x0) * (w - 2.0 * pad);
                let py = h - pad - (y - y0) / (y1 - y0) * (h - 2.0 * pad);
                format!("{px:.2},{py:.2}")
            })
            .collect();
        let c = colours[(j - 1) % colours.len()];
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{c}" stroke-width="1.5" points="{}"/>"#,
            pts.join(" ")
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" fill="{c}">{} [{:.3e}, {:.3e}]</text>"#,
            pad + 5.0,
            pad + 14.0 * j as f64,
            series.columns[j],
            y0,
            y1
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{pad}" y="{}" font-family="sans-serif" font-size="11">{} from {x0:.3e} to {x1:.3e}</text>"#,
        h - pad / 3.0,
        series.columns[0]
    );
    out.push_str("</svg>\n");
    out
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= 0.0 {
        let d = if lo == 0.0 { 1.0 } else { lo.abs() * 0.5 };
        return (lo - d, hi + d);
    }
    (lo, hi)
}

/// Writes `<run>_timeseries.csv` and `<run>_<series>.csv` for every report, plus
/// `i_energy_increments.csv` pooling the (N, inc) pairs of i_energy runs.
/// Returns the files written.
pub fn export(root: &Path, reports: &[(PathBuf, EstimateReport)], out: &Path, with_svg: bool) -> std::io::Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let mut emit = |name: String, series: &Series, title: &str| -> std::io::Result<()> {
        let path = out.join(format!("{name}.csv"));
        write_atomic(&path, series.to_csv().as_bytes())?;
        written.push(path);
        if with_svg && series.columns.len() >= 2 && !series.rows.is_empty() {
            let path = out.join(format!("{name}.svg"));
            write_atomic(&path, svg(series, title).as_bytes())?;
            written.push(path);
        }
        Ok(())
    };
    let mut increments = Series::new(&["N", "inc", "log_N", "log_inc"]);
    for (path, report) in reports {
        let run = run_name(path, root);
        if let Some(ts) = timeseries(report) {
            emit(format!("{run}_timeseries"), &ts, &format!("{run} ({})", report.experiment))?;
        }
        for (key, series) in &report.series {
            emit(format!("{run}_{key}"), series, &format!("{run}: {key}"))?;
        }
        if let Some(inc) = report.series.get("increments") {
            for row in &inc.rows {
                increments.push(vec![row[0], row[1], row[0].ln(), row[1].ln()]);
            }
        }
    }
    if !increments.rows.is_empty() {
        increments.rows.sort_by(|a, b| a[0].total_cmp(&b[0]));
        emit("i_energy_increments".into(), &increments, "i_energy: inc(N)")?;
    }
    Ok(written)
}
