//! Static SVG scatter plots with a least-squares line.

use crate::HarnessError;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

const W: f64 = 480.0;
const H: f64 = 360.0;
const MARGIN: f64 = 56.0;

fn read_columns(csv_path: &Path, x_col: &str, y_col: &str) -> Result<Vec<(f64, f64)>, HarnessError> {
    let mut rdr = csv::Reader::from_path(csv_path).map_err(|e| HarnessError::Input(format!("{}: {e}", csv_path.display())))?;
    let headers = rdr.headers().map_err(|e| HarnessError::Input(e.to_string()))?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| HarnessError::Input(format!("column `{name}` not found in {}", csv_path.display())))
    };
    let (xi, yi) = (find(x_col)?, find(y_col)?);
    let mut pts = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| HarnessError::Input(e.to_string()))?;
        let parse = |i: usize| {
            rec.get(i)
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(|| HarnessError::Input(format!("non-numeric value in column {}", headers.get(i).unwrap_or("?"))))
        };
        pts.push((parse(xi)?, parse(yi)?));
    }
    Ok(pts)
}

/// Least squares slope and intercept; `None` when x has no spread.
pub fn ols(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= 1e-24 * (1.0 + mx * mx) {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Writes `<csv stem>.svg` next to the CSV and returns its path.
pub fn emit_plot(csv_path: &Path, x_col: &str, y_col: &str, log_log: bool) -> Result<PathBuf, HarnessError> {
    let raw = read_columns(csv_path, x_col, y_col)?;
    let mut warnings = Vec::new();
    let pts: Vec<(f64, f64)> = if log_log {
        let kept: Vec<(f64, f64)> = raw.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
        if kept.len() < raw.len() {
            warnings.push(format!("{} nonpositive points left out of the log-log plot", raw.len() - kept.len()));
        }
        kept
    } else {
        raw.iter().filter(|(x, y)| x.is_finite() && y.is_finite()).cloned().collect()
    };
    let fit = ols(&pts);
    if fit.is_none() {
        warnings.push("degenerate fit: fewer than two distinct x values".to_string());
    }
    let (xmin, xmax) = span(pts.iter().map(|p| p.0));
    let (ymin, ymax) = span(pts.iter().map(|p| p.1));
    let sx = |x: f64| MARGIN + (x - xmin) / (xmax - xmin) * (W - 2.0 * MARGIN);
    let sy = |y: f64| H - MARGIN - (y - ymin) / (ymax - ymin) * (H - 2.0 * MARGIN);
    let (lx, ly) = if log_log { (format!("ln {x_col}"), format!("ln {y_col}")) } else { (x_col.to_string(), y_col.to_string()) };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{:.2} {:.2} L{:.2} {:.2} L{:.2} {:.2}" fill="none" stroke="black"/>"#,
        MARGIN,
        MARGIN,
        MARGIN,
        H - MARGIN,
        W - MARGIN,
        H - MARGIN
    );
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, W / 2.0, H - 16.0, esc(&lx));
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        esc(&ly)
    );
    if !pts.is_empty() {
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{:.3}</text>"#, MARGIN, H - MARGIN + 16.0, xmin);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{:.3}</text>"#, W - MARGIN, H - MARGIN + 16.0, xmax);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{:.3}</text>"#, MARGIN - 4.0, H - MARGIN, ymin);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{:.3}</text>"#, MARGIN - 4.0, MARGIN + 4.0, ymax);
    }
    for (x, y) in &pts {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"/>"#, sx(*x), sy(*y));
    }
    if let Some((m, b)) = fit {
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="firebrick"/>"#,
            sx(xmin),
            sy(m * xmin + b),
            sx(xmax),
            sy(m * xmax + b)
        );
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" fill="firebrick">slope {:.2}</text>"#, MARGIN + 8.0, MARGIN - 12.0, m);
    }
    for (i, w) in warnings.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" fill="darkorange">warning: {}</text>"#,
            MARGIN + 8.0,
            MARGIN + 12.0 + 14.0 * i as f64,
            esc(w)
        );
    }
    s.push_str("</svg>\n");
    let out = csv_path.with_extension("svg");
    std::fs::write(&out, s).map_err(|e| HarnessError::Io(format!("{}: {e}", out.display())))?;
    Ok(out)
}

/// Data range padded to a nonzero width.
fn span(it: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = it.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}
