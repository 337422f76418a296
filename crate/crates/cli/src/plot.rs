//! `plot`: two SVG figures from a results CSV, written without a plotting library.
//!
//! * values against `n` on log-log axes,
//! * reciprocals `1/value` against `n` on linear axes, with a least-squares line per
//!   series when it has at least two points.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use infobound::stats::{linear_fit, LinearFit};

pub const VALUES_SVG: &str = "values_loglog.svg";
pub const RECIPROCALS_SVG: &str = "reciprocals.svg";
pub const FITS_CSV: &str = "reciprocal_fits.csv";

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 8] = [
    "#000000", "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf",
];

/// One plotted quantity: `gen_error` or a `bound_*` column.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReciprocalFit {
    pub series: String,
    pub points: usize,
    /// `None` with fewer than two points.
    pub fit: Option<LinearFit<f64>>,
}

/// Reads `gen_error` and every `bound_*` column. Bound values flagged invalid, and
/// values that are not positive and finite, are dropped.
pub fn read_series(path: &Path) -> Result<Vec<Series>> {
    let mut r =
        csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let headers = r.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let n_col = col("n").context("results CSV has no 'n' column")?;
    let gen_col = col("gen_error").context("results CSV has no 'gen_error' column")?;

    let mut columns: Vec<(String, usize, Option<usize>)> =
        vec![("gen_error".into(), gen_col, None)];
    for (i, h) in headers.iter().enumerate() {
        if let Some(kind) = h.strip_prefix("bound_") {
            columns.push((h.to_string(), i, col(&format!("valid_{kind}"))));
        }
    }
    let mut series: Vec<Series> = columns
        .iter()
        .map(|(name, _, _)| Series {
            name: name.clone(),
            points: Vec::new(),
        })
        .collect();

    for (line, rec) in r.records().enumerate() {
        let rec = rec.with_context(|| format!("{}: row {}", path.display(), line + 1))?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let n: f64 = field(n_col)
            .parse::<usize>()
            .with_context(|| format!("row {}: bad n '{}'", line + 1, field(n_col)))?
            as f64;
        for ((_, value_col, valid_col), s) in columns.iter().zip(series.iter_mut()) {
            let v: f64 = field(*value_col)
                .parse()
                .with_context(|| format!("row {}: bad value '{}'", line + 1, field(*value_col)))?;
            let valid = match valid_col {
                Some(c) => field(*c)
                    .parse::<bool>()
                    .with_context(|| format!("row {}: bad flag '{}'", line + 1, field(*c)))?,
                None => true,
            };
            if valid && v > 0.0 && v.is_finite() {
                s.points.push((n, v));
            }
        }
    }
    Ok(series)
}

pub fn reciprocal_fits(series: &[Series]) -> Vec<ReciprocalFit> {
    series
        .iter()
        .map(|s| {
            let xs: Vec<f64> = s.points.iter().map(|p| p.0).collect();
            let ys: Vec<f64> = s.points.iter().map(|p| 1.0 / p.1).collect();
            ReciprocalFit {
                series: s.name.clone(),
                points: xs.len(),
                fit: linear_fit(&xs, &ys).ok(),
            }
        })
        .collect()
}

/// Writes both figures and the fit table into `out_dir`.
pub fn plot(csv_path: &Path, out_dir: &Path) -> Result<Vec<ReciprocalFit>> {
    let series = read_series(csv_path)?;
    if series.iter().all(|s| s.points.is_empty()) {
        bail!("{}: no plottable rows", csv_path.display());
    }
    std::fs::create_dir_all(out_dir)?;

    let values = render(
        "Generalization error and bounds",
        "ln n",
        "ln value",
        &series
            .iter()
            .map(|s| Series {
                name: s.name.clone(),
                points: s.points.iter().map(|&(n, v)| (n.ln(), v.ln())).collect(),
            })
            .collect::<Vec<_>>(),
        &[],
    );
    std::fs::write(out_dir.join(VALUES_SVG), values)?;

    let recip: Vec<Series> = series
        .iter()
        .map(|s| Series {
            name: s.name.clone(),
            points: s.points.iter().map(|&(n, v)| (n, 1.0 / v)).collect(),
        })
        .collect();
    let fits = reciprocal_fits(&series);
    let lines: Vec<Option<LinearFit<f64>>> = fits.iter().map(|f| f.fit).collect();
    std::fs::write(
        out_dir.join(RECIPROCALS_SVG),
        render("Reciprocals", "n", "1 / value", &recip, &lines),
    )?;

    let mut w = csv::Writer::from_path(out_dir.join(FITS_CSV))?;
    w.write_record(["series", "points", "slope", "intercept", "r_squared"])?;
    for f in &fits {
        let (slope, intercept, r2) = match f.fit {
            Some(l) => (
                l.slope.to_string(),
                l.intercept.to_string(),
                l.r_squared.to_string(),
            ),
            None => (String::new(), String::new(), String::new()),
        };
        w.write_record([f.series.clone(), f.points.to_string(), slope, intercept, r2])?;
    }
    w.flush()?;
    Ok(fits)
}

/// About five round tick positions covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= 6.0)
        .unwrap_or(10.0 * mag);
    let start = (lo / step).ceil() as i64;
    let end = (hi / step).floor() as i64;
    (start..=end).map(|k| k as f64 * step).collect()
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = if hi > lo {
        0.05 * (hi - lo)
    } else {
        lo.abs().max(1.0) * 0.1
    };
    (lo - pad, hi + pad)
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn render(
    title: &str,
    xlabel: &str,
    ylabel: &str,
    series: &[Series],
    fits: &[Option<LinearFit<f64>>],
) -> String {
    let all = || series.iter().flat_map(|s| s.points.iter());
    let (x0, x1) = range(all().map(|p| p.0));
    let (y0, y1) = range(all().map(|p| p.1));
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="15">{title}</text>"#,
        LEFT + pw / 2.0
    );
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for t in ticks(x0, x1) {
        let x = sx(t);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="black"/><text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            TOP + ph,
            TOP + ph + 5.0,
            TOP + ph + 18.0,
            fmt_tick(t)
        );
    }
    for t in ticks(y0, y1) {
        let y = sy(t);
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{y:.1}" x2="{LEFT}" y2="{y:.1}" stroke="black"/><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0,
            fmt_tick(t)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{xlabel}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.1}" text-anchor="middle" transform="rotate(-90 20 {:.1})">{ylabel}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );

    for (i, ser) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        if ser.points.len() > 1 {
            let path: Vec<String> = ser
                .points
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                path.join(" ")
            );
        }
        for &(x, y) in &ser.points {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                sx(x),
                sy(y)
            );
        }
        if let Some(Some(fit)) = fits.get(i) {
            let (a, b) = (
                fit.intercept + fit.slope * x0,
                fit.intercept + fit.slope * x1,
            );
            let _ = writeln!(
                s,
                r#"<line class="fit" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-dasharray="5,4"/>"#,
                sx(x0),
                sy(a).clamp(TOP, TOP + ph),
                sx(x1),
                sy(b).clamp(TOP, TOP + ph)
            );
        }
        let ly = TOP + 10.0 + 18.0 * i as f64;
        let lx = LEFT + pw + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            ser.name
        );
    }
    s.push_str("</svg>\n");
    s
}
