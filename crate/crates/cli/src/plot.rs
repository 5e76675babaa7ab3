//! Dependency-free log-log SVG of a sweep.csv.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};

use vpfp_core::diagnostics::{beta, fit_rate};

const HEADER: [&str; 6] = [
    "epsilon",
    "err_total",
    "err_E1",
    "err_E2",
    "err_E3",
    "field_disc_at_T",
];
const COLORS: [&str; 5] = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e"];

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 70.0;

struct Series {
    name: &'static str,
    points: Vec<(f64, f64)>,
}

fn parse(text: &str) -> Result<Vec<Series>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = match lines.next() {
        Some(h) => h.split(',').map(str::trim).collect(),
        None => bail!("empty sweep CSV"),
    };
    if header != HEADER {
        bail!("unexpected sweep CSV header {:?}", header.join(","));
    }
    let mut series: Vec<Series> = HEADER[1..]
        .iter()
        .map(|name| Series {
            name,
            points: Vec::new(),
        })
        .collect();
    let mut rows = 0;
    for (i, line) in lines.enumerate() {
        let values = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .with_context(|| format!("row {}: not a number", i + 2))?;
        if values.len() != HEADER.len() {
            bail!(
                "row {}: expected {} columns, got {}",
                i + 2,
                HEADER.len(),
                values.len()
            );
        }
        let eps = values[0];
        if !(eps.is_finite() && eps > 0.0) {
            bail!("row {}: epsilon must be positive", i + 2);
        }
        for (s, v) in series.iter_mut().zip(&values[1..]) {
            if v.is_finite() && *v > 0.0 {
                s.points.push((eps, *v));
            }
        }
        rows += 1;
    }
    if rows == 0 {
        bail!("sweep CSV has no data rows");
    }
    Ok(series)
}

/// Decade ticks covering `[lo, hi]`, with 2 and 5 subdivisions when the
/// range spans at most two decades.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let (a, b) = (lo.log10().floor() as i32, hi.log10().ceil() as i32);
    let mantissas: &[f64] = if b - a <= 2 { &[1.0, 2.0, 5.0] } else { &[1.0] };
    let mut out = Vec::new();
    for e in a..=b {
        for m in mantissas {
            let t = m * 10f64.powi(e);
            if t >= lo * (1.0 - 1e-12) && t <= hi * (1.0 + 1e-12) {
                out.push(t);
            }
        }
    }
    out
}

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, 0.0f64), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    let (lo, hi) = if lo == hi {
        (lo / 2.0, hi * 2.0)
    } else {
        (lo, hi)
    };
    (lo / 1.25, hi * 1.25)
}

pub fn render(text: &str) -> Result<String> {
    let series = parse(text)?;
    let all: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|s| s.points.iter().copied())
        .collect();
    if all.is_empty() {
        bail!("sweep CSV has no positive errors to plot");
    }
    let (xlo, xhi) = padded_range(all.iter().map(|p| p.0));
    let (ylo, yhi) = padded_range(all.iter().map(|p| p.1));
    let sx = |x: f64| MARGIN + (x.ln() - xlo.ln()) / (xhi.ln() - xlo.ln()) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| {
        HEIGHT - MARGIN - (y.ln() - ylo.ln()) / (yhi.ln() - ylo.ln()) * (HEIGHT - 2.0 * MARGIN)
    };

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    )?;
    writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#)?;
    let (x0, x1, y0, y1) = (MARGIN, WIDTH - MARGIN, HEIGHT - MARGIN, MARGIN);
    writeln!(
        svg,
        r#"<g id="axes" stroke="black"><line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}"/><line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/></g>"#
    )?;
    for t in ticks(xlo, xhi) {
        let x = sx(t);
        writeln!(
            svg,
            r#"<g class="xtick"><line x1="{x:.2}" y1="{y0}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{t:e}</text></g>"#,
            y0 + 5.0,
            y0 + 18.0
        )?;
    }
    for t in ticks(ylo, yhi) {
        let y = sy(t);
        writeln!(
            svg,
            r#"<g class="ytick"><line x1="{:.2}" y1="{y:.2}" x2="{x0}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{t:e}</text></g>"#,
            x0 - 5.0,
            x0 - 8.0,
            y + 4.0
        )?;
    }
    writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">epsilon</text>"#,
        WIDTH / 2.0,
        HEIGHT - 20.0
    )?;
    writeln!(
        svg,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">error</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    )?;

    for (i, (s, color)) in series.iter().zip(COLORS).enumerate() {
        writeln!(
            svg,
            r#"<g class="series" id="{}" fill="{color}" stroke="{color}">"#,
            s.name
        )?;
        for (x, y) in &s.points {
            writeln!(
                svg,
                r#"<circle class="marker" cx="{:.2}" cy="{:.2}" r="4"/>"#,
                sx(*x),
                sy(*y)
            )?;
        }
        if let Ok(fit) = fit_rate(&s.points) {
            let line = |x: f64| (fit.intercept + fit.slope * x.ln()).exp();
            let (a, b) = (
                s.points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min),
                s.points.iter().map(|p| p.0).fold(0.0, f64::max),
            );
            writeln!(
                svg,
                r#"<line class="fit" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke-width="1.5"/>"#,
                sx(a),
                sy(line(a)),
                sx(b),
                sy(line(b))
            )?;
        }
        let label = match fit_rate(&s.points) {
            Ok(fit) => format!("{} (slope {:.2})", s.name, fit.slope),
            Err(_) => s.name.to_string(),
        };
        writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" stroke="none">{label}</text></g>"#,
            x0 + 10.0,
            y1 + 14.0 * (i as f64 + 1.0)
        )?;
    }

    // Reference slope β through the geometric centre of the total error.
    let reference = &series[0].points;
    let reference = if reference.is_empty() {
        &all
    } else {
        reference
    };
    let n = reference.len() as f64;
    let cx = (reference.iter().map(|p| p.0.ln()).sum::<f64>() / n).exp();
    let cy = (reference.iter().map(|p| p.1.ln()).sum::<f64>() / n).exp();
    let rate = beta(2.0, 1);
    let (a, b) = (xlo * 1.1, xhi / 1.1);
    let r = |x: f64| cy * (x / cx).powf(rate);
    writeln!(
        svg,
        r##"<line class="reference" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#555" stroke-dasharray="6 4"/>"##,
        sx(a),
        sy(r(a)),
        sx(b),
        sy(r(b))
    )?;
    writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}">reference slope {rate}</text>"#,
        x1 - 130.0,
        y0 - 10.0
    )?;
    writeln!(svg, "</svg>")?;
    Ok(svg)
}

pub fn emit_plot(csv: &Path, out: &Path) -> Result<()> {
    let text = fs::read_to_string(csv).with_context(|| format!("reading {}", csv.display()))?;
    let svg = render(&text)?;
    fs::write(out, svg).with_context(|| format!("writing {}", out.display()))?;
    Ok(())
}
