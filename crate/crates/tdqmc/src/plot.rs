//! Minimal publication-style plots with no plotting dependency: SVG line
//! charts for scans and time series, PNG heatmaps with contour overlays for
//! two-electron densities.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;
use crate::grid::RealField2D;

/// One named curve.
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series { label: label.into(), points }
    }
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];
const W: f64 = 800.0;
const H: f64 = 560.0;
const ML: f64 = 80.0;
const MR: f64 = 30.0;
const MT: f64 = 50.0;
const MB: f64 = 70.0;

fn nice_ticks(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if !(hi > lo) {
        return vec![lo];
    }
    let raw = (hi - lo) / n as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|s| s * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * step {
        out.push(t);
        t += step;
    }
    out
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if (1e-3..1e4).contains(&a) {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.1e}")
    }
}

/// Write a line chart. With `log_y` the y axis is log10; nonpositive values
/// are dropped from the drawing.
pub fn line_chart_svg(
    path: &Path,
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[Series],
    log_y: bool,
) -> Result<()> {
    let map_y = |y: f64| if log_y { y.log10() } else { y };
    let pts: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|s| s.points.iter())
        .filter(|(_, y)| !log_y || *y > 0.0)
        .map(|&(x, y)| (x, map_y(y)))
        .collect();
    let (mut x_lo, mut x_hi) = (f64::MAX, f64::MIN);
    let (mut y_lo, mut y_hi) = (f64::MAX, f64::MIN);
    for &(x, y) in &pts {
        x_lo = x_lo.min(x);
        x_hi = x_hi.max(x);
        y_lo = y_lo.min(y);
        y_hi = y_hi.max(y);
    }
    if pts.is_empty() {
        (x_lo, x_hi, y_lo, y_hi) = (0.0, 1.0, 0.0, 1.0);
    }
    if x_hi <= x_lo {
        x_hi = x_lo + 1.0;
    }
    if y_hi <= y_lo {
        y_hi = y_lo + 1.0;
    }
    let pad = 0.05 * (y_hi - y_lo);
    let (y_lo, y_hi) = (y_lo - pad, y_hi + pad);

    let sx = |x: f64| ML + (x - x_lo) / (x_hi - x_lo) * (W - ML - MR);
    let sy = |y: f64| H - MB - (y - y_lo) / (y_hi - y_lo) * (H - MT - MB);

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"14\">\n\
         <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"28\" text-anchor=\"middle\" font-size=\"18\">{title}</text>\n",
        W / 2.0
    );
    // axes
    let _ = write!(
        svg,
        "<line x1=\"{ML}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n\
         <line x1=\"{ML}\" y1=\"{MT}\" x2=\"{ML}\" y2=\"{}\" stroke=\"black\"/>\n",
        H - MB,
        W - MR,
        H - MB,
        H - MB
    );
    for t in nice_ticks(x_lo, x_hi, 6) {
        let x = sx(t);
        let _ = write!(
            svg,
            "<line x1=\"{x}\" y1=\"{}\" x2=\"{x}\" y2=\"{}\" stroke=\"black\"/>\n\
             <text x=\"{x}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
            H - MB,
            H - MB + 6.0,
            H - MB + 24.0,
            fmt_tick(t)
        );
    }
    for t in nice_ticks(y_lo, y_hi, 6) {
        let y = sy(t);
        let label = if log_y { format!("1e{}", fmt_tick(t)) } else { fmt_tick(t) };
        let _ = write!(
            svg,
            "<line x1=\"{}\" y1=\"{y}\" x2=\"{ML}\" y2=\"{y}\" stroke=\"black\"/>\n\
             <text x=\"{}\" y=\"{}\" text-anchor=\"end\">{label}</text>\n",
            ML - 6.0,
            ML - 10.0,
            y + 5.0
        );
    }
    let _ = write!(
        svg,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{x_label}</text>\n\
         <text x=\"20\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 20 {})\">{y_label}</text>\n",
        (ML + W - MR) / 2.0,
        H - 18.0,
        (MT + H - MB) / 2.0,
        (MT + H - MB) / 2.0
    );
    for (si, s) in series.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        let coords: Vec<String> = s
            .points
            .iter()
            .filter(|(_, y)| !log_y || *y > 0.0)
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(map_y(y))))
            .collect();
        if coords.len() > 1 {
            let _ = write!(
                svg,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
                coords.join(" ")
            );
        }
        for c in &coords {
            let (x, y) = c.split_once(',').unwrap();
            let _ = write!(svg, "<circle cx=\"{x}\" cy=\"{y}\" r=\"3\" fill=\"{color}\"/>\n");
        }
        // legend
        let ly = MT + 10.0 + 20.0 * si as f64;
        let _ = write!(
            svg,
            "<line x1=\"{}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"2\"/>\n\
             <text x=\"{}\" y=\"{}\">{}</text>\n",
            W - MR - 170.0,
            W - MR - 140.0,
            W - MR - 132.0,
            ly + 5.0,
            s.label
        );
    }
    svg.push_str("</svg>\n");
    std::fs::write(path, svg)?;
    Ok(())
}

/// PNG heatmap of a nonnegative field with white contour lines at the given
/// fractions of the maximum. Small grids are pixel-doubled to stay legible.
pub fn heatmap_png(path: &Path, field: &RealField2D, contour_fractions: &[f64]) -> Result<()> {
    let g = field.grid();
    let (n1, n2) = (g.axis1.n_points(), g.axis2.n_points());
    let max = field.values().iter().cloned().fold(0.0f64, f64::max).max(f64::MIN_POSITIVE);
    let scale = (512 / n1.max(n2)).max(1);
    let (w, h) = (n2 * scale, n1 * scale);
    let mut img = image::RgbImage::new(w as u32, h as u32);
    let levels: Vec<f64> = contour_fractions.iter().map(|f| f * max).collect();
    for i in 0..n1 {
        for j in 0..n2 {
            let v = field.at(i, j);
            let u = (v / max).sqrt(); // sqrt stretch shows the halo
            let mut rgb = heat_color(u);
            // contour: any neighbor on the other side of a level
            let crossing = levels.iter().any(|&lv| {
                let here = v >= lv;
                (i + 1 < n1 && (field.at(i + 1, j) >= lv) != here)
                    || (j + 1 < n2 && (field.at(i, j + 1) >= lv) != here)
            });
            if crossing {
                rgb = [255, 255, 255];
            }
            for di in 0..scale {
                for dj in 0..scale {
                    // axis1 increases upward in the image
                    let y = (n1 - 1 - i) * scale + di;
                    let x = j * scale + dj;
                    img.put_pixel(x as u32, y as u32, image::Rgb(rgb));
                }
            }
        }
    }
    img.save(path)
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::Other, e.to_string()))?;
    Ok(())
}

fn heat_color(u: f64) -> [u8; 3] {
    let u = u.clamp(0.0, 1.0);
    let anchors: [(f64, [f64; 3]); 5] = [
        (0.0, [13.0, 8.0, 135.0]),
        (0.25, [126.0, 3.0, 168.0]),
        (0.5, [204.0, 71.0, 120.0]),
        (0.75, [248.0, 149.0, 64.0]),
        (1.0, [240.0, 249.0, 33.0]),
    ];
    for w in anchors.windows(2) {
        let (t0, c0) = w[0];
        let (t1, c1) = w[1];
        if u <= t1 {
            let s = (u - t0) / (t1 - t0);
            return [
                (c0[0] + (c1[0] - c0[0]) * s) as u8,
                (c0[1] + (c1[1] - c0[1]) * s) as u8,
                (c0[2] + (c1[2] - c0[2]) * s) as u8,
            ];
        }
    }
    [240, 249, 33]
}
