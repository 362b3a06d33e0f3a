use std::fmt::Write;

/// One plotted series with an optional band.
pub struct Series<'a> {
    pub label: &'a str,
    pub y: &'a [f64],
    pub band: Option<(&'a [f64], &'a [f64])>,
}

pub struct Plot<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub x: &'a [f64],
    pub series: Vec<Series<'a>>,
    pub log_x: bool,
    pub log_y: bool,
    /// Horizontal reference line.
    pub reference: Option<f64>,
    pub config_hash: &'a str,
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 56.0;
const COLORS: [&str; 4] = ["#1f5fa8", "#b5462c", "#3b8a3b", "#7a4fa0"];

fn tr(v: f64, log: bool) -> f64 {
    if log {
        v.log10()
    } else {
        v
    }
}

fn extent(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return None;
    }
    if hi - lo < 1e-12 {
        Some((lo - 0.5, hi + 0.5))
    } else {
        Some((lo, hi))
    }
}

/// Self-contained SVG line plot with the plotted data embedded as a comment.
pub fn render(p: &Plot) -> String {
    let xs: Vec<f64> = p.x.iter().map(|&v| tr(v, p.log_x)).collect();
    let ys = p.series.iter().flat_map(|s| {
        let band = s.band.map(|(lo, hi)| lo.iter().chain(hi).copied().collect::<Vec<_>>()).unwrap_or_default();
        s.y.iter().copied().chain(band)
    });
    let ys = ys.chain(p.reference).map(|v| if p.log_y && v <= 0.0 { f64::NAN } else { tr(v, p.log_y) });
    let (x0, x1) = extent(xs.iter().copied()).unwrap_or((0.0, 1.0));
    let (y0, y1) = extent(ys).unwrap_or((0.0, 1.0));
    let sx = |v: f64| PAD + (tr(v, p.log_x) - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |v: f64| H - PAD - (tr(v, p.log_y) - y0) / (y1 - y0) * (H - 2.0 * PAD);
    let ok = |v: f64| v.is_finite() && (!p.log_y || v > 0.0);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, "<!-- config_hash {} -->", p.config_hash);
    let _ = write!(s, "<!-- data\nx");
    for series in &p.series {
        let _ = write!(s, ",{}", series.label);
        if series.band.is_some() {
            let _ = write!(s, ",{0}_lo,{0}_hi", series.label);
        }
    }
    s.push('\n');
    for (i, x) in p.x.iter().enumerate() {
        let _ = write!(s, "{x}");
        for series in &p.series {
            let _ = write!(s, ",{}", series.y[i]);
            if let Some((lo, hi)) = series.band {
                let _ = write!(s, ",{},{}", lo[i], hi[i]);
            }
        }
        s.push('\n');
    }
    s.push_str("-->\n");
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r##"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="#444"/>"##,
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    let _ = writeln!(s, r#"<text x="{}" y="28" font-family="sans-serif" font-size="15" text-anchor="middle">{}</text>"#, W / 2.0, esc(p.title));
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">{}{}</text>"#,
        W / 2.0,
        H - 14.0,
        esc(p.x_label),
        if p.log_x { " (log scale)" } else { "" }
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 16 {})">{}{}</text>"#,
        H / 2.0,
        H / 2.0,
        esc(p.y_label),
        if p.log_y { " (log scale)" } else { "" }
    );
    for (v, anchor_y) in [(y0, H - PAD), (y1, PAD)] {
        let shown = if p.log_y { 10f64.powf(v) } else { v };
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="10" text-anchor="end">{shown:.3e}</text>"#, PAD - 4.0, anchor_y + 4.0);
    }
    for (v, anchor_x) in [(x0, PAD), (x1, W - PAD)] {
        let shown = if p.log_x { 10f64.powf(v) } else { v };
        let _ = writeln!(s, r#"<text x="{anchor_x}" y="{}" font-family="sans-serif" font-size="10" text-anchor="middle">{shown:.3e}</text>"#, H - PAD + 14.0);
    }
    if let Some(r) = p.reference.filter(|&r| ok(r)) {
        let _ = writeln!(s, r##"<line x1="{PAD}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#888" stroke-dasharray="4 3"/>"##, W - PAD, y = sy(r));
    }
    for (k, series) in p.series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        if let Some((lo, hi)) = series.band {
            let mut pts: Vec<String> = Vec::new();
            for i in 0..p.x.len() {
                if ok(hi[i]) {
                    pts.push(format!("{:.2},{:.2}", sx(p.x[i]), sy(hi[i])));
                }
            }
            for i in (0..p.x.len()).rev() {
                if ok(lo[i]) {
                    pts.push(format!("{:.2},{:.2}", sx(p.x[i]), sy(lo[i])));
                }
            }
            if pts.len() > 2 {
                let _ = writeln!(s, r#"<polygon points="{}" fill="{color}" fill-opacity="0.18" stroke="none"/>"#, pts.join(" "));
            }
        }
        let line: Vec<String> =
            (0..p.x.len()).filter(|&i| ok(series.y[i])).map(|i| format!("{:.2},{:.2}", sx(p.x[i]), sy(series.y[i]))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.8"/>"#, line.join(" "));
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" fill="{color}">{}</text>"#,
            PAD + 8.0,
            PAD + 16.0 + 14.0 * k as f64,
            esc(series.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn esc(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
