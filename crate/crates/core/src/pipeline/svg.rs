//! Static line chart of actual against predicted speed.

use std::fmt::Write as _;

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 48.0;
const COLORS: [&str; 8] = [
    "#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666",
];

/// `series[0]` is drawn in black; the rest cycle through a fixed palette.
pub fn line_chart(title: &str, series: &[(&str, &[f64])]) -> String {
    let len = series.iter().map(|s| s.1.len()).max().unwrap_or(0);
    let finite = series.iter().flat_map(|s| s.1.iter()).filter(|v| v.is_finite());
    let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let (lo, hi) = if lo.is_finite() && hi > lo { (lo, hi) } else { (lo.min(0.0), lo.max(0.0) + 1.0) };
    let sx = |i: usize| MARGIN + (WIDTH - 2.0 * MARGIN) * i as f64 / (len.max(2) - 1) as f64;
    let sy = |v: f64| HEIGHT - MARGIN - (HEIGHT - 2.0 * MARGIN) * (v - lo) / (hi - lo);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{MARGIN}" y="24" font-size="14">{}</text>"#, escape(title));
    let _ = writeln!(
        out,
        r##"<path d="M{MARGIN} {MARGIN} V{y} H{x}" fill="none" stroke="#999"/>"##,
        y = HEIGHT - MARGIN,
        x = WIDTH - MARGIN
    );
    let _ = writeln!(out, r#"<text x="4" y="{:.1}">{hi:.2}</text>"#, MARGIN + 4.0);
    let _ = writeln!(out, r#"<text x="4" y="{:.1}">{lo:.2}</text>"#, HEIGHT - MARGIN);
    for (k, (name, values)) in series.iter().enumerate() {
        let color = if k == 0 { "#000000" } else { COLORS[(k - 1) % COLORS.len()] };
        let mut d = String::new();
        let mut pen_up = true;
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                pen_up = true;
                continue;
            }
            let _ = write!(d, "{}{:.1} {:.1} ", if pen_up { "M" } else { "L" }, sx(i), sy(*v));
            pen_up = false;
        }
        let _ = writeln!(
            out,
            r#"<path d="{}" fill="none" stroke="{color}" stroke-width="{}"/>"#,
            d.trim_end(),
            if k == 0 { 1.5 } else { 1.0 }
        );
        let ly = MARGIN + 16.0 * k as f64;
        let lx = WIDTH - MARGIN - 110.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            lx + 18.0,
            lx + 24.0,
            ly + 4.0,
            escape(name)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
