//! Bare-bones SVG line plot for convergence traces.

use std::fmt::Write as _;

use antgene::RunTrace;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 40.0;

pub fn convergence_plot(trace: &RunTrace) -> String {
    let series = [
        ("best so far", "#1f77b4", trace.records.iter().map(|r| r.best_so_far).collect::<Vec<_>>()),
        ("mean", "#ff7f0e", trace.records.iter().map(|r| r.mean).collect()),
    ];
    let lo = series
        .iter()
        .flat_map(|s| s.2.iter().copied())
        .fold(f64::INFINITY, f64::min);
    let hi = series
        .iter()
        .flat_map(|s| s.2.iter().copied())
        .fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let count = trace.records.len().max(2) - 1;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<path d="M{MARGIN},{MARGIN} V{} H{}" stroke="black" fill="none"/>"#,
        HEIGHT - MARGIN,
        WIDTH - MARGIN
    );
    for (k, (label, colour, ys)) in series.iter().enumerate() {
        let points: Vec<String> = ys
            .iter()
            .enumerate()
            .map(|(i, y)| {
                let px = MARGIN + (WIDTH - 2.0 * MARGIN) * i as f64 / count as f64;
                let py = HEIGHT - MARGIN - (HEIGHT - 2.0 * MARGIN) * (y - lo) / span;
                format!("{px:.2},{py:.2}")
            })
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" stroke="{colour}" fill="none" stroke-width="1.5"/>"#,
            points.join(" ")
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="12" fill="{colour}">{label}</text>"#,
            WIDTH - MARGIN - 90.0,
            MARGIN + 15.0 * k as f64
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{MARGIN}" y="{}" font-size="12">{lo:.4}</text>"#,
        HEIGHT - MARGIN + 15.0
    );
    let _ = writeln!(svg, r#"<text x="{MARGIN}" y="{}" font-size="12">{hi:.4}</text>"#, MARGIN - 5.0);
    svg.push_str("</svg>\n");
    svg
}
