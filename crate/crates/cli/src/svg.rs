//! Log-scale convergence plot written as plain SVG.

use std::fmt::Write;

use starframe::rabi::ConvergenceRecord;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

const PALETTE: [(&str, &str); 4] = [
    ("lab", "#d62728"),
    ("std1", "#000000"),
    ("std0", "#7f7f7f"),
    ("biframe", "#1f77b4"),
];

fn color(frame: &str) -> &'static str {
    PALETTE
        .iter()
        .find(|(f, _)| *f == frame)
        .map_or("#2ca02c", |(_, c)| c)
}

/// One series per frame in first-seen order, `log10 ε` against `m`, optional dashed floor.
pub fn render(records: &[ConvergenceRecord], floor: Option<f64>) -> String {
    let mut frames: Vec<&str> = Vec::new();
    for r in records {
        if !frames.contains(&r.frame.as_str()) {
            frames.push(&r.frame);
        }
    }
    let logs: Vec<f64> = records
        .iter()
        .map(|r| r.log10_epsilon())
        .chain(floor.map(f64::log10))
        .filter(|v| v.is_finite())
        .collect();
    let y_lo = logs
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
        .floor()
        .min(-1.0);
    let y_hi = logs
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
        .ceil()
        .max(0.0);
    let m_max = records.iter().map(|r| r.m).max().unwrap_or(1).max(1) as f64;

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let x = |m: f64| LEFT + plot_w * m / m_max;
    let y = |v: f64| TOP + plot_h * (y_hi - v) / (y_hi - y_lo);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="800" height="600" viewBox="0 0 800 600" font-family="sans-serif" font-size="13">"#
    );
    let _ = writeln!(s, r#"<rect width="800" height="600" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    let mut tick = y_lo;
    while tick <= y_hi + 1e-9 {
        let ty = y(tick);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{ty:.1}" x2="{:.1}" y2="{ty:.1}" stroke="#e0e0e0"/><text x="{:.1}" y="{:.1}" text-anchor="end">1e{}</text>"##,
            LEFT + plot_w,
            LEFT - 6.0,
            ty + 4.0,
            tick as i64
        );
        tick += 1.0;
    }
    for m in 0..=m_max as usize {
        let tx = x(m as f64);
        let _ = writeln!(
            s,
            r#"<text x="{tx:.1}" y="{:.1}" text-anchor="middle">{m}</text>"#,
            TOP + plot_h + 18.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">order m</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.1}" text-anchor="middle" transform="rotate(-90 20 {:.1})">relative error ε</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );
    if let Some(f) = floor.filter(|f| *f > 0.0) {
        let fy = y(f.log10());
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{fy:.1}" x2="{:.1}" y2="{fy:.1}" stroke="#555" stroke-dasharray="6 4"/>"##,
            LEFT + plot_w
        );
    }
    for (k, frame) in frames.iter().enumerate() {
        let c = color(frame);
        let pts: Vec<String> = records
            .iter()
            .filter(|r| r.frame == *frame && r.epsilon > 0.0)
            .map(|r| format!("{:.1},{:.1}", x(r.m as f64), y(r.log10_epsilon())))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{c}" stroke-width="1.5"/>"#,
            pts.join(" ")
        );
        for p in &pts {
            let (px, py) = p.split_once(',').unwrap();
            let _ = writeln!(s, r#"<circle cx="{px}" cy="{py}" r="3" fill="{c}"/>"#);
        }
        let ly = TOP + 20.0 + 22.0 * k as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{:.1}" y2="{ly}" stroke="{c}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{frame}</text>"#,
            lx + 25.0,
            lx + 32.0,
            ly + 4.0
        );
    }
    if floor.is_some() {
        let ly = TOP + 20.0 + 22.0 * frames.len() as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            s,
            r##"<line x1="{lx}" y1="{ly}" x2="{:.1}" y2="{ly}" stroke="#555" stroke-dasharray="6 4"/><text x="{:.1}" y="{:.1}">floor</text>"##,
            lx + 25.0,
            lx + 32.0,
            ly + 4.0
        );
    }
    s.push_str("</svg>\n");
    s
}
