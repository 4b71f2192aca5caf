//! Bifurcation diagram plot built from the diagram CSV alone, so the picture
//! always shows exactly the data that was written.

use anyhow::{bail, Context};
use bifurcata::branches::CSV_HEADER;
use std::collections::BTreeMap;
use std::fmt::Write;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 520.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;

#[derive(Debug, Clone, Copy)]
struct Row {
    lambda: f64,
    beta1: f64,
    beta2: f64,
    u1: f64,
    morse: Option<usize>,
}

fn parse(csv: &str) -> anyhow::Result<Vec<(String, Vec<Row>)>> {
    let mut lines = csv.lines();
    if lines.next() != Some(CSV_HEADER) {
        bail!("diagram CSV must start with `{CSV_HEADER}`");
    }
    let mut order: Vec<String> = Vec::new();
    let mut map: BTreeMap<String, Vec<Row>> = BTreeMap::new();
    for (n, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            bail!("line {}: expected 7 fields, found {}", n + 2, f.len());
        }
        let num = |s: &str| s.parse::<f64>().with_context(|| format!("line {}: bad number {s:?}", n + 2));
        let row = Row {
            lambda: num(f[1])?,
            beta1: num(f[2])?,
            beta2: num(f[3])?,
            u1: num(f[4])?,
            morse: if f[6].is_empty() { None } else { Some(f[6].parse()?) },
        };
        if !map.contains_key(f[0]) {
            order.push(f[0].to_string());
        }
        map.entry(f[0].to_string()).or_default().push(row);
    }
    Ok(order
        .into_iter()
        .map(|id| {
            let rows = map.remove(&id).unwrap_or_default();
            (id, rows)
        })
        .collect())
}

fn color(id: &str) -> &'static str {
    if id.starts_with("odd") {
        "#1f5fbf"
    } else if id.starts_with("even") {
        "#c0392b"
    } else if id.starts_with("secondary") {
        "#218c4a"
    } else {
        "#222222"
    }
}

/// Round step for about `target` ticks over `span`.
fn tick_step(span: f64, target: f64) -> f64 {
    let raw = span / target;
    let mag = 10f64.powf(raw.log10().floor());
    let r = raw / mag;
    mag * if r < 1.5 {
        1.0
    } else if r < 3.5 {
        2.0
    } else if r < 7.5 {
        5.0
    } else {
        10.0
    }
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let step = tick_step(hi - lo, 6.0);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * step {
        out.push(if t.abs() < 1e-12 * step { 0.0 } else { t });
        t += step;
    }
    out
}

fn label(x: f64) -> String {
    let s = format!("{x:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

/// Renders λ against u(1). Bifurcation points are marked where a primary
/// branch leaves the axis and where a secondary branch is closest to the
/// odd subspace; Morse indices label each segment of constant index.
pub fn render(csv: &str) -> anyhow::Result<String> {
    let branches = parse(csv)?;
    let all = branches.iter().flat_map(|(_, r)| r.iter());
    let lmax = all.clone().map(|r| r.lambda).fold(0.0, f64::max).max(1e-12);
    let umax = all.map(|r| r.u1.abs()).fold(0.0, f64::max).max(1e-3) * 1.05;
    let (x0, x1) = (0.0, lmax);
    let (y0, y1) = (-umax, umax);
    let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * (WIDTH - LEFT - RIGHT);
    let py = |y: f64| HEIGHT - BOTTOM - (y - y0) / (y1 - y0) * (HEIGHT - TOP - BOTTOM);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (bx0, bx1, by0, by1) = (px(x0), px(x1), py(y1), py(y0));
    let _ = writeln!(
        s,
        r#"<rect x="{bx0:.2}" y="{by0:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        bx1 - bx0,
        by1 - by0
    );
    for t in ticks(x0, x1) {
        let x = px(t);
        let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{by1:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, by1 + 5.0);
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            by1 + 18.0,
            label(t)
        );
    }
    for t in ticks(y0, y1) {
        let y = py(t);
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{y:.2}" x2="{bx0:.2}" y2="{y:.2}" stroke="black"/>"#, bx0 - 5.0);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            bx0 - 8.0,
            y + 4.0,
            label(t)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">λ</text>"#,
        0.5 * (bx0 + bx1),
        HEIGHT - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">u(1)</text>"#,
        0.5 * (by0 + by1),
        0.5 * (by0 + by1)
    );

    let mut markers = Vec::new();
    for (id, rows) in &branches {
        if rows.is_empty() {
            continue;
        }
        let pts: Vec<String> = rows.iter().map(|r| format!("{:.2},{:.2}", px(r.lambda), py(r.u1))).collect();
        let _ = writeln!(
            s,
            r#"<polyline id="{id}" fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
            color(id),
            pts.join(" ")
        );
        if id.starts_with("odd") || id.starts_with("even") {
            markers.push((rows[0].lambda, rows[0].u1));
        } else if id.starts_with("secondary") {
            let origin = rows
                .iter()
                .min_by(|a, b| (a.beta1 + a.beta2).abs().total_cmp(&(b.beta1 + b.beta2).abs()))
                .unwrap();
            markers.push((origin.lambda, origin.u1));
        }
        let mut start = 0;
        for i in 1..=rows.len() {
            if i == rows.len() || rows[i].morse != rows[start].morse {
                if let Some(m) = rows[start].morse {
                    let mid = rows[(start + i - 1) / 2];
                    let _ = writeln!(
                        s,
                        r#"<text x="{:.2}" y="{:.2}" fill="{}" font-size="10">{m}</text>"#,
                        px(mid.lambda) + 3.0,
                        py(mid.u1) - 3.0,
                        color(id)
                    );
                }
                start = i;
            }
        }
    }
    for (l, u) in markers {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="white" stroke="black"/>"#,
            px(l),
            py(u)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}
