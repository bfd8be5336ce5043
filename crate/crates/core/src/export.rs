//! CSV and SVG writers. Floats use Rust's shortest round-trip formatting so
//! identical results give byte-identical files.

use std::fmt::Write as _;
use std::io::{self, Write};

use nalgebra::Complex;
use serde::ser::SerializeStruct;
use serde::Serializer;

use crate::oracle::SimulationTrace;
use crate::tfc::SafeRegionMap;

pub(crate) fn ser_complex<S: Serializer>(c: &Complex<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    let mut st = s.serialize_struct("Complex", 2)?;
    st.serialize_field("re", &c.re)?;
    st.serialize_field("im", &c.im)?;
    st.end()
}

/// `t,x1..xn,z1..zm`, one row per time step.
pub fn write_trace_csv<W: Write>(trace: &SimulationTrace, mut w: W) -> io::Result<()> {
    let n_x = trace.states.first().map_or(0, |x| x.len());
    let n_z = trace.disturbance_values.first().map_or(0, |z| z.len());
    let mut header = String::from("t");
    for i in 1..=n_x {
        write!(header, ",x{i}").unwrap();
    }
    for i in 1..=n_z {
        write!(header, ",z{i}").unwrap();
    }
    writeln!(w, "{header}")?;
    let mut line = String::new();
    for ((t, x), z) in trace.times.iter().zip(&trace.states).zip(&trace.disturbance_values) {
        line.clear();
        write!(line, "{t}").unwrap();
        for v in x.iter().chain(z.iter()) {
            write!(line, ",{v}").unwrap();
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// `k_d,k_theta,bound_m,safe,regime` with `k_d` as the outer loop.
pub fn write_sweep_csv<W: Write>(map: &SafeRegionMap, mut w: W) -> io::Result<()> {
    writeln!(w, "k_d,k_theta,bound_m,safe,regime")?;
    for (kd, kt, b, safe, regime) in map.cells() {
        writeln!(w, "{kd},{kt},{b},{safe},{}", regime.as_str())?;
    }
    Ok(())
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 55.0;

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
    right: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - self.right)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - TOP - BOTTOM)
    }

    fn axes(&self, svg: &mut String, x_label: &str, y_label: &str) {
        let (x0, x1) = (self.px(self.x.0), self.px(self.x.1));
        let (y0, y1) = (self.py(self.y.0), self.py(self.y.1));
        writeln!(
            svg,
            r#"<rect x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
            x1 - x0,
            y0 - y1
        )
        .unwrap();
        for t in nice_ticks(self.x.0, self.x.1) {
            let p = self.px(t);
            writeln!(svg, r#"<line x1="{p:.2}" y1="{y0:.2}" x2="{p:.2}" y2="{:.2}" stroke="black"/>"#, y0 + 5.0)
                .unwrap();
            writeln!(svg, r#"<text x="{p:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, y0 + 20.0, tick_label(t))
                .unwrap();
        }
        for t in nice_ticks(self.y.0, self.y.1) {
            let p = self.py(t);
            writeln!(svg, r#"<line x1="{:.2}" y1="{p:.2}" x2="{x0:.2}" y2="{p:.2}" stroke="black"/>"#, x0 - 5.0)
                .unwrap();
            writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, x0 - 8.0, p + 4.0, tick_label(t))
                .unwrap();
        }
        writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{x_label}</text>"#,
            0.5 * (x0 + x1),
            HEIGHT - 12.0
        )
        .unwrap();
        writeln!(
            svg,
            r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{y_label}</text>"#,
            0.5 * (y0 + y1),
            0.5 * (y0 + y1)
        )
        .unwrap();
    }
}

fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    if !(span > 0.0 && span.is_finite()) {
        return vec![lo];
    }
    let raw = span / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step + 1e-9).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

fn tick_label(v: f64) -> String {
    let s = format!("{:.3}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn header(svg: &mut String, title: &str) {
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(svg, r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{title}</text>"#, WIDTH / 2.0).unwrap();
}

fn polyline(svg: &mut String, frame: &Frame, pts: impl Iterator<Item = (f64, f64)>, style: &str) {
    svg.push_str(r#"<polyline fill="none" "#);
    svg.push_str(style);
    svg.push_str(r#" points=""#);
    for (x, y) in pts {
        write!(svg, "{:.2},{:.2} ", frame.px(x), frame.py(y)).unwrap();
    }
    svg.push_str("\"/>\n");
}

/// Every `stride`-th sample plus the last, enough for a smooth curve.
fn thin(n: usize, max_points: usize) -> impl Iterator<Item = usize> {
    let stride = n.div_ceil(max_points).max(1);
    (0..n).step_by(stride).chain((n > 0 && !(n - 1).is_multiple_of(stride)).then_some(n - 1))
}

/// State `k` under the worst-case (red) and constant (blue) disturbances, with
/// dashed levels at the analytic bound and the constant-disturbance peak.
pub fn fig1_svg(worst: &SimulationTrace, fixed: &SimulationTrace, k: usize, bound: f64, overshoot: f64) -> String {
    let series = |tr: &SimulationTrace| -> Vec<(f64, f64)> {
        thin(tr.times.len(), 1500).map(|i| (tr.times[i], tr.states[i][k])).collect()
    };
    let (w, f) = (series(worst), series(fixed));
    let t_max = w.iter().chain(&f).map(|p| p.0).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let y_min = w.iter().chain(&f).map(|p| p.1).fold(0.0, f64::min);
    let y_max = w.iter().chain(&f).map(|p| p.1).fold(bound.max(overshoot), f64::max);
    let pad = 0.08 * (y_max - y_min).max(1e-12);
    // headroom for the legend
    let frame = Frame { x: (0.0, t_max), y: (y_min - pad, y_max + 4.0 * pad), right: RIGHT };

    let mut svg = String::new();
    header(&mut svg, "State response under worst-case and constant disturbance");
    frame.axes(&mut svg, "t (s)", &format!("x{}", k + 1));
    for (level, colour) in [(bound, "#c0392b"), (overshoot, "#2e5fa8")] {
        let y = frame.py(level);
        writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{colour}" stroke-dasharray="6,4"/>"#,
            frame.px(0.0),
            frame.px(t_max)
        )
        .unwrap();
    }
    polyline(&mut svg, &frame, f.into_iter(), r##"stroke="#2e5fa8" stroke-width="1.5""##);
    polyline(&mut svg, &frame, w.into_iter(), r##"stroke="#c0392b" stroke-width="1.5""##);
    let lx = WIDTH - RIGHT - 230.0;
    writeln!(
        svg,
        r##"<rect x="{}" y="{}" width="220" height="72" fill="white" fill-opacity="0.85" stroke="#999"/>"##,
        lx - 8.0,
        TOP + 6.0
    )
    .unwrap();
    for (i, (label, colour, dash)) in [
        ("worst-case disturbance", "#c0392b", ""),
        ("constant disturbance", "#2e5fa8", ""),
        ("analytic bound", "#c0392b", r#" stroke-dasharray="6,4""#),
        ("constant-input peak", "#2e5fa8", r#" stroke-dasharray="6,4""#),
    ]
    .iter()
    .enumerate()
    {
        let y = TOP + 18.0 + 16.0 * i as f64;
        writeln!(svg, r#"<line x1="{lx}" y1="{y}" x2="{}" y2="{y}" stroke="{colour}"{dash}/>"#, lx + 25.0).unwrap();
        writeln!(svg, r#"<text x="{}" y="{}">{label}</text>"#, lx + 32.0, y + 4.0).unwrap();
    }
    svg.push_str("</svg>\n");
    svg
}

const RAMP: [(f64, [f64; 3]); 5] = [
    (0.0, [68.0, 1.0, 84.0]),
    (0.25, [59.0, 82.0, 139.0]),
    (0.5, [33.0, 145.0, 140.0]),
    (0.75, [94.0, 201.0, 98.0]),
    (1.0, [253.0, 231.0, 37.0]),
];

fn ramp(u: f64) -> String {
    let u = u.clamp(0.0, 1.0);
    let i = RAMP.iter().position(|r| r.0 >= u).unwrap_or(RAMP.len() - 1).max(1);
    let (a, b) = (RAMP[i - 1], RAMP[i]);
    let w = (u - a.0) / (b.0 - a.0);
    let c: Vec<u8> = (0..3).map(|k| (a.1[k] + w * (b.1[k] - a.1[k])).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

/// Heatmap of the bound over `(K_d, K_θ)`, drawn only where it is safe, with
/// the double-pole boundary `K_θ = 2√K_d` overlaid.
pub fn fig2_svg(map: &SafeRegionMap) -> String {
    const LEVELS: f64 = 64.0;
    let (nk, nt) = (map.kd_grid.len(), map.ktheta_grid.len());
    let half = |g: &[f64]| {
        if g.len() > 1 {
            0.5 * (g[1] - g[0])
        } else {
            0.5
        }
    };
    let (dk, dt) = (half(&map.kd_grid), half(&map.ktheta_grid));
    let x_range = (map.kd_grid[0] - dk, map.kd_grid[nk - 1] + dk);
    let y_range = (map.ktheta_grid[0] - dt, map.ktheta_grid[nt - 1] + dt);
    let frame = Frame { x: x_range, y: y_range, right: RIGHT + 70.0 };

    let safe_vals = map.cells().filter(|c| c.3).map(|c| c.2);
    let (lo, hi) = safe_vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let scale = |v: f64| {
        if hi > lo {
            ((v - lo) / (hi - lo) * LEVELS).floor().min(LEVELS - 1.0) / (LEVELS - 1.0)
        } else {
            0.0
        }
    };

    let mut svg = String::new();
    header(&mut svg, "Worst-case lateral offset over the gain plane (safe cells only)");
    for i in 0..nk {
        let x0 = frame.px(map.kd_grid[i] - dk);
        let x1 = frame.px(map.kd_grid[i] + dk);
        let mut j = 0;
        while j < nt {
            if !map.safe[i][j] {
                j += 1;
                continue;
            }
            let level = scale(map.bound[i][j]);
            let start = j;
            while j + 1 < nt && map.safe[i][j + 1] && scale(map.bound[i][j + 1]) == level {
                j += 1;
            }
            let y_top = frame.py(map.ktheta_grid[j] + dt);
            let y_bot = frame.py(map.ktheta_grid[start] - dt);
            writeln!(
                svg,
                r#"<rect x="{x0:.2}" y="{y_top:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                x1 - x0 + 0.3,
                y_bot - y_top + 0.3,
                ramp(level)
            )
            .unwrap();
            j += 1;
        }
    }
    let steps = 200;
    let parabola = (0..=steps).map(|s| {
        let kd = x_range.0.max(0.0) + (x_range.1 - x_range.0.max(0.0)) * s as f64 / steps as f64;
        (kd, 2.0 * kd.sqrt())
    });
    let clipped: Vec<_> = parabola.filter(|p| p.1 >= y_range.0 && p.1 <= y_range.1).collect();
    polyline(&mut svg, &frame, clipped.into_iter(), r#"stroke="black" stroke-width="1.5" stroke-dasharray="5,3""#);
    frame.axes(&mut svg, "K_d (1/m²)", "K_θ (1/m)");

    let bar_x = WIDTH - RIGHT - 50.0;
    let (bar_top, bar_bot) = (frame.py(y_range.1), frame.py(y_range.0));
    let n = LEVELS as usize;
    for s in 0..n {
        let h = (bar_bot - bar_top) / n as f64;
        let y = bar_bot - (s + 1) as f64 * h;
        writeln!(
            svg,
            r#"<rect x="{bar_x:.2}" y="{y:.2}" width="14" height="{:.2}" fill="{}"/>"#,
            h + 0.3,
            ramp(s as f64 / (n - 1) as f64)
        )
        .unwrap();
    }
    if lo.is_finite() {
        writeln!(svg, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, bar_x + 18.0, bar_bot, tick_label(lo)).unwrap();
        writeln!(svg, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, bar_x + 18.0, bar_top + 10.0, tick_label(hi)).unwrap();
    }
    writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">m</text>"#, bar_x + 7.0, bar_top - 6.0).unwrap();
    svg.push_str("</svg>\n");
    svg
}
