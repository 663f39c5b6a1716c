//! Trajectory CSV, SVG line charts and key-value reports.

use std::fmt::Write as _;

use fracdyn_core::solver::Trajectory;

/// `step,t,x1,..,xn` followed by one row per stored state, every real in
/// 17-significant-digit scientific notation.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut s = String::from("step,t");
    for i in 1..=traj.dim() {
        let _ = write!(s, ",x{i}");
    }
    s.push('\n');
    for (j, x) in traj.states().enumerate() {
        let _ = write!(s, "{j},{:.16e}", traj.time(j));
        for v in x {
            let _ = write!(s, ",{v:.16e}");
        }
        s.push('\n');
    }
    s
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;

/// Line chart of (n, values[n]) for component `component` (1-based).
pub fn orbit_svg(values: &[f64], component: usize) -> String {
    let n_max = values.len().saturating_sub(1).max(1) as f64;
    let (mut lo, mut hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if !lo.is_finite() || !hi.is_finite() {
        lo = 0.0;
        hi = 1.0;
    }
    if hi - lo < 1e-12 * hi.abs().max(1.0) {
        // flat series: centre it in a band of fixed height
        let pad = 0.5 * hi.abs().max(1.0);
        lo -= pad;
        hi += pad;
    }
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |n: f64| LEFT + pw * n / n_max;
    let py = |v: f64| TOP + ph * (hi - v) / (hi - lo);

    let mut path = String::new();
    for (n, &v) in values.iter().enumerate() {
        let _ = write!(path, "{}{:.2},{:.2}", if n == 0 { "M" } else { " L" }, px(n as f64), py(v));
    }
    let label = format!("x^{component}(n)");
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{LEFT},{TOP} L{LEFT},{b} L{r},{b}" fill="none" stroke="black" stroke-width="1"/>"#,
        b = TOP + ph,
        r = LEFT + pw
    );
    let _ = writeln!(s, r#"<path d="{path}" fill="none" stroke="steelblue" stroke-width="1.5"/>"#);
    let tick = |s: &mut String, x: f64, y: f64, anchor: &str, text: String| {
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{y:.2}" font-size="11" text-anchor="{anchor}">{text}</text>"#);
    };
    tick(&mut s, LEFT - 6.0, TOP + 4.0, "end", format!("{hi:.4e}"));
    tick(&mut s, LEFT - 6.0, TOP + ph + 4.0, "end", format!("{lo:.4e}"));
    tick(&mut s, LEFT, TOP + ph + 16.0, "middle", "0".into());
    tick(&mut s, LEFT + pw, TOP + ph + 16.0, "middle", format!("{}", n_max as usize));
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="14" text-anchor="middle">n</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.2}" font-size="14" text-anchor="middle" transform="rotate(-90 18 {:.2})">{label}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );
    let _ = writeln!(s, "</svg>");
    s
}

/// Newline-delimited `key=value`.
pub fn kv_document(pairs: &[(String, String)]) -> String {
    pairs.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}
