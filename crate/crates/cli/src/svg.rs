//! Minimal SVG heatmaps of sweep columns.

use std::fmt::Write;

const CELL: f64 = 28.0;
const MARGIN: f64 = 70.0;

/// Linear map from [0, 1] onto a dark-blue → yellow ramp.
fn color(t: f64) -> String {
    let stops = [(0.0, (48, 18, 59)), (0.5, (33, 145, 140)), (1.0, (253, 231, 37))];
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let (lo, hi) = if t <= 0.5 { (stops[0], stops[1]) } else { (stops[1], stops[2]) };
    let u = (t - lo.0) / (hi.0 - lo.0);
    let mix = |a: i32, b: i32| (a as f64 + u * (b - a) as f64).round() as i32;
    format!("rgb({},{},{})", mix(lo.1 .0, hi.1 .0), mix(lo.1 .1, hi.1 .1), mix(lo.1 .2, hi.1 .2))
}

/// `values[i][j]` is the cell for `eta1[i]` (vertical axis) and `eta2[j]`.
pub fn heatmap(title: &str, eta1: &[f64], eta2: &[f64], values: &[Vec<f64>]) -> String {
    let finite = values.iter().flatten().copied().filter(|v| v.is_finite());
    let lo = finite.clone().fold(f64::INFINITY, f64::min);
    let hi = finite.fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let (rows, cols) = (eta1.len(), eta2.len());
    let width = 2.0 * MARGIN + CELL * cols as f64 + 60.0;
    let height = 2.0 * MARGIN + CELL * rows as f64;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<text x="{}" y="24" font-size="14">{title}</text>"#, MARGIN);
    for (i, row) in values.iter().enumerate() {
        // η₁ grows upwards
        let y = MARGIN + CELL * (rows - 1 - i) as f64;
        for (j, v) in row.iter().enumerate() {
            let x = MARGIN + CELL * j as f64;
            let _ = writeln!(
                out,
                r#"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{}"><title>{v}</title></rect>"#,
                color((v - lo) / span)
            );
        }
    }
    for (i, e) in eta1.iter().enumerate() {
        let y = MARGIN + CELL * (rows - 1 - i) as f64 + CELL * 0.65;
        let _ = writeln!(out, r#"<text x="{}" y="{y}" text-anchor="end">{e:.3}</text>"#, MARGIN - 6.0);
    }
    for (j, e) in eta2.iter().enumerate() {
        let x = MARGIN + CELL * (j as f64 + 0.5);
        let y = MARGIN + CELL * rows as f64 + 14.0;
        let _ = writeln!(out, r#"<text x="{x}" y="{y}" text-anchor="middle">{e:.3}</text>"#);
    }
    let grid_mid_x = MARGIN + CELL * cols as f64 / 2.0;
    let _ = writeln!(
        out,
        r#"<text x="{grid_mid_x}" y="{}" text-anchor="middle">eta2</text>"#,
        MARGIN + CELL * rows as f64 + 34.0
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">eta1</text>"#,
        MARGIN + CELL * rows as f64 / 2.0
    );

    // color bar
    let bar_x = MARGIN + CELL * cols as f64 + 20.0;
    let bar_h = CELL * rows as f64;
    let steps = 32;
    for k in 0..steps {
        let t = 1.0 - k as f64 / (steps - 1) as f64;
        let y = MARGIN + bar_h * k as f64 / steps as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{bar_x}" y="{y}" width="14" height="{}" fill="{}"/>"#,
            bar_h / steps as f64 + 0.5,
            color(t)
        );
    }
    let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, bar_x + 18.0, MARGIN + 8.0, crate::format::sig(hi, 4));
    let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, bar_x + 18.0, MARGIN + bar_h, crate::format::sig(lo, 4));
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ramp_endpoints() {
        assert_eq!(color(0.0), "rgb(48,18,59)");
        assert_eq!(color(1.0), "rgb(253,231,37)");
        assert_eq!(color(f64::NAN), color(0.0));
    }

    #[test]
    fn one_rect_per_cell() {
        let svg = heatmap("p", &[0.5, 1.0], &[0.5, 0.75, 1.0], &[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]);
        assert_eq!(svg.matches("<title>").count(), 6);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    }
}
