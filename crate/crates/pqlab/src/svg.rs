//! Minimal native SVG output: enumerated spectrum values on a log axis with
//! accumulation limits marked as vertical lines. Informational only; nothing
//! asserts on this output.

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 220.0;
const MARGIN: f64 = 50.0;

/// Scatter of spectrum values (log10 x-axis) with vertical marker lines.
pub fn spectrum_scatter(values: &[f64], limits: &[f64], title: &str) -> String {
    let finite: Vec<f64> = values
        .iter()
        .chain(limits.iter())
        .copied()
        .filter(|v| *v > 0.0 && v.is_finite())
        .collect();
    let (lo, hi) = finite
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    let (llo, lhi) = if finite.is_empty() {
        (0.0, 1.0)
    } else {
        (lo.log10() - 0.05, hi.log10() + 0.05)
    };
    let span = (lhi - llo).max(1e-12);
    let x_of = |v: f64| MARGIN + (v.log10() - llo) / span * (WIDTH - 2.0 * MARGIN);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{MARGIN}\" y=\"24\" font-family=\"monospace\" font-size=\"14\">{}</text>\n",
        xml_escape(title)
    ));
    let axis_y = HEIGHT - MARGIN;
    svg.push_str(&format!(
        "<line x1=\"{MARGIN}\" y1=\"{axis_y}\" x2=\"{}\" y2=\"{axis_y}\" \
         stroke=\"black\" stroke-width=\"1\"/>\n",
        WIDTH - MARGIN
    ));
    for limit in limits {
        if *limit <= 0.0 || !limit.is_finite() {
            continue;
        }
        let x = x_of(*limit);
        svg.push_str(&format!(
            "<line x1=\"{x}\" y1=\"40\" x2=\"{x}\" y2=\"{axis_y}\" stroke=\"crimson\" \
             stroke-width=\"1\" stroke-dasharray=\"4 3\"/>\n"
        ));
    }
    for v in values {
        if *v <= 0.0 || !v.is_finite() {
            continue;
        }
        let x = x_of(*v);
        let y = axis_y - 30.0;
        svg.push_str(&format!(
            "<circle cx=\"{x}\" cy=\"{y}\" r=\"2.5\" fill=\"steelblue\" fill-opacity=\"0.6\"/>\n"
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{MARGIN}\" y=\"{}\" font-family=\"monospace\" font-size=\"11\">log10 scale; \
         dashed lines mark accumulation limits</text>\n",
        HEIGHT - 14.0
    ));
    svg.push_str("</svg>\n");
    svg
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn produces_wellformed_markup() {
        let svg = spectrum_scatter(&[1.0, 2.0, 35.0], &[35.2], "demo");
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<circle").count(), 3);
        assert_eq!(svg.matches("stroke-dasharray").count(), 1);
    }
}
