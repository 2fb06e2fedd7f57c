//! Deterministic CSV and SVG emission: fixed decimal formatting, '.' decimal
//! separator, no timestamps.

/// Format with 6 significant digits (plain decimal notation).
/// Magnitudes below 1e-12 collapse to 0.
pub fn sig6(x: f64) -> String {
    if x.abs() < 1e-12 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).clamp(0, 12) as usize;
    format!("{x:.decimals$}")
}

/// One CSV document from a header and rows of preformatted cells.
pub fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 20.0;
const MARGIN_BOTTOM: f64 = 50.0;

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn from_points(points: &[(f64, f64)]) -> Frame {
        let mut f = Frame {
            x_min: f64::INFINITY,
            x_max: f64::NEG_INFINITY,
            y_min: f64::INFINITY,
            y_max: f64::NEG_INFINITY,
        };
        for &(x, y) in points {
            f.x_min = f.x_min.min(x);
            f.x_max = f.x_max.max(x);
            f.y_min = f.y_min.min(y);
            f.y_max = f.y_max.max(y);
        }
        if f.x_max <= f.x_min {
            f.x_max = f.x_min + 1.0;
        }
        if f.y_max <= f.y_min {
            f.y_max = f.y_min + 1.0;
        }
        f
    }

    fn sx(&self, x: f64) -> f64 {
        MARGIN_LEFT + (x - self.x_min) / (self.x_max - self.x_min)
            * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn sy(&self, y: f64) -> f64 {
        HEIGHT - MARGIN_BOTTOM
            - (y - self.y_min) / (self.y_max - self.y_min) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

fn svg_open(out: &mut String) {
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         font-family=\"monospace\" font-size=\"12\">\n"
    ));
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
}

fn svg_axes(out: &mut String, frame: &Frame, x_label: &str, y_label: &str) {
    let x0 = MARGIN_LEFT;
    let x1 = WIDTH - MARGIN_RIGHT;
    let y0 = HEIGHT - MARGIN_BOTTOM;
    let y1 = MARGIN_TOP;
    out.push_str(&format!(
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n\
         <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>\n"
    ));
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = frame.x_min + t * (frame.x_max - frame.x_min);
        let yv = frame.y_min + t * (frame.y_max - frame.y_min);
        let xs = frame.sx(xv);
        let ys = frame.sy(yv);
        out.push_str(&format!(
            "<line x1=\"{xs:.2}\" y1=\"{y0}\" x2=\"{xs:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
            y0 + 4.0
        ));
        out.push_str(&format!(
            "<text x=\"{xs:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>\n",
            y0 + 18.0,
            sig6(xv)
        ));
        out.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{ys:.2}\" x2=\"{x0}\" y2=\"{ys:.2}\" stroke=\"black\"/>\n",
            x0 - 4.0
        ));
        out.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>\n",
            x0 - 8.0,
            ys + 4.0,
            sig6(yv)
        ));
    }
    out.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{x_label}</text>\n",
        (x0 + x1) / 2.0,
        HEIGHT - 12.0
    ));
    out.push_str(&format!(
        "<text x=\"16\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2})\">{y_label}</text>\n",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    ));
}

/// Line plot; the curve is split wherever consecutive x values jump by more
/// than 1.5 sample steps (a dropped pole sample).
pub fn svg_line_plot(points: &[(f64, f64)], x_label: &str, y_label: &str) -> String {
    let mut out = String::new();
    svg_open(&mut out);
    let frame = Frame::from_points(points);
    svg_axes(&mut out, &frame, x_label, y_label);
    let step = if points.len() > 1 {
        (frame.x_max - frame.x_min) / (points.len() - 1) as f64
    } else {
        1.0
    };
    let mut segment: Vec<String> = Vec::new();
    let mut last_x = f64::NEG_INFINITY;
    let flush = |segment: &mut Vec<String>, out: &mut String| {
        if segment.len() > 1 {
            out.push_str(&format!(
                "<polyline points=\"{}\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\"/>\n",
                segment.join(" ")
            ));
        }
        segment.clear();
    };
    for &(x, y) in points {
        if last_x.is_finite() && (x - last_x) > 1.5 * step {
            flush(&mut segment, &mut out);
        }
        segment.push(format!("{:.2},{:.2}", frame.sx(x), frame.sy(y)));
        last_x = x;
    }
    flush(&mut segment, &mut out);
    out.push_str("</svg>\n");
    out
}

/// Scatter plot for spot diagrams.
pub fn svg_scatter(points: &[(f64, f64)], x_label: &str, y_label: &str) -> String {
    let mut out = String::new();
    svg_open(&mut out);
    let frame = Frame::from_points(points);
    svg_axes(&mut out, &frame, x_label, y_label);
    for &(x, y) in points {
        out.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"1.5\" fill=\"steelblue\"/>\n",
            frame.sx(x),
            frame.sy(y)
        ));
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig6_formatting() {
        assert_eq!(sig6(450.0), "450.000");
        assert_eq!(sig6(0.464), "0.464000");
        assert_eq!(sig6(124.1), "124.100");
        assert_eq!(sig6(-2030.46), "-2030.46");
        assert_eq!(sig6(97618656.0), "97618656");
        assert_eq!(sig6(0.0), "0");
    }

    #[test]
    fn csv_shape() {
        let doc = csv(&["a", "b"], &[vec!["1".into(), "2".into()]]);
        assert_eq!(doc, "a,b\n1,2\n");
    }

    #[test]
    fn svg_has_labels_and_polyline() {
        let pts: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, (i * i) as f64)).collect();
        let svg = svg_line_plot(&pts, "alpha", "gamma");
        assert!(svg.contains("polyline"));
        assert!(svg.contains(">alpha<"));
        assert!(svg.contains(">gamma<"));
    }
}
