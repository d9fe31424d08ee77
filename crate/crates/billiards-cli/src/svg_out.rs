//! Static SVG plot of a sweep: the exponent polyline over alpha with the
//! analytic bracket drawn as a shaded band. Self-contained, no external
//! assets.

use billiards::lyapunov::SweepResult;
use std::fmt::Write as _;

use crate::CliError;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 20.0;
const MARGIN_B: f64 = 50.0;

struct Axis {
    min: f64,
    max: f64,
    offset: f64,
    span: f64,
    flip: bool,
}

impl Axis {
    fn map(&self, x: f64) -> f64 {
        let t = if self.max > self.min { (x - self.min) / (self.max - self.min) } else { 0.5 };
        if self.flip {
            self.offset + self.span * (1.0 - t)
        } else {
            self.offset + self.span * t
        }
    }

    fn ticks(&self, count: usize) -> Vec<f64> {
        (0..=count)
            .map(|i| self.min + (self.max - self.min) * i as f64 / count as f64)
            .collect()
    }
}

pub fn sweep_svg(sweep: &SweepResult) -> Result<String, CliError> {
    let valid: Vec<_> = sweep
        .entries
        .iter()
        .filter(|e| e.lambda1.is_some() && e.lower.is_some() && e.upper.is_some())
        .collect();
    if valid.is_empty() {
        return Err(CliError::config("sweep has no successful grid points to plot"));
    }
    let xs: Vec<f64> = valid.iter().map(|e| e.alpha).collect();
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for e in &valid {
        y_min = y_min.min(e.lower.unwrap());
        y_max = y_max.max(e.upper.unwrap());
    }
    let pad = 0.05 * (y_max - y_min).max(1e-9);
    let x_axis = Axis {
        min: xs.iter().cloned().fold(f64::INFINITY, f64::min),
        max: xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        offset: MARGIN_L,
        span: WIDTH - MARGIN_L - MARGIN_R,
        flip: false,
    };
    let y_axis = Axis {
        min: y_min - pad,
        max: y_max + pad,
        offset: MARGIN_T,
        span: HEIGHT - MARGIN_T - MARGIN_B,
        flip: true,
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         font-family=\"sans-serif\" font-size=\"13\">"
    );
    let _ = writeln!(svg, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");

    // bracket band: upper bound forward, lower bound backward
    let mut band = String::from("M");
    for e in &valid {
        let _ = write!(band, " {:.2},{:.2}", x_axis.map(e.alpha), y_axis.map(e.upper.unwrap()));
    }
    for e in valid.iter().rev() {
        let _ = write!(band, " {:.2},{:.2}", x_axis.map(e.alpha), y_axis.map(e.lower.unwrap()));
    }
    let _ = writeln!(svg, "<path d=\"{band} Z\" fill=\"#aecbe8\" fill-opacity=\"0.6\" stroke=\"none\"/>");

    // exponent polyline
    let mut line = String::new();
    for e in &valid {
        let _ = write!(line, "{:.2},{:.2} ", x_axis.map(e.alpha), y_axis.map(e.lambda1.unwrap()));
    }
    let _ = writeln!(
        svg,
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#1f4e8c\" stroke-width=\"2\"/>",
        line.trim_end()
    );

    // axes
    let x0 = MARGIN_L;
    let x1 = WIDTH - MARGIN_R;
    let y0 = HEIGHT - MARGIN_B;
    let y1 = MARGIN_T;
    let _ = writeln!(svg, "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>");
    let _ = writeln!(svg, "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>");
    for t in x_axis.ticks(5) {
        let x = x_axis.map(t);
        let _ = writeln!(svg, "<line x1=\"{x:.2}\" y1=\"{y0}\" x2=\"{x:.2}\" y2=\"{}\" stroke=\"black\"/>", y0 + 5.0);
        let _ = writeln!(
            svg,
            "<text x=\"{x:.2}\" y=\"{}\" text-anchor=\"middle\">{t:.4}</text>",
            y0 + 20.0
        );
    }
    for t in y_axis.ticks(5) {
        let y = y_axis.map(t);
        let _ = writeln!(svg, "<line x1=\"{}\" y1=\"{y:.2}\" x2=\"{x0}\" y2=\"{y:.2}\" stroke=\"black\"/>", x0 - 5.0);
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\">{t:.4}</text>",
            x0 - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"{}\" text-anchor=\"middle\">alpha</text>",
        (x0 + x1) / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"18\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.2})\">lambda_1</text>",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );
    let _ = writeln!(svg, "</svg>");
    Ok(svg)
}
