//! Plain SVG figures: layouts, flow fields and wind roses.

use std::fmt::Write;

use farmlayout::{Boundary, FlowFieldGrid, Point, WindRose};

const WIDTH: f64 = 800.0;
const PAD: f64 = 20.0;

/// Maps plan coordinates (m, y up) into the SVG canvas (px, y down).
struct Canvas {
    min: Point,
    scale: f64,
    height: f64,
}

impl Canvas {
    fn fit(min: Point, max: Point) -> Self {
        let span_x = (max.x - min.x).max(1.0);
        let span_y = (max.y - min.y).max(1.0);
        let scale = (WIDTH - 2.0 * PAD) / span_x;
        Self {
            min,
            scale,
            height: span_y * scale + 2.0 * PAD,
        }
    }

    fn map(&self, p: Point) -> (f64, f64) {
        (
            PAD + (p.x - self.min.x) * self.scale,
            self.height - PAD - (p.y - self.min.y) * self.scale,
        )
    }

    fn open(&self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{:.0}\" viewBox=\"0 0 {WIDTH} {:.1}\">\n",
            self.height, self.height
        )
    }
}

fn polygon(canvas: &Canvas, boundary: &Boundary, out: &mut String) {
    let pts: Vec<String> = boundary
        .vertices()
        .iter()
        .map(|&p| {
            let (x, y) = canvas.map(p);
            format!("{x:.1},{y:.1}")
        })
        .collect();
    let _ = writeln!(
        out,
        "<polygon points=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>",
        pts.join(" ")
    );
}

fn dots(canvas: &Canvas, positions: &[Point], radius: f64, fill: &str, out: &mut String) {
    for &p in positions {
        let (x, y) = canvas.map(p);
        let _ = writeln!(out, "<circle cx=\"{x:.1}\" cy=\"{y:.1}\" r=\"{radius}\" fill=\"{fill}\"/>");
    }
}

/// Boundary outline with the turbine positions; `initial` is drawn faintly.
pub fn layout_svg(boundary: &Boundary, positions: &[Point], initial: Option<&[Point]>) -> String {
    let (lo, hi) = boundary.bounding_box();
    let canvas = Canvas::fit(lo, hi);
    let mut out = canvas.open();
    polygon(&canvas, boundary, &mut out);
    if let Some(init) = initial {
        dots(&canvas, init, 3.0, "#bbbbbb", &mut out);
    }
    dots(&canvas, positions, 4.0, "#c0392b", &mut out);
    out.push_str("</svg>\n");
    out
}

/// Colour ramp from deep blue (slow) to yellow (free stream).
fn ramp(t: f64) -> String {
    const STOPS: [(f64, [f64; 3]); 4] = [
        (0.0, [48.0, 18.0, 110.0]),
        (0.4, [33.0, 120.0, 160.0]),
        (0.75, [90.0, 200.0, 100.0]),
        (1.0, [250.0, 230.0, 40.0]),
    ];
    let t = t.clamp(0.0, 1.0);
    let i = STOPS.iter().rposition(|(s, _)| *s <= t).unwrap_or(0).min(STOPS.len() - 2);
    let (s0, c0) = STOPS[i];
    let (s1, c1) = STOPS[i + 1];
    let f = (t - s0) / (s1 - s0);
    let c: Vec<u8> = (0..3).map(|k| (c0[k] + f * (c1[k] - c0[k])).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

pub fn flow_field_svg(grid: &FlowFieldGrid, boundary: &Boundary, positions: &[Point], free_speed: f64) -> String {
    let half = 0.5 * grid.cell_size;
    let lo = Point::new(grid.origin.x - half, grid.origin.y - half);
    let hi = grid.point(grid.nx - 1, grid.ny - 1);
    let canvas = Canvas::fit(lo, Point::new(hi.x + half, hi.y + half));
    let cell = grid.cell_size * canvas.scale;
    let slowest = grid.speeds.iter().copied().fold(free_speed, f64::min);
    let span = (free_speed - slowest).max(1e-9);
    let mut out = canvas.open();
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let p = grid.point(i, j);
            let (x, y) = canvas.map(Point::new(p.x - half, p.y + half));
            let colour = ramp((grid.speed(i, j) - slowest) / span);
            let _ = writeln!(
                out,
                "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{colour}\"/>",
                cell + 0.05,
                cell + 0.05
            );
        }
    }
    polygon(&canvas, boundary, &mut out);
    dots(&canvas, positions, 2.5, "black", &mut out);
    out.push_str("</svg>\n");
    out
}

/// Wedges with radius proportional to bin frequency, north up.
pub fn rose_svg(rose: &WindRose) -> String {
    let size = 500.0;
    let c = size / 2.0;
    let peak = rose.bins().iter().map(|b| b.frequency).fold(0.0, f64::max).max(1e-12);
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">\n"
    );
    let _ = writeln!(out, "<circle cx=\"{c}\" cy=\"{c}\" r=\"{:.1}\" fill=\"none\" stroke=\"#999\"/>", c - PAD);
    for b in rose.bins() {
        let r = (c - PAD) * b.frequency / peak;
        let edge = |deg: f64| {
            let a = deg.to_radians();
            (c + r * a.sin(), c - r * a.cos())
        };
        let (x0, y0) = edge(b.center_deg - 5.0);
        let (x1, y1) = edge(b.center_deg + 5.0);
        let _ = writeln!(
            out,
            "<path d=\"M {c} {c} L {x0:.2} {y0:.2} A {r:.2} {r:.2} 0 0 1 {x1:.2} {y1:.2} Z\" fill=\"#2e86c1\" stroke=\"white\" stroke-width=\"0.5\"/>"
        );
    }
    let _ = writeln!(out, "<text x=\"{c}\" y=\"14\" text-anchor=\"middle\" font-size=\"12\">N</text>");
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ramp_endpoints() {
        assert_eq!(ramp(0.0), "#30126e");
        assert_eq!(ramp(1.0), "#fae628");
        assert_eq!(ramp(2.0), ramp(1.0));
    }

    #[test]
    fn layout_figure_has_every_turbine() {
        let b = Boundary::rectangle(1000.0, 500.0).unwrap();
        let svg = layout_svg(&b, &[Point::new(1.0, 1.0), Point::new(500.0, 250.0)], None);
        assert_eq!(svg.matches("<circle").count(), 2);
        assert!(svg.starts_with("<svg"));
    }
}
