//! Minimal SVG scatter/line plots.

use std::fmt::Write;

const W: f64 = 480.0;
const H: f64 = 360.0;
const PAD: f64 = 40.0;

pub struct Plot {
    x: [f64; 2],
    y: [f64; 2],
    body: String,
    title: String,
}

fn widen(r: [f64; 2]) -> [f64; 2] {
    let span = (r[1] - r[0]).abs();
    let m = if span > 0.0 { 0.05 * span } else { 0.5 };
    [r[0] - m, r[1] + m]
}

impl Plot {
    pub fn new(title: &str, x: [f64; 2], y: [f64; 2]) -> Self {
        Plot {
            x: widen(x),
            y: widen(y),
            body: String::new(),
            title: title.into(),
        }
    }

    fn px(&self, p: [f64; 2]) -> (f64, f64) {
        let sx = PAD + (p[0] - self.x[0]) / (self.x[1] - self.x[0]) * (W - 2.0 * PAD);
        let sy = H - PAD - (p[1] - self.y[0]) / (self.y[1] - self.y[0]) * (H - 2.0 * PAD);
        (sx, sy)
    }

    fn points_attr(&self, pts: &[[f64; 2]]) -> String {
        pts.iter()
            .map(|&p| {
                let (a, b) = self.px(p);
                format!("{a:.2},{b:.2}")
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn polyline(&mut self, pts: &[[f64; 2]], color: &str) {
        let attr = self.points_attr(pts);
        let _ = writeln!(
            self.body,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1" points="{attr}"/>"#
        );
    }

    pub fn polygon(&mut self, pts: &[[f64; 2]], color: &str) {
        let attr = self.points_attr(pts);
        let _ = writeln!(
            self.body,
            r#"<polygon fill="{color}" fill-opacity="0.15" stroke="{color}" stroke-width="1.5" points="{attr}"/>"#
        );
    }

    pub fn dots(&mut self, pts: &[[f64; 2]], color: &str) {
        for &p in pts {
            let (a, b) = self.px(p);
            let _ = writeln!(
                self.body,
                r#"<circle cx="{a:.2}" cy="{b:.2}" r="1" fill="{color}"/>"#
            );
        }
    }

    pub fn render(&self, xlabel: &str, ylabel: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
        );
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            W - 2.0 * PAD,
            H - 2.0 * PAD
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
            W / 2.0,
            self.title
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">{xlabel}</text>"#,
            W / 2.0,
            H - 10.0
        );
        let _ = writeln!(
            s,
            r#"<text x="12" y="{}" font-size="12" transform="rotate(-90 12 {})">{ylabel}</text>"#,
            H / 2.0,
            H / 2.0
        );
        for (v, anchor, pos) in [
            (self.x[0], "start", (PAD, H - PAD + 14.0)),
            (self.x[1], "end", (W - PAD, H - PAD + 14.0)),
        ] {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="{anchor}" font-size="10">{v:.3}</text>"#,
                pos.0, pos.1
            );
        }
        for (v, y) in [(self.y[0], H - PAD), (self.y[1], PAD + 10.0)] {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{y}" text-anchor="end" font-size="10">{v:.3}</text>"#,
                PAD - 4.0
            );
        }
        s.push_str(&self.body);
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_well_formed_document() {
        let mut p = Plot::new("t", [0.0, 1.0], [0.0, 0.0]);
        p.polyline(&[[0.0, 0.0], [1.0, 0.0]], "blue");
        p.dots(&[[0.5, 0.0]], "red");
        let s = p.render("x", "y");
        assert!(s.starts_with("<svg"));
        assert!(s.ends_with("</svg>\n"));
        assert_eq!(s.matches("<circle").count(), 1);
    }
}
