use std::fmt::Write;

use super::{CertificateDocument, FamilyDocument, IoError, Payload};
use crate::constructions::Wedge;

#[derive(Debug, Clone, PartialEq)]
pub struct SvgOptions {
    pub size: f64,
    /// Fraction of the scene extent added on each side.
    pub margin: f64,
}

impl Default for SvgOptions {
    fn default() -> Self {
        Self {
            size: 800.0,
            margin: 0.08,
        }
    }
}

struct Frame {
    x0: f64,
    y1: f64,
    scale: f64,
    bounds: [f64; 4],
}

impl Frame {
    fn map(&self, p: &[f64]) -> (f64, f64) {
        ((p[0] - self.x0) * self.scale, (self.y1 - p[1]) * self.scale)
    }

    /// Part of the line `a + t u` inside the scene box.
    fn clip(&self, a: &[f64], u: &[f64]) -> Option<([f64; 2], [f64; 2])> {
        let [xmin, ymin, xmax, ymax] = self.bounds;
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for (p, d, min, max) in [(a[0], u[0], xmin, xmax), (a[1], u[1], ymin, ymax)] {
            if d.abs() < 1e-15 {
                if p < min || p > max {
                    return None;
                }
                continue;
            }
            let (t1, t2) = ((min - p) / d, (max - p) / d);
            lo = lo.max(t1.min(t2));
            hi = hi.min(t1.max(t2));
        }
        (lo < hi).then(|| {
            (
                [a[0] + lo * u[0], a[1] + lo * u[1]],
                [a[0] + hi * u[0], a[1] + hi * u[1]],
            )
        })
    }
}

fn n(x: f64) -> String {
    let s = format!("{x:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

/// Deterministic SVG for a planar family, optionally with the flats of a
/// transversal certificate and inner tangent wedges.
pub fn render_svg(
    family: &FamilyDocument,
    cert: Option<&CertificateDocument>,
    wedges: &[Wedge],
    opts: &SvgOptions,
) -> Result<String, IoError> {
    if family.ambient_dim != 2 {
        return Err(IoError::Schema(format!(
            "can only render planar scenes, got dimension {}",
            family.ambient_dim
        )));
    }
    family.to_family()?;
    let flats = match cert.map(|c| &c.payload) {
        Some(Payload::Transversal(t)) => t.flats.clone(),
        Some(_) => {
            return Err(IoError::Schema(
                "only transversal certificates can be drawn".into(),
            ))
        }
        None => vec![],
    };
    if flats.iter().any(|fl| fl.anchor.len() != 2) {
        return Err(IoError::Schema("certificate flats are not planar".into()));
    }

    let mut b = [
        f64::INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::NEG_INFINITY,
    ];
    let mut grow = |x: f64, y: f64, r: f64| {
        b[0] = b[0].min(x - r);
        b[1] = b[1].min(y - r);
        b[2] = b[2].max(x + r);
        b[3] = b[3].max(y + r);
    };
    for m in &family.members {
        for p in &m.parts {
            grow(p.center[0], p.center[1], p.radius);
        }
    }
    for fl in flats.iter().filter(|fl| fl.basis.is_empty()) {
        grow(fl.anchor[0], fl.anchor[1], 0.0);
    }
    let extent = (b[2] - b[0]).max(b[3] - b[1]).max(1e-9);
    let pad = extent * opts.margin;
    let (cx, cy) = ((b[0] + b[2]) / 2.0, (b[1] + b[3]) / 2.0);
    let half = extent / 2.0 + pad;
    let frame = Frame {
        x0: cx - half,
        y1: cy + half,
        scale: opts.size / (2.0 * half),
        bounds: [cx - half, cy - half, cx + half, cy + half],
    };

    let mut s = String::new();
    let sz = n(opts.size);
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{sz}" height="{sz}" viewBox="0 0 {sz} {sz}">"#).unwrap();
    writeln!(s, r#"<rect width="{sz}" height="{sz}" fill="white"/>"#).unwrap();

    for (i, w) in wedges.iter().enumerate() {
        writeln!(
            s,
            r##"<g class="wedge" id="wedge-{i}" stroke="#c07000" stroke-width="1" fill="none">"##
        )
        .unwrap();
        for line in &w.bounding_lines {
            if let Some((p, q)) = frame.clip(line.anchor(), &line.basis()[0]) {
                let ((x1, y1), (x2, y2)) = (frame.map(&p), frame.map(&q));
                writeln!(
                    s,
                    r#"<line x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
                    n(x1),
                    n(y1),
                    n(x2),
                    n(y2)
                )
                .unwrap();
            }
        }
        let (ax, ay) = frame.map(&w.apex);
        writeln!(
            s,
            r##"<circle cx="{}" cy="{}" r="3" fill="#c07000"/>"##,
            n(ax),
            n(ay)
        )
        .unwrap();
        writeln!(s, "</g>").unwrap();
    }

    for (i, m) in family.members.iter().enumerate() {
        let open = m.open.unwrap_or(family.open_flag);
        let dash = if open {
            r#" stroke-dasharray="4 3""#
        } else {
            ""
        };
        writeln!(s, r#"<g class="member" id="member-{i}" fill="none"{dash}>"#).unwrap();
        for (j, p) in m.parts.iter().enumerate() {
            let (x, y) = frame.map(&p.center);
            let (stroke, width) = if j == m.core_index {
                ("#1f4e9c", "1.5")
            } else {
                ("#7a9cd6", "0.75")
            };
            writeln!(
                s,
                r#"<circle cx="{}" cy="{}" r="{}" stroke="{stroke}" stroke-width="{width}"/>"#,
                n(x),
                n(y),
                n(p.radius * frame.scale)
            )
            .unwrap();
        }
        writeln!(s, "</g>").unwrap();
    }

    for (i, fl) in flats.iter().enumerate() {
        if fl.basis.is_empty() {
            let (x, y) = frame.map(&fl.anchor);
            writeln!(
                s,
                r##"<circle class="flat" id="flat-{i}" cx="{}" cy="{}" r="3" fill="#b00020"/>"##,
                n(x),
                n(y)
            )
            .unwrap();
        } else if let Some((p, q)) = frame.clip(&fl.anchor, &fl.basis[0]) {
            let ((x1, y1), (x2, y2)) = (frame.map(&p), frame.map(&q));
            writeln!(
                s,
                r##"<line class="flat" id="flat-{i}" x1="{}" y1="{}" x2="{}" y2="{}" stroke="#b00020" stroke-width="1.5"/>"##,
                n(x1),
                n(y1),
                n(x2),
                n(y2)
            )
            .unwrap();
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    use crate::constructions::counterexample_discs;

    #[test]
    fn clipping_keeps_lines_inside() {
        let f = Frame {
            x0: 0.0,
            y1: 1.0,
            scale: 1.0,
            bounds: [0.0, 0.0, 1.0, 1.0],
        };
        let (p, q) = f.clip(&[0.5, 0.5], &[1.0, 0.0]).unwrap();
        assert_eq!((p, q), ([0.0, 0.5], [1.0, 0.5]));
        assert!(f.clip(&[0.0, 2.0], &[1.0, 0.0]).is_none());
    }

    #[test]
    fn rendering_is_a_pure_function() {
        let doc = FamilyDocument::from_family(&counterexample_discs(4).unwrap(), BTreeMap::new());
        let a = render_svg(&doc, None, &[], &SvgOptions::default()).unwrap();
        let b = render_svg(&doc, None, &[], &SvgOptions::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.matches("<circle").count(), 4);
        assert!(a.contains("stroke-dasharray"));
    }
}
