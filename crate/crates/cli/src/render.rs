//! Static per-layer rendering of configurations and final states.
//!
//! Both emitters draw one panel per occupied layer, all sharing one
//! bounding box so vertically stacked structure lines up across
//! panels.  Text panels use one column per half-step so the
//! half-cell offset between consecutive layers stays visible.

use std::collections::BTreeMap;
use std::fmt::Write;

use fcc_matter::config::Configuration;
use fcc_matter::grid::{Coord, PortId};

/// Optional decorations: a highlighted leader and a short center
/// label per particle (identifier, tag, ...).
#[derive(Default)]
pub struct Annotations {
    pub leader: Option<Coord>,
    pub labels: BTreeMap<Coord, String>,
}

struct Bounds {
    min_x2: i64,
    max_x2: i64,
    min_y2: i64,
    max_y2: i64,
    layers: Vec<i64>,
}

fn bounds(world: &Configuration) -> Bounds {
    let xs: Vec<i64> = world.coords().map(|p| p.x2()).collect();
    let ys: Vec<i64> = world.coords().map(|p| p.y2()).collect();
    let mut layers: Vec<i64> = world.coords().map(|p| p.z()).collect();
    layers.sort_unstable();
    layers.dedup();
    Bounds {
        min_x2: xs.iter().copied().min().expect("nonempty"),
        max_x2: xs.iter().copied().max().expect("nonempty"),
        min_y2: ys.iter().copied().min().expect("nonempty"),
        max_y2: ys.iter().copied().max().expect("nonempty"),
        layers,
    }
}

pub fn render_text(world: &Configuration, ann: &Annotations) -> String {
    let b = bounds(world);
    let mut out = String::new();
    for &z in &b.layers {
        writeln!(out, "layer z={z}").unwrap();
        let mut y2 = b.max_y2;
        while y2 >= b.min_y2 {
            if (y2 - z).rem_euclid(2) != 0 {
                y2 -= 1;
                continue;
            }
            let mut row = format!("{y2:>4} ");
            for x2 in b.min_x2..=b.max_x2 {
                if (x2 - z).rem_euclid(2) != 0 {
                    row.push_str("   ");
                    continue;
                }
                let p = Coord::new(x2, y2, z).expect("parity checked");
                let cell = if world.contains(p) {
                    let label = ann.labels.get(&p).cloned().unwrap_or_else(|| "#".into());
                    if ann.leader == Some(p) {
                        format!("[{label}]")
                    } else {
                        format!(" {label} ")
                    }
                } else {
                    " . ".into()
                };
                row.push_str(&format!("{cell:>3}"));
            }
            out.push_str(row.trim_end());
            out.push('\n');
            y2 -= 1;
        }
    }
    out
}

pub fn render_svg(world: &Configuration, ann: &Annotations) -> String {
    const S: i64 = 24; // pixels per half-step
    const MARGIN: i64 = 40;
    const GAP: i64 = 48;
    let b = bounds(world);
    let panel_w = (b.max_x2 - b.min_x2) * S + 2 * MARGIN;
    let panel_h = (b.max_y2 - b.min_y2) * S + 2 * MARGIN;
    let total_w = panel_w * b.layers.len() as i64 + GAP * (b.layers.len() as i64 - 1);

    let mut out = String::new();
    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{total_w}\" height=\"{h}\" \
         viewBox=\"0 0 {total_w} {h}\" font-family=\"monospace\">",
        h = panel_h + 20
    )
    .unwrap();
    for (panel, &z) in b.layers.iter().enumerate() {
        let x0 = panel as i64 * (panel_w + GAP);
        writeln!(out, "<g transform=\"translate({x0},20)\">").unwrap();
        writeln!(
            out,
            "<text x=\"6\" y=\"0\" font-size=\"13\">z = {z}</text>"
        )
        .unwrap();
        for p in world.coords().filter(|p| p.z() == z) {
            let px = (p.x2() - b.min_x2) * S + MARGIN;
            let py = (b.max_y2 - p.y2()) * S + MARGIN;
            let omega = world.orientation(p).expect("occupied");
            let stroke = if ann.leader == Some(p) {
                "stroke=\"#c00\" stroke-width=\"2.5\""
            } else {
                "stroke=\"#333\" stroke-width=\"1\""
            };
            writeln!(
                out,
                "<circle cx=\"{px}\" cy=\"{py}\" r=\"15\" fill=\"#f6f6f6\" {stroke}/>"
            )
            .unwrap();
            for l in PortId::ALL {
                let d = omega.port_direction(l);
                let (radius, size, fill) = if l.is_lateral() {
                    (10, 8, "#333")
                } else if d.z > 0 {
                    (7, 6, "#000")
                } else {
                    (7, 6, "#999")
                };
                let tx = px + d.x2 * radius;
                let ty = py - d.y2 * radius;
                writeln!(
                    out,
                    "<text x=\"{tx}\" y=\"{ty}\" font-size=\"{size}\" fill=\"{fill}\" \
                     text-anchor=\"middle\" dominant-baseline=\"middle\">{}</text>",
                    l.index()
                )
                .unwrap();
            }
            if let Some(label) = ann.labels.get(&p) {
                writeln!(
                    out,
                    "<text x=\"{px}\" y=\"{ty}\" font-size=\"11\" font-weight=\"bold\" \
                     text-anchor=\"middle\">{label}</text>",
                    ty = py + 28
                )
                .unwrap();
            }
        }
        writeln!(out, "</g>").unwrap();
    }
    writeln!(out, "</svg>").unwrap();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x2: i64, y2: i64, z: i64) -> Coord {
        Coord::new(x2, y2, z).unwrap()
    }

    #[test]
    fn text_render_marks_occupied_and_leader_cells() {
        let world = Configuration::new([c(0, 0, 0), c(2, 0, 0), c(1, 1, 1)]).unwrap();
        let ann = Annotations {
            leader: Some(c(0, 0, 0)),
            labels: BTreeMap::from([(c(2, 0, 0), "7".into())]),
        };
        let text = render_text(&world, &ann);
        assert!(text.contains("layer z=0"));
        assert!(text.contains("layer z=1"));
        assert!(text.contains("[#]"));
        assert!(text.contains("7"));
    }

    #[test]
    fn svg_render_has_one_panel_per_layer_and_port_digits() {
        let world = Configuration::new([c(0, 0, 0), c(1, 1, 1)]).unwrap();
        let svg = render_svg(&world, &Annotations::default());
        assert_eq!(svg.matches("z = ").count(), 2);
        assert_eq!(svg.matches("<circle").count(), 2);
        // 12 port digits per particle.
        assert_eq!(svg.matches("dominant-baseline").count(), 24);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
