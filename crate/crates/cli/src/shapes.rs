//! Parsing of generator specs from the command line.

use anyhow::{anyhow, bail, Context, Result};
use fcc_matter::config::RectLayer;
use fcc_matter::grid::Coord;

/// Parses a stack spec like `3x3@0;2x2@1+0,0`.
///
/// Each `;`-separated segment is `WIDTHxHEIGHT@LAYER[+DU,DV]`: a
/// width×height rectangle of cells on the given layer, offset by
/// `(DU, DV)` cells (default `0,0`).  A leading `z` on the layer
/// number is accepted (`@z1`).
pub fn parse_rect_spec(spec: &str) -> Result<Vec<RectLayer>> {
    spec.split(';')
        .map(|segment| {
            let segment = segment.trim();
            let (size, rest) = segment
                .split_once('@')
                .ok_or_else(|| anyhow!("segment {segment:?} is missing '@layer'"))?;
            let (w, h) = size
                .split_once('x')
                .ok_or_else(|| anyhow!("segment {segment:?} needs WIDTHxHEIGHT"))?;
            let (layer, offset) = match rest.split_once('+') {
                Some((layer, offset)) => (layer, Some(offset)),
                None => (rest, None),
            };
            let (u0, v0) = match offset {
                None => (0, 0),
                Some(pair) => {
                    let (du, dv) = pair
                        .split_once(',')
                        .ok_or_else(|| anyhow!("offset {pair:?} needs DU,DV"))?;
                    (
                        du.trim().parse().context("offset DU")?,
                        dv.trim().parse().context("offset DV")?,
                    )
                }
            };
            Ok(RectLayer {
                z: layer
                    .trim()
                    .trim_start_matches('z')
                    .parse()
                    .context("layer number")?,
                u0,
                v0,
                width: w.trim().parse().context("rectangle width")?,
                height: h.trim().parse().context("rectangle height")?,
            })
        })
        .collect()
}

/// Parses circle centers like `0,0,0;1,1,1` (doubled in-layer
/// coordinates and layer).
pub fn parse_centers(spec: &str) -> Result<Vec<Coord>> {
    spec.split(';')
        .map(|segment| {
            let parts: Vec<i64> = segment
                .split(',')
                .map(|n| n.trim().parse().context("center coordinate"))
                .collect::<Result<_>>()?;
            let [x2, y2, z] = parts.as_slice() else {
                bail!("center {segment:?} needs X2,Y2,Z");
            };
            Coord::new(*x2, *y2, *z).map_err(|e| anyhow!("center {segment:?}: {e}"))
        })
        .collect()
}

/// Stacked circle centers above the origin cell, one per layer.
pub fn default_centers(layers: u32) -> Vec<Coord> {
    (0..layers as i64)
        .map(|z| {
            let half = z.rem_euclid(2);
            Coord::new(half, half, z).expect("parity by construction")
        })
        .collect()
}
