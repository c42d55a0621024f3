//! Periodic distance-ℓ colorings of the grid.
//!
//! For a distance bound `ℓ ≥ 1` the coloring assigns each vertex a
//! color below `(ℓ+1)·m` with `m = ⌈(ℓ+1)²/2⌉`, such that vertices at
//! grid distance at most `ℓ` receive distinct colors.  The color is a
//! layer band `mod(k, ℓ+1)·m` plus an in-layer linear form
//! `mod(i + c·j, m)` (with `i, j` shifted by ½ on odd layers).
//!
//! The in-layer multiplier `c` is `ℓ` when `ℓ` is odd or equals 2, and
//! `ℓ+1` for even `ℓ ≥ 4`.  With `s = ℓ+1`, the multiplier must make
//! the lattice `{(a, b) : a + c·b ≡ 0 mod m}` free of nonzero vectors
//! of Manhattan norm ≤ s−1 after accounting for the half-step layer
//! coupling.  For even `ℓ ≥ 4` the multiplier `ℓ` admits the short
//! vector `(1, ℓ-1)` (e.g. `ℓ=4`: `1 + 4·3 = 13 ≡ 0 mod 13`), while
//! `ℓ+1` squares to `-1 mod m` and yields a Gaussian-integer lattice
//! whose shortest Manhattan norm is `s`; the exhaustive patch checks
//! below pin this down for `ℓ ≤ 4`.
//!
//! Everything is computed in doubled in-layer coordinates so that odd
//! layers stay in exact integers.

use serde::Serialize;

use crate::grid::{Coord, Delta};
use crate::Error;

/// Parameters of the distance-`ell` coloring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ColorParams {
    ell: u64,
    modulus: u64,
}

impl ColorParams {
    pub fn new(ell: u64) -> Result<ColorParams, Error> {
        if ell == 0 {
            return Err(Error::InvalidColoringBound(ell));
        }
        let s = ell + 1;
        Ok(ColorParams {
            ell,
            modulus: (s * s).div_ceil(2),
        })
    }

    pub fn ell(&self) -> u64 {
        self.ell
    }

    /// In-layer period `m = ⌈(ℓ+1)²/2⌉`.
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Total number of colors, `(ℓ+1)·m`.
    pub fn palette_size(&self) -> u64 {
        (self.ell + 1) * self.modulus
    }

    fn multiplier(&self) -> i64 {
        if self.ell % 2 == 1 || self.ell == 2 {
            self.ell as i64
        } else {
            self.ell as i64 + 1
        }
    }

    /// Color of a grid vertex.
    pub fn color(&self, p: Coord) -> u64 {
        self.color_triplet(Delta::new(p.x2(), p.y2(), p.z()))
    }

    /// Color of a possibly wrapped triplet.
    ///
    /// Defined whenever the two in-layer components share a parity;
    /// branches on that parity (not the layer's) so that wrapping the
    /// layer index never changes the result.
    pub fn color_triplet(&self, t: Delta) -> u64 {
        debug_assert_eq!(
            t.x2.rem_euclid(2),
            t.y2.rem_euclid(2),
            "in-layer components must share a parity"
        );
        let m = self.modulus as i64;
        let c = self.multiplier();
        let (x2, y2) = if t.x2.rem_euclid(2) == 0 {
            (t.x2, t.y2)
        } else {
            (t.x2 - 1, t.y2 - 1)
        };
        let doubled = (x2 + c * y2).rem_euclid(2 * m);
        debug_assert_eq!(doubled % 2, 0);
        let in_layer = (doubled / 2) as u64;
        let band = t.z.rem_euclid(self.ell as i64 + 1) as u64;
        band * self.modulus + in_layer
    }

    /// Canonical representative of a vertex modulo the coloring's
    /// periods: in-layer components mod `2m` (doubled), layer mod
    /// `ℓ+1`.  The result is a triplet, not necessarily a vertex.
    pub fn wrap(&self, t: Delta) -> Delta {
        let m2 = 2 * self.modulus as i64;
        Delta::new(
            t.x2.rem_euclid(m2),
            t.y2.rem_euclid(m2),
            t.z.rem_euclid(self.ell as i64 + 1),
        )
    }

    pub fn wrap_coord(&self, p: Coord) -> Delta {
        self.wrap(Delta::new(p.x2(), p.y2(), p.z()))
    }
}

/// Outcome of exhaustively checking a patch.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PatchReport {
    pub distinct_colors: u64,
    pub violation: Option<(Coord, Coord)>,
}

impl PatchReport {
    pub fn is_valid(&self) -> bool {
        self.violation.is_none()
    }
}

/// All nonzero displacements of grid distance ≤ `ell`, up to sign
/// (only lexicographically positive ones are listed).
pub fn ball_offsets(ell: u64) -> Vec<Delta> {
    let r = ell as i64;
    let mut out = Vec::new();
    for dz in -r..=r {
        let span = 2 * r - 2 * dz.abs() + dz.abs();
        let parity = dz.rem_euclid(2);
        for dx2 in -span..=span {
            if dx2.rem_euclid(2) != parity {
                continue;
            }
            for dy2 in -span..=span {
                if dy2.rem_euclid(2) != parity {
                    continue;
                }
                let d = Delta::new(dx2, dy2, dz);
                let a = (dx2.abs() - dz.abs()).max(0);
                let b = (dy2.abs() - dz.abs()).max(0);
                let dist = (a + b) / 2 + dz.abs();
                if dist as u64 <= ell && dist > 0 && d > Delta::ZERO {
                    out.push(d);
                }
            }
        }
    }
    out
}

/// Verifies distinctness of colors within distance `ℓ` over a patch of
/// `i_cells × j_cells` in-layer cells and `layers` consecutive layers
/// starting at the origin, and counts the colors used.
pub fn verify_patch(
    params: &ColorParams,
    i_cells: u64,
    j_cells: u64,
    layers: u64,
) -> PatchReport {
    let offsets = ball_offsets(params.ell());
    let mut colors = std::collections::BTreeSet::new();
    let mut violation = None;
    'outer: for z in 0..layers as i64 {
        let half = z.rem_euclid(2);
        for i in 0..i_cells as i64 {
            for j in 0..j_cells as i64 {
                let p = Coord::new(2 * i + half, 2 * j + half, z).expect("parity by construction");
                colors.insert(params.color(p));
                for &d in &offsets {
                    let Ok(q) = p.translate(d) else { continue };
                    let inside = (0..2 * i_cells as i64).contains(&q.x2())
                        && (0..2 * j_cells as i64).contains(&q.y2())
                        && (0..layers as i64).contains(&q.z());
                    if inside && params.color(p) == params.color(q) {
                        violation = Some((p, q));
                        break 'outer;
                    }
                }
            }
        }
    }
    PatchReport {
        distinct_colors: colors.len() as u64,
        violation,
    }
}
