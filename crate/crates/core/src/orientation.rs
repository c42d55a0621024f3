//! Admissible particle orientations.
//!
//! A particle labels its ports by applying a grid symmetry to the
//! canonical labelling.  The symmetries that fix the vertex set and the
//! layer structure are exactly the sixteen maps generated by swapping
//! the two in-layer axes, negating either in-layer axis and negating
//! the layer axis.  (No other signed axis permutation maps the twelve
//! neighbour directions onto themselves; see the exhaustive test
//! below.)
//!
//! An orientation acts on displacements; [`Orientation::port_direction`]
//! gives the world displacement behind a local port label and
//! [`Orientation::port_of_direction`] inverts that.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::grid::{port_for_delta, Delta, PortId};
use crate::Error;

/// One of the sixteen admissible orientations.
///
/// The action on a displacement first swaps the in-layer axes when
/// `swap_axes` is set, then negates the selected axes.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub struct Orientation {
    swap_axes: bool,
    negate_x: bool,
    negate_y: bool,
    flip_z: bool,
}

impl Orientation {
    pub const IDENTITY: Orientation = Orientation {
        swap_axes: false,
        negate_x: false,
        negate_y: false,
        flip_z: false,
    };

    pub const COUNT: usize = 16;

    /// All sixteen orientations, in index order.
    pub const ALL: [Orientation; 16] = {
        let mut all = [Orientation::IDENTITY; 16];
        let mut i = 0u8;
        while i < 16 {
            all[i as usize] = Orientation {
                swap_axes: i & 8 != 0,
                negate_x: i & 4 != 0,
                negate_y: i & 2 != 0,
                flip_z: i & 1 != 0,
            };
            i += 1;
        }
        all
    };

    pub fn new(swap_axes: bool, negate_x: bool, negate_y: bool, flip_z: bool) -> Orientation {
        Orientation {
            swap_axes,
            negate_x,
            negate_y,
            flip_z,
        }
    }

    /// Index in `0..16`: bit 3 swap, bit 2 negate-x, bit 1 negate-y,
    /// bit 0 flip-z.  The identity is index 0.
    pub fn index(&self) -> u8 {
        (self.swap_axes as u8) << 3
            | (self.negate_x as u8) << 2
            | (self.negate_y as u8) << 1
            | self.flip_z as u8
    }

    pub fn from_index(i: u8) -> Result<Orientation, Error> {
        if i < 16 {
            Ok(Orientation::ALL[i as usize])
        } else {
            Err(Error::InvalidOrientation(i))
        }
    }

    /// Whether the orientation mirrors the layer axis.
    pub fn flips_layers(&self) -> bool {
        self.flip_z
    }

    /// Applies the orientation to a displacement.
    pub fn apply(&self, d: Delta) -> Delta {
        let (x, y) = if self.swap_axes {
            (d.y2, d.x2)
        } else {
            (d.x2, d.y2)
        };
        Delta::new(
            if self.negate_x { -x } else { x },
            if self.negate_y { -y } else { y },
            if self.flip_z { -d.z } else { d.z },
        )
    }

    /// World displacement of the port this particle labels `l`.
    pub fn port_direction(&self, l: PortId) -> Delta {
        self.apply(l.direction())
    }

    /// The local label of the port pointing in world direction `d`.
    pub fn port_of_direction(&self, d: Delta) -> Option<PortId> {
        port_for_delta(self.inverse().apply(d))
    }

    /// Function composition: `a.compose(b)` applies `b` first, then `a`.
    pub fn compose(&self, other: Orientation) -> Orientation {
        let probe = [Delta::new(2, 0, 0), Delta::new(0, 2, 0), Delta::new(1, 1, 1)];
        for cand in Orientation::ALL {
            if probe
                .iter()
                .all(|&d| cand.apply(d) == self.apply(other.apply(d)))
            {
                return cand;
            }
        }
        unreachable!("composition of admissible orientations is admissible");
    }

    pub fn inverse(&self) -> Orientation {
        for cand in Orientation::ALL {
            if self.compose_is_identity(cand) {
                return cand;
            }
        }
        unreachable!("every admissible orientation has an inverse");
    }

    fn compose_is_identity(&self, cand: Orientation) -> bool {
        let probe = [Delta::new(2, 0, 0), Delta::new(0, 2, 0), Delta::new(1, 1, 1)];
        probe.iter().all(|&d| self.apply(cand.apply(d)) == d)
    }
}

impl Default for Orientation {
    fn default() -> Self {
        Orientation::IDENTITY
    }
}

impl TryFrom<u8> for Orientation {
    type Error = Error;
    fn try_from(i: u8) -> Result<Orientation, Error> {
        Orientation::from_index(i)
    }
}

impl From<Orientation> for u8 {
    fn from(o: Orientation) -> u8 {
        o.index()
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ω{}", self.index())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn dirs() -> [Delta; 12] {
        PortId::ALL.map(|a| a.direction())
    }

    #[test]
    fn identity_has_index_zero_and_fixes_everything() {
        assert_eq!(Orientation::IDENTITY.index(), 0);
        for d in dirs() {
            assert_eq!(Orientation::IDENTITY.apply(d), d);
        }
        for l in PortId::ALL {
            assert_eq!(Orientation::IDENTITY.port_direction(l), l.direction());
            assert_eq!(Orientation::IDENTITY.port_of_direction(l.direction()), Some(l));
        }
    }

    #[test]
    fn sixteen_distinct_actions() {
        let actions: BTreeSet<Vec<Delta>> = Orientation::ALL
            .iter()
            .map(|o| dirs().iter().map(|&d| o.apply(d)).collect())
            .collect();
        assert_eq!(actions.len(), 16);
    }

    #[test]
    fn every_orientation_permutes_the_direction_set() {
        let all: BTreeSet<Delta> = dirs().into_iter().collect();
        for o in Orientation::ALL {
            let image: BTreeSet<Delta> = dirs().iter().map(|&d| o.apply(d)).collect();
            assert_eq!(image, all, "{o}");
            // The in-layer/vertical split is preserved.
            for l in PortId::ALL {
                assert_eq!(o.port_direction(l).z == 0, l.is_lateral());
            }
        }
    }

    /// Exhaustive check that the sixteen orientations are exactly the
    /// signed axis permutations preserving the neighbour directions.
    ///
    /// Works in doubled-everything coordinates (`x2`, `y2`, `2z`) where
    /// signed permutations act componentwise; the twelve directions are
    /// the axis vectors of length 2 and the (±1, ±1, ±2) corners.
    #[test]
    fn admissible_maps_are_exactly_the_signed_permutations_fixing_directions() {
        let embed = |d: Delta| [d.x2, d.y2, 2 * d.z];
        let direction_set: BTreeSet<[i64; 3]> = dirs().iter().map(|&d| embed(d)).collect();

        let mut admissible_actions: BTreeSet<Vec<[i64; 3]>> = BTreeSet::new();
        for perm in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
            for signs in 0..8u8 {
                let sign = [
                    if signs & 4 != 0 { -1 } else { 1 },
                    if signs & 2 != 0 { -1 } else { 1 },
                    if signs & 1 != 0 { -1 } else { 1 },
                ];
                let apply = |v: [i64; 3]| {
                    [
                        sign[0] * v[perm[0]],
                        sign[1] * v[perm[1]],
                        sign[2] * v[perm[2]],
                    ]
                };
                let image: BTreeSet<[i64; 3]> =
                    direction_set.iter().map(|&v| apply(v)).collect();
                if image == direction_set {
                    admissible_actions
                        .insert(direction_set.iter().map(|&v| apply(v)).collect());
                }
            }
        }

        let ours: BTreeSet<Vec<[i64; 3]>> = Orientation::ALL
            .iter()
            .map(|o| {
                direction_set
                    .iter()
                    .map(|&v| {
                        let d = Delta::new(v[0], v[1], v[2] / 2);
                        embed(o.apply(d))
                    })
                    .collect()
            })
            .collect();

        assert_eq!(admissible_actions.len(), 16);
        assert_eq!(admissible_actions, ours);
    }

    #[test]
    fn index_round_trips() {
        for o in Orientation::ALL {
            assert_eq!(Orientation::from_index(o.index()).unwrap(), o);
        }
        assert!(Orientation::from_index(16).is_err());
        let json = serde_json::to_string(&Orientation::ALL[13]).unwrap();
        assert_eq!(json, "13");
        let back: Orientation = serde_json::from_str(&json).unwrap();
        assert_eq!(back, Orientation::ALL[13]);
    }

    #[test]
    fn composition_is_a_group() {
        let id = Orientation::IDENTITY;
        for a in Orientation::ALL {
            assert_eq!(a.compose(id), a);
            assert_eq!(id.compose(a), a);
            assert_eq!(a.compose(a.inverse()), id);
            assert_eq!(a.inverse().compose(a), id);
        }
    }

    proptest! {
        #[test]
        fn compose_matches_sequential_application(
            a in 0u8..16, b in 0u8..16, l in 0u8..12
        ) {
            let (a, b) = (Orientation::ALL[a as usize], Orientation::ALL[b as usize]);
            let d = PortId::new(l).unwrap().direction();
            prop_assert_eq!(a.compose(b).apply(d), a.apply(b.apply(d)));
        }

        #[test]
        fn composition_is_associative(a in 0u8..16, b in 0u8..16, c in 0u8..16) {
            let (a, b, c) = (
                Orientation::ALL[a as usize],
                Orientation::ALL[b as usize],
                Orientation::ALL[c as usize],
            );
            prop_assert_eq!(a.compose(b).compose(c), a.compose(b.compose(c)));
        }

        #[test]
        fn port_lookup_round_trips(o in 0u8..16, l in 0u8..12) {
            let o = Orientation::ALL[o as usize];
            let l = PortId::new(l).unwrap();
            prop_assert_eq!(o.port_of_direction(o.port_direction(l)), Some(l));
        }
    }
}
