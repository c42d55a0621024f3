//! Exact integer geometry of the face-centred cubic (FCC) grid.
//!
//! Vertices live on stacked square lattices: layer `k` holds points
//! `(i, j, k)` with integer `i, j` when `k` is even and half-integer
//! `i, j` when `k` is odd.  To stay in integer arithmetic the in-layer
//! coordinates are stored doubled (`x2 = 2i`, `y2 = 2j`); the layer
//! index is stored as-is.  Every vertex therefore satisfies
//! `x2 ≡ y2 ≡ z (mod 2)`.
//!
//! Each vertex has twelve neighbours: four in its own layer (unit steps
//! along one axis) and four in each adjacent layer (half steps along
//! both axes).  Ports are numbered `0..12` in a fixed canonical order;
//! [`PortId::direction`] gives the displacement of each port.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::Error;

/// A displacement between grid vertices, in doubled in-layer units.
///
/// Also used for relative positions carried in protocol messages and
/// for wrapped identifier triplets, neither of which are required to
/// satisfy the vertex parity coupling.
#[derive(
    Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default, Serialize, Deserialize,
)]
#[serde(into = "(i64, i64, i64)", from = "(i64, i64, i64)")]
pub struct Delta {
    pub x2: i64,
    pub y2: i64,
    pub z: i64,
}

impl Delta {
    pub const ZERO: Delta = Delta { x2: 0, y2: 0, z: 0 };

    pub const fn new(x2: i64, y2: i64, z: i64) -> Delta {
        Delta { x2, y2, z }
    }

    /// Displacement after following port `a` of the canonical labelling.
    pub fn step(self, a: PortId) -> Delta {
        self + a.direction()
    }
}

impl From<Delta> for (i64, i64, i64) {
    fn from(d: Delta) -> Self {
        (d.x2, d.y2, d.z)
    }
}

impl From<(i64, i64, i64)> for Delta {
    fn from(t: (i64, i64, i64)) -> Self {
        Delta::new(t.0, t.1, t.2)
    }
}

impl Add for Delta {
    type Output = Delta;
    fn add(self, rhs: Delta) -> Delta {
        Delta::new(self.x2 + rhs.x2, self.y2 + rhs.y2, self.z + rhs.z)
    }
}

impl Sub for Delta {
    type Output = Delta;
    fn sub(self, rhs: Delta) -> Delta {
        Delta::new(self.x2 - rhs.x2, self.y2 - rhs.y2, self.z - rhs.z)
    }
}

impl Neg for Delta {
    type Output = Delta;
    fn neg(self) -> Delta {
        Delta::new(-self.x2, -self.y2, -self.z)
    }
}

impl fmt::Display for Delta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {})",
            fmt_half(self.x2),
            fmt_half(self.y2),
            self.z
        )
    }
}

/// Formats a doubled coordinate as the underlying (half-)integer.
pub fn fmt_half(doubled: i64) -> String {
    if doubled % 2 == 0 {
        format!("{}", doubled / 2)
    } else {
        format!("{:.1}", doubled as f64 / 2.0)
    }
}

/// An occupied-grid vertex in doubled coordinates.
///
/// Invariant: `x2 ≡ y2 ≡ z (mod 2)` (integer in-layer coordinates on
/// even layers, half-integer on odd layers).
#[derive(
    Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize,
)]
#[serde(into = "(i64, i64, i64)", try_from = "(i64, i64, i64)")]
pub struct Coord {
    x2: i64,
    y2: i64,
    z: i64,
}

impl Coord {
    pub const ORIGIN: Coord = Coord { x2: 0, y2: 0, z: 0 };

    pub fn new(x2: i64, y2: i64, z: i64) -> Result<Coord, Error> {
        let parity = z.rem_euclid(2);
        if x2.rem_euclid(2) != parity || y2.rem_euclid(2) != parity {
            return Err(Error::OffLattice { x2, y2, z });
        }
        Ok(Coord { x2, y2, z })
    }

    pub fn x2(&self) -> i64 {
        self.x2
    }

    pub fn y2(&self) -> i64 {
        self.y2
    }

    /// Layer index.
    pub fn z(&self) -> i64 {
        self.z
    }

    /// Displacement `self - other`.
    pub fn delta_from(&self, other: Coord) -> Delta {
        Delta::new(self.x2 - other.x2, self.y2 - other.y2, self.z - other.z)
    }

    /// Translates by an arbitrary displacement, rejecting off-lattice results.
    pub fn translate(&self, d: Delta) -> Result<Coord, Error> {
        Coord::new(self.x2 + d.x2, self.y2 + d.y2, self.z + d.z)
    }

    /// The vertex reached through port `a` of the canonical labelling.
    pub fn neighbor(&self, a: PortId) -> Coord {
        let d = a.direction();
        // Directions preserve the parity coupling, no validation needed.
        Coord {
            x2: self.x2 + d.x2,
            y2: self.y2 + d.y2,
            z: self.z + d.z,
        }
    }

    /// All twelve neighbours, in canonical port order.
    pub fn neighbors(&self) -> [Coord; 12] {
        PortId::ALL.map(|a| self.neighbor(a))
    }
}

impl TryFrom<(i64, i64, i64)> for Coord {
    type Error = Error;
    fn try_from(t: (i64, i64, i64)) -> Result<Coord, Error> {
        Coord::new(t.0, t.1, t.2)
    }
}

impl From<Coord> for (i64, i64, i64) {
    fn from(c: Coord) -> Self {
        (c.x2, c.y2, c.z)
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", fmt_half(self.x2), fmt_half(self.y2), self.z)
    }
}

/// One of the twelve ports of a particle, `0..12`.
///
/// In the canonical labelling ports `0..4` are the in-layer contacts
/// (west, north, east, south), `4..8` reach the layer below and `8..12`
/// the layer above.
#[derive(
    Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize,
)]
#[serde(into = "u8", try_from = "u8")]
pub struct PortId(u8);

/// Canonical port displacements, indexed by port number.
const DIRECTIONS: [Delta; 12] = [
    Delta::new(-2, 0, 0),
    Delta::new(0, 2, 0),
    Delta::new(2, 0, 0),
    Delta::new(0, -2, 0),
    Delta::new(-1, 1, -1),
    Delta::new(1, 1, -1),
    Delta::new(1, -1, -1),
    Delta::new(-1, -1, -1),
    Delta::new(-1, 1, 1),
    Delta::new(1, 1, 1),
    Delta::new(1, -1, 1),
    Delta::new(-1, -1, 1),
];

/// Port with the negated displacement, indexed by port number.
const OPPOSITE: [u8; 12] = [2, 3, 0, 1, 10, 11, 8, 9, 6, 7, 4, 5];

impl PortId {
    pub const COUNT: usize = 12;

    pub const ALL: [PortId; 12] = {
        let mut all = [PortId(0); 12];
        let mut i = 0;
        while i < 12 {
            all[i] = PortId(i as u8);
            i += 1;
        }
        all
    };

    pub fn new(a: u8) -> Result<PortId, Error> {
        if a < 12 {
            Ok(PortId(a))
        } else {
            Err(Error::InvalidPort(a))
        }
    }

    pub fn index(&self) -> usize {
        self.0 as usize
    }

    /// Canonical displacement of this port.
    pub fn direction(&self) -> Delta {
        DIRECTIONS[self.0 as usize]
    }

    /// The port whose canonical displacement is the negation of this one.
    pub fn opposite(&self) -> PortId {
        PortId(OPPOSITE[self.0 as usize])
    }

    /// True for the four same-layer ports.
    pub fn is_lateral(&self) -> bool {
        self.0 < 4
    }

    /// True for ports reaching the layer below (canonically `4..8`).
    pub fn is_down(&self) -> bool {
        (4..8).contains(&self.0)
    }

    /// True for ports reaching the layer above (canonically `8..12`).
    pub fn is_up(&self) -> bool {
        self.0 >= 8
    }

    /// Whether two lateral ports are adjacent in the four-step cycle
    /// `0,1,2,3`; adjacent labels point 90° apart.
    pub fn lateral_successive(self, other: PortId) -> bool {
        debug_assert!(self.is_lateral() && other.is_lateral());
        (self.0 + 1) % 4 == other.0 || (other.0 + 1) % 4 == self.0
    }

    /// Whether two ports of the same vertical quadruple are adjacent in
    /// its four-step cycle; adjacent labels reach adjacent vertices.
    pub fn vertical_successive(self, other: PortId) -> bool {
        debug_assert!(self.is_down() == other.is_down() && !self.is_lateral());
        let base = if self.is_down() { 4 } else { 8 };
        let (a, b) = (self.0 - base, other.0 - base);
        (a + 1) % 4 == b || (b + 1) % 4 == a
    }
}

impl TryFrom<u8> for PortId {
    type Error = Error;
    fn try_from(a: u8) -> Result<PortId, Error> {
        PortId::new(a)
    }
}

impl From<PortId> for u8 {
    fn from(a: PortId) -> u8 {
        a.0
    }
}

impl fmt::Display for PortId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The canonical port whose displacement equals `d`, if any.
pub fn port_for_delta(d: Delta) -> Option<PortId> {
    DIRECTIONS
        .iter()
        .position(|&dir| dir == d)
        .map(|i| PortId(i as u8))
}

/// Grid distance between two vertices.
///
/// Closed form: with `di = |i - i'|`, `dj = |j - j'|`, `dk = |k - k'|`,
/// the distance is `max(0, di - dk/2) + max(0, dj - dk/2) + dk`.
/// Agrees with breadth-first search on the twelve-neighbour graph.
pub fn distance(u: Coord, v: Coord) -> u64 {
    let dx = (u.x2 - v.x2).abs();
    let dy = (u.y2 - v.y2).abs();
    let dz = (u.z - v.z).abs();
    let a = (dx - dz).max(0);
    let b = (dy - dz).max(0);
    debug_assert!((a + b) % 2 == 0);
    ((a + b) / 2 + dz) as u64
}

/// Manhattan distance inside a single layer.
pub fn layer_distance(u: Coord, v: Coord) -> Result<u64, Error> {
    if u.z != v.z {
        return Err(Error::DifferentLayers { a: u.z, b: v.z });
    }
    Ok((((u.x2 - v.x2).abs() + (u.y2 - v.y2).abs()) / 2) as u64)
}

/// True when `u` and `v` are joined by a grid edge.
pub fn adjacent(u: Coord, v: Coord) -> bool {
    distance(u, v) == 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::{BTreeMap, BTreeSet, VecDeque};

    fn c(x2: i64, y2: i64, z: i64) -> Coord {
        Coord::new(x2, y2, z).unwrap()
    }

    /// Independent oracle: breadth-first search over the neighbour graph,
    /// restricted to a bounding box large enough to contain a geodesic.
    fn bfs_distance(from: Coord, to: Coord) -> u64 {
        let slack = 2 * (distance(from, to) as i64 + 2);
        let inside = |p: Coord| {
            (p.x2() - from.x2()).abs() <= 2 * slack
                && (p.y2() - from.y2()).abs() <= 2 * slack
                && (p.z() - from.z()).abs() <= slack
        };
        let mut dist: BTreeMap<Coord, u64> = BTreeMap::new();
        let mut queue = VecDeque::new();
        dist.insert(from, 0);
        queue.push_back(from);
        while let Some(p) = queue.pop_front() {
            let d = dist[&p];
            if p == to {
                return d;
            }
            for q in p.neighbors() {
                if inside(q) && !dist.contains_key(&q) {
                    dist.insert(q, d + 1);
                    queue.push_back(q);
                }
            }
        }
        unreachable!("target not reached");
    }

    // ── Lattice membership ──────────────────────────────────────────────

    #[test]
    fn parity_coupling_is_enforced() {
        assert!(Coord::new(0, 0, 0).is_ok());
        assert!(Coord::new(1, 1, 1).is_ok());
        assert!(Coord::new(-3, 5, -1).is_ok());
        assert!(Coord::new(1, 0, 0).is_err());
        assert!(Coord::new(2, 2, 1).is_err());
        assert!(Coord::new(0, 1, 1).is_err());
    }

    #[test]
    fn translate_rejects_parity_breaking_deltas() {
        let p = c(0, 0, 0);
        assert_eq!(p.translate(Delta::new(2, 0, 0)).unwrap(), c(2, 0, 0));
        assert_eq!(p.translate(Delta::new(1, 1, 1)).unwrap(), c(1, 1, 1));
        assert!(p.translate(Delta::new(1, 0, 0)).is_err());
    }

    // ── Canonical ports ─────────────────────────────────────────────────

    #[test]
    fn canonical_directions_match_layer_split() {
        assert_eq!(PortId::new(0).unwrap().direction(), Delta::new(-2, 0, 0));
        assert_eq!(PortId::new(1).unwrap().direction(), Delta::new(0, 2, 0));
        assert_eq!(PortId::new(2).unwrap().direction(), Delta::new(2, 0, 0));
        assert_eq!(PortId::new(3).unwrap().direction(), Delta::new(0, -2, 0));
        assert_eq!(PortId::new(9).unwrap().direction(), Delta::new(1, 1, 1));
        for a in PortId::ALL {
            let d = a.direction();
            assert_eq!(a.is_lateral(), d.z == 0);
            assert_eq!(a.is_down(), d.z == -1);
            assert_eq!(a.is_up(), d.z == 1);
        }
    }

    #[test]
    fn twelve_distinct_unit_directions() {
        let dirs: BTreeSet<Delta> = PortId::ALL.iter().map(|a| a.direction()).collect();
        assert_eq!(dirs.len(), 12);
        let o = c(0, 0, 0);
        for a in PortId::ALL {
            assert_eq!(distance(o, o.neighbor(a)), 1);
        }
    }

    #[test]
    fn opposite_ports_negate_directions() {
        for a in PortId::ALL {
            assert_eq!(a.opposite().direction(), -a.direction());
            assert_eq!(a.opposite().opposite(), a);
        }
        assert_eq!(PortId::new(0).unwrap().opposite(), PortId::new(2).unwrap());
        assert_eq!(PortId::new(4).unwrap().opposite(), PortId::new(10).unwrap());
        assert_eq!(PortId::new(6).unwrap().opposite(), PortId::new(8).unwrap());
    }

    #[test]
    fn port_for_delta_round_trips() {
        for a in PortId::ALL {
            assert_eq!(port_for_delta(a.direction()), Some(a));
        }
        assert_eq!(port_for_delta(Delta::new(2, 2, 0)), None);
        assert_eq!(port_for_delta(Delta::ZERO), None);
    }

    #[test]
    fn port_range_is_validated() {
        assert!(PortId::new(11).is_ok());
        assert!(PortId::new(12).is_err());
    }

    #[test]
    fn successive_lateral_ports_point_90_degrees_apart() {
        let p = |a| PortId::new(a).unwrap();
        assert!(p(0).lateral_successive(p(1)));
        assert!(p(3).lateral_successive(p(0)));
        assert!(!p(0).lateral_successive(p(2)));
        assert!(p(4).vertical_successive(p(5)));
        assert!(p(7).vertical_successive(p(4)));
        assert!(!p(4).vertical_successive(p(6)));
        assert!(p(8).vertical_successive(p(11)));
        assert!(!p(9).vertical_successive(p(11)));
    }

    // ── Distance ────────────────────────────────────────────────────────

    #[test]
    fn distance_closed_form_examples() {
        // (0,0,0) to (2,3,0): no layer change, Manhattan 5.
        assert_eq!(distance(c(0, 0, 0), c(4, 6, 0)), 5);
        // (0,0,0) to (2.5,0.5,1): one layer change absorbs the j offset.
        assert_eq!(distance(c(0, 0, 0), c(5, 1, 1)), 3);
        assert_eq!(distance(c(0, 0, 0), c(0, 0, 0)), 0);
        // Pure layer climb.
        assert_eq!(distance(c(0, 0, 0), c(0, 0, 2)), 2);
        assert_eq!(distance(c(0, 0, 0), c(1, 1, 3)), 3);
    }

    #[test]
    fn distance_matches_bfs_on_sample_pairs() {
        let sources = [c(0, 0, 0), c(1, 1, 1), c(-1, 3, -1)];
        let targets = [
            c(0, 0, 0),
            c(4, 6, 0),
            c(5, 1, 1),
            c(-2, 4, 2),
            c(3, -3, 3),
            c(0, 0, 4),
            c(-6, -2, 0),
        ];
        for &u in &sources {
            for &v in &targets {
                assert_eq!(distance(u, v), bfs_distance(u, v), "{u} -> {v}");
            }
        }
    }

    #[test]
    fn layer_distance_is_manhattan_within_a_layer() {
        assert_eq!(layer_distance(c(0, 0, 0), c(4, 6, 0)).unwrap(), 5);
        assert_eq!(layer_distance(c(1, 1, 1), c(5, -1, 1)).unwrap(), 3);
        assert!(layer_distance(c(0, 0, 0), c(1, 1, 1)).is_err());
    }

    #[test]
    fn lexicographic_order_follows_i_then_j_then_k() {
        // (1,0,0) > (0.5,0.5,1) > (0,1,0) in (i, j, k) order.
        let a = Delta::new(2, 0, 0);
        let b = Delta::new(1, 1, 1);
        let d = Delta::new(0, 2, 0);
        assert!(a > b && b > d);
        assert!(Delta::new(0, 0, 1) > Delta::ZERO);
    }

    // ── Properties ──────────────────────────────────────────────────────

    fn arb_coord(radius: i64) -> impl Strategy<Value = Coord> {
        (-radius..=radius, -radius..=radius, -radius..=radius).prop_map(|(i, j, k)| {
            let half = k.rem_euclid(2);
            Coord::new(2 * i + half, 2 * j + half, k).unwrap()
        })
    }

    proptest! {
        #[test]
        fn distance_is_a_metric(u in arb_coord(4), v in arb_coord(4), w in arb_coord(4)) {
            prop_assert_eq!(distance(u, v), distance(v, u));
            prop_assert_eq!(distance(u, v) == 0, u == v);
            prop_assert!(distance(u, w) <= distance(u, v) + distance(v, w));
            prop_assert!(distance(u, v) >= (u.z() - v.z()).unsigned_abs());
        }

        #[test]
        fn distance_agrees_with_bfs(u in arb_coord(2), v in arb_coord(2)) {
            prop_assert_eq!(distance(u, v), bfs_distance(u, v));
        }

        #[test]
        fn neighbor_round_trip(u in arb_coord(8), a in 0u8..12) {
            let a = PortId::new(a).unwrap();
            prop_assert_eq!(u.neighbor(a).neighbor(a.opposite()), u);
        }

        #[test]
        fn adjacency_is_distance_one(u in arb_coord(3), v in arb_coord(3)) {
            let neighbours: BTreeSet<Coord> = u.neighbors().into_iter().collect();
            prop_assert_eq!(neighbours.contains(&v), adjacent(u, v));
        }
    }
}
