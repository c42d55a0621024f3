//! Particle configurations: occupancy, adjacency, connectivity and
//! shape generators.
//!
//! A [`Configuration`] is a finite, connected set of occupied grid
//! vertices, each carrying an [`Orientation`].  Configurations are
//! immutable after construction; all queries are read-only.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::seq::IndexedRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::electability;
use crate::grid::{Coord, PortId};
use crate::orientation::Orientation;
use crate::Error;

/// A connected set of particles with per-particle orientations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Configuration {
    particles: BTreeMap<Coord, Orientation>,
}

/// Occupied neighbours of a particle, split by layer.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NeighborSplit {
    pub same_layer: Vec<Coord>,
    pub below: Vec<Coord>,
    pub above: Vec<Coord>,
}

impl Configuration {
    /// Builds a configuration with identity orientations.
    ///
    /// Rejects empty or disconnected sets; duplicates cannot arise
    /// because input coordinates are collected into a set.
    pub fn new(coords: impl IntoIterator<Item = Coord>) -> Result<Configuration, Error> {
        let particles: BTreeMap<Coord, Orientation> = coords
            .into_iter()
            .map(|c| (c, Orientation::IDENTITY))
            .collect();
        Self::validate(particles)
    }

    /// Builds a configuration from explicit coordinate/orientation pairs.
    pub fn with_orientations(
        coords: impl IntoIterator<Item = (Coord, Orientation)>,
    ) -> Result<Configuration, Error> {
        Self::validate(coords.into_iter().collect())
    }

    fn validate(particles: BTreeMap<Coord, Orientation>) -> Result<Configuration, Error> {
        if particles.is_empty() {
            return Err(Error::EmptyConfiguration);
        }
        let cfg = Configuration { particles };
        if !cfg.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(cfg)
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction rejects empty sets
    }

    pub fn contains(&self, p: Coord) -> bool {
        self.particles.contains_key(&p)
    }

    /// Occupied vertices in lexicographic order.
    pub fn coords(&self) -> impl Iterator<Item = Coord> + '_ {
        self.particles.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Coord, Orientation)> + '_ {
        self.particles.iter().map(|(&c, &o)| (c, o))
    }

    pub fn orientation(&self, p: Coord) -> Result<Orientation, Error> {
        self.particles
            .get(&p)
            .copied()
            .ok_or_else(|| Error::NotInConfiguration(p.to_string()))
    }

    /// True when every particle has the identity orientation.
    pub fn all_identity(&self) -> bool {
        self.particles.values().all(|&o| o == Orientation::IDENTITY)
    }

    /// Returns a copy with orientations drawn uniformly from the
    /// sixteen admissible ones.
    pub fn with_random_orientations(&self, rng: &mut impl Rng) -> Configuration {
        let particles = self
            .particles
            .keys()
            .map(|&c| (c, *Orientation::ALL.choose(rng).expect("nonempty")))
            .collect();
        Configuration { particles }
    }

    /// [`Self::with_random_orientations`] with a self-contained seeded
    /// generator.
    pub fn with_seeded_orientations(&self, seed: u64) -> Configuration {
        self.with_random_orientations(&mut ChaCha8Rng::seed_from_u64(seed))
    }

    /// Occupied neighbours of `p`, partitioned into same layer, layer
    /// below and layer above.
    pub fn neighbors_in(&self, p: Coord) -> Result<NeighborSplit, Error> {
        if !self.contains(p) {
            return Err(Error::NotInConfiguration(p.to_string()));
        }
        let mut split = NeighborSplit::default();
        for a in PortId::ALL {
            let q = p.neighbor(a);
            if self.contains(q) {
                if a.is_lateral() {
                    split.same_layer.push(q);
                } else if a.is_down() {
                    split.below.push(q);
                } else {
                    split.above.push(q);
                }
            }
        }
        Ok(split)
    }

    /// All occupied neighbours of `p`, in canonical port order.
    pub fn occupied_neighbors(&self, p: Coord) -> Vec<Coord> {
        p.neighbors()
            .into_iter()
            .filter(|q| self.contains(*q))
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        let Some(&start) = self.particles.keys().next() else {
            return true;
        };
        self.reachable_from(start).len() == self.particles.len()
    }

    fn reachable_from(&self, start: Coord) -> BTreeSet<Coord> {
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(p) = queue.pop_front() {
            for q in p.neighbors() {
                if self.contains(q) && seen.insert(q) {
                    queue.push_back(q);
                }
            }
        }
        seen
    }

    /// Hop distances from `p` within the occupied subgraph.
    pub fn hop_distances(&self, p: Coord) -> Result<BTreeMap<Coord, u64>, Error> {
        if !self.contains(p) {
            return Err(Error::NotInConfiguration(p.to_string()));
        }
        let mut dist = BTreeMap::from([(p, 0u64)]);
        let mut queue = VecDeque::from([p]);
        while let Some(u) = queue.pop_front() {
            let d = dist[&u];
            for v in u.neighbors() {
                if self.contains(v) && !dist.contains_key(&v) {
                    dist.insert(v, d + 1);
                    queue.push_back(v);
                }
            }
        }
        Ok(dist)
    }

    /// Greatest hop distance from `p` to any particle.
    pub fn eccentricity(&self, p: Coord) -> Result<u64, Error> {
        Ok(self.hop_distances(p)?.into_values().max().unwrap_or(0))
    }

    /// Diameter of the occupied subgraph (hop metric).
    pub fn diameter(&self) -> u64 {
        self.coords()
            .map(|p| self.eccentricity(p).expect("p is occupied"))
            .max()
            .unwrap_or(0)
    }

    /// The lexicographically greatest occupied vertex.
    pub fn lex_max(&self) -> Coord {
        *self.particles.keys().next_back().expect("nonempty")
    }

    /// The lexicographically least occupied vertex.
    pub fn lex_min(&self) -> Coord {
        *self.particles.keys().next().expect("nonempty")
    }
}

// ── Shape generators ───────────────────────────────────────────────────

/// One layer of a rectangle stack, in cell units.
///
/// Cell `(u, v)` of layer `z` is the vertex `(u + h, v + h, z)` with
/// `h = 0` on even layers and `h = ½` on odd ones, so stacked cells
/// with equal `(u, v)` are vertically adjacent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RectLayer {
    pub z: i64,
    pub u0: i64,
    pub v0: i64,
    pub width: u32,
    pub height: u32,
}

fn cell_to_coord(u: i64, v: i64, z: i64) -> Coord {
    let half = z.rem_euclid(2);
    Coord::new(2 * u + half, 2 * v + half, z).expect("cell parity matches layer")
}

/// Stack of axis-aligned rectangles, one per layer.
pub fn rect_stack(layers: &[RectLayer]) -> Result<Configuration, Error> {
    if layers.is_empty() {
        return Err(Error::InvalidShape("no layers".into()));
    }
    let mut coords = BTreeSet::new();
    for (t, layer) in layers.iter().enumerate() {
        if layer.width == 0 || layer.height == 0 {
            return Err(Error::InvalidShape(format!(
                "layer {} rectangle is empty",
                layer.z
            )));
        }
        if t > 0 && layer.z != layers[t - 1].z + 1 {
            return Err(Error::InvalidShape(
                "layer indices must be consecutive".into(),
            ));
        }
        for u in layer.u0..layer.u0 + layer.width as i64 {
            for v in layer.v0..layer.v0 + layer.height as i64 {
                coords.insert(cell_to_coord(u, v, layer.z));
            }
        }
    }
    Configuration::new(coords)
}

/// Stack of in-layer Manhattan balls with one center per consecutive
/// layer.
pub fn circle_stack(centers: &[Coord], radius: u64) -> Result<Configuration, Error> {
    if centers.is_empty() {
        return Err(Error::InvalidShape("no layers".into()));
    }
    if radius == 0 {
        return Err(Error::InvalidShape("radius must be at least 1".into()));
    }
    let mut coords = BTreeSet::new();
    for (t, &c) in centers.iter().enumerate() {
        if t > 0 && c.z() != centers[t - 1].z() + 1 {
            return Err(Error::InvalidShape(
                "layer indices must be consecutive".into(),
            ));
        }
        let r = radius as i64;
        for du in -r..=r {
            for dv in -(r - du.abs())..=(r - du.abs()) {
                let p = Coord::new(c.x2() + 2 * du, c.y2() + 2 * dv, c.z())
                    .expect("in-layer step keeps parity");
                coords.insert(p);
            }
        }
    }
    Configuration::new(coords)
}

/// Seeded random connected configuration grown by adjacent accretion.
pub fn random_connected(n: usize, seed: u64) -> Result<Configuration, Error> {
    if n == 0 {
        return Err(Error::EmptyConfiguration);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords = vec![Coord::ORIGIN];
    let mut occupied = BTreeSet::from([Coord::ORIGIN]);
    while coords.len() < n {
        let &p = coords.choose(&mut rng).expect("nonempty");
        let q = p.neighbor(PortId::new(rng.random_range(0..12)).expect("in range"));
        if occupied.insert(q) {
            coords.push(q);
        }
    }
    Configuration::new(occupied)
}

/// Seeded random configuration that passes the electability check,
/// grown by rejection-sampled accretion.
///
/// Each candidate accretion keeps the set connected by construction
/// and is accepted only if the grown set is still electable.  Fails
/// with [`Error::RetryBudgetExhausted`] if the budget of candidate
/// attempts runs out.
pub fn random_electable(n: usize, seed: u64) -> Result<Configuration, Error> {
    if n == 0 {
        return Err(Error::EmptyConfiguration);
    }
    let budget = 400 * n as u64 + 400;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords = vec![Coord::ORIGIN];
    let mut occupied = BTreeSet::from([Coord::ORIGIN]);
    let mut attempts = 0u64;
    while coords.len() < n {
        attempts += 1;
        if attempts > budget {
            return Err(Error::RetryBudgetExhausted(budget));
        }
        let &p = coords.choose(&mut rng).expect("nonempty");
        let q = p.neighbor(PortId::new(rng.random_range(0..12)).expect("in range"));
        if occupied.contains(&q) {
            continue;
        }
        occupied.insert(q);
        let candidate = Configuration::new(occupied.iter().copied())?;
        if electability::is_electable(&candidate).is_ok() {
            coords.push(q);
        } else {
            occupied.remove(&q);
        }
    }
    Configuration::new(occupied)
}

// ── Serialization ──────────────────────────────────────────────────────

/// On-disk form of a configuration.
///
/// JSON object with a `particles` array of `[x2, y2, z]` triples in
/// doubled in-layer coordinates, an optional parallel `orientations`
/// array of indices `0..16` (identity when absent) and an optional
/// scheduler `seed`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConfigFile {
    pub particles: Vec<Coord>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub orientations: Option<Vec<Orientation>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
}

impl ConfigFile {
    pub fn into_configuration(self) -> Result<Configuration, Error> {
        match self.orientations {
            None => Configuration::new(self.particles),
            Some(orients) => {
                if orients.len() != self.particles.len() {
                    return Err(Error::OrientationCountMismatch {
                        expected: self.particles.len(),
                        got: orients.len(),
                    });
                }
                Configuration::with_orientations(self.particles.into_iter().zip(orients))
            }
        }
    }

    pub fn from_configuration(cfg: &Configuration, seed: Option<u64>) -> ConfigFile {
        let particles: Vec<Coord> = cfg.coords().collect();
        let orientations = if cfg.all_identity() {
            None
        } else {
            Some(
                particles
                    .iter()
                    .map(|&p| cfg.orientation(p).expect("p is occupied"))
                    .collect(),
            )
        };
        ConfigFile {
            particles,
            orientations,
            seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(x2: i64, y2: i64, z: i64) -> Coord {
        Coord::new(x2, y2, z).unwrap()
    }

    #[test]
    fn construction_validates_shape() {
        assert!(Configuration::new([c(0, 0, 0)]).is_ok());
        assert_eq!(
            Configuration::new(Vec::<Coord>::new()).unwrap_err(),
            Error::EmptyConfiguration
        );
        // (0,0,0) and (2,0,0) are two steps apart: no edge.
        assert_eq!(
            Configuration::new([c(0, 0, 0), c(4, 0, 0)]).unwrap_err(),
            Error::Disconnected
        );
        assert!(Configuration::new([c(0, 0, 0), c(2, 0, 0)]).is_ok());
    }

    #[test]
    fn neighbor_split_examples() {
        let line = Configuration::new([c(-2, 0, 0), c(0, 0, 0), c(2, 0, 0)]).unwrap();
        let split = line.neighbors_in(c(0, 0, 0)).unwrap();
        assert_eq!(split.same_layer.len(), 2);
        assert!(split.below.is_empty() && split.above.is_empty());

        let single = Configuration::new([c(0, 0, 0)]).unwrap();
        let split = single.neighbors_in(c(0, 0, 0)).unwrap();
        assert!(split.same_layer.is_empty() && split.below.is_empty() && split.above.is_empty());

        let pair = Configuration::new([c(0, 0, 0), c(1, 1, 1)]).unwrap();
        let split = pair.neighbors_in(c(0, 0, 0)).unwrap();
        assert_eq!(split.above, vec![c(1, 1, 1)]);

        assert!(line.neighbors_in(c(0, 2, 0)).is_err());
    }

    #[test]
    fn hop_metric_on_small_shapes() {
        let single = Configuration::new([c(0, 0, 0)]).unwrap();
        assert_eq!(single.diameter(), 0);

        let line = Configuration::new([c(-2, 0, 0), c(0, 0, 0), c(2, 0, 0)]).unwrap();
        assert_eq!(line.diameter(), 2);
        assert_eq!(line.eccentricity(c(0, 0, 0)).unwrap(), 1);

        // An L of three particles: hop distance equals grid distance here.
        let ell = Configuration::new([c(0, 0, 0), c(2, 0, 0), c(2, 2, 0)]).unwrap();
        assert_eq!(ell.diameter(), 2);
    }

    #[test]
    fn lex_extremes() {
        let cfg = Configuration::new([c(0, 0, 0), c(2, 0, 0), c(1, 1, 1)]).unwrap();
        assert_eq!(cfg.lex_max(), c(2, 0, 0));
        assert_eq!(cfg.lex_min(), c(0, 0, 0));
    }

    #[test]
    fn rect_stack_counts_and_rejections() {
        // 3×3 ground layer with a 2×2 block on top: 13 particles.
        let cfg = rect_stack(&[
            RectLayer { z: 0, u0: 0, v0: 0, width: 3, height: 3 },
            RectLayer { z: 1, u0: 0, v0: 0, width: 2, height: 2 },
        ])
        .unwrap();
        assert_eq!(cfg.len(), 13);
        assert!(cfg.is_connected());

        let single = rect_stack(&[RectLayer { z: 0, u0: 5, v0: -2, width: 1, height: 1 }]).unwrap();
        assert_eq!(single.len(), 1);

        let pair = rect_stack(&[RectLayer { z: 0, u0: 0, v0: 0, width: 2, height: 1 }]).unwrap();
        assert_eq!(pair.len(), 2);
        assert!(pair.contains(c(0, 0, 0)) && pair.contains(c(2, 0, 0)));

        assert!(rect_stack(&[]).is_err());
        assert!(rect_stack(&[RectLayer { z: 0, u0: 0, v0: 0, width: 0, height: 3 }]).is_err());
        // Vertically disjoint rectangles are rejected as disconnected.
        let skewed = rect_stack(&[
            RectLayer { z: 0, u0: 0, v0: 0, width: 2, height: 2 },
            RectLayer { z: 1, u0: 10, v0: 10, width: 2, height: 2 },
        ]);
        assert_eq!(skewed.unwrap_err(), Error::Disconnected);
        let gap = rect_stack(&[
            RectLayer { z: 0, u0: 0, v0: 0, width: 2, height: 2 },
            RectLayer { z: 2, u0: 0, v0: 0, width: 2, height: 2 },
        ]);
        assert!(matches!(gap.unwrap_err(), Error::InvalidShape(_)));
    }

    #[test]
    fn odd_layer_cells_sit_between_even_cells() {
        let cfg = rect_stack(&[
            RectLayer { z: 0, u0: 0, v0: 0, width: 2, height: 2 },
            RectLayer { z: 1, u0: 0, v0: 0, width: 1, height: 1 },
        ])
        .unwrap();
        // The single layer-1 cell is adjacent to all four layer-0 cells.
        let top = c(1, 1, 1);
        assert!(cfg.contains(top));
        let split = cfg.neighbors_in(top).unwrap();
        assert_eq!(split.below.len(), 4);
    }

    #[test]
    fn circle_stack_is_the_manhattan_ball_per_layer() {
        let cfg = circle_stack(&[c(0, 0, 0)], 1).unwrap();
        assert_eq!(cfg.len(), 5);
        for q in [c(0, 0, 0), c(-2, 0, 0), c(2, 0, 0), c(0, 2, 0), c(0, -2, 0)] {
            assert!(cfg.contains(q));
        }

        let two = circle_stack(&[c(0, 0, 0), c(1, 1, 1)], 2).unwrap();
        assert_eq!(two.len(), 26); // two radius-2 balls of 13 vertices each
        assert!(two.is_connected());

        assert!(circle_stack(&[], 1).is_err());
        assert!(circle_stack(&[c(0, 0, 0)], 0).is_err());
        assert!(circle_stack(&[c(0, 0, 0), c(1, 1, 3)], 1).is_err());
    }

    #[test]
    fn random_connected_is_deterministic_and_connected() {
        let a = random_connected(20, 7).unwrap();
        let b = random_connected(20, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 20);
        assert!(a.is_connected());
        assert_ne!(a, random_connected(20, 8).unwrap());
        assert_eq!(random_connected(1, 0).unwrap().len(), 1);
    }

    #[test]
    fn random_electable_passes_the_checker() {
        for seed in 0..5 {
            let cfg = random_electable(15, seed).unwrap();
            assert_eq!(cfg.len(), 15);
            assert!(electability::is_electable(&cfg).is_ok());
        }
        let a = random_electable(12, 3).unwrap();
        let b = random_electable(12, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn config_file_round_trip() {
        let json = r#"{"particles": [[0,0,0],[2,0,0],[1,1,1]], "seed": 9}"#;
        let file: ConfigFile = serde_json::from_str(json).unwrap();
        let cfg = file.clone().into_configuration().unwrap();
        assert_eq!(cfg.len(), 3);
        assert!(cfg.all_identity());
        assert_eq!(file.seed, Some(9));

        let back = ConfigFile::from_configuration(&cfg, Some(9));
        let reparsed: ConfigFile = serde_json::from_str(&serde_json::to_string(&back).unwrap())
            .unwrap();
        assert_eq!(reparsed.into_configuration().unwrap(), cfg);

        let with_orients = r#"{"particles": [[0,0,0],[2,0,0]], "orientations": [0, 5]}"#;
        let cfg: ConfigFile = serde_json::from_str(with_orients).unwrap();
        let cfg = cfg.into_configuration().unwrap();
        assert_eq!(cfg.orientation(c(2, 0, 0)).unwrap(), Orientation::ALL[5]);

        let mismatched = r#"{"particles": [[0,0,0]], "orientations": []}"#;
        let cfg: ConfigFile = serde_json::from_str(mismatched).unwrap();
        assert!(matches!(
            cfg.into_configuration(),
            Err(Error::OrientationCountMismatch { .. })
        ));

        let off_lattice = r#"{"particles": [[1,0,0]]}"#;
        assert!(serde_json::from_str::<ConfigFile>(off_lattice).is_err());
    }

    proptest! {
        #[test]
        fn random_connected_invariants(n in 1usize..30, seed in 0u64..1000) {
            let cfg = random_connected(n, seed).unwrap();
            prop_assert_eq!(cfg.len(), n);
            prop_assert!(cfg.is_connected());
        }

        #[test]
        fn random_orientations_preserve_the_vertex_set(seed in 0u64..100) {
            let cfg = random_connected(10, seed).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let oriented = cfg.with_random_orientations(&mut rng);
            let a: Vec<Coord> = cfg.coords().collect();
            let b: Vec<Coord> = oriented.coords().collect();
            prop_assert_eq!(a, b);
        }
    }
}
