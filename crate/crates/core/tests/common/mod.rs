//! Shared helpers for the integration suites: independently derived
//! oracles and deterministic configuration families.

use std::collections::{BTreeMap, VecDeque};

use fcc_matter::config::{circle_stack, random_electable, rect_stack, Configuration, RectLayer};
use fcc_matter::grid::Coord;

/// The twelve lattice steps, written out directly so the oracle does
/// not depend on the library's own direction table.
pub const RAW_STEPS: [(i64, i64, i64); 12] = [
    (-2, 0, 0),
    (0, 2, 0),
    (2, 0, 0),
    (0, -2, 0),
    (-1, 1, -1),
    (1, 1, -1),
    (1, -1, -1),
    (-1, -1, -1),
    (-1, 1, 1),
    (1, 1, 1),
    (1, -1, 1),
    (-1, -1, 1),
];

/// Hop counts from the origin out to `radius`, by plain queue search
/// over the raw steps.  Translation invariance means one table covers
/// every vertex pair: `d(u, v) = d(0, v - u)`.
pub fn bfs_from_origin(radius: u64) -> BTreeMap<(i64, i64, i64), u64> {
    let mut dist = BTreeMap::from([((0i64, 0i64, 0i64), 0u64)]);
    let mut queue = VecDeque::from([(0i64, 0i64, 0i64)]);
    while let Some((x, y, z)) = queue.pop_front() {
        let d = dist[&(x, y, z)];
        if d == radius {
            continue;
        }
        for (dx, dy, dz) in RAW_STEPS {
            let next = (x + dx, y + dy, z + dz);
            dist.entry(next).or_insert_with(|| {
                queue.push_back(next);
                d + 1
            });
        }
    }
    dist
}

/// Lexicographically greatest occupied vertex, re-derived from raw
/// coordinate tuples rather than the library's ordering.
pub fn lex_max_oracle(world: &Configuration) -> Coord {
    world
        .coords()
        .max_by_key(|p| (p.x2(), p.y2(), p.z()))
        .expect("configurations are nonempty")
}

/// Deterministic stacked-ball family: radius and height vary with the
/// index, centers follow the layer parity.
pub fn circle_family(i: u64) -> Configuration {
    let radius = 1 + i % 4;
    let layers = 1 + (i / 4) % 5;
    let centers: Vec<Coord> = (0..layers as i64)
        .map(|z| {
            let half = z.rem_euclid(2);
            Coord::new(half, half, z).expect("alternating centers keep parity")
        })
        .collect();
    circle_stack(&centers, radius).expect("stacked balls are always valid")
}

/// Deterministic rectangle-stack family: a base slab with layers that
/// shrink as they rise, so every layer rests on the one below.
pub fn rect_family(i: u64) -> Configuration {
    let width = 1 + (i % 5) as u32;
    let height = 1 + ((i / 5) % 4) as u32;
    let depth = 1 + (i % 3) as u32;
    let layers: Vec<RectLayer> = (0..depth)
        .map(|k| RectLayer {
            z: k as i64,
            u0: 0,
            v0: 0,
            width: width.saturating_sub(k).max(1),
            height: height.saturating_sub(k).max(1),
        })
        .collect();
    rect_stack(&layers).expect("nested rectangle stacks are always valid")
}

/// Round-robin electable family mixing balls, rectangle stacks, and
/// rejection-sampled random sets.
pub fn electable_family(i: u64) -> Configuration {
    match i % 3 {
        0 => circle_family(i / 3),
        1 => rect_family(i / 3),
        _ => random_electable(2 + (i as usize / 3) % 15, 0x5EED + i)
            .expect("the sampler retries until an electable set appears"),
    }
}
