//! Structural test deciding whether a configuration admits
//! deterministic leader election with per-particle orientations.
//!
//! The test works on the layer component graph: vertices are the
//! maximal in-layer connected pieces of the configuration, edges join
//! pieces of adjacent layers linked by at least one grid edge.  A
//! configuration is electable iff
//!
//! 1. the component graph is a tree,
//! 2. every component is isometric to its footprint (hop distance
//!    inside the component equals in-layer Manhattan distance), and
//! 3. for every component-graph edge, the border each side exposes to
//!    the other induces a connected subgraph.
//!
//! All three checks are pure functions of the particle set; the whole
//! procedure is cubic in the number of particles.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use crate::config::Configuration;
use crate::grid::{layer_distance, Coord, PortId};

/// A maximal in-layer connected subset of the configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayerComponent {
    pub layer: i64,
    pub members: BTreeSet<Coord>,
}

impl LayerComponent {
    /// Lexicographically least member; used as a stable identifier.
    pub fn anchor(&self) -> Coord {
        *self.members.iter().next().expect("components are nonempty")
    }
}

/// The layer component graph of a configuration.
///
/// Components are sorted by `(layer, anchor)`; edges are normalized
/// index pairs `(i, j)` with `i < j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentGraph {
    pub components: Vec<LayerComponent>,
    pub edges: BTreeSet<(usize, usize)>,
}

impl ComponentGraph {
    pub fn build(cfg: &Configuration) -> ComponentGraph {
        let mut assigned: BTreeMap<Coord, usize> = BTreeMap::new();
        let mut components: Vec<LayerComponent> = Vec::new();
        for p in cfg.coords() {
            if assigned.contains_key(&p) {
                continue;
            }
            let index = components.len();
            let mut members = BTreeSet::from([p]);
            assigned.insert(p, index);
            let mut queue = VecDeque::from([p]);
            while let Some(u) = queue.pop_front() {
                for a in PortId::ALL.into_iter().filter(PortId::is_lateral) {
                    let v = u.neighbor(a);
                    if cfg.contains(v) && !assigned.contains_key(&v) {
                        assigned.insert(v, index);
                        members.insert(v);
                        queue.push_back(v);
                    }
                }
            }
            components.push(LayerComponent {
                layer: p.z(),
                members,
            });
        }

        // Re-sort by (layer, anchor) and remap indices.
        let mut order: Vec<usize> = (0..components.len()).collect();
        order.sort_by_key(|&i| (components[i].layer, components[i].anchor()));
        let mut remap = vec![0usize; components.len()];
        for (new, &old) in order.iter().enumerate() {
            remap[old] = new;
        }
        let mut sorted = components.clone();
        for (new, &old) in order.iter().enumerate() {
            sorted[new] = components[old].clone();
        }

        let mut edges = BTreeSet::new();
        for p in cfg.coords() {
            for a in PortId::ALL.into_iter().filter(PortId::is_up) {
                let q = p.neighbor(a);
                if cfg.contains(q) {
                    let (i, j) = (remap[assigned[&p]], remap[assigned[&q]]);
                    edges.insert((i.min(j), i.max(j)));
                }
            }
        }
        ComponentGraph {
            components: sorted,
            edges,
        }
    }

    pub fn component_of(&self, p: Coord) -> Option<usize> {
        self.components.iter().position(|c| c.members.contains(&p))
    }

    /// True iff the graph is a tree.  The graph is always connected
    /// when the configuration is, so this reduces to edge counting.
    pub fn is_tree(&self) -> bool {
        self.edges.len() == self.components.len() - 1
    }

    /// A cycle of component indices, if any exists.
    pub fn find_cycle(&self) -> Option<Vec<usize>> {
        if self.is_tree() {
            return None;
        }
        let n = self.components.len();
        let mut adj = vec![Vec::new(); n];
        for &(i, j) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        let mut parent: Vec<Option<usize>> = vec![None; n];
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut queue = VecDeque::from([0usize]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    parent[v] = Some(u);
                    queue.push_back(v);
                } else if parent[u] != Some(v) {
                    // Non-tree edge (u, v): join the two root paths.
                    let path = |mut x: usize| {
                        let mut p = vec![x];
                        while let Some(q) = parent[x] {
                            p.push(q);
                            x = q;
                        }
                        p
                    };
                    let (pu, pv) = (path(u), path(v));
                    let shared: BTreeSet<usize> = pu.iter().copied().collect();
                    let meet = *pv.iter().find(|x| shared.contains(x)).expect("common root");
                    let mut cycle: Vec<usize> = pu
                        .iter()
                        .copied()
                        .take_while(|&x| x != meet)
                        .chain([meet])
                        .collect();
                    let mut back: Vec<usize> =
                        pv.iter().copied().take_while(|&x| x != meet).collect();
                    back.reverse();
                    cycle.extend(back);
                    return Some(cycle);
                }
            }
        }
        unreachable!("non-tree connected graph contains a cycle");
    }
}

/// Why a configuration fails the electability test.
///
/// The `property` tag in the serialized form names the violated check:
/// `tree`, `isometry` or `border`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "property", rename_all = "snake_case")]
pub enum Failure {
    /// The component graph contains a cycle, given by the anchors of
    /// the components along it.
    Tree { cycle: Vec<Coord> },
    /// Two members of one component are further apart inside it than
    /// their in-layer Manhattan distance.
    Isometry {
        layer: i64,
        u: Coord,
        v: Coord,
        hops: u64,
        manhattan: u64,
    },
    /// The border a component exposes toward a neighbouring component
    /// is disconnected.
    Border {
        component: Coord,
        toward: Coord,
        border: Vec<Coord>,
    },
}

/// Checks the three electability properties, returning the first
/// violated one.
pub fn is_electable(cfg: &Configuration) -> Result<(), Failure> {
    let graph = ComponentGraph::build(cfg);

    if let Some(cycle) = graph.find_cycle() {
        return Err(Failure::Tree {
            cycle: cycle
                .into_iter()
                .map(|i| graph.components[i].anchor())
                .collect(),
        });
    }

    for comp in &graph.components {
        for &u in &comp.members {
            let hops = lateral_hops(&comp.members, u);
            for &v in &comp.members {
                let straight = layer_distance(u, v).expect("same layer");
                let walked = hops[&v];
                if walked != straight {
                    return Err(Failure::Isometry {
                        layer: comp.layer,
                        u,
                        v,
                        hops: walked,
                        manhattan: straight,
                    });
                }
            }
        }
    }

    for &(i, j) in &graph.edges {
        for (side, other) in [(i, j), (j, i)] {
            let border: BTreeSet<Coord> = graph.components[side]
                .members
                .iter()
                .copied()
                .filter(|&u| {
                    u.neighbors()
                        .into_iter()
                        .any(|q| graph.components[other].members.contains(&q))
                })
                .collect();
            debug_assert!(!border.is_empty(), "graph edges imply adjacency");
            if !laterally_connected(&border) {
                return Err(Failure::Border {
                    component: graph.components[side].anchor(),
                    toward: graph.components[other].anchor(),
                    border: border.into_iter().collect(),
                });
            }
        }
    }

    Ok(())
}

/// Hop distances from `from` using only in-layer edges inside `members`.
fn lateral_hops(members: &BTreeSet<Coord>, from: Coord) -> BTreeMap<Coord, u64> {
    let mut dist = BTreeMap::from([(from, 0u64)]);
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        let d = dist[&u];
        for a in PortId::ALL.into_iter().filter(PortId::is_lateral) {
            let v = u.neighbor(a);
            if members.contains(&v) && !dist.contains_key(&v) {
                dist.insert(v, d + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

fn laterally_connected(members: &BTreeSet<Coord>) -> bool {
    match members.iter().next() {
        None => true,
        Some(&start) => lateral_hops(members, start).len() == members.len(),
    }
}
