//! Spanning tree rooted at the leader, built by flooding hop claims.
//!
//! The leader floods `Claim { hops: 1 }`; a particle adopts the first
//! claim it sees and re-floods with one more hop, switching parents
//! only on a strict improvement (ties within one inbox go to the
//! smallest arrival port, keeping runs deterministic under a seed).
//! Parents learn their children through attach/detach notices.  The
//! result is a breadth-first tree: every parent hop count is exactly
//! one less than the child's, so the height is the leader's
//! eccentricity.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::config::Configuration;
use crate::grid::{Coord, PortId};
use crate::runtime::{
    self, InitialSend, LocalView, Outbox, Protocol, Received, RunOptions, RunReport,
};
use crate::Error;

/// A particle's slot in the finished tree.  Ports are in the
/// particle's own labels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TreeNode {
    pub parent: Option<PortId>,
    pub children: BTreeSet<PortId>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TreeState {
    /// Hop count of the adopted claim; `None` until one arrives.
    pub hops: Option<u32>,
    pub parent: Option<PortId>,
    pub children: BTreeSet<PortId>,
}

#[derive(Clone, Debug, Serialize)]
pub enum TreeMsg {
    Claim { hops: u32 },
    Attach,
    Detach,
}

pub struct TreeBuild {
    pub leader: Coord,
}

impl Protocol for TreeBuild {
    type State = TreeState;
    type Msg = TreeMsg;
    type Label = ();
    type ViewExt = ();

    fn name(&self) -> &'static str {
        "spanning-tree"
    }

    fn init(&self, world: &Configuration) -> (BTreeMap<Coord, TreeState>, Vec<InitialSend<TreeMsg>>) {
        let states = world
            .coords()
            .map(|p| {
                let hops = (p == self.leader).then_some(0);
                (p, TreeState { hops, parent: None, children: BTreeSet::new() })
            })
            .collect();
        let omega = world.orientation(self.leader).expect("leader occupied");
        let sends = PortId::ALL
            .into_iter()
            .filter(|&a| {
                let q = self
                    .leader
                    .translate(omega.port_direction(a))
                    .expect("unit step");
                world.contains(q)
            })
            .map(|a| InitialSend {
                from: self.leader,
                port: a,
                msg: TreeMsg::Claim { hops: 1 },
            })
            .collect();
        (states, sends)
    }

    fn label(&self, _state: &TreeState) {}

    fn view_ext(&self, _world: &Configuration, _states: &BTreeMap<Coord, TreeState>, _p: Coord) {}

    fn activate(
        &self,
        state: &mut TreeState,
        view: &LocalView<(), ()>,
        inbox: Vec<Received<TreeMsg>>,
        out: &mut Outbox<TreeMsg>,
    ) {
        let mut best: Option<(u32, PortId)> = None;
        for r in inbox {
            match r.msg {
                TreeMsg::Claim { hops } => {
                    if best.is_none_or(|b| (hops, r.port) < b) {
                        best = Some((hops, r.port));
                    }
                }
                TreeMsg::Attach => {
                    state.children.insert(r.port);
                }
                TreeMsg::Detach => {
                    state.children.remove(&r.port);
                }
            }
        }
        let Some((hops, from)) = best else { return };
        if state.hops.is_some_and(|h| h <= hops) {
            return;
        }
        if let Some(old) = state.parent {
            out.send(old, TreeMsg::Detach);
        }
        state.hops = Some(hops);
        state.parent = Some(from);
        state.children.remove(&from);
        out.send(from, TreeMsg::Attach);
        for a in view.occupied_ports() {
            if a != from {
                out.send(a, TreeMsg::Claim { hops: hops + 1 });
            }
        }
    }
}

pub struct TreeOutcome {
    pub nodes: BTreeMap<Coord, TreeNode>,
    pub report: RunReport<TreeState>,
}

/// Runs the flooding protocol and validates the result: a
/// breadth-first spanning tree rooted at `leader` with hop counts
/// matching true hop distances.
pub fn build_spanning_tree(
    world: &Configuration,
    leader: Coord,
    options: &RunOptions,
) -> Result<TreeOutcome, Error> {
    if !world.contains(leader) {
        return Err(Error::NotInConfiguration(leader.to_string()));
    }
    let report = runtime::run(world, &TreeBuild { leader }, options);
    if report.timed_out {
        return Err(Error::StageFailed {
            stage: "tree",
            reason: "round limit reached".into(),
        });
    }
    let distances = world.hop_distances(leader)?;
    let mut nodes = BTreeMap::new();
    for (&p, s) in &report.states {
        let Some(hops) = s.hops else {
            return Err(Error::StageFailed {
                stage: "tree",
                reason: format!("{p} never adopted a claim"),
            });
        };
        if u64::from(hops) != distances[&p] || (p == leader) != s.parent.is_none() {
            return Err(Error::StageFailed {
                stage: "tree",
                reason: format!("{p} has a non-breadth-first slot"),
            });
        }
        nodes.insert(p, TreeNode { parent: s.parent, children: s.children.clone() });
    }
    // Parent and child port sets must mirror each other.
    for (&p, node) in &nodes {
        let omega = world.orientation(p)?;
        for &c in &node.children {
            let q = p.translate(omega.port_direction(c)).expect("unit step");
            let back = nodes[&q].parent.map(|a| {
                let dir = world.orientation(q).expect("occupied").port_direction(a);
                q.translate(dir).expect("unit step")
            });
            if back != Some(p) {
                return Err(Error::StageFailed {
                    stage: "tree",
                    reason: format!("child link {p} -> {q} is not mirrored"),
                });
            }
        }
    }
    Ok(TreeOutcome { nodes, report })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x2: i64, y2: i64, z: i64) -> Coord {
        Coord::new(x2, y2, z).unwrap()
    }

    fn opts(seed: u64) -> RunOptions {
        RunOptions { seed, round_limit: 1000, record_trace: false }
    }

    #[test]
    fn singleton_tree_is_a_bare_root() {
        let world = Configuration::new([c(0, 0, 0)]).unwrap();
        let out = build_spanning_tree(&world, c(0, 0, 0), &opts(0)).unwrap();
        let root = &out.nodes[&c(0, 0, 0)];
        assert_eq!(root.parent, None);
        assert!(root.children.is_empty());
        assert_eq!(out.report.rounds_used, 0);
    }

    #[test]
    fn line_with_end_leader_builds_a_path_of_height_two() {
        let world = Configuration::new([c(0, 0, 0), c(2, 0, 0), c(4, 0, 0)]).unwrap();
        for seed in 0..8 {
            let out = build_spanning_tree(&world, c(0, 0, 0), &opts(seed)).unwrap();
            assert_eq!(out.nodes[&c(0, 0, 0)].parent, None);
            assert_eq!(
                out.nodes[&c(2, 0, 0)].parent,
                Some(PortId::new(0).unwrap())
            );
            assert_eq!(
                out.nodes[&c(4, 0, 0)].parent,
                Some(PortId::new(0).unwrap())
            );
            assert_eq!(out.report.states[&c(4, 0, 0)].hops, Some(2));
        }
    }

    #[test]
    fn leader_not_in_configuration_is_rejected() {
        let world = Configuration::new([c(0, 0, 0)]).unwrap();
        assert!(matches!(
            build_spanning_tree(&world, c(2, 0, 0), &opts(0)),
            Err(Error::NotInConfiguration(_))
        ));
    }

    #[test]
    fn random_configurations_build_breadth_first_trees_quickly() {
        for seed in 0..20 {
            let world = crate::config::random_connected(15, seed).unwrap();
            let leader = world.lex_max();
            let out = build_spanning_tree(&world, leader, &opts(seed)).unwrap();
            let ecc = world.eccentricity(leader).unwrap();
            assert!(
                out.report.rounds_used <= world.diameter() + 1,
                "rounds {} vs diam {}",
                out.report.rounds_used,
                world.diameter()
            );
            // Non-leaders have exactly one parent; depth equals hop distance.
            let depths = world.hop_distances(leader).unwrap();
            for (&p, s) in &out.report.states {
                assert_eq!(u64::from(s.hops.unwrap()), depths[&p]);
                assert_eq!(p == leader, s.parent.is_none());
                assert!(u64::from(s.hops.unwrap()) <= ecc);
            }
        }
    }

    #[test]
    fn heterogeneous_orientations_do_not_disturb_the_tree() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let world = crate::config::random_connected(12, 7)
            .unwrap()
            .with_random_orientations(&mut rng);
        let leader = world.lex_min();
        let out = build_spanning_tree(&world, leader, &opts(3)).unwrap();
        let depths = world.hop_distances(leader).unwrap();
        for (&p, s) in &out.report.states {
            assert_eq!(u64::from(s.hops.unwrap()), depths[&p]);
        }
    }
}
