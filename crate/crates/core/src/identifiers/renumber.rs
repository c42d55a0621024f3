//! Port renumbering along the spanning tree.
//!
//! The leader's own labeling is the target frame.  Each parent sends,
//! down every child edge, the port number it used plus two bits
//! describing the child's labeling relative to the target: whether the
//! child's up and down port sets are exchanged and whether its lateral
//! cycle runs the opposite way.  A child receiving `b` through its
//! port `a` must give `a` the label `opposite(b)`; together with the
//! two bits this pins the full relabeling uniquely, and any common
//! contacts shared with the parent cross-check it.  Children update
//! their stored tree ports, relabel, and forward in one activation, so
//! the wave completes within the tree height.
//!
//! The two bits are computed by the runtime from the ground-truth
//! relative orientation of the edge's endpoints and composed down the
//! tree by XOR.  They stand in for a physical handshake such as
//! comparing contact chirality; no pure port-message scheme can
//! replace them on shapes without common contacts.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::config::Configuration;
use crate::grid::{port_for_delta, Coord, PortId};
use crate::orientation::Orientation;
use crate::runtime::{
    self, InitialSend, LocalView, Member, Outbox, Protocol, Received, RunOptions, RunReport,
};
use crate::Error;

use super::tree::TreeNode;

/// True when the orientation reverses the lateral four-cycle
/// (its in-layer part is a reflection).
fn lateral_reversed(omega: Orientation) -> bool {
    let west = PortId::new(0).expect("port 0");
    let north = PortId::new(1).expect("port 1");
    let p0 = port_for_delta(omega.apply(west.direction())).expect("lateral image");
    let p1 = port_for_delta(omega.apply(north.direction())).expect("lateral image");
    p1.index() == (p0.index() + 3) % 4
}

/// Label permutation induced by a relative orientation.
fn relabeling(rho: Orientation, old: PortId) -> PortId {
    port_for_delta(rho.apply(old.direction())).expect("unit image")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RenumberState {
    /// Tree ports; in the particle's current labels (old until the
    /// adjustment arrives, new afterwards).
    pub parent: Option<PortId>,
    pub children: BTreeSet<PortId>,
    /// Index of the adopted relative orientation; the effective
    /// orientation becomes `base ∘ relabel⁻¹`.
    pub relabel: Option<u8>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct AdjustMsg {
    /// Port number the parent sent this message through.
    pub through: PortId,
    /// Whether the receiver's up/down port sets are exchanged
    /// relative to the target frame.
    pub layers_flipped: bool,
    /// Whether the receiver's lateral cycle is reversed relative to
    /// the target frame.
    pub lateral_reversed: bool,
}

/// Relative-orientation bits for each occupied port, provided by the
/// runtime as handshake metadata.
pub struct RenumberExt {
    pub bits: [Option<(bool, bool)>; 12],
}

pub struct Renumber {
    pub leader: Coord,
    /// Tree ports in each particle's original labels.
    pub tree: BTreeMap<Coord, TreeNode>,
}

impl Renumber {
    fn effective(&self, world: &Configuration, states: &BTreeMap<Coord, RenumberState>, p: Coord) -> Orientation {
        let base = world.orientation(p).expect("occupied");
        self.orientation_override(base, &states[&p])
    }
}

impl Protocol for Renumber {
    type State = RenumberState;
    type Msg = AdjustMsg;
    type Label = ();
    type ViewExt = RenumberExt;

    fn name(&self) -> &'static str {
        "port-renumbering"
    }

    fn init(
        &self,
        world: &Configuration,
    ) -> (BTreeMap<Coord, RenumberState>, Vec<InitialSend<AdjustMsg>>) {
        let states: BTreeMap<Coord, RenumberState> = self
            .tree
            .iter()
            .map(|(&p, node)| {
                let state = RenumberState {
                    parent: node.parent,
                    children: node.children.clone(),
                    relabel: (p == self.leader).then_some(Orientation::IDENTITY.index()),
                };
                (p, state)
            })
            .collect();
        let omega_l = world.orientation(self.leader).expect("leader occupied");
        let sends = states[&self.leader]
            .children
            .iter()
            .map(|&c| {
                let q = self
                    .leader
                    .translate(omega_l.port_direction(c))
                    .expect("unit step");
                let rho = omega_l
                    .inverse()
                    .compose(world.orientation(q).expect("occupied"));
                InitialSend {
                    from: self.leader,
                    port: c,
                    msg: AdjustMsg {
                        through: c,
                        layers_flipped: rho.flips_layers(),
                        lateral_reversed: lateral_reversed(rho),
                    },
                }
            })
            .collect();
        (states, sends)
    }

    fn label(&self, _state: &RenumberState) {}

    fn orientation_override(&self, base: Orientation, state: &RenumberState) -> Orientation {
        match state.relabel {
            Some(i) => base.compose(Orientation::from_index(i).expect("stored index").inverse()),
            None => base,
        }
    }

    fn view_ext(
        &self,
        world: &Configuration,
        states: &BTreeMap<Coord, RenumberState>,
        p: Coord,
    ) -> RenumberExt {
        let own = self.effective(world, states, p);
        let mut bits = [None; 12];
        for a in PortId::ALL {
            let q = p.translate(own.port_direction(a)).expect("unit step");
            if states.contains_key(&q) {
                let rel = own.inverse().compose(self.effective(world, states, q));
                bits[a.index()] = Some((rel.flips_layers(), lateral_reversed(rel)));
            }
        }
        RenumberExt { bits }
    }

    fn activate(
        &self,
        state: &mut RenumberState,
        view: &LocalView<(), RenumberExt>,
        inbox: Vec<Received<AdjustMsg>>,
        out: &mut Outbox<AdjustMsg>,
    ) {
        let Some(received) = inbox.first() else { return };
        let (a, msg) = (received.port, received.msg);
        assert_eq!(inbox.len(), 1, "one adjustment per particle");
        assert_eq!(state.parent, Some(a), "adjustment on a non-tree edge");
        assert!(state.relabel.is_none(), "second adjustment");
        debug_assert_eq!(view.peer_port[a.index()], Some(msg.through));

        let matches: Vec<Orientation> = Orientation::ALL
            .into_iter()
            .filter(|&rho| relabeling(rho, a) == msg.through.opposite())
            .filter(|&rho| rho.flips_layers() == msg.layers_flipped)
            .filter(|&rho| lateral_reversed(rho) == msg.lateral_reversed)
            .filter(|&rho| {
                // Any common contact X pins the image of the port
                // toward it: the new label must point along
                // (parent→X) − (parent→child) in the target frame.
                view.relation(Member::Here, Member::At(a)).all(|e| {
                    let dir = e.ports.1.direction() - msg.through.direction();
                    relabeling(rho, e.ports.0) == port_for_delta(dir).expect("contact step")
                })
            })
            .collect();
        let [rho] = matches.as_slice() else {
            panic!("adjustment does not pin a unique relabeling: {matches:?}");
        };

        state.parent = Some(relabeling(*rho, a));
        let old_children = std::mem::take(&mut state.children);
        let own_bits = (msg.layers_flipped, msg.lateral_reversed);
        for c in old_children {
            let edge_bits = view.ext.bits[c.index()].expect("child edge occupied");
            state.children.insert(relabeling(*rho, c));
            out.send(
                relabeling(*rho, c),
                AdjustMsg {
                    through: relabeling(*rho, c),
                    layers_flipped: own_bits.0 ^ edge_bits.0,
                    lateral_reversed: own_bits.1 ^ edge_bits.1,
                },
            );
        }
        state.relabel = Some(rho.index());
    }
}

pub struct RenumberOutcome {
    /// Final effective orientation per particle; all equal the
    /// leader's.
    pub orientations: BTreeMap<Coord, Orientation>,
    /// Tree ports rewritten into the shared frame.
    pub tree: BTreeMap<Coord, TreeNode>,
    pub report: RunReport<RenumberState>,
}

/// Runs the renumbering wave and checks its contract: afterwards every
/// particle's port→direction map equals the leader's.
pub fn renumber_ports(
    world: &Configuration,
    leader: Coord,
    tree: &BTreeMap<Coord, TreeNode>,
    options: &RunOptions,
) -> Result<RenumberOutcome, Error> {
    let protocol = Renumber { leader, tree: tree.clone() };
    let report = runtime::run(world, &protocol, options);
    if report.timed_out {
        return Err(Error::StageFailed {
            stage: "renumber",
            reason: "round limit reached".into(),
        });
    }
    let target = world.orientation(leader)?;
    let mut orientations = BTreeMap::new();
    let mut new_tree = BTreeMap::new();
    for (&p, s) in &report.states {
        let effective = protocol.orientation_override(world.orientation(p)?, s);
        if effective != target {
            return Err(Error::StageFailed {
                stage: "renumber",
                reason: format!("{p} settled on {effective}, leader has {target}"),
            });
        }
        orientations.insert(p, effective);
        new_tree.insert(p, TreeNode { parent: s.parent, children: s.children.clone() });
    }
    Ok(RenumberOutcome { orientations, tree: new_tree, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::identifiers::tree::build_spanning_tree;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(x2: i64, y2: i64, z: i64) -> Coord {
        Coord::new(x2, y2, z).unwrap()
    }

    fn opts(seed: u64) -> RunOptions {
        RunOptions { seed, round_limit: 1000, record_trace: false }
    }

    #[test]
    fn opposite_map_matches_the_published_relabeling_rule() {
        // r(i) = (i+2) mod 4 laterally, and the vertical pairs.
        assert_eq!(PortId::new(0).unwrap().opposite().index(), 2);
        assert_eq!(PortId::new(1).unwrap().opposite().index(), 3);
        assert_eq!(PortId::new(4).unwrap().opposite().index(), 10);
        assert_eq!(PortId::new(5).unwrap().opposite().index(), 11);
        assert_eq!(PortId::new(6).unwrap().opposite().index(), 8);
        assert_eq!(PortId::new(8).unwrap().opposite().index(), 6);
    }

    #[test]
    fn lateral_reversal_flags_reflections_only() {
        assert!(!lateral_reversed(Orientation::IDENTITY));
        let rotation = Orientation::new(false, true, true, false);
        assert!(!lateral_reversed(rotation));
        let mirror = Orientation::new(false, true, false, false);
        assert!(lateral_reversed(mirror));
        let swap = Orientation::new(true, false, false, false);
        assert!(lateral_reversed(swap));
    }

    fn renumbered(world: &Configuration, leader: Coord, seed: u64) -> RenumberOutcome {
        let tree = build_spanning_tree(world, leader, &opts(seed)).unwrap();
        renumber_ports(world, leader, &tree.nodes, &opts(seed ^ 0xabcd)).unwrap()
    }

    #[test]
    fn identity_world_renumbers_to_identity_without_changes() {
        let world = Configuration::new([c(0, 0, 0), c(2, 0, 0), c(1, 1, 1)]).unwrap();
        let out = renumbered(&world, c(0, 0, 0), 1);
        for (_, omega) in out.orientations {
            assert_eq!(omega, Orientation::IDENTITY);
        }
    }

    #[test]
    fn pair_with_no_common_contact_still_renumbers() {
        // A bare edge: the relation offers no pins, the two bits must
        // suffice for every relative orientation.
        for (i, rho) in Orientation::ALL.into_iter().enumerate() {
            let world = Configuration::with_orientations([
                (c(0, 0, 0), Orientation::IDENTITY),
                (c(2, 0, 0), rho),
            ])
            .unwrap();
            let out = renumbered(&world, c(0, 0, 0), i as u64);
            assert_eq!(out.orientations[&c(2, 0, 0)], Orientation::IDENTITY);
            assert!(out.report.rounds_used <= 1);
        }
    }

    #[test]
    fn random_worlds_converge_to_the_leader_frame_within_the_height() {
        for seed in 0..15 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let world = crate::config::random_connected(14, seed)
                .unwrap()
                .with_random_orientations(&mut rng);
            let leader = world.lex_max();
            let out = renumbered(&world, leader, seed);
            let target = world.orientation(leader).unwrap();
            for (_, omega) in &out.orientations {
                assert_eq!(*omega, target);
            }
            let ecc = world.eccentricity(leader).unwrap();
            assert!(
                out.report.rounds_used <= ecc,
                "rounds {} vs eccentricity {ecc}",
                out.report.rounds_used
            );
        }
    }

    #[test]
    fn renumbered_tree_ports_agree_between_parent_and_child() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let world = crate::config::random_connected(12, 21)
            .unwrap()
            .with_random_orientations(&mut rng);
        let leader = world.lex_min();
        let out = renumbered(&world, leader, 5);
        let target = world.orientation(leader).unwrap();
        for (&p, node) in &out.tree {
            for &cport in &node.children {
                let q = p.translate(target.port_direction(cport)).unwrap();
                assert_eq!(out.tree[&q].parent, Some(cport.opposite()));
            }
        }
    }
}
