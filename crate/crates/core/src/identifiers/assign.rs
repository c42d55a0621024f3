//! Identifier assignment down the renumbered tree.
//!
//! With every particle sharing the leader's port frame, a parent can
//! compute a child's relative position by adding the child port's
//! direction to its own.  Global mode propagates the raw displacement
//! from the leader; local mode wraps it into the coloring's
//! fundamental box and takes the color as the identifier, which is
//! what makes identifiers distinct within distance ℓ while using only
//! O(log ℓ) bits.  One message crosses each tree edge, so the wave
//! finishes within the tree height.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::coloring::ColorParams;
use crate::config::Configuration;
use crate::grid::{Coord, Delta, PortId};
use crate::runtime::{
    self, InitialSend, LocalView, Outbox, Protocol, Received, RunOptions, RunReport,
};
use crate::Error;

use super::tree::TreeNode;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdState {
    /// Tree ports in the shared frame, seeded from the tree stage.
    pub parent: Option<PortId>,
    pub children: BTreeSet<PortId>,
    /// Displacement from the leader in its frame; wrapped in local
    /// mode, exact in global mode.  `None` until assigned.
    pub triplet: Option<Delta>,
    /// Color of the triplet; `None` in global mode.
    pub id: Option<u64>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct IdMsg(pub Delta);

pub struct AssignIds {
    pub leader: Coord,
    /// Tree ports in the shared frame.
    pub tree: BTreeMap<Coord, TreeNode>,
    /// Wrap-and-color parameters; `None` assigns global identifiers.
    pub params: Option<ColorParams>,
}

impl AssignIds {
    fn id_of(&self, triplet: Delta) -> Option<u64> {
        self.params.as_ref().map(|p| p.color_triplet(triplet))
    }

    fn step(&self, triplet: Delta, child_port: PortId) -> Delta {
        let next = triplet + child_port.direction();
        match &self.params {
            Some(p) => p.wrap(next),
            None => next,
        }
    }
}

impl Protocol for AssignIds {
    type State = IdState;
    type Msg = IdMsg;
    type Label = ();
    type ViewExt = ();

    fn name(&self) -> &'static str {
        if self.params.is_some() {
            "local-identifiers"
        } else {
            "global-identifiers"
        }
    }

    fn init(&self, _world: &Configuration) -> (BTreeMap<Coord, IdState>, Vec<InitialSend<IdMsg>>) {
        let states = self
            .tree
            .iter()
            .map(|(&p, node)| {
                let (triplet, id) = if p == self.leader {
                    (Some(Delta::ZERO), self.id_of(Delta::ZERO))
                } else {
                    (None, None)
                };
                let state = IdState {
                    parent: node.parent,
                    children: node.children.clone(),
                    triplet,
                    id,
                };
                (p, state)
            })
            .collect();
        let sends = self.tree[&self.leader]
            .children
            .iter()
            .map(|&c| InitialSend {
                from: self.leader,
                port: c,
                msg: IdMsg(self.step(Delta::ZERO, c)),
            })
            .collect();
        (states, sends)
    }

    fn label(&self, _state: &IdState) {}

    fn view_ext(&self, _world: &Configuration, _states: &BTreeMap<Coord, IdState>, _p: Coord) {}

    fn activate(
        &self,
        state: &mut IdState,
        _view: &LocalView<(), ()>,
        inbox: Vec<Received<IdMsg>>,
        out: &mut Outbox<IdMsg>,
    ) {
        let Some(received) = inbox.first() else { return };
        assert_eq!(inbox.len(), 1, "one assignment per particle");
        assert!(state.triplet.is_none(), "second assignment");
        assert_eq!(state.parent, Some(received.port), "assignment off the tree");
        let triplet = received.msg.0;
        state.triplet = Some(triplet);
        state.id = self.id_of(triplet);
        for &c in &state.children {
            out.send(c, IdMsg(self.step(triplet, c)));
        }
    }
}

/// Assigns wrapped triplets and colors; requires a uniform frame.
pub fn assign_local_ids(
    world: &Configuration,
    leader: Coord,
    tree: &BTreeMap<Coord, TreeNode>,
    params: ColorParams,
    options: &RunOptions,
) -> Result<RunReport<IdState>, Error> {
    run_assignment(world, leader, tree, Some(params), options)
}

/// Assigns exact displacements from the leader; requires a uniform
/// frame.
pub fn assign_global_ids(
    world: &Configuration,
    leader: Coord,
    tree: &BTreeMap<Coord, TreeNode>,
    options: &RunOptions,
) -> Result<RunReport<IdState>, Error> {
    run_assignment(world, leader, tree, None, options)
}

fn run_assignment(
    world: &Configuration,
    leader: Coord,
    tree: &BTreeMap<Coord, TreeNode>,
    params: Option<ColorParams>,
    options: &RunOptions,
) -> Result<RunReport<IdState>, Error> {
    let mut frames = world.iter().map(|(_, o)| o);
    let first = frames.next().ok_or(Error::EmptyConfiguration)?;
    if frames.any(|o| o != first) {
        return Err(Error::MixedOrientations);
    }
    let stage = if params.is_some() { "local-ids" } else { "global-ids" };
    let protocol = AssignIds { leader, tree: tree.clone(), params };
    let report = runtime::run(world, &protocol, options);
    if report.timed_out {
        return Err(Error::StageFailed { stage, reason: "round limit reached".into() });
    }
    for (&p, s) in &report.states {
        if s.triplet.is_none() {
            return Err(Error::StageFailed {
                stage,
                reason: format!("{p} was never assigned"),
            });
        }
    }
    Ok(report)
}
