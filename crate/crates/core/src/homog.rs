//! Leader election for particles sharing one orientation.
//!
//! Every particle floods relative announcements of itself and of its
//! unoccupied neighbour slots.  A received payload is the announced
//! position relative to the receiver (receiver minus announced
//! vertex); forwarding through a port adds that port's direction, so
//! entries stay receiver-relative at every hop.  Once a particle's
//! occupied set is closed under the twelve directions (every neighbour
//! of every known particle is known occupied or known unoccupied), the
//! set is complete: the particle broadcasts its lexicographic maximum
//! together with an origin tracker.  Maxima are directly comparable
//! across particles because `max(O(p)) = p − lexmin(S)`; the particle
//! that never hears a larger maximum and collects every origin is the
//! unique leader, the lexicographically greatest particle.
//!
//! Progress can chain inside one activation (announce, absorb the
//! inbox, detect closure, broadcast, compare); this is what keeps the
//! number of rounds within `2·diam + 2` under every activation order.
//! Comparison messages that arrive before a particle has finished
//! collecting are buffered inside its state and absorbed the moment it
//! starts comparing.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::config::Configuration;
use crate::grid::{Coord, Delta, PortId};
use crate::runtime::{
    self, InitialSend, LocalView, Outbox, Protocol, Received, RunOptions, RunReport,
};
use crate::Error;

/// Phase tags; these names appear verbatim in traces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Tag {
    C,
    Lis,
    I,
    Mcomp,
    N,
    L,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HomogState {
    pub tag: Tag,
    /// Known occupied vertices, relative to this particle (`p − X`).
    pub occupied: BTreeSet<Delta>,
    /// Known unoccupied vertices, relative to this particle.
    pub unoccupied: BTreeSet<Delta>,
    /// Origins whose maxima have been compared, relative to this
    /// particle.
    pub compared: BTreeSet<Delta>,
    /// Comparison messages received before comparing started.
    pub buffer: Vec<(Delta, Delta)>,
}

impl HomogState {
    fn fresh() -> HomogState {
        HomogState {
            tag: Tag::C,
            occupied: BTreeSet::new(),
            unoccupied: BTreeSet::new(),
            compared: BTreeSet::new(),
            buffer: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum HomogMsg {
    /// A flooded position announcement, relative to the receiver.
    Announce { rel: Delta, vacant: bool },
    /// A flooded maximum with its origin tracker, relative to the
    /// receiver.
    Compare { max: Delta, origin: Delta },
}

/// The largest triplet under (i, j, k) lexicographic order.
pub fn lex_max<'a>(triplets: impl IntoIterator<Item = &'a Delta>) -> Result<Delta, Error> {
    triplets
        .into_iter()
        .max()
        .copied()
        .ok_or(Error::EmptyConfiguration)
}

/// Closure test: every direction step from every known occupied entry
/// lands on a known vertex.  Holds exactly when the occupied set is
/// complete.
pub fn neighborhood_closed(occupied: &BTreeSet<Delta>, unoccupied: &BTreeSet<Delta>) -> bool {
    occupied.iter().all(|&t| {
        PortId::ALL.into_iter().all(|a| {
            let s = t + a.direction();
            occupied.contains(&s) || unoccupied.contains(&s)
        })
    })
}

pub struct HomogElection;

impl Protocol for HomogElection {
    type State = HomogState;
    type Msg = HomogMsg;
    type Label = Tag;
    type ViewExt = ();

    fn name(&self) -> &'static str {
        "homogeneous-election"
    }

    fn init(
        &self,
        world: &Configuration,
    ) -> (BTreeMap<Coord, HomogState>, Vec<InitialSend<HomogMsg>>) {
        debug_assert!(world.all_identity(), "homogeneous mode needs one orientation");
        let states = world.coords().map(|p| (p, HomogState::fresh())).collect();
        (states, Vec::new())
    }

    fn label(&self, state: &HomogState) -> Tag {
        state.tag
    }

    fn view_ext(&self, _: &Configuration, _: &BTreeMap<Coord, HomogState>, _: Coord) {}

    fn activate(
        &self,
        state: &mut HomogState,
        view: &LocalView<Tag, ()>,
        inbox: Vec<Received<HomogMsg>>,
        out: &mut Outbox<HomogMsg>,
    ) {
        let mut pending = std::mem::take(&mut state.buffer);

        // First activation: announce self and vacant slots, seed the
        // relative sets with what is directly observable.
        if state.tag == Tag::C {
            if view.degree() == 0 {
                state.tag = Tag::L;
                return;
            }
            state.occupied.insert(Delta::ZERO);
            for a in view.unoccupied_ports() {
                state.unoccupied.insert(-a.direction());
            }
            for b in view.occupied_ports() {
                out.send(b, HomogMsg::Announce { rel: b.direction(), vacant: false });
                for a in view.unoccupied_ports() {
                    out.send(
                        b,
                        HomogMsg::Announce {
                            rel: b.direction() - a.direction(),
                            vacant: true,
                        },
                    );
                }
            }
            state.tag = Tag::Lis;
        }

        // Absorb the inbox: record-and-forward announcements while
        // collecting; set comparisons aside.  Announcements arriving
        // after closure are duplicates by construction and are dropped.
        for r in inbox {
            match r.msg {
                HomogMsg::Announce { rel, vacant } if state.tag == Tag::Lis => {
                    let new = if vacant {
                        state.unoccupied.insert(rel)
                    } else {
                        state.occupied.insert(rel)
                    };
                    if new {
                        for b in view.occupied_ports().filter(|&b| b != r.port) {
                            out.send(
                                b,
                                HomogMsg::Announce { rel: rel + b.direction(), vacant },
                            );
                        }
                    }
                }
                HomogMsg::Announce { .. } => {}
                HomogMsg::Compare { max, origin } => pending.push((max, origin)),
            }
        }

        if state.tag == Tag::Lis && neighborhood_closed(&state.occupied, &state.unoccupied) {
            state.tag = Tag::I;
        }

        // Collection finished: broadcast the maximum with an origin
        // tracker and start comparing immediately.
        if state.tag == Tag::I {
            state.compared.insert(Delta::ZERO);
            let max = lex_max(&state.occupied).expect("contains the zero entry");
            for b in view.occupied_ports() {
                out.send(b, HomogMsg::Compare { max, origin: b.direction() });
            }
            state.tag = Tag::Mcomp;
        }

        match state.tag {
            Tag::Mcomp | Tag::N => {
                let own_max = lex_max(&state.occupied).expect("nonempty after closure");
                for (max, origin) in pending {
                    // First sight of an origin: record and flood on.
                    if state.compared.insert(origin) {
                        for b in view.occupied_ports() {
                            out.send(
                                b,
                                HomogMsg::Compare { max, origin: origin + b.direction() },
                            );
                        }
                        if state.tag == Tag::Mcomp && max > own_max {
                            state.tag = Tag::N;
                        }
                    }
                }
                if state.tag == Tag::Mcomp && state.compared.len() == state.occupied.len() {
                    state.tag = Tag::L;
                }
            }
            // A leader has every origin recorded, so anything still
            // arriving is a duplicate.
            Tag::L => {}
            // Still collecting: keep comparisons for later.
            _ => state.buffer = pending,
        }
    }
}

/// The unique particle in state `L`, if the election has converged to
/// exactly one.
pub fn leader(states: &BTreeMap<Coord, HomogState>) -> Option<Coord> {
    let mut leaders = states.iter().filter(|(_, s)| s.tag == Tag::L);
    match (leaders.next(), leaders.next()) {
        (Some((&p, _)), None) => Some(p),
        _ => None,
    }
}

/// Runs the election; the configuration must use a single common
/// orientation.
pub fn run_homog(
    world: &Configuration,
    options: &RunOptions,
) -> Result<RunReport<HomogState>, Error> {
    if !world.all_identity() {
        return Err(Error::MixedOrientations);
    }
    Ok(runtime::run(world, &HomogElection, options))
}
