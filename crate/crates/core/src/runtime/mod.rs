//! Deterministic round-based scheduler for local-computation
//! protocols.
//!
//! Particles act strictly sequentially; a round is one pass over a
//! seeded random permutation of the particles, reshuffled every round.
//! Sequential activation trivially guarantees that no two computations
//! at distance ≤ 2 overlap.  Messages sent during an activation are
//! delivered to the target inbox before the activation ends; inboxes
//! are drained in full at the start of the receiver's next activation,
//! so per-link order is preserved.
//!
//! A protocol may queue sends during initialization (conceptually
//! round 0, before the first activation); round counting starts at 1.
//! The run ends when a whole round passes with no messages and no
//! state changes (quiescence), or when the round limit is hit, in
//! which case the report is marked timed out instead of failing.

pub mod trace;
pub mod view;

use std::collections::{BTreeMap, VecDeque};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::Configuration;
use crate::grid::{Coord, PortId};
use crate::orientation::Orientation;

pub use trace::{Trace, TraceEvent, TraceEventKind, TraceHeader};
pub use view::{build_view, build_view_from_maps, CommonEntry, LocalView, Member};

/// A message queued by a protocol's `init`, sent out of `from` through
/// its local port `port` before round 1.
#[derive(Clone, Debug)]
pub struct InitialSend<M> {
    pub from: Coord,
    pub port: PortId,
    pub msg: M,
}

/// A message handed to an activation, tagged with the local label of
/// the port it arrived through.
#[derive(Clone, Debug)]
pub struct Received<M> {
    pub port: PortId,
    pub msg: M,
}

/// Messages queued by one activation.
#[derive(Debug)]
pub struct Outbox<M> {
    sends: Vec<(PortId, M)>,
}

impl<M> Outbox<M> {
    pub fn send(&mut self, port: PortId, msg: M) {
        self.sends.push((port, msg));
    }
}

/// A distributed algorithm run by the scheduler.
///
/// State, messages and views are all local: ports appearing anywhere
/// are the owning particle's own labels under its current orientation.
pub trait Protocol {
    type State: Clone + PartialEq + Serialize;
    type Msg: Clone + Serialize;
    type Label: Clone + Ord;
    type ViewExt;

    fn name(&self) -> &'static str;

    /// Initial states for every particle, plus any sends to perform
    /// before the first round.
    fn init(
        &self,
        world: &Configuration,
    ) -> (BTreeMap<Coord, Self::State>, Vec<InitialSend<Self::Msg>>);

    /// The label a particle announces to its neighbours.
    fn label(&self, state: &Self::State) -> Self::Label;

    /// Algorithm-specific extension of the local view.
    fn view_ext(
        &self,
        world: &Configuration,
        states: &BTreeMap<Coord, Self::State>,
        p: Coord,
    ) -> Self::ViewExt;

    /// Current orientation of a particle, given its configured base
    /// orientation and its state.  Protocols that relabel ports
    /// override this.
    fn orientation_override(&self, base: Orientation, _state: &Self::State) -> Orientation {
        base
    }

    /// One local computation: consume the inbox, observe the view,
    /// update the state, queue sends.
    fn activate(
        &self,
        state: &mut Self::State,
        view: &LocalView<Self::Label, Self::ViewExt>,
        inbox: Vec<Received<Self::Msg>>,
        out: &mut Outbox<Self::Msg>,
    );
}

/// Scheduler parameters.
#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    pub seed: u64,
    pub round_limit: u64,
    pub record_trace: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            seed: 0,
            round_limit: 10_000,
            record_trace: false,
        }
    }
}

/// Result of a run.
#[derive(Clone, Debug)]
pub struct RunReport<S> {
    pub states: BTreeMap<Coord, S>,
    /// Last round containing a state change (0 when no state ever
    /// changed after initialization).
    pub rounds_used: u64,
    /// Rounds executed, including the final silent round that
    /// establishes quiescence.
    pub rounds_total: u64,
    /// True when the round limit was reached before quiescence.
    pub timed_out: bool,
    pub trace: Option<Trace>,
}

struct Engine<'a, P: Protocol> {
    world: &'a Configuration,
    protocol: &'a P,
    states: BTreeMap<Coord, P::State>,
    inboxes: BTreeMap<Coord, VecDeque<Received<P::Msg>>>,
    events: Vec<TraceEvent>,
    recording: bool,
    seq: u64,
    round: u64,
}

impl<'a, P: Protocol> Engine<'a, P> {
    fn orientation_of(&self, p: Coord) -> Orientation {
        let base = self.world.orientation(p).expect("p is occupied");
        self.protocol.orientation_override(base, &self.states[&p])
    }

    fn log(&mut self, particle: Coord, kind: TraceEventKind) {
        if self.recording {
            self.events.push(TraceEvent {
                round: self.round,
                seq: self.seq,
                particle,
                kind,
            });
        }
        self.seq += 1;
    }

    /// Sends `msg` out of `from` through `from`'s local port `port`.
    /// Panics if the port is unoccupied: protocols only ever answer on
    /// links they observed, so that would be a protocol bug.
    fn deliver(&mut self, from: Coord, port: PortId, msg: P::Msg) {
        let dir = self.orientation_of(from).port_direction(port);
        let target = from.translate(dir).expect("unit step");
        assert!(
            self.world.contains(target),
            "{} sent through unoccupied port {port}",
            from
        );
        if self.recording {
            let payload = serde_json::to_value(&msg).expect("serializable message");
            self.log(from, TraceEventKind::Send { port: port.index() as u8, msg: payload });
        } else {
            self.seq += 1;
        }
        let back = self
            .orientation_of(target)
            .port_of_direction(from.delta_from(target))
            .expect("unit step");
        self.inboxes
            .get_mut(&target)
            .expect("occupied")
            .push_back(Received { port: back, msg });
    }

    fn build_view(&self, p: Coord) -> LocalView<P::Label, P::ViewExt> {
        let ext = self.protocol.view_ext(self.world, &self.states, p);
        let occupied = self.world.coords().collect();
        view::build_view(
            p,
            &occupied,
            &|q| self.orientation_of(q),
            &|q| self.protocol.label(&self.states[&q]),
            ext,
        )
    }

    /// Runs one activation; returns (state_changed, messages_moved).
    fn activate(&mut self, p: Coord) -> (bool, bool) {
        self.log(p, TraceEventKind::Activate);
        let batch: Vec<Received<P::Msg>> =
            std::mem::take(self.inboxes.get_mut(&p).expect("occupied")).into();
        let had_messages = !batch.is_empty();
        if self.recording {
            for r in &batch {
                self.log(p, TraceEventKind::Receive { port: r.port.index() as u8 });
            }
        } else {
            self.seq += batch.len() as u64;
        }

        let view = self.build_view(p);
        let mut out = Outbox { sends: Vec::new() };
        let mut state = self.states[&p].clone();
        self.protocol.activate(&mut state, &view, batch, &mut out);

        let changed = state != self.states[&p];
        if changed {
            if self.recording {
                let payload = serde_json::to_value(&state).expect("serializable state");
                self.log(p, TraceEventKind::State { state: payload });
            } else {
                self.seq += 1;
            }
            self.states.insert(p, state);
        }
        let sent = !out.sends.is_empty();
        for (port, msg) in out.sends {
            self.deliver(p, port, msg);
        }
        (changed, had_messages || sent)
    }
}

/// Runs `protocol` on `world` to quiescence or the round limit.
pub fn run<P: Protocol>(
    world: &Configuration,
    protocol: &P,
    options: &RunOptions,
) -> RunReport<P::State> {
    let (states, initial_sends) = protocol.init(world);
    debug_assert_eq!(states.len(), world.len(), "one state per particle");

    let mut engine = Engine {
        world,
        protocol,
        states,
        inboxes: world.coords().map(|p| (p, VecDeque::new())).collect(),
        events: Vec::new(),
        recording: options.record_trace,
        seq: 0,
        round: 0,
    };
    for send in initial_sends {
        engine.deliver(send.from, send.port, send.msg);
    }

    let mut order: Vec<Coord> = world.coords().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut rounds_used = 0;
    let mut timed_out = false;

    loop {
        if engine.round == options.round_limit {
            timed_out = true;
            break;
        }
        engine.round += 1;
        order.shuffle(&mut rng);
        let mut state_changes = false;
        let mut any_activity = false;
        for i in 0..order.len() {
            let (changed, moved) = engine.activate(order[i]);
            state_changes |= changed;
            any_activity |= changed || moved;
        }
        if state_changes {
            rounds_used = engine.round;
        }
        if !any_activity {
            break;
        }
    }

    let trace = options.record_trace.then(|| {
        let particles: Vec<Coord> = world.coords().collect();
        let orientations = particles
            .iter()
            .map(|&p| world.orientation(p).expect("occupied").index())
            .collect();
        Trace {
            header: TraceHeader {
                schema: trace::SCHEMA_VERSION,
                algorithm: protocol.name().to_string(),
                seed: options.seed,
                particles,
                orientations,
            },
            events: engine.events,
        }
    });

    RunReport {
        states: engine.states,
        rounds_used,
        rounds_total: engine.round,
        timed_out,
        trace,
    }
}
