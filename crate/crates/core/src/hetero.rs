//! Leader election with per-particle orientations.
//!
//! No coordinates are exchanged: candidates retire one by one whenever
//! they are *contractible*, meaning their removal keeps the remaining
//! candidate set both connected and electable.  Contractibility of a
//! candidate `p` within the candidate set is the conjunction of three
//! conditions:
//!
//! * **I** — the candidate in-layer neighbours of `p` together with
//!   its occupied candidate corners induce a connected subgraph;
//! * **II** — `p` has at most two candidate in-layer neighbours;
//! * **III** — the candidate vertical neighbours of `p` induce a
//!   connected subgraph (in particular they lie in one adjacent
//!   layer), and if `p` has both in-layer and vertical candidate
//!   neighbours, some in-layer one shares a vertical neighbour with
//!   `p`.
//!
//! The runtime evaluates the conditions geometrically (the form the
//! correctness argument quantifies over).  [`contractible_from_ports`]
//! is the purely local detection working on port labels and the
//! common-contact relation; it agrees with the geometric predicate
//! except that with at most one candidate in-layer neighbour it cannot
//! see stranded candidate corners (condition I), a documented one-way
//! over-approximation classified by [`benign_corner_disagreement`].
//!
//! A retired candidate becomes `N` if it still touches a candidate and
//! `L` otherwise; the last candidate standing is the leader.  On
//! non-electable inputs the run may stall with several candidates
//! left, which is reported, not an error.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::config::Configuration;
use crate::grid::{adjacent, Coord, PortId};
use crate::runtime::{
    self, InitialSend, LocalView, Member, Outbox, Protocol, Received, RunOptions, RunReport,
};
use crate::Error;

/// Candidacy tags; these names appear verbatim in traces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Tag {
    C,
    N,
    L,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ContractibilityReport {
    pub condition_i: bool,
    pub condition_ii: bool,
    pub condition_iii: bool,
}

impl ContractibilityReport {
    pub fn contractible(&self) -> bool {
        self.condition_i && self.condition_ii && self.condition_iii
    }

    fn vacuous() -> ContractibilityReport {
        ContractibilityReport {
            condition_i: true,
            condition_ii: true,
            condition_iii: true,
        }
    }
}

/// The four same-layer vertices diagonal to `p`.
pub fn corners(p: Coord) -> [Coord; 4] {
    [(2, 2), (-2, 2), (2, -2), (-2, -2)].map(|(dx, dy)| {
        Coord::new(p.x2() + dx, p.y2() + dy, p.z()).expect("in-layer step keeps parity")
    })
}

fn is_connected_set(members: &BTreeSet<Coord>) -> bool {
    let Some(&start) = members.iter().next() else {
        return true;
    };
    let mut seen = BTreeSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        for v in u.neighbors() {
            if members.contains(&v) && seen.insert(v) {
                queue.push_back(v);
            }
        }
    }
    seen.len() == members.len()
}

/// Evaluates the three contractibility conditions for candidate `p`
/// against the candidate set, from global geometry.
pub fn contractible_geometric(
    candidates: &BTreeSet<Coord>,
    p: Coord,
) -> Result<ContractibilityReport, Error> {
    if !candidates.contains(&p) {
        return Err(Error::NotInConfiguration(p.to_string()));
    }
    let lateral: BTreeSet<Coord> = PortId::ALL
        .into_iter()
        .filter(PortId::is_lateral)
        .map(|a| p.neighbor(a))
        .filter(|q| candidates.contains(q))
        .collect();
    let vertical: BTreeSet<Coord> = PortId::ALL
        .into_iter()
        .filter(|a| !a.is_lateral())
        .map(|a| p.neighbor(a))
        .filter(|q| candidates.contains(q))
        .collect();

    let mut web = lateral.clone();
    web.extend(corners(p).into_iter().filter(|x| candidates.contains(x)));
    let condition_i = is_connected_set(&web);

    let condition_ii = lateral.len() <= 2;

    let anchored = lateral.is_empty()
        || vertical.is_empty()
        || lateral.iter().any(|&q| {
            vertical
                .iter()
                .any(|&v| adjacent(v, q))
        });
    let condition_iii = is_connected_set(&vertical) && anchored;

    Ok(ContractibilityReport {
        condition_i,
        condition_ii,
        condition_iii,
    })
}

/// Evaluates the three conditions from a local view only: occupied
/// ports, announced candidacy labels and the common-contact relation.
pub fn contractible_from_ports<E>(view: &LocalView<Tag, E>) -> ContractibilityReport {
    let candidate = |a: PortId| view.neighbor_label[a.index()] == Some(Tag::C);
    let lateral: Vec<PortId> = PortId::ALL
        .into_iter()
        .filter(|a| a.is_lateral() && candidate(*a))
        .collect();
    let down: Vec<PortId> = PortId::ALL
        .into_iter()
        .filter(|a| a.is_down() && candidate(*a))
        .collect();
    let up: Vec<PortId> = PortId::ALL
        .into_iter()
        .filter(|a| a.is_up() && candidate(*a))
        .collect();

    let condition_ii = lateral.len() <= 2;

    // A common contact of two members through lateral ports on both
    // sides lies in their shared layer; entries whose ports coincide
    // with the link back to the observer denote the observer itself.
    let condition_i = match lateral.as_slice() {
        [] | [_] => true,
        &[x, y] => {
            x.lateral_successive(y)
                && view.relation(Member::At(x), Member::At(y)).any(|e| {
                    e.label == Tag::C
                        && e.ports.0.is_lateral()
                        && Some(e.ports.0) != view.peer_port[x.min(y).index()]
                })
        }
        _ => false,
    };

    let one_sided = down.is_empty() || up.is_empty();
    let block = if down.is_empty() { &up } else { &down };
    let block_connected = match block.as_slice() {
        [] | [_] => true,
        &[a, b] => a.vertical_successive(b),
        _ => true, // three or four of a four-cycle are always connected
    };
    let anchored = lateral.is_empty()
        || (down.is_empty() && up.is_empty())
        || down.iter().chain(&up).any(|&q| {
            view.relation(Member::Here, Member::At(q)).any(|e| {
                e.label == Tag::C
                    && e.ports.0.is_lateral()
                    && Some(e.ports.0) != view.peer_port[q.index()]
            })
        });
    let condition_iii = one_sided && block_connected && anchored;

    ContractibilityReport {
        condition_i,
        condition_ii,
        condition_iii,
    }
}

/// Classifies a disagreement between the two predicates: the local
/// detection may miss stranded candidate corners, so removing those
/// corners from condition I's web must restore connectivity.
pub fn benign_corner_disagreement(candidates: &BTreeSet<Coord>, p: Coord) -> bool {
    let lateral: BTreeSet<Coord> = PortId::ALL
        .into_iter()
        .filter(PortId::is_lateral)
        .map(|a| p.neighbor(a))
        .filter(|q| candidates.contains(q))
        .collect();
    let mut web = lateral.clone();
    web.extend(
        corners(p)
            .into_iter()
            .filter(|x| candidates.contains(x))
            .filter(|x| lateral.iter().any(|&q| adjacent(*x, q))),
    );
    is_connected_set(&web)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HeteroState {
    pub tag: Tag,
    /// The report that triggered retirement, kept for the trace.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<ContractibilityReport>,
}

/// View extension computed by the runtime for each activation.
pub struct HeteroExt {
    pub report: ContractibilityReport,
    pub candidate_neighbors: usize,
}

pub struct HeteroElection;

impl Protocol for HeteroElection {
    type State = HeteroState;
    type Msg = ();
    type Label = Tag;
    type ViewExt = HeteroExt;

    fn name(&self) -> &'static str {
        "heterogeneous-election"
    }

    fn init(
        &self,
        world: &Configuration,
    ) -> (BTreeMap<Coord, HeteroState>, Vec<InitialSend<()>>) {
        let states = world
            .coords()
            .map(|p| (p, HeteroState { tag: Tag::C, report: None }))
            .collect();
        (states, Vec::new())
    }

    fn label(&self, state: &HeteroState) -> Tag {
        state.tag
    }

    fn view_ext(
        &self,
        world: &Configuration,
        states: &BTreeMap<Coord, HeteroState>,
        p: Coord,
    ) -> HeteroExt {
        let candidates: BTreeSet<Coord> = states
            .iter()
            .filter(|(_, s)| s.tag == Tag::C)
            .map(|(&q, _)| q)
            .collect();
        let report = if candidates.contains(&p) {
            contractible_geometric(&candidates, p).expect("p is a candidate")
        } else {
            ContractibilityReport::vacuous()
        };
        let candidate_neighbors = world
            .occupied_neighbors(p)
            .into_iter()
            .filter(|q| candidates.contains(q))
            .count();
        HeteroExt {
            report,
            candidate_neighbors,
        }
    }

    fn activate(
        &self,
        state: &mut HeteroState,
        view: &LocalView<Tag, HeteroExt>,
        _inbox: Vec<Received<()>>,
        _out: &mut Outbox<()>,
    ) {
        if state.tag != Tag::C {
            return;
        }
        if view.ext.report.contractible() {
            state.tag = if view.ext.candidate_neighbors == 0 {
                Tag::L
            } else {
                Tag::N
            };
            state.report = Some(view.ext.report);
        }
    }
}

/// Result of inspecting the final states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HeteroOutcome {
    Elected(Coord),
    /// Candidates that could not retire (non-electable input).
    Stalled { candidates: Vec<Coord> },
}

pub fn outcome(states: &BTreeMap<Coord, HeteroState>) -> HeteroOutcome {
    let candidates: Vec<Coord> = states
        .iter()
        .filter(|(_, s)| s.tag == Tag::C)
        .map(|(&p, _)| p)
        .collect();
    let leaders: Vec<Coord> = states
        .iter()
        .filter(|(_, s)| s.tag == Tag::L)
        .map(|(&p, _)| p)
        .collect();
    match (candidates.is_empty(), leaders.as_slice()) {
        (true, &[leader]) => HeteroOutcome::Elected(leader),
        _ => HeteroOutcome::Stalled { candidates },
    }
}

/// Runs the election; orientations may be arbitrary.
pub fn run_hetero(world: &Configuration, options: &RunOptions) -> RunReport<HeteroState> {
    runtime::run(world, &HeteroElection, options)
}
