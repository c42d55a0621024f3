//! Post-election pipeline: spanning tree, port renumbering, and
//! identifier assignment, each a separate protocol run threaded
//! through seeded schedules derived from one master seed.

pub mod assign;
pub mod renumber;
pub mod tree;

pub use assign::{assign_global_ids, assign_local_ids, AssignIds, IdMsg, IdState};
pub use renumber::{renumber_ports, AdjustMsg, Renumber, RenumberOutcome, RenumberState};
pub use tree::{build_spanning_tree, TreeBuild, TreeMsg, TreeNode, TreeOutcome, TreeState};

use std::collections::BTreeMap;

use crate::coloring::ColorParams;
use crate::config::Configuration;
use crate::grid::Coord;
use crate::hetero::{self, HeteroOutcome};
use crate::orientation::Orientation;
use crate::runtime::{RunOptions, Trace};
use crate::Error;

/// Rounds used by each stage (last round with a state change).
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct StageRounds {
    pub election: u64,
    pub tree: u64,
    pub renumber: u64,
    pub local_ids: u64,
    pub global_ids: u64,
}

pub struct PipelineOutcome {
    pub leader: Coord,
    /// The shared port frame every particle ends up with: the
    /// leader's original orientation.
    pub frame: Orientation,
    pub orientations: BTreeMap<Coord, Orientation>,
    /// Tree ports in the shared frame.
    pub tree: BTreeMap<Coord, TreeNode>,
    pub local_ids: BTreeMap<Coord, IdState>,
    pub global_ids: BTreeMap<Coord, IdState>,
    pub rounds: StageRounds,
    /// One trace per stage when recording was requested.
    pub traces: Vec<Trace>,
}

/// Derives independent per-stage seeds from the master seed.
fn stage_seed(master: u64, stage: u64) -> u64 {
    let mut z = master.wrapping_add(stage.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs election, tree construction, renumbering, and both identifier
/// assignments in sequence.  Requires an electable configuration;
/// orientations may be arbitrary.
pub fn run_pipeline(
    world: &Configuration,
    ell: u64,
    options: &RunOptions,
) -> Result<PipelineOutcome, Error> {
    let params = ColorParams::new(ell)?;
    let stage_options = |stage: u64| RunOptions {
        seed: stage_seed(options.seed, stage),
        ..*options
    };
    let mut traces = Vec::new();
    let mut grab = |t: Option<Trace>| traces.extend(t);

    let election = hetero::run_hetero(world, &stage_options(0));
    let leader = match hetero::outcome(&election.states) {
        HeteroOutcome::Elected(leader) => leader,
        HeteroOutcome::Stalled { candidates } => {
            return Err(Error::StageFailed {
                stage: "election",
                reason: format!("stalled with {} candidates", candidates.len()),
            })
        }
    };
    grab(election.trace);

    let tree = build_spanning_tree(world, leader, &stage_options(1))?;
    grab(tree.report.trace);

    let renumbered = renumber_ports(world, leader, &tree.nodes, &stage_options(2))?;
    grab(renumbered.report.trace);

    let frame = world.orientation(leader)?;
    let shared = Configuration::with_orientations(world.coords().map(|p| (p, frame)))?;

    let local = assign_local_ids(&shared, leader, &renumbered.tree, params, &stage_options(3))?;
    let global = assign_global_ids(&shared, leader, &renumbered.tree, &stage_options(4))?;

    let rounds = StageRounds {
        election: election.rounds_used,
        tree: tree.report.rounds_used,
        renumber: renumbered.report.rounds_used,
        local_ids: local.rounds_used,
        global_ids: global.rounds_used,
    };
    let local_ids = local.states;
    let global_ids = global.states;
    grab(local.trace);
    grab(global.trace);

    Ok(PipelineOutcome {
        leader,
        frame,
        orientations: renumbered.orientations,
        tree: renumbered.tree,
        local_ids,
        global_ids,
        rounds,
        traces,
    })
}
