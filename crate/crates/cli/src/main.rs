//! Command-line front end: shape generation, electability checking,
//! elections, the identifier pipeline, and per-layer rendering.
//!
//! Exit codes: 0 success, 2 usage or invalid input, 3 stalled
//! election or non-electable configuration, 4 round-limit timeout.

mod render;
mod shapes;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use fcc_matter::coloring::ColorParams;
use fcc_matter::config::{circle_stack, rect_stack, ConfigFile, Configuration};
use fcc_matter::electability;
use fcc_matter::grid::Coord;
use fcc_matter::hetero::{self, HeteroOutcome};
use fcc_matter::homog;
use fcc_matter::identifiers::{run_pipeline, PipelineOutcome};
use fcc_matter::orientation::Orientation;
use fcc_matter::runtime::{RunOptions, Trace};
use fcc_matter::Error;

const EXIT_BLOCKED: u8 = 3; // stall / non-electable
const EXIT_TIMEOUT: u8 = 4;

#[derive(Parser)]
#[command(name = "fcc-matter", version, about = "Programmable-matter simulations on the FCC grid")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a configuration file.
    Gen {
        #[command(subcommand)]
        shape: Shape,
    },
    /// Verify the electability properties of a configuration.
    Check {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Run a leader election to quiescence.
    Elect {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        round_limit: u64,
        /// Write a JSONL trace of the run here.
        #[arg(long)]
        trace_out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Run the full pipeline: election, spanning tree, port
    /// renumbering, local and global identifiers.
    Ids {
        #[arg(long)]
        input: PathBuf,
        /// Locality radius for the identifier coloring.
        #[arg(long, default_value_t = 2)]
        ell: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        round_limit: u64,
        /// Write one JSONL trace per stage under this prefix.
        #[arg(long)]
        trace_out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Draw per-layer panels of a configuration or a finished trace.
    Render {
        /// Configuration to draw.
        #[arg(long, conflicts_with = "trace", required_unless_present = "trace")]
        input: Option<PathBuf>,
        /// Trace whose final states to draw instead.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Annotate with ℓ-local identifiers from a pipeline run.
        #[arg(long, conflicts_with = "trace")]
        ell: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = RenderFormat::Text)]
        format: RenderFormat,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum Shape {
    /// Stacked axis-aligned rectangles, e.g. --spec "3x3@0;2x2@1".
    Rect {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Give particles seeded random orientations.
        #[arg(long)]
        orient_seed: Option<u64>,
    },
    /// Stacked balls of the given in-layer radius.
    Circle {
        #[arg(long)]
        radius: u64,
        #[arg(long, default_value_t = 1)]
        layers: u32,
        /// Explicit centers "X2,Y2,Z;..." overriding --layers.
        #[arg(long)]
        centers: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        orient_seed: Option<u64>,
    },
    /// Seeded random connected configuration.
    Random {
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Rejection-sample until the configuration is electable.
        #[arg(long)]
        electable: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        orient_seed: Option<u64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Homog,
    Hetero,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum RenderFormat {
    Text,
    Svg,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Gen { shape } => cmd_gen(shape),
        Command::Check { input, format } => cmd_check(&input, format),
        Command::Elect { input, mode, seed, round_limit, trace_out, format } => {
            cmd_elect(&input, mode, seed, round_limit, trace_out.as_deref(), format)
        }
        Command::Ids { input, ell, seed, round_limit, trace_out, format } => {
            cmd_ids(&input, ell, seed, round_limit, trace_out.as_deref(), format)
        }
        Command::Render { input, trace, ell, seed, format, out } => {
            cmd_render(input.as_deref(), trace.as_deref(), ell, seed, format, out.as_deref())
        }
    }
}

fn load_configuration(path: &Path) -> Result<Configuration> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let config: ConfigFile =
        serde_json::from_reader(BufReader::new(file)).context("parsing configuration")?;
    config
        .into_configuration()
        .map_err(|e| anyhow!("invalid configuration: {e}"))
}

/// Prints a payload line, exiting quietly when the consumer closed
/// the pipe early.
fn emit(contents: impl std::fmt::Display) {
    let mut stdout = std::io::stdout();
    let failed = writeln!(stdout, "{contents}").is_err() || stdout.flush().is_err();
    if failed {
        std::process::exit(0);
    }
}

fn write_output(path: Option<&Path>, contents: &str) -> Result<()> {
    match path {
        Some(path) => std::fs::write(path, contents)
            .with_context(|| format!("writing {}", path.display())),
        None => {
            emit(contents.trim_end_matches('\n'));
            Ok(())
        }
    }
}

fn cmd_gen(shape: Shape) -> Result<ExitCode> {
    let (world, out, orient_seed) = match shape {
        Shape::Rect { spec, out, orient_seed } => {
            let layers = shapes::parse_rect_spec(&spec)?;
            (rect_stack(&layers)?, out, orient_seed)
        }
        Shape::Circle { radius, layers, centers, out, orient_seed } => {
            let centers = match centers {
                Some(spec) => shapes::parse_centers(&spec)?,
                None => shapes::default_centers(layers),
            };
            (circle_stack(&centers, radius)?, out, orient_seed)
        }
        Shape::Random { count, seed, electable, out, orient_seed } => {
            let world = if electable {
                fcc_matter::config::random_electable(count, seed)?
            } else {
                fcc_matter::config::random_connected(count, seed)?
            };
            (world, out, orient_seed)
        }
    };
    let world = match orient_seed {
        Some(seed) => world.with_seeded_orientations(seed),
        None => world,
    };
    let file = ConfigFile::from_configuration(&world, orient_seed);
    let payload = serde_json::to_string_pretty(&file).context("serializing")? + "\n";
    let verdict = match electability::is_electable(&world) {
        Ok(()) => "electable".to_string(),
        Err(f) => format!("not electable ({})", failure_name(&f)),
    };
    let summary = format!("{} particles, {verdict}", world.len());
    match out {
        Some(path) => {
            write_output(Some(&path), &payload)?;
            emit(&summary);
        }
        None => {
            write_output(None, &payload)?;
            eprintln!("{summary}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn failure_name(failure: &electability::Failure) -> &'static str {
    match failure {
        electability::Failure::Tree { .. } => "tree",
        electability::Failure::Isometry { .. } => "isometry",
        electability::Failure::Border { .. } => "border",
    }
}

fn cmd_check(input: &Path, format: Format) -> Result<ExitCode> {
    let world = load_configuration(input)?;
    match electability::is_electable(&world) {
        Ok(()) => {
            match format {
                Format::Json => emit(json!({ "electable": true })),
                Format::Text => emit("electable"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Err(failure) => {
            match format {
                Format::Json => emit(json!({ "electable": false, "failure": failure })),
                Format::Text => {
                    emit(format_args!(
                        "not electable: {} property fails",
                        failure_name(&failure)
                    ));
                }
            }
            Ok(ExitCode::from(EXIT_BLOCKED))
        }
    }
}

fn write_trace(path: &Path, trace: &Trace) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    trace.write_jsonl(file).context("writing trace")
}

fn census<T: Ord + std::fmt::Debug>(tags: impl Iterator<Item = T>) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for tag in tags {
        *counts.entry(format!("{tag:?}")).or_insert(0) += 1;
    }
    counts
}

fn cmd_elect(
    input: &Path,
    mode: Mode,
    seed: u64,
    round_limit: u64,
    trace_out: Option<&Path>,
    format: Format,
) -> Result<ExitCode> {
    let world = load_configuration(input)?;
    let options = RunOptions { seed, round_limit, record_trace: trace_out.is_some() };
    let (leader, counts, rounds_used, rounds_total, timed_out, stalled): (
        Option<Coord>,
        BTreeMap<String, usize>,
        u64,
        u64,
        bool,
        Vec<Coord>,
    );
    match mode {
        Mode::Homog => {
            let report = homog::run_homog(&world, &options)
                .map_err(|e| anyhow!("homogeneous mode: {e}"))?;
            if let Some(trace) = &report.trace {
                write_trace(trace_out.expect("recording implies path"), trace)?;
            }
            leader = homog::leader(&report.states);
            counts = census(report.states.values().map(|s| s.tag));
            rounds_used = report.rounds_used;
            rounds_total = report.rounds_total;
            timed_out = report.timed_out;
            stalled = Vec::new();
        }
        Mode::Hetero => {
            let report = hetero::run_hetero(&world, &options);
            if let Some(trace) = &report.trace {
                write_trace(trace_out.expect("recording implies path"), trace)?;
            }
            let outcome = hetero::outcome(&report.states);
            counts = census(report.states.values().map(|s| s.tag));
            rounds_used = report.rounds_used;
            rounds_total = report.rounds_total;
            timed_out = report.timed_out;
            (leader, stalled) = match outcome {
                HeteroOutcome::Elected(p) => (Some(p), Vec::new()),
                HeteroOutcome::Stalled { candidates } => (None, candidates),
            };
        }
    }

    let mode_name = match mode {
        Mode::Homog => "homog",
        Mode::Hetero => "hetero",
    };
    match format {
        Format::Json => emit(
            json!({
                "mode": mode_name,
                "leader": leader,
                "rounds_used": rounds_used,
                "rounds_total": rounds_total,
                "census": counts,
                "timed_out": timed_out,
                "stalled": stalled,
            })
        ),
        Format::Text => {
            match leader {
                Some(p) => emit(format_args!("leader {p} after {rounds_used} rounds")),
                None => emit(format_args!("stalled with {} candidates", stalled.len())),
            }
            emit(format_args!("census: {counts:?}"));
        }
    }
    if timed_out {
        return Ok(ExitCode::from(EXIT_TIMEOUT));
    }
    if leader.is_none() {
        return Ok(ExitCode::from(EXIT_BLOCKED));
    }
    Ok(ExitCode::SUCCESS)
}

fn pipeline_exit(err: &Error) -> Option<u8> {
    match err {
        Error::StageFailed { stage: "election", .. } => Some(EXIT_BLOCKED),
        Error::StageFailed { reason, .. } if reason.contains("round limit") => Some(EXIT_TIMEOUT),
        _ => None,
    }
}

fn cmd_ids(
    input: &Path,
    ell: u64,
    seed: u64,
    round_limit: u64,
    trace_out: Option<&Path>,
    format: Format,
) -> Result<ExitCode> {
    let world = load_configuration(input)?;
    let options = RunOptions { seed, round_limit, record_trace: trace_out.is_some() };
    let outcome = match run_pipeline(&world, ell, &options) {
        Ok(outcome) => outcome,
        Err(e) => {
            return match pipeline_exit(&e) {
                Some(code) => {
                    eprintln!("pipeline failed: {e}");
                    Ok(ExitCode::from(code))
                }
                None => Err(anyhow!("pipeline failed: {e}")),
            }
        }
    };
    if let Some(prefix) = trace_out {
        for trace in &outcome.traces {
            let path = prefix.with_extension(format!("{}.jsonl", trace.header.algorithm));
            write_trace(&path, trace)?;
        }
    }
    print_ids(&outcome, ell, format);
    Ok(ExitCode::SUCCESS)
}

fn print_ids(outcome: &PipelineOutcome, ell: u64, format: Format) {
    match format {
        Format::Json => {
            let particles: Vec<_> = outcome
                .global_ids
                .iter()
                .map(|(p, global)| {
                    let local = &outcome.local_ids[p];
                    let tree = &outcome.tree[p];
                    json!({
                        "coord": p,
                        "global": global.triplet,
                        "local_id": local.id,
                        "local_triplet": local.triplet,
                        "parent": tree.parent,
                        "children": tree.children,
                    })
                })
                .collect();
            emit(json!({
                "leader": outcome.leader,
                "frame": outcome.frame,
                "ell": ell,
                "rounds": outcome.rounds,
                "particles": particles,
            }));
        }
        Format::Text => {
            emit(format_args!("leader {} (frame {})", outcome.leader, outcome.frame));
            for (p, global) in &outcome.global_ids {
                let local = &outcome.local_ids[p];
                emit(format_args!(
                    "{p}: global {} local {}",
                    global.triplet.expect("assigned"),
                    local.id.expect("assigned"),
                ));
            }
        }
    }
}

fn cmd_render(
    input: Option<&Path>,
    trace: Option<&Path>,
    ell: Option<u64>,
    seed: u64,
    format: RenderFormat,
    out: Option<&Path>,
) -> Result<ExitCode> {
    let (world, ann) = match (input, trace) {
        (Some(input), None) => {
            let world = load_configuration(input)?;
            let ann = match ell {
                None => render::Annotations::default(),
                Some(ell) => {
                    ColorParams::new(ell).map_err(|e| anyhow!("{e}"))?;
                    let options = RunOptions { seed, ..RunOptions::default() };
                    match run_pipeline(&world, ell, &options) {
                        Ok(outcome) => render::Annotations {
                            leader: Some(outcome.leader),
                            labels: outcome
                                .local_ids
                                .iter()
                                .map(|(&p, s)| (p, s.id.expect("assigned").to_string()))
                                .collect(),
                        },
                        Err(e) => {
                            return match pipeline_exit(&e) {
                                Some(code) => {
                                    eprintln!("pipeline failed: {e}");
                                    Ok(ExitCode::from(code))
                                }
                                None => Err(anyhow!("pipeline failed: {e}")),
                            }
                        }
                    }
                }
            };
            (world, ann)
        }
        (None, Some(trace_path)) => {
            let file = File::open(trace_path)
                .with_context(|| format!("opening {}", trace_path.display()))?;
            let trace = Trace::read_jsonl(BufReader::new(file)).context("parsing trace")?;
            let pairs = trace
                .header
                .particles
                .iter()
                .zip(&trace.header.orientations)
                .map(|(&p, &o)| {
                    Orientation::from_index(o)
                        .map(|omega| (p, omega))
                        .map_err(|e| anyhow!("trace orientation: {e}"))
                })
                .collect::<Result<Vec<_>>>()?;
            let world =
                Configuration::with_orientations(pairs).map_err(|e| anyhow!("trace world: {e}"))?;
            let labels = trace
                .final_states()
                .into_iter()
                .map(|(p, state)| (p, state_label(&state)))
                .collect();
            (world, render::Annotations { leader: None, labels })
        }
        _ => unreachable!("clap enforces exactly one source"),
    };
    let rendered = match format {
        RenderFormat::Text => render::render_text(&world, &ann),
        RenderFormat::Svg => render::render_svg(&world, &ann),
    };
    write_output(out, &rendered)?;
    Ok(ExitCode::SUCCESS)
}

/// Short display label for a final state from a trace.
fn state_label(state: &serde_json::Value) -> String {
    if let Some(tag) = state.get("tag").and_then(|t| t.as_str()) {
        tag.to_string()
    } else if let Some(id) = state.get("id").and_then(|i| i.as_u64()) {
        id.to_string()
    } else {
        "#".to_string()
    }
}
