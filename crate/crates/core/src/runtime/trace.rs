//! JSONL execution traces.
//!
//! A trace is one header line followed by one event per line.  The
//! header records the schema version, algorithm name, scheduler seed
//! and the initial configuration; events record activations, sends,
//! receives and state changes with a global sequence number.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::grid::Coord;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub schema: u32,
    pub algorithm: String,
    pub seed: u64,
    pub particles: Vec<Coord>,
    /// Orientation indices parallel to `particles`.
    pub orientations: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub round: u64,
    pub seq: u64,
    pub particle: Coord,
    #[serde(flatten)]
    pub kind: TraceEventKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceEventKind {
    Activate,
    Send {
        port: u8,
        msg: serde_json::Value,
    },
    Receive {
        port: u8,
    },
    State {
        state: serde_json::Value,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trace {
    pub header: TraceHeader,
    pub events: Vec<TraceEvent>,
}

impl Trace {
    pub fn write_jsonl(&self, mut w: impl Write) -> io::Result<()> {
        serde_json::to_writer(&mut w, &self.header)?;
        w.write_all(b"\n")?;
        for event in &self.events {
            serde_json::to_writer(&mut w, event)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }

    pub fn read_jsonl(r: impl BufRead) -> io::Result<Trace> {
        let mut lines = r.lines();
        let header_line = lines
            .next()
            .ok_or_else(|| io::Error::new(io::ErrorKind::UnexpectedEof, "empty trace"))??;
        let header: TraceHeader = serde_json::from_str(&header_line)?;
        if header.schema != SCHEMA_VERSION {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                format!("unsupported trace schema {}", header.schema),
            ));
        }
        let mut events = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            events.push(serde_json::from_str(&line)?);
        }
        Ok(Trace { header, events })
    }

    /// The last recorded state of every particle, as raw JSON.
    pub fn final_states(&self) -> std::collections::BTreeMap<Coord, serde_json::Value> {
        let mut out = std::collections::BTreeMap::new();
        for event in &self.events {
            if let TraceEventKind::State { state } = &event.kind {
                out.insert(event.particle, state.clone());
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Trace {
        let p = Coord::new(0, 0, 0).unwrap();
        Trace {
            header: TraceHeader {
                schema: SCHEMA_VERSION,
                algorithm: "test".into(),
                seed: 7,
                particles: vec![p],
                orientations: vec![0],
            },
            events: vec![
                TraceEvent {
                    round: 1,
                    seq: 0,
                    particle: p,
                    kind: TraceEventKind::Activate,
                },
                TraceEvent {
                    round: 1,
                    seq: 1,
                    particle: p,
                    kind: TraceEventKind::Send {
                        port: 2,
                        msg: serde_json::json!({"hello": 1}),
                    },
                },
                TraceEvent {
                    round: 1,
                    seq: 2,
                    particle: p,
                    kind: TraceEventKind::State {
                        state: serde_json::json!("L"),
                    },
                },
            ],
        }
    }

    #[test]
    fn jsonl_round_trip() {
        let trace = sample();
        let text = trace.to_jsonl();
        assert_eq!(text.lines().count(), 4);
        let first = text.lines().next().unwrap();
        assert!(first.contains("\"schema\":1"));
        let back = Trace::read_jsonl(text.as_bytes()).unwrap();
        assert_eq!(back, trace);
    }

    #[test]
    fn events_tag_their_kind() {
        let text = sample().to_jsonl();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[1].contains("\"kind\":\"activate\""));
        assert!(lines[2].contains("\"kind\":\"send\""));
        assert!(lines[3].contains("\"kind\":\"state\""));
    }

    #[test]
    fn unknown_schema_is_rejected() {
        let mut trace = sample();
        trace.header.schema = 99;
        let text = trace.to_jsonl();
        assert!(Trace::read_jsonl(text.as_bytes()).is_err());
    }

    #[test]
    fn final_states_take_the_last_entry() {
        let mut trace = sample();
        let p = trace.header.particles[0];
        trace.events.push(TraceEvent {
            round: 2,
            seq: 3,
            particle: p,
            kind: TraceEventKind::State {
                state: serde_json::json!("N"),
            },
        });
        assert_eq!(trace.final_states()[&p], serde_json::json!("N"));
    }
}
