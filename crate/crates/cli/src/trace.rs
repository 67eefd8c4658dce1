//! Per-step world traces as line-delimited JSON, for debugging runs: each
//! line records the step index, the action taken, the resulting events, and
//! the agent's pose after the step.

use std::io::Write;

use rapidlearn_core::world::{Action, Event, Heading, World, WorldError};
use serde::Serialize;
use thiserror::Error;

/// One trace line.
#[derive(Debug, Serialize)]
struct TraceLine<'a> {
    step: u32,
    action: String,
    events: Vec<String>,
    x: i32,
    y: i32,
    heading: &'a str,
}

/// A traced step failed either in the world or in the sink.
#[derive(Debug, Error)]
pub enum TraceError {
    /// The world rejected the step.
    #[error("world: {0:?}")]
    World(WorldError),
    /// The sink rejected the line.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Streams world steps as JSONL.
#[derive(Debug)]
pub struct TraceWriter<W: Write> {
    out: W,
}

impl<W: Write> TraceWriter<W> {
    /// Wraps a sink.
    pub fn new(out: W) -> TraceWriter<W> {
        TraceWriter { out }
    }

    /// Steps the world and logs the transition. The step index logged is
    /// the world's count after the action, so replays line up with
    /// `step_count` exactly.
    pub fn step(&mut self, world: &mut World, action: Action) -> Result<Vec<Event>, TraceError> {
        let events = world.step(action).map_err(TraceError::World)?;
        let (x, y) = world.agent_pos();
        let line = TraceLine {
            step: world.step_count(),
            action: action.name(),
            events: events.iter().map(|e| format!("{e:?}")).collect(),
            x,
            y,
            heading: match world.heading() {
                Heading::North => "north",
                Heading::East => "east",
                Heading::South => "south",
                Heading::West => "west",
            },
        };
        let json = serde_json::to_string(&line).expect("plain fields serialize");
        writeln!(self.out, "{json}")?;
        Ok(events)
    }

    /// Flushes the sink.
    pub fn flush(&mut self) -> std::io::Result<()> {
        self.out.flush()
    }
}
