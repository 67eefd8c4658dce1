//! Core algorithms for a plan–execute–recover crafting agent.
//!
//! A gridworld agent crafts a pogo stick by following a symbolic plan. When
//! the environment changes underneath it (a "novelty") and a plan operator
//! stops producing its declared effects, the agent detects the impasse,
//! trains a small policy-gradient "executor" for the broken operator using
//! knowledge-guided exploration, registers it, and resumes planning.
//!
//! The crate is `no_std` + `alloc`: everything here is pure computation
//! (PDDL-subset parsing, forward search, world simulation, policy training).
//! File formats, CLIs, threading, and statistics live in the companion
//! `rapidlearn-cli` crate.
//!
//! Module map:
//!
//! * [`symbolic`] — PDDL-subset domain/problem model, parser, printer,
//!   grounding, applicability, effect application, domain validation.
//! * [`planner`] — forward best-first search with a goal-count heuristic,
//!   plan validation, and a tri-state plannability oracle.
//! * [`world`] — the 12×12 crafting arena: reset, primitive actions,
//!   hierarchical approach (A*), and the LiDAR-style observation vector.
//! * [`novelty`] — the catalogue of environment changes and their injection.
//! * [`bridge`] — symbolic↔sub-symbolic glue: state detection, operator
//!   execution, executor termination, the recovery loop.
//! * [`learner`] — REINFORCE policy network, exploration biasing, schedules.
//! * [`discovery`] — impasse-to-executor training: plannable state sets,
//!   reward shaping, curriculum resets, convergence.

#![no_std]
#![forbid(unsafe_code)]
#![warn(missing_docs)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bridge;
pub mod discovery;
pub mod learner;
pub mod novelty;
pub mod planner;
pub mod symbolic;
pub mod util;
pub mod world;
