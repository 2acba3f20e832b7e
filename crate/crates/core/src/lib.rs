//! Coevolution of hawk-dove strategies and weighted network ties.
//!
//! Agents repeatedly visit one another to play a game of conflict. Each agent learns, by
//! Roth-Erev reinforcement with discounting and errors, which strategy to play as host, which
//! to play as visitor, and whom to visit. The crate provides the simulation engine, classifiers
//! for the resulting population states, network statistics and a seeded parameter-sweep
//! harness.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod engine;
pub mod error;
pub mod game;
pub mod learning;
pub mod partner;
pub mod rng;
pub mod sweep;

pub use config::{SimConfig, StrategyInit, UpdateMode};
pub use engine::{
    expected_visitors, init_population, run_simulation, run_simulation_with, AgentState,
    AgentWeights, InteractionRecord, InteractionSummary, Observer, RunOutput, Simulation, Snapshot,
};
pub use error::ConfigError;
pub use game::{convention_payoffs, mixed_nash, payoff, ConventionKind, GamePayoffs, Role, Strategy};
