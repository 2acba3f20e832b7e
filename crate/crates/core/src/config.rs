use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::game::GamePayoffs;

/// How strategy and partner weights respond to an interaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateMode {
    /// Separate host and visitor strategy weights; only visitors learn whom to visit.
    #[default]
    Asymmetric,
    /// One strategy pair per agent used in both roles; host and visitor both reinforce the tie.
    Symmetric,
    /// Visit targets drawn uniformly every round; strategies learned as in `Asymmetric`.
    NoNetwork,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyInit {
    /// Every strategy weight equals `strategy_scale`.
    #[default]
    Uniform,
    /// Every strategy weight drawn independently from Uniform(0, 2 * strategy_scale).
    Random,
}

pub const DEFAULT_NETWORK_SCALE: f64 = 19.0;
pub const DEFAULT_STRATEGY_SCALE: f64 = 1.0;
pub const DEFAULT_ROUNDS: u64 = 1_000_000;
pub const DEFAULT_SNAPSHOT_EVERY: u64 = 10_000;

fn default_network_scale() -> f64 {
    DEFAULT_NETWORK_SCALE
}
fn default_strategy_scale() -> f64 {
    DEFAULT_STRATEGY_SCALE
}
fn default_rounds() -> u64 {
    DEFAULT_ROUNDS
}
fn default_snapshot_every() -> u64 {
    DEFAULT_SNAPSHOT_EVERY
}

/// Everything needed to reproduce one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    /// Population size.
    pub n: usize,
    pub payoffs: GamePayoffs,
    /// Discount applied to a weight vector on every reinforcement.
    pub delta: f64,
    /// Probability mass of uniformly random choice mixed into every decision.
    pub epsilon: f64,
    #[serde(default)]
    pub mode: UpdateMode,
    /// Initial total partner weight `L`; each partner starts at `L / (n - 1)`.
    #[serde(default = "default_network_scale")]
    pub network_scale: f64,
    /// Initial weight of each strategy.
    #[serde(default = "default_strategy_scale")]
    pub strategy_scale: f64,
    #[serde(default)]
    pub strategy_init: StrategyInit,
    #[serde(default = "default_rounds")]
    pub rounds: u64,
    pub seed: u64,
    #[serde(default = "default_snapshot_every")]
    pub snapshot_every: u64,
}

impl SimConfig {
    /// Configuration with every optional field at its default.
    pub fn new(n: usize, payoffs: GamePayoffs, delta: f64, epsilon: f64, seed: u64) -> Self {
        SimConfig {
            n,
            payoffs,
            delta,
            epsilon,
            mode: UpdateMode::default(),
            network_scale: DEFAULT_NETWORK_SCALE,
            strategy_scale: DEFAULT_STRATEGY_SCALE,
            strategy_init: StrategyInit::default(),
            rounds: DEFAULT_ROUNDS,
            seed,
            snapshot_every: DEFAULT_SNAPSHOT_EVERY,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n < 2 {
            return Err(ConfigError::invariant("n", "population size must be at least 2", self.n));
        }
        self.payoffs.validate()?;
        if !(0.0..1.0).contains(&self.delta) {
            return Err(ConfigError::invariant("delta", "delta must lie in [0, 1)", self.delta));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(ConfigError::invariant(
                "epsilon",
                "epsilon must lie in [0, 1]",
                self.epsilon,
            ));
        }
        if !(self.network_scale.is_finite() && self.network_scale > 0.0) {
            return Err(ConfigError::invariant(
                "network_scale",
                "network_scale must be finite and > 0",
                self.network_scale,
            ));
        }
        if !(self.strategy_scale.is_finite() && self.strategy_scale > 0.0) {
            return Err(ConfigError::invariant(
                "strategy_scale",
                "strategy_scale must be finite and > 0",
                self.strategy_scale,
            ));
        }
        if self.snapshot_every == 0 {
            return Err(ConfigError::invariant(
                "snapshot_every",
                "snapshot_every must be at least 1",
                self.snapshot_every,
            ));
        }
        Ok(())
    }

    pub fn initial_partner_weight(&self) -> f64 {
        self.network_scale / (self.n - 1) as f64
    }
}
