//! Games of conflict (hawk-dove, snowdrift, chicken) played between a host and a visitor.
//!
//! Payoffs are normalized so that Hawk against Hawk pays 0 and Hawk against Dove pays 1 in
//! both roles. Only the Dove payoffs vary by role: `x` is Dove against Hawk and `y` is Dove
//! against Dove, with subscript 1 for the host and 2 for the visitor.

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Action taken by one participant of an interaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Hawk,
    Dove,
}

impl Strategy {
    /// Position of the strategy inside a `[hawk, dove]` weight pair.
    pub const fn index(self) -> usize {
        match self {
            Strategy::Hawk => 0,
            Strategy::Dove => 1,
        }
    }

    pub const fn from_index(index: usize) -> Self {
        if index == 0 {
            Strategy::Hawk
        } else {
            Strategy::Dove
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Hawk => "hawk",
            Strategy::Dove => "dove",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Host,
    Visitor,
}

/// The four Dove payoffs of a game of conflict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GamePayoffs {
    /// Host playing Dove against a Hawk visitor.
    pub x1: f64,
    /// Host playing Dove against a Dove visitor.
    pub y1: f64,
    /// Visitor playing Dove against a Hawk host.
    pub x2: f64,
    /// Visitor playing Dove against a Dove host.
    pub y2: f64,
}

impl GamePayoffs {
    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Result<Self, ConfigError> {
        let g = Self { x1, y1, x2, y2 };
        g.validate()?;
        Ok(g)
    }

    /// Same payoffs for host and visitor.
    pub fn symmetric(x: f64, y: f64) -> Result<Self, ConfigError> {
        Self::new(x, y, x, y)
    }

    /// Every payoff must lie strictly inside (0, 1); this keeps Hawk/Dove above Dove/Dove
    /// and Dove/Hawk above Hawk/Hawk for both roles.
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (field, value) in [
            ("payoffs.x1", self.x1),
            ("payoffs.y1", self.y1),
            ("payoffs.x2", self.x2),
            ("payoffs.y2", self.y2),
        ] {
            if !(value > 0.0 && value < 1.0) {
                return Err(ConfigError::Invariant {
                    field: field.to_string(),
                    rule: "payoff must lie in the open interval (0, 1)".to_string(),
                    value: value.to_string(),
                });
            }
        }
        Ok(())
    }

    /// `(x, y)` for the given role.
    pub fn dove_payoffs(&self, role: Role) -> (f64, f64) {
        match role {
            Role::Host => (self.x1, self.y1),
            Role::Visitor => (self.x2, self.y2),
        }
    }
}

/// The two role-conditioned correlated equilibria.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConventionKind {
    /// Hawk when hosting, Dove when visiting.
    Bourgeois,
    /// Dove when hosting, Hawk when visiting.
    Paradoxical,
}

impl ConventionKind {
    /// `(host strategy, visitor strategy)` prescribed by the convention.
    pub fn strategies(self) -> (Strategy, Strategy) {
        match self {
            ConventionKind::Bourgeois => (Strategy::Hawk, Strategy::Dove),
            ConventionKind::Paradoxical => (Strategy::Dove, Strategy::Hawk),
        }
    }
}

pub fn payoff(own: Strategy, opponent: Strategy, role: Role, g: &GamePayoffs) -> f64 {
    let (x, y) = g.dove_payoffs(role);
    match (own, opponent) {
        (Strategy::Hawk, Strategy::Hawk) => 0.0,
        (Strategy::Hawk, Strategy::Dove) => 1.0,
        (Strategy::Dove, Strategy::Hawk) => x,
        (Strategy::Dove, Strategy::Dove) => y,
    }
}

/// Dove probabilities `(host, visitor)` of the role-wise mixed Nash equilibrium.
pub fn mixed_nash(g: &GamePayoffs) -> (f64, f64) {
    let dove = |x: f64, y: f64| x / (1.0 - y + x);
    (dove(g.x1, g.y1), dove(g.x2, g.y2))
}

/// `(host payoff, visitor payoff)` once a whole population follows the convention.
pub fn convention_payoffs(g: &GamePayoffs, kind: ConventionKind) -> (f64, f64) {
    let (host, visitor) = kind.strategies();
    (
        payoff(host, visitor, Role::Host, g),
        payoff(visitor, host, Role::Visitor, g),
    )
}
