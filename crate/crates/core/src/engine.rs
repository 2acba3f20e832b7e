//! Round-based coevolution of strategies and partner ties.
//!
//! A round has two phases. First every agent picks whom to visit, then every visit (in
//! ascending visitor order) draws the visitor's strategy followed by the host's strategy. All
//! of these decisions read the weights as they stood at the start of the round. Then every
//! interaction is learned from, again in ascending visitor order, with the visitor's updates
//! applied before the host's. A host with `k` visitors therefore reinforces its host weights
//! `k` times in a row.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{SimConfig, StrategyInit, UpdateMode};
use crate::error::ConfigError;
use crate::game::{payoff, Role, Strategy};
use crate::learning::{action_probabilities, hawk_probability, reinforce};
use crate::partner::PartnerWeights;
use crate::rng;

/// Learning state of one agent.
#[derive(Debug, Clone)]
pub struct AgentState {
    /// `[hawk, dove]` weights used when hosting. In symmetric mode this pair is shared by
    /// both roles.
    pub host_weights: [f64; 2],
    /// `[hawk, dove]` weights used when visiting. Mirrors `host_weights` in symmetric mode.
    pub visitor_weights: [f64; 2],
    pub partner: PartnerWeights,
}

/// One host-visitor game.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteractionRecord {
    pub round: u64,
    pub visitor: usize,
    pub host: usize,
    pub visitor_strategy: Strategy,
    pub host_strategy: Strategy,
    pub visitor_payoff: f64,
    pub host_payoff: f64,
}

/// Counts of plays and payoff totals over some set of interactions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct InteractionSummary {
    pub interactions: u64,
    pub host_hawk: u64,
    pub host_dove: u64,
    pub visitor_hawk: u64,
    pub visitor_dove: u64,
    pub host_payoff_sum: f64,
    pub visitor_payoff_sum: f64,
}

impl InteractionSummary {
    pub fn record(&mut self, r: &InteractionRecord) {
        self.interactions += 1;
        match r.host_strategy {
            Strategy::Hawk => self.host_hawk += 1,
            Strategy::Dove => self.host_dove += 1,
        }
        match r.visitor_strategy {
            Strategy::Hawk => self.visitor_hawk += 1,
            Strategy::Dove => self.visitor_dove += 1,
        }
        self.host_payoff_sum += r.host_payoff;
        self.visitor_payoff_sum += r.visitor_payoff;
    }

    pub fn merge(&mut self, other: &InteractionSummary) {
        self.interactions += other.interactions;
        self.host_hawk += other.host_hawk;
        self.host_dove += other.host_dove;
        self.visitor_hawk += other.visitor_hawk;
        self.visitor_dove += other.visitor_dove;
        self.host_payoff_sum += other.host_payoff_sum;
        self.visitor_payoff_sum += other.visitor_payoff_sum;
    }

    pub fn mean_host_payoff(&self) -> f64 {
        if self.interactions == 0 {
            0.0
        } else {
            self.host_payoff_sum / self.interactions as f64
        }
    }

    pub fn mean_visitor_payoff(&self) -> f64 {
        if self.interactions == 0 {
            0.0
        } else {
            self.visitor_payoff_sum / self.interactions as f64
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Decisions taken from an underflowed weight vector (uniform fallback).
    pub underflow_events: u64,
}

/// Frozen weights of one agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentWeights {
    pub host_weights: [f64; 2],
    pub visitor_weights: [f64; 2],
    pub partner_weights: Vec<f64>,
}

impl AgentWeights {
    pub fn p_hawk_host(&self, epsilon: f64) -> f64 {
        hawk_probability(self.host_weights, epsilon).0
    }

    pub fn p_hawk_visit(&self, epsilon: f64) -> f64 {
        hawk_probability(self.visitor_weights, epsilon).0
    }
}

/// Copy of the whole population after `round` rounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub round: u64,
    pub epsilon: f64,
    pub agents: Vec<AgentWeights>,
}

impl Snapshot {
    pub fn n(&self) -> usize {
        self.agents.len()
    }

    /// Row `i` holds agent `i`'s visit probabilities.
    pub fn visit_probabilities(&self, epsilon: f64) -> Vec<Vec<f64>> {
        visit_matrix(&self.agents, epsilon)
    }
}

pub fn visit_matrix(agents: &[AgentWeights], epsilon: f64) -> Vec<Vec<f64>> {
    agents
        .iter()
        .enumerate()
        .map(|(i, a)| action_probabilities(&a.partner_weights, epsilon, Some(i)).values)
        .collect()
}

/// `E_j`: expected number of visitors agent `j` receives per round.
pub fn expected_visitors(agents: &[AgentWeights], epsilon: f64) -> Vec<f64> {
    let n = agents.len();
    let mut expected = vec![0.0; n];
    for (i, a) in agents.iter().enumerate() {
        let row = action_probabilities(&a.partner_weights, epsilon, Some(i));
        for (e, p) in expected.iter_mut().zip(row.values) {
            *e += p;
        }
    }
    expected
}

/// Initial population: partner weights `L / (n - 1)` and strategy weights per
/// `strategy_init`. Random strategy weights come from the init stream of `config.seed`.
pub fn init_population(config: &SimConfig) -> Result<Vec<AgentState>, ConfigError> {
    config.validate()?;
    let n = config.n;
    let each = config.initial_partner_weight();
    let s = config.strategy_scale;
    let mut init_rng = rng::stream(config.seed, rng::INIT_STREAM);
    let mut draw = || match config.strategy_init {
        StrategyInit::Uniform => s,
        StrategyInit::Random => 2.0 * s * rng::open_unit_f64(&mut init_rng),
    };
    let mut agents = Vec::with_capacity(n);
    for i in 0..n {
        let host_weights = [draw(), draw()];
        let visitor_weights = if config.mode == UpdateMode::Symmetric {
            host_weights
        } else {
            [draw(), draw()]
        };
        agents.push(AgentState {
            host_weights,
            visitor_weights,
            partner: PartnerWeights::uniform(n, i, each),
        });
    }
    Ok(agents)
}

/// A simulation in progress.
#[derive(Debug, Clone)]
pub struct Simulation {
    config: SimConfig,
    agents: Vec<AgentState>,
    streams: Vec<ChaCha8Rng>,
    round: u64,
    diagnostics: Diagnostics,
    targets: Vec<usize>,
    draws: Vec<[f64; rng::DRAWS_PER_ROUND]>,
    records: Vec<InteractionRecord>,
}

impl Simulation {
    pub fn new(config: SimConfig) -> Result<Self, ConfigError> {
        let agents = init_population(&config)?;
        Ok(Self::from_population(config, agents))
    }

    /// Starts from an explicit population at round 0.
    pub fn from_population(config: SimConfig, agents: Vec<AgentState>) -> Self {
        let n = agents.len();
        let streams = (0..n as u64).map(|i| rng::stream(config.seed, i)).collect();
        Simulation {
            config,
            agents,
            streams,
            round: 0,
            diagnostics: Diagnostics::default(),
            targets: vec![0; n],
            draws: vec![[0.0; rng::DRAWS_PER_ROUND]; n],
            records: Vec::with_capacity(n),
        }
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn agents(&self) -> &[AgentState] {
        &self.agents
    }

    /// Rounds completed so far.
    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn diagnostics(&self) -> Diagnostics {
        self.diagnostics
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            round: self.round,
            epsilon: self.config.epsilon,
            agents: self
                .agents
                .iter()
                .map(|a| AgentWeights {
                    host_weights: a.host_weights,
                    visitor_weights: a.visitor_weights,
                    partner_weights: a.partner.to_vec(),
                })
                .collect(),
        }
    }

    fn choose_strategy(&mut self, pair: [f64; 2], u: f64) -> Strategy {
        let (p_hawk, underflow) = hawk_probability(pair, self.config.epsilon);
        if underflow {
            self.diagnostics.underflow_events += 1;
        }
        if u < p_hawk {
            Strategy::Hawk
        } else {
            Strategy::Dove
        }
    }

    /// Plays one round and returns its `n` interactions, ordered by visitor.
    pub fn step(&mut self) -> &[InteractionRecord] {
        let n = self.agents.len();
        let eps = self.config.epsilon;
        let g = self.config.payoffs;
        let round = self.round + 1;
        for (d, stream) in self.draws.iter_mut().zip(&mut self.streams) {
            for slot in d.iter_mut() {
                *slot = rng::unit_f64(stream);
            }
        }

        for i in 0..n {
            let [coin, pick, _, _] = self.draws[i];
            let uniform_pick = |i: usize| {
                let k = ((pick * (n - 1) as f64) as usize).min(n - 2);
                k + usize::from(k >= i)
            };
            self.targets[i] = match self.config.mode {
                UpdateMode::NoNetwork => uniform_pick(i),
                _ if coin < eps => uniform_pick(i),
                _ => match self.agents[i].partner.sample(pick) {
                    Some(j) => j,
                    None => {
                        self.diagnostics.underflow_events += 1;
                        uniform_pick(i)
                    }
                },
            };
        }

        // table[role][own][opponent], indexed by Strategy::index.
        let mut table = [[[0.0; 2]; 2]; 2];
        for (r, role) in [Role::Host, Role::Visitor].into_iter().enumerate() {
            for own in [Strategy::Hawk, Strategy::Dove] {
                for opp in [Strategy::Hawk, Strategy::Dove] {
                    table[r][own.index()][opp.index()] = payoff(own, opp, role, &g);
                }
            }
        }
        self.records.clear();
        for i in 0..n {
            let j = self.targets[i];
            let [_, _, u_visit, u_host] = self.draws[i];
            let visitor_strategy = self.choose_strategy(self.agents[i].visitor_weights, u_visit);
            let host_strategy = self.choose_strategy(self.agents[j].host_weights, u_host);
            self.records.push(InteractionRecord {
                round,
                visitor: i,
                host: j,
                visitor_strategy,
                host_strategy,
                visitor_payoff: table[1][visitor_strategy.index()][host_strategy.index()],
                host_payoff: table[0][host_strategy.index()][visitor_strategy.index()],
            });
        }

        let delta = self.config.delta;
        for r in &self.records {
            let vs = r.visitor_strategy.index();
            let hs = r.host_strategy.index();
            match self.config.mode {
                UpdateMode::Asymmetric | UpdateMode::NoNetwork => {
                    let visitor = &mut self.agents[r.visitor];
                    reinforce(&mut visitor.visitor_weights, vs, r.visitor_payoff, delta);
                    if self.config.mode == UpdateMode::Asymmetric {
                        visitor.partner.reinforce(r.host, r.visitor_payoff, delta);
                    }
                    let host = &mut self.agents[r.host];
                    reinforce(&mut host.host_weights, hs, r.host_payoff, delta);
                }
                UpdateMode::Symmetric => {
                    let visitor = &mut self.agents[r.visitor];
                    reinforce(&mut visitor.host_weights, vs, r.visitor_payoff, delta);
                    visitor.visitor_weights = visitor.host_weights;
                    visitor.partner.reinforce(r.host, r.visitor_payoff, delta);
                    let host = &mut self.agents[r.host];
                    reinforce(&mut host.host_weights, hs, r.host_payoff, delta);
                    host.visitor_weights = host.host_weights;
                    host.partner.reinforce(r.visitor, r.host_payoff, delta);
                }
            }
        }
        self.round = round;
        &self.records
    }
}

/// Hooks called while a simulation runs.
pub trait Observer {
    fn on_snapshot(&mut self, _snapshot: &Snapshot) {}
    fn on_round(&mut self, _records: &[InteractionRecord]) {}
}

impl Observer for () {}

/// Collects every snapshot in memory.
#[derive(Debug, Default)]
pub struct SnapshotCollector {
    pub snapshots: Vec<Snapshot>,
}

impl Observer for SnapshotCollector {
    fn on_snapshot(&mut self, snapshot: &Snapshot) {
        self.snapshots.push(snapshot.clone());
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub final_state: Snapshot,
    pub snapshots: Vec<Snapshot>,
    pub summary: InteractionSummary,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone)]
pub struct RunStats {
    pub final_state: Snapshot,
    pub summary: InteractionSummary,
    pub diagnostics: Diagnostics,
}

/// Whether a snapshot is due after `round` rounds of a `rounds`-round run.
pub fn snapshot_due(round: u64, rounds: u64, every: u64) -> bool {
    round == 0 || round == rounds || round.is_multiple_of(every)
}

/// Runs `config.rounds` rounds, reporting snapshots at round 0, every `snapshot_every`
/// rounds and at the final round.
pub fn run_simulation_with(config: &SimConfig, observer: &mut impl Observer) -> Result<RunStats, ConfigError> {
    let mut sim = Simulation::new(config.clone())?;
    let mut summary = InteractionSummary::default();
    observer.on_snapshot(&sim.snapshot());
    for _ in 0..config.rounds {
        let records = sim.step();
        for r in records {
            summary.record(r);
        }
        observer.on_round(records);
        if snapshot_due(sim.round(), config.rounds, config.snapshot_every) {
            observer.on_snapshot(&sim.snapshot());
        }
    }
    Ok(RunStats {
        final_state: sim.snapshot(),
        summary,
        diagnostics: sim.diagnostics(),
    })
}

pub fn run_simulation(config: &SimConfig) -> Result<RunOutput, ConfigError> {
    let mut collector = SnapshotCollector::default();
    let stats = run_simulation_with(config, &mut collector)?;
    Ok(RunOutput {
        final_state: stats.final_state,
        snapshots: collector.snapshots,
        summary: stats.summary,
        diagnostics: stats.diagnostics,
    })
}
