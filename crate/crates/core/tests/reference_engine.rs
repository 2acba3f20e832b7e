//! Checks the engine against a deliberately naive re-implementation of the round rules:
//! dense weight vectors, linear cumulative sampling and the plain reinforcement formula.

use conflict_core::config::{SimConfig, StrategyInit, UpdateMode};
use conflict_core::engine::Simulation;
use conflict_core::game::{payoff, GamePayoffs, Role, Strategy};
use conflict_core::rng;

struct NaiveAgent {
    host: [f64; 2],
    visit: [f64; 2],
    partner: Vec<f64>,
}

struct Naive {
    config: SimConfig,
    agents: Vec<NaiveAgent>,
    streams: Vec<rand_chacha::ChaCha8Rng>,
}

fn discount_and_add(w: &mut [f64], chosen: usize, pi: f64, delta: f64) {
    for (s, x) in w.iter_mut().enumerate() {
        *x = (1.0 - delta) * *x + if s == chosen { pi } else { 0.0 };
    }
}

impl Naive {
    fn new(config: &SimConfig) -> Self {
        let n = config.n;
        let sim = Simulation::new(config.clone()).unwrap();
        // Strategy weights are taken from the engine so random initialisation is shared.
        let agents = sim
            .agents()
            .iter()
            .enumerate()
            .map(|(i, a)| NaiveAgent {
                host: a.host_weights,
                visit: a.visitor_weights,
                partner: (0..n)
                    .map(|j| if j == i { 0.0 } else { config.network_scale / (n - 1) as f64 })
                    .collect(),
            })
            .collect();
        let streams = (0..n as u64).map(|i| rng::stream(config.seed, i)).collect();
        Naive { config: config.clone(), agents, streams }
    }

    fn pick(&self, i: usize, coin: f64, u: f64) -> usize {
        let n = self.config.n;
        let others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        let uniform = others[((u * (n - 1) as f64) as usize).min(n - 2)];
        if self.config.mode == UpdateMode::NoNetwork || coin < self.config.epsilon {
            return uniform;
        }
        let w = &self.agents[i].partner;
        let total: f64 = others.iter().map(|&j| w[j]).sum();
        let mut acc = 0.0;
        for &j in &others {
            acc += w[j];
            if acc > u * total {
                return j;
            }
        }
        *others.last().unwrap()
    }

    fn strategy(&self, pair: [f64; 2], u: f64) -> Strategy {
        let eps = self.config.epsilon;
        let p_hawk = (1.0 - eps) * pair[0] / (pair[0] + pair[1]) + eps / 2.0;
        if u < p_hawk {
            Strategy::Hawk
        } else {
            Strategy::Dove
        }
    }

    fn step(&mut self) -> Vec<(usize, usize, Strategy, Strategy)> {
        let n = self.config.n;
        let draws: Vec<[f64; 4]> = self
            .streams
            .iter_mut()
            .map(|s| [rng::unit_f64(s), rng::unit_f64(s), rng::unit_f64(s), rng::unit_f64(s)])
            .collect();
        let targets: Vec<usize> = (0..n).map(|i| self.pick(i, draws[i][0], draws[i][1])).collect();
        let plays: Vec<(usize, usize, Strategy, Strategy)> = (0..n)
            .map(|i| {
                let j = targets[i];
                (i, j, self.strategy(self.agents[i].visit, draws[i][2]), self.strategy(self.agents[j].host, draws[i][3]))
            })
            .collect();
        let g = self.config.payoffs;
        let d = self.config.delta;
        for &(i, j, vs, hs) in &plays {
            let pv = payoff(vs, hs, Role::Visitor, &g);
            let ph = payoff(hs, vs, Role::Host, &g);
            match self.config.mode {
                UpdateMode::Asymmetric | UpdateMode::NoNetwork => {
                    discount_and_add(&mut self.agents[i].visit, vs.index(), pv, d);
                    if self.config.mode == UpdateMode::Asymmetric {
                        discount_and_add(&mut self.agents[i].partner, j, pv, d);
                    }
                    discount_and_add(&mut self.agents[j].host, hs.index(), ph, d);
                }
                UpdateMode::Symmetric => {
                    discount_and_add(&mut self.agents[i].host, vs.index(), pv, d);
                    self.agents[i].visit = self.agents[i].host;
                    discount_and_add(&mut self.agents[i].partner, j, pv, d);
                    discount_and_add(&mut self.agents[j].host, hs.index(), ph, d);
                    self.agents[j].visit = self.agents[j].host;
                    discount_and_add(&mut self.agents[j].partner, i, ph, d);
                }
            }
        }
        plays
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1e-300)
}

fn compare(config: SimConfig, rounds: usize) {
    let mut sim = Simulation::new(config.clone()).unwrap();
    let mut naive = Naive::new(&config);
    for round in 0..rounds {
        let expected = naive.step();
        let got: Vec<_> = sim
            .step()
            .iter()
            .map(|r| (r.visitor, r.host, r.visitor_strategy, r.host_strategy))
            .collect();
        assert_eq!(got, expected, "{:?} diverged in round {}", config.mode, round + 1);
    }
    for (a, b) in sim.agents().iter().zip(&naive.agents) {
        for k in 0..2 {
            assert!(close(a.host_weights[k], b.host[k]));
            assert!(close(a.visitor_weights[k], b.visit[k]));
        }
        for (x, y) in a.partner.to_vec().iter().zip(&b.partner) {
            assert!(close(*x, *y), "{x} vs {y}");
        }
    }
}

fn config(mode: UpdateMode, n: usize, epsilon: f64, seed: u64) -> SimConfig {
    let mut c = SimConfig::new(n, GamePayoffs::symmetric(0.2, 0.6).unwrap(), 0.01, epsilon, seed);
    c.mode = mode;
    c
}

#[test]
fn asymmetric_rounds_match_reference() {
    compare(config(UpdateMode::Asymmetric, 7, 0.05, 1), 3000);
    compare(config(UpdateMode::Asymmetric, 20, 0.0, 2), 500);
}

#[test]
fn symmetric_rounds_match_reference() {
    compare(config(UpdateMode::Symmetric, 9, 0.01, 3), 2000);
}

#[test]
fn no_network_rounds_match_reference() {
    compare(config(UpdateMode::NoNetwork, 12, 0.01, 4), 2000);
}

#[test]
fn random_initial_weights_match_reference() {
    let mut c = config(UpdateMode::Asymmetric, 10, 0.01, 5);
    c.strategy_init = StrategyInit::Random;
    compare(c, 1000);
}

#[test]
fn one_round_visitor_weight_sums() {
    // N = 20, delta = 0.01: after one round each visitor pair sums to 0.99 * 2 + its payoff.
    let c = config(UpdateMode::Asymmetric, 20, 0.01, 17);
    let mut sim = Simulation::new(c).unwrap();
    let records = sim.step().to_vec();
    assert_eq!(records.len(), 20);
    for r in &records {
        let w = sim.agents()[r.visitor].visitor_weights;
        assert!((w[0] + w[1] - (1.98 + r.visitor_payoff)).abs() < 1e-12);
    }
}
