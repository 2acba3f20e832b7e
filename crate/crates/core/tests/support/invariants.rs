//! Whole-run invariants of the engine and the classifiers, as checks that report the first
//! violation they find.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use conflict_core::analysis::{classify_population, profiles, ClassifierThresholds};
use conflict_core::config::{SimConfig, StrategyInit, UpdateMode};
use conflict_core::engine::{expected_visitors, run_simulation, AgentWeights, Simulation};
use conflict_core::game::GamePayoffs;
use conflict_core::learning::{action_probabilities, reinforce};

pub type Check = Result<(), String>;

const MODES: [UpdateMode; 3] = [UpdateMode::Asymmetric, UpdateMode::Symmetric, UpdateMode::NoNetwork];

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_config(rng: &mut impl Rng) -> SimConfig {
    let mut open = || rng.gen_range(0.05..0.95);
    let g = GamePayoffs::new(open(), open(), open(), open()).unwrap();
    let mut c = SimConfig::new(rng.gen_range(2..16), g, rng.gen_range(0.0..0.2), rng.gen_range(0.0..0.2), rng.gen());
    c.mode = MODES[rng.gen_range(0..3)];
    c.strategy_init = if rng.gen() { StrategyInit::Random } else { StrategyInit::Uniform };
    c.network_scale = rng.gen_range(0.5..40.0);
    c.strategy_scale = rng.gen_range(0.1..5.0);
    c.rounds = rng.gen_range(50..400);
    c.snapshot_every = rng.gen_range(1..100);
    c
}

fn bits(w: &AgentWeights) -> Vec<u64> {
    w.host_weights
        .iter()
        .chain(&w.visitor_weights)
        .chain(&w.partner_weights)
        .map(|v| v.to_bits())
        .collect()
}

/// Re-running `configs` random configurations gives bit-identical snapshots and summaries.
pub fn determinism(configs: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..configs {
        let c = random_config(&mut rng);
        let a = run_simulation(&c).map_err(|e| e.to_string())?;
        let b = run_simulation(&c).map_err(|e| e.to_string())?;
        ensure(a.snapshots.len() == b.snapshots.len(), || format!("snapshot count differs for {c:?}"))?;
        for (x, y) in a.snapshots.iter().zip(&b.snapshots) {
            ensure(x.round == y.round, || format!("snapshot rounds differ for {c:?}"))?;
            for (p, q) in x.agents.iter().zip(&y.agents) {
                ensure(bits(p) == bits(q), || format!("weights differ at round {} for {c:?}", x.round))?;
            }
        }
        ensure(a.summary == b.summary, || format!("summaries differ for {c:?}"))?;
    }
    Ok(())
}

/// Largest normalization error of the choice rule over `vectors` random weight vectors.
pub fn normalization(vectors: usize) -> Result<f64, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst: f64 = 0.0;
    for _ in 0..vectors {
        let len = rng.gen_range(2..40);
        let magnitude = 10f64.powf(rng.gen_range(-20.0..20.0));
        let w: Vec<f64> = (0..len).map(|_| rng.gen::<f64>() * magnitude).collect();
        let eps = rng.gen::<f64>();
        let excluded = if rng.gen() { Some(rng.gen_range(0..len)) } else { None };
        let p = action_probabilities(&w, eps, excluded);
        worst = worst.max((p.values.iter().sum::<f64>() - 1.0).abs());
        if let Some(e) = excluded {
            ensure(p.values[e] == 0.0, || "excluded entry has probability".into())?;
        }
    }
    ensure(worst <= 1e-12, || format!("worst normalization error {worst:e}"))?;
    Ok(worst)
}

/// One reinforcement step equals `(1 - delta) * w + payoff * [s == chosen]` on random inputs.
pub fn reinforcement_algebra(cases: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..cases {
        let len = rng.gen_range(2..30);
        let w: Vec<f64> = (0..len).map(|_| rng.gen_range(1e-6..1e3)).collect();
        let chosen = rng.gen_range(0..len);
        let pi = rng.gen::<f64>();
        let delta = rng.gen::<f64>() * 0.999;
        let mut got = w.clone();
        reinforce(&mut got, chosen, pi, delta);
        for (s, (&g, &old)) in got.iter().zip(&w).enumerate() {
            let want = (1.0 - delta) * old + if s == chosen { pi } else { 0.0 };
            ensure((g - want).abs() <= 1e-12 * want.abs().max(1.0), || format!("{g} != {want}"))?;
        }
    }
    Ok(())
}

fn check_bounds(sim: &Simulation, initial: &[(f64, f64, f64)]) -> Check {
    let c = sim.config();
    let n = c.n as f64;
    // Reinforcements per round: a host can take n - 1 visits; in symmetric mode every
    // vector is also reinforced by the agent's own visit.
    let (host_k, visit_k, partner_k) = match c.mode {
        UpdateMode::Symmetric => (n, n, n),
        _ => (n - 1.0, 1.0, 1.0),
    };
    for (i, a) in sim.agents().iter().enumerate() {
        ensure(a.host_weights.iter().chain(&a.visitor_weights).all(|&w| w > 0.0), || {
            format!("agent {i} strategy weight not positive at round {}", sim.round())
        })?;
        for (j, w) in a.partner.to_vec().into_iter().enumerate() {
            let ok = if i == j { w == 0.0 } else { w > 0.0 };
            ensure(ok, || format!("partner weight {i}->{j} = {w} at round {}", sim.round()))?;
        }
        let (h0, v0, p0) = initial[i];
        let sum2 = |w: [f64; 2]| w[0] + w[1];
        ensure(sum2(a.host_weights) <= h0.max(host_k / c.delta) + 1e-9, || format!("host bound broken by {i}"))?;
        ensure(sum2(a.visitor_weights) <= v0.max(visit_k / c.delta) + 1e-9, || format!("visitor bound broken by {i}"))?;
        ensure(a.partner.total() <= p0.max(partner_k / c.delta) + 1e-9, || format!("partner bound broken by {i}"))?;
    }
    Ok(())
}

/// Every non-diagonal weight stays positive and every vector stays under its K/delta bound,
/// checked after every round in each mode with and without errors.
pub fn positivity_and_bounds(rounds: u64) -> Check {
    for (k, mode) in MODES.into_iter().enumerate() {
        for eps in [0.0, 0.05] {
            let mut c = SimConfig::new(12, GamePayoffs::symmetric(0.2, 0.6).unwrap(), 0.05, eps, k as u64);
            c.mode = mode;
            c.strategy_init = StrategyInit::Random;
            let mut sim = Simulation::new(c).map_err(|e| e.to_string())?;
            let initial: Vec<_> = sim
                .agents()
                .iter()
                .map(|a| (a.host_weights[0] + a.host_weights[1], a.visitor_weights[0] + a.visitor_weights[1], a.partner.total()))
                .collect();
            for _ in 0..rounds {
                sim.step();
                check_bounds(&sim, &initial)?;
            }
        }
    }
    Ok(())
}

/// Host weights reach visitor and partner weights only through the strategies hosts play:
/// replaying the recorded plays without any host state reproduces those trajectories.
pub fn context_isolation() -> Check {
    let mut c = SimConfig::new(9, GamePayoffs::new(0.3, 0.7, 0.2, 0.5).unwrap(), 0.02, 0.05, 8);
    c.strategy_init = StrategyInit::Random;
    let mut sim = Simulation::new(c.clone()).map_err(|e| e.to_string())?;
    let mut visit: Vec<[f64; 2]> = sim.agents().iter().map(|a| a.visitor_weights).collect();
    let mut partner: Vec<Vec<f64>> = sim.agents().iter().map(|a| a.partner.to_vec()).collect();
    for _ in 0..3000 {
        for r in sim.step() {
            reinforce(&mut visit[r.visitor], r.visitor_strategy.index(), r.visitor_payoff, c.delta);
            reinforce(&mut partner[r.visitor], r.host, r.visitor_payoff, c.delta);
        }
    }
    for (i, (a, (v, p))) in sim.agents().iter().zip(visit.iter().zip(&partner)).enumerate() {
        for k in 0..2 {
            ensure((a.visitor_weights[k] - v[k]).abs() <= 1e-9 * v[k].max(1e-300), || format!("visitor weights of {i}"))?;
        }
        for (x, y) in a.partner.to_vec().iter().zip(p) {
            ensure((x - y).abs() <= 1e-9 * y.max(1.0), || format!("partner weights of {i}"))?;
        }
    }
    Ok(())
}

/// A host that only ever earns 0 is discounted uniformly, so its hawk probability is fixed.
pub fn zero_payoff_hosts_keep_behavior() -> Check {
    let mut c = SimConfig::new(6, GamePayoffs::symmetric(0.2, 0.6).unwrap(), 0.01, 0.0, 4);
    c.strategy_init = StrategyInit::Random;
    let mut sim = Simulation::new(c.clone()).map_err(|e| e.to_string())?;
    let before: Vec<f64> = sim.snapshot().agents.iter().map(|a| a.p_hawk_host(0.0)).collect();
    let mut paid = vec![false; c.n];
    for _ in 0..200 {
        for r in sim.step() {
            if r.host_payoff > 0.0 {
                paid[r.host] = true;
            }
        }
    }
    let after: Vec<f64> = sim.snapshot().agents.iter().map(|a| a.p_hawk_host(0.0)).collect();
    for i in (0..c.n).filter(|&i| !paid[i]) {
        ensure((before[i] - after[i]).abs() < 1e-12, || format!("host {i} drifted"))?;
    }
    Ok(())
}

/// Population mixing pure, mixed and hub-focused agents.
pub fn random_population(rng: &mut impl Rng, n: usize) -> Vec<AgentWeights> {
    fn pair(rng: &mut dyn RngCore) -> [f64; 2] {
        match rng.gen_range(0..3) {
            0 => [rng.gen_range(50.0..100.0), rng.gen_range(0.0..0.5)],
            1 => [rng.gen_range(0.0..0.5), rng.gen_range(50.0..100.0)],
            _ => [rng.gen_range(0.1..1.0), rng.gen_range(0.1..1.0)],
        }
    }
    let hub = rng.gen_range(0..n);
    (0..n)
        .map(|i| AgentWeights {
            host_weights: pair(rng),
            visitor_weights: pair(rng),
            partner_weights: (0..n)
                .map(|j| match j {
                    j if j == i => 0.0,
                    j if j == hub && rng.gen_bool(0.7) => rng.gen_range(50.0..100.0),
                    _ => rng.gen_range(0.01..1.0),
                })
                .collect(),
        })
        .collect()
}

/// Expected visitors sum to N and match a brute-force sum of visit-probability rows.
pub fn expected_visitor_conservation(populations: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..populations {
        let n = rng.gen_range(2..40);
        let agents = random_population(&mut rng, n);
        let eps = rng.gen::<f64>();
        let e = expected_visitors(&agents, eps);
        let total: f64 = e.iter().sum();
        ensure((total - n as f64).abs() < 1e-9, || format!("sum {total} != {n}"))?;
        for j in 0..n {
            let mut want = 0.0;
            for (i, a) in agents.iter().enumerate() {
                if i != j {
                    let row: f64 = a.partner_weights.iter().sum();
                    want += (1.0 - eps) * a.partner_weights[j] / row + eps / (n - 1) as f64;
                }
            }
            ensure((e[j] - want).abs() < 1e-9, || format!("E[{j}] = {} != {want}", e[j]))?;
        }
    }
    Ok(())
}

/// Rescaling any agent's weight vectors by positive factors leaves the label unchanged.
pub fn classification_scale_invariance(populations: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for k in 0..populations {
        let n = rng.gen_range(3..25);
        let agents = random_population(&mut rng, n);
        let scaled: Vec<AgentWeights> = agents
            .iter()
            .map(|a| {
                let mut factor = || 10f64.powf(rng.gen_range(-30.0..30.0));
                let (h, v, p) = (factor(), factor(), factor());
                AgentWeights {
                    host_weights: a.host_weights.map(|w| w * h),
                    visitor_weights: a.visitor_weights.map(|w| w * v),
                    partner_weights: a.partner_weights.iter().map(|w| w * p).collect(),
                }
            })
            .collect();
        for theta_s in [0.8, 0.9, 0.95] {
            let t = ClassifierThresholds::with_theta_s(theta_s);
            let (a, b) = (classify_population(&agents, &t), classify_population(&scaled, &t));
            ensure(a == b, || format!("population {k}: {a} vs {b} after rescaling"))?;
        }
    }
    Ok(())
}

/// Relabeling agents permutes per-agent outputs and leaves the label unchanged.
pub fn classification_permutation_invariance(populations: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(78);
    let t = ClassifierThresholds::default();
    for k in 0..populations {
        let n = rng.gen_range(3..25);
        let agents = random_population(&mut rng, n);
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        let mut relabeled = agents.clone();
        for (i, a) in agents.iter().enumerate() {
            let mut row = vec![0.0; n];
            for (j, &w) in a.partner_weights.iter().enumerate() {
                row[perm[j]] = w;
            }
            relabeled[perm[i]] = AgentWeights { partner_weights: row, ..a.clone() };
        }
        let (a, b) = (classify_population(&agents, &t), classify_population(&relabeled, &t));
        ensure(a == b, || format!("population {k}: {a} vs {b} after relabeling"))?;
        let (p, q) = (profiles(&agents), profiles(&relabeled));
        for i in 0..n {
            ensure((p[i].expected_visitors - q[perm[i]].expected_visitors).abs() < 1e-9, || format!("E of agent {i}"))?;
            ensure(p[i].p_hawk_host == q[perm[i]].p_hawk_host, || format!("profile of agent {i}"))?;
        }
    }
    Ok(())
}
