//! Second, table-driven implementation of the population classifier, and handcrafted
//! states covering every label.

use std::collections::BTreeMap;

use conflict_core::analysis::{classify_population, ClassifierThresholds, OutcomeLabel};
use conflict_core::engine::AgentWeights;

/// Rule-by-rule restatement working directly on raw weights.
pub fn oracle(agents: &[AgentWeights], t: &ClassifierThresholds) -> OutcomeLabel {
    let n = agents.len();
    let hawk = |w: [f64; 2]| w[0] / (w[0] + w[1]);
    let rows: Vec<Vec<f64>> = agents
        .iter()
        .map(|a| {
            let s: f64 = a.partner_weights.iter().sum();
            a.partner_weights.iter().map(|w| w / s).collect()
        })
        .collect();
    let e: Vec<f64> = (0..n).map(|j| rows.iter().map(|r| r[j]).sum()).collect();
    let host: Vec<f64> = agents.iter().map(|a| hawk(a.host_weights)).collect();
    let visit: Vec<f64> = agents.iter().map(|a| hawk(a.visitor_weights)).collect();
    let hi = |p: f64| p >= t.theta_s;
    let lo = |p: f64| p <= 1.0 - t.theta_s;

    let entropy: f64 = e.iter().filter(|&&x| x > 0.0).map(|&x| -(x / n as f64) * (x / n as f64).ln()).sum();
    let homogeneous = entropy / (n as f64).ln() >= t.homog_min;
    let enough = |k: usize, of: usize| k as f64 >= t.theta_p * of as f64 - 1e-9;

    let bourgeois = (0..n).filter(|&i| hi(host[i]) && lo(visit[i])).count();
    let paradoxical = (0..n).filter(|&i| lo(host[i]) && hi(visit[i])).count();
    if homogeneous && enough(bourgeois, n) {
        return OutcomeLabel::Bourgeois;
    }
    if homogeneous && enough(paradoxical, n) {
        return OutcomeLabel::Paradoxical;
    }
    let hubs: Vec<usize> = (0..n).filter(|&j| e[j] >= t.hub_factor - 1e-9).collect();
    if hubs.is_empty() || hubs.len() == n || !hubs.iter().all(|&h| lo(host[h])) {
        return OutcomeLabel::Unresolved;
    }
    let others: Vec<usize> = (0..n).filter(|i| !hubs.contains(i)).collect();
    let spokes = others
        .iter()
        .filter(|&&i| hi(visit[i]) && (0..n).filter(|&j| lo(host[j])).map(|j| rows[i][j]).sum::<f64>() >= t.theta_p - 1e-9)
        .count();
    if !enough(spokes, others.len()) {
        return OutcomeLabel::Unresolved;
    }
    let hybrid = hubs.iter().all(|&h| lo(host[h]) && hi(visit[h]));
    if hybrid {
        OutcomeLabel::Hybrid
    } else {
        OutcomeLabel::Network
    }
}

fn pair(p_hawk: f64) -> [f64; 2] {
    [p_hawk, 1.0 - p_hawk]
}

fn row(n: usize, me: usize, targets: &[(usize, f64)], background: f64) -> Vec<f64> {
    let mut r = vec![background; n];
    for &(j, w) in targets {
        r[j] += w;
    }
    r[me] = 0.0;
    if r.iter().all(|&w| w == 0.0) {
        r[(me + 1) % n] = 1.0;
    }
    r
}

pub struct Fixture {
    pub name: String,
    pub agents: Vec<AgentWeights>,
}

fn convention(n: usize, host: f64, visit: f64, defectors: usize, background: f64) -> Vec<AgentWeights> {
    (0..n)
        .map(|i| {
            let (h, v) = if i < defectors { (0.5, 0.5) } else { (host, visit) };
            AgentWeights {
                host_weights: pair(h),
                visitor_weights: pair(v),
                partner_weights: row(n, i, &[((i + 1) % n, 1.0 - background)], background),
            }
        })
        .collect()
}

fn star(n: usize, hubs: usize, hub_host: f64, hub_visit: f64, spoke_visit: f64, stray: usize) -> Vec<AgentWeights> {
    (0..n)
        .map(|i| {
            if i < hubs {
                AgentWeights {
                    host_weights: pair(hub_host),
                    visitor_weights: pair(hub_visit),
                    partner_weights: row(n, i, &[((i + 1) % hubs.max(2), 1.0)], 0.0),
                }
            } else {
                let target = if i < hubs + stray { hubs + (i + 1 - hubs) % (n - hubs) } else { i % hubs };
                AgentWeights {
                    host_weights: pair(0.5),
                    visitor_weights: pair(spoke_visit),
                    partner_weights: row(n, i, &[(target, 1.0)], 0.001),
                }
            }
        })
        .collect()
}

pub fn fixtures() -> Vec<Fixture> {
    let mut out = Vec::new();
    let mut push = |name: String, agents: Vec<AgentWeights>| out.push(Fixture { name, agents });
    for &n in &[10usize, 20, 40] {
        for &(h, v) in &[(0.99, 0.01), (0.01, 0.99), (0.92, 0.05), (0.05, 0.92), (0.85, 0.1), (0.5, 0.5)] {
            for &defectors in &[0usize, 1, n / 10 + 1] {
                for &background in &[1.0, 0.2] {
                    push(format!("convention n={n} h={h} v={v} d={defectors} bg={background}"), convention(n, h, v, defectors, background));
                }
            }
        }
        for &hubs in &[1usize, 2, 4] {
            for &(hh, hv) in &[(0.01, 0.01), (0.01, 0.99), (0.99, 0.99), (0.2, 0.99)] {
                for &sv in &[0.99, 0.7] {
                    for &stray in &[0usize, n / 5] {
                        push(format!("star n={n} hubs={hubs} hub=({hh},{hv}) spoke={sv} stray={stray}"), star(n, hubs, hh, hv, sv, stray));
                    }
                }
            }
        }
    }
    out
}

/// Checks the classifier against the oracle on every fixture for each `theta_s`, returning
/// how many fixtures produced each label.
pub fn check_against_oracle(theta_values: &[f64]) -> Result<BTreeMap<OutcomeLabel, usize>, String> {
    let all = fixtures();
    if all.len() < 50 {
        return Err(format!("only {} fixtures", all.len()));
    }
    let mut seen = BTreeMap::new();
    for &theta_s in theta_values {
        let t = ClassifierThresholds::with_theta_s(theta_s);
        for f in &all {
            let want = oracle(&f.agents, &t);
            let got = classify_population(&f.agents, &t);
            if got != want {
                return Err(format!("{} at theta_s={theta_s}: classifier {got}, oracle {want}", f.name));
            }
            *seen.entry(want).or_insert(0usize) += 1;
        }
    }
    for label in OutcomeLabel::ALL {
        if !seen.contains_key(&label) {
            return Err(format!("no fixture produced {label}"));
        }
    }
    Ok(seen)
}
