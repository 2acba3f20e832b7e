//! Roth-Erev choice and reinforcement rules.
//!
//! Choice: `Pr(s) = (1 - eps) * w_s / sum(w) + eps / |S|` over the available choices `S`.
//! Reinforcement: every entry of the relevant vector is discounted by `(1 - delta)` and the
//! chosen entry additionally receives the payoff.

/// Weight sums below this are treated as fully forgotten; choice falls back to uniform.
pub const UNDERFLOW_SUM: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq)]
pub struct Probabilities {
    pub values: Vec<f64>,
    /// The weight sum had underflowed and the uniform distribution was used instead.
    pub underflow: bool,
}

/// Choice probabilities for a weight vector. `excluded` (the self-entry for partner choice)
/// is removed from the choice set and always receives probability 0.
pub fn action_probabilities(weights: &[f64], epsilon: f64, excluded: Option<usize>) -> Probabilities {
    let available = weights.len() - usize::from(excluded.is_some_and(|e| e < weights.len()));
    let mut values = vec![0.0; weights.len()];
    if available == 0 {
        return Probabilities { values, underflow: false };
    }
    let uniform = 1.0 / available as f64;
    let sum: f64 = weights
        .iter()
        .enumerate()
        .filter(|&(s, _)| Some(s) != excluded)
        .map(|(_, w)| w)
        .sum();
    let underflow = !(sum >= UNDERFLOW_SUM);
    for (s, (p, &w)) in values.iter_mut().zip(weights).enumerate() {
        if Some(s) == excluded {
            continue;
        }
        *p = if underflow {
            uniform
        } else {
            (1.0 - epsilon) * (w / sum) + epsilon * uniform
        };
    }
    Probabilities { values, underflow }
}

/// Probability of Hawk for a `[hawk, dove]` weight pair, and whether the pair had underflowed.
#[inline]
pub fn hawk_probability(pair: [f64; 2], epsilon: f64) -> (f64, bool) {
    let sum = pair[0] + pair[1];
    if !(sum >= UNDERFLOW_SUM) {
        return (0.5, true);
    }
    ((1.0 - epsilon) * (pair[0] / sum) + 0.5 * epsilon, false)
}

/// Applies one reinforcement step in place.
///
/// Positive weights are floored at [`WEIGHT_FLOOR`]. Without the floor a long-unreinforced
/// weight sinks into the subnormal range and stays there (the smallest subnormal times
/// `1 - delta` rounds back to itself), which keeps it positive but makes every later
/// operation on it, and every probability computed from it, very slow.
#[inline]
pub fn reinforce(weights: &mut [f64], chosen: usize, payoff: f64, delta: f64) {
    let keep = 1.0 - delta;
    for w in weights.iter_mut() {
        *w = floor_positive(*w * keep);
    }
    weights[chosen] += payoff;
}

/// Smallest value a positive weight is allowed to take. Far enough above the subnormal range
/// that a floored weight divided by any reachable total is still a normal number.
pub const WEIGHT_FLOOR: f64 = 1e-300;

#[inline]
pub(crate) fn floor_positive(w: f64) -> f64 {
    if w > 0.0 && w < WEIGHT_FLOOR {
        WEIGHT_FLOOR
    } else {
        w
    }
}
