//! Partner-choice weights with O(log N) sampling and O(log N) reinforcement.
//!
//! The stored weight of partner `j` is `scale * raw[j]`. Discounting the whole vector only
//! multiplies `scale`; a payoff is added to `raw[j]` as `payoff / scale`. A Fenwick tree over
//! `raw` answers proportional sampling. When `scale` drops below [`RESCALE_BELOW`] the scale is
//! folded back into `raw` and the tree is rebuilt.

use crate::learning::{UNDERFLOW_SUM, WEIGHT_FLOOR};

const RESCALE_BELOW: f64 = 1e-150;

#[derive(Debug, Clone)]
struct Fenwick {
    tree: Vec<f64>,
    top: usize,
}

impl Fenwick {
    fn build(values: &[f64]) -> Self {
        let n = values.len();
        let mut tree = vec![0.0; n + 1];
        tree[1..].copy_from_slice(values);
        for i in 1..=n {
            let parent = i + (i & i.wrapping_neg());
            if parent <= n {
                tree[parent] += tree[i];
            }
        }
        let top = if n == 0 { 0 } else { 1 << (usize::BITS - 1 - n.leading_zeros()) };
        Fenwick { tree, top }
    }

    fn add(&mut self, index: usize, amount: f64) {
        let n = self.tree.len() - 1;
        let mut i = index + 1;
        while i <= n {
            self.tree[i] += amount;
            i += i & i.wrapping_neg();
        }
    }

    /// Smallest index whose inclusive prefix sum exceeds `target`.
    fn search(&self, mut target: f64) -> usize {
        let n = self.tree.len() - 1;
        let mut pos = 0;
        let mut step = self.top;
        while step > 0 {
            let next = pos + step;
            if next <= n {
                // Branch-free select: the comparison outcome is close to a coin flip.
                let node = self.tree[next];
                let take = node <= target;
                pos = if take { next } else { pos };
                target -= if take { node } else { 0.0 };
            }
            step >>= 1;
        }
        pos
    }
}

/// `raw * scale`, floored for positive entries; the product alone may underflow to zero.
#[inline]
fn lazy_value(raw: f64, scale: f64) -> f64 {
    if raw > 0.0 {
        (raw * scale).max(WEIGHT_FLOOR)
    } else {
        0.0
    }
}

#[derive(Debug, Clone)]
pub struct PartnerWeights {
    owner: usize,
    scale: f64,
    raw: Vec<f64>,
    raw_total: f64,
    tree: Fenwick,
}

impl PartnerWeights {
    /// Every partner except `owner` starts at `each`.
    pub fn uniform(n: usize, owner: usize, each: f64) -> Self {
        let mut w = vec![each; n];
        w[owner] = 0.0;
        Self::from_weights(owner, &w)
    }

    /// Builds from explicit weights; the owner's entry is forced to 0.
    pub fn from_weights(owner: usize, weights: &[f64]) -> Self {
        let mut raw = weights.to_vec();
        raw[owner] = 0.0;
        let raw_total = raw.iter().sum();
        let tree = Fenwick::build(&raw);
        PartnerWeights { owner, scale: 1.0, raw, raw_total, tree }
    }

    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    pub fn owner(&self) -> usize {
        self.owner
    }

    #[inline]
    pub fn weight(&self, partner: usize) -> f64 {
        lazy_value(self.raw[partner], self.scale)
    }

    #[inline]
    pub fn total(&self) -> f64 {
        lazy_value(self.raw_total, self.scale)
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.raw.iter().map(|&r| lazy_value(r, self.scale)).collect()
    }

    /// Discounts every entry by `(1 - delta)` and adds `payoff` to `partner`.
    pub fn reinforce(&mut self, partner: usize, payoff: f64, delta: f64) {
        debug_assert_ne!(partner, self.owner, "self-visits are not allowed");
        self.scale *= 1.0 - delta;
        if payoff > 0.0 {
            let amount = payoff / self.scale;
            self.raw[partner] += amount;
            self.raw_total += amount;
            self.tree.add(partner, amount);
        }
        if self.scale < RESCALE_BELOW {
            self.renormalize();
        }
    }

    fn renormalize(&mut self) {
        for r in &mut self.raw {
            // Floored like strategy weights, keeping subnormals out of the tree.
            *r = lazy_value(*r, self.scale);
        }
        self.scale = 1.0;
        self.raw_total = self.raw.iter().sum();
        self.tree = Fenwick::build(&self.raw);
    }

    /// Partner drawn proportionally to weight for `u` in `[0, 1)`; `None` when the total
    /// weight has underflowed.
    pub fn sample(&self, u: f64) -> Option<usize> {
        if !(self.total() >= UNDERFLOW_SUM) {
            return None;
        }
        let target = u * self.raw_total;
        let j = self.tree.search(target);
        if j < self.raw.len() && j != self.owner && self.raw[j] > 0.0 {
            return Some(j);
        }
        // Accumulated rounding in the tree steered the search onto a zero entry.
        Some(self.sample_linear(target))
    }

    fn sample_linear(&self, target: f64) -> usize {
        let mut acc = 0.0;
        let mut last = None;
        for (j, &r) in self.raw.iter().enumerate() {
            if j == self.owner || r <= 0.0 {
                continue;
            }
            acc += r;
            last = Some(j);
            if acc > target {
                return j;
            }
        }
        last.unwrap_or(if self.owner == 0 { 1 } else { 0 })
    }
}
