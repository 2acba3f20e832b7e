//! Classification of population states and network statistics.
//!
//! Everything here reads learned weights with the error rate removed (`epsilon = 0`): the
//! exploration noise is part of behavior, not of what the agents have learned.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{expected_visitors, visit_matrix, AgentWeights, Snapshot};
use crate::error::{AnalysisError, ConfigError};
use crate::game::{mixed_nash, GamePayoffs};

/// Comparison slack for counts and thresholds computed in floating point.
const SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentProfile {
    pub p_hawk_host: f64,
    pub p_hawk_visit: f64,
    pub expected_visitors: f64,
    /// Largest single-partner visit probability.
    pub partner_concentration: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentClass {
    BourgeoisAgent,
    ParadoxicalAgent,
    PureHawk,
    PureDove,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutcomeLabel {
    Bourgeois,
    Paradoxical,
    Network,
    Hybrid,
    Unresolved,
}

impl OutcomeLabel {
    pub const ALL: [OutcomeLabel; 5] = [
        OutcomeLabel::Bourgeois,
        OutcomeLabel::Paradoxical,
        OutcomeLabel::Network,
        OutcomeLabel::Hybrid,
        OutcomeLabel::Unresolved,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            OutcomeLabel::Bourgeois => "bourgeois",
            OutcomeLabel::Paradoxical => "paradoxical",
            OutcomeLabel::Network => "network",
            OutcomeLabel::Hybrid => "hybrid",
            OutcomeLabel::Unresolved => "unresolved",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_convention(self) -> bool {
        matches!(self, OutcomeLabel::Bourgeois | OutcomeLabel::Paradoxical)
    }

    pub fn is_hub_spoke(self) -> bool {
        matches!(self, OutcomeLabel::Network | OutcomeLabel::Hybrid)
    }
}

impl fmt::Display for OutcomeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for OutcomeLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        OutcomeLabel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| format!("unknown outcome label `{s}`"))
    }
}

/// Cut-offs used by the classifiers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifierThresholds {
    /// A strategy is "pure" once played with at least this probability.
    pub theta_s: f64,
    /// Fraction of the population that must agree.
    pub theta_p: f64,
    /// Expected visitors at or above which an agent is a hub.
    pub hub_factor: f64,
    /// Smallest network homogeneity (normalized visit entropy) a convention may have.
    pub homog_min: f64,
}

impl Default for ClassifierThresholds {
    fn default() -> Self {
        ClassifierThresholds {
            theta_s: 0.9,
            theta_p: 0.9,
            hub_factor: 3.0,
            homog_min: 0.8,
        }
    }
}

impl ClassifierThresholds {
    pub fn with_theta_s(theta_s: f64) -> Self {
        ClassifierThresholds {
            theta_s,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (field, v) in [("classifier.theta_s", self.theta_s), ("classifier.theta_p", self.theta_p)] {
            if !(v > 0.5 && v <= 1.0) {
                return Err(ConfigError::invariant(field, "must lie in (0.5, 1]", v));
            }
        }
        if !(self.hub_factor > 1.0 && self.hub_factor.is_finite()) {
            return Err(ConfigError::invariant("classifier.hub_factor", "must be > 1", self.hub_factor));
        }
        if !(0.0..=1.0).contains(&self.homog_min) {
            return Err(ConfigError::invariant("classifier.homog_min", "must lie in [0, 1]", self.homog_min));
        }
        Ok(())
    }
}

pub fn classify_agent(profile: &AgentProfile, t: &ClassifierThresholds) -> AgentClass {
    let host_hawk = profile.p_hawk_host >= t.theta_s;
    let host_dove = profile.p_hawk_host <= 1.0 - t.theta_s;
    let visit_hawk = profile.p_hawk_visit >= t.theta_s;
    let visit_dove = profile.p_hawk_visit <= 1.0 - t.theta_s;
    match (host_hawk, host_dove, visit_hawk, visit_dove) {
        (true, _, _, true) => AgentClass::BourgeoisAgent,
        (_, true, true, _) => AgentClass::ParadoxicalAgent,
        (true, _, true, _) => AgentClass::PureHawk,
        (_, true, _, true) => AgentClass::PureDove,
        _ => AgentClass::Mixed,
    }
}

/// Derived, error-free view of a population.
#[derive(Debug, Clone)]
pub struct PopulationView {
    pub profiles: Vec<AgentProfile>,
    /// Row `i`: agent `i`'s visit probabilities.
    pub visits: Vec<Vec<f64>>,
    pub expected: Vec<f64>,
}

impl PopulationView {
    pub fn new(agents: &[AgentWeights]) -> Self {
        let visits = visit_matrix(agents, 0.0);
        let expected = expected_visitors(agents, 0.0);
        let profiles = agents
            .iter()
            .zip(&visits)
            .zip(&expected)
            .map(|((a, row), &e)| AgentProfile {
                p_hawk_host: a.p_hawk_host(0.0),
                p_hawk_visit: a.p_hawk_visit(0.0),
                expected_visitors: e,
                partner_concentration: row.iter().cloned().fold(0.0, f64::max),
            })
            .collect();
        PopulationView { profiles, visits, expected }
    }

    pub fn n(&self) -> usize {
        self.profiles.len()
    }

    pub fn max_expected_visitors(&self) -> f64 {
        self.expected.iter().cloned().fold(0.0, f64::max)
    }

    pub fn hubs(&self, t: &ClassifierThresholds) -> Vec<usize> {
        (0..self.n())
            .filter(|&j| self.expected[j] >= t.hub_factor - SLACK)
            .collect()
    }

    pub fn classify(&self, t: &ClassifierThresholds) -> OutcomeLabel {
        let n = self.n();
        let classes: Vec<AgentClass> = self.profiles.iter().map(|p| classify_agent(p, t)).collect();
        let quorum = |count: usize, of: usize| count as f64 >= t.theta_p * of as f64 - SLACK;
        let homogeneous = homogeneity_of(&self.expected) >= t.homog_min - SLACK;
        let count = |c: AgentClass| classes.iter().filter(|&&k| k == c).count();

        if homogeneous && quorum(count(AgentClass::BourgeoisAgent), n) {
            return OutcomeLabel::Bourgeois;
        }
        if homogeneous && quorum(count(AgentClass::ParadoxicalAgent), n) {
            return OutcomeLabel::Paradoxical;
        }

        let hubs = self.hubs(t);
        if hubs.is_empty() || hubs.len() == n {
            return OutcomeLabel::Unresolved;
        }
        let dove_hosts = hubs
            .iter()
            .all(|&h| self.profiles[h].p_hawk_host <= 1.0 - t.theta_s);
        if !dove_hosts {
            return OutcomeLabel::Unresolved;
        }
        let mut is_hub = vec![false; n];
        for &h in &hubs {
            is_hub[h] = true;
        }
        // Small stars form next to the hubs, so a spoke counts as attached when its visits land
        // on dove hosts, hub or not. Spokes are judged as visitors only: an agent nobody visits
        // never updates its host weights, so its host strategy carries no information.
        let dove_host: Vec<bool> = self.profiles.iter().map(|p| p.p_hawk_host <= 1.0 - t.theta_s).collect();
        let spokes = n - hubs.len();
        let attached = (0..n)
            .filter(|&i| !is_hub[i] && self.profiles[i].p_hawk_visit >= t.theta_s)
            .filter(|&i| {
                let on_doves: f64 = (0..n).filter(|&j| dove_host[j]).map(|j| self.visits[i][j]).sum();
                on_doves >= t.theta_p - SLACK
            })
            .count();
        if !quorum(attached, spokes) {
            return OutcomeLabel::Unresolved;
        }
        if hubs.iter().all(|&h| classes[h] == AgentClass::ParadoxicalAgent) {
            OutcomeLabel::Hybrid
        } else {
            OutcomeLabel::Network
        }
    }
}

pub fn profiles(agents: &[AgentWeights]) -> Vec<AgentProfile> {
    PopulationView::new(agents).profiles
}

pub fn classify_population(agents: &[AgentWeights], t: &ClassifierThresholds) -> OutcomeLabel {
    PopulationView::new(agents).classify(t)
}

/// Normalized entropy of the expected-visitor distribution; 1 for a perfectly even network.
pub fn homogeneity_of(expected: &[f64]) -> f64 {
    let n = expected.len();
    if n < 2 {
        return 1.0;
    }
    let total: f64 = expected.iter().sum();
    if !(total > 0.0) {
        return 0.0;
    }
    // 1 - KL(p || uniform) / ln n: equal to entropy / ln n, but an even network gives exactly
    // zero divergence instead of an entropy a few ulps short of ln n.
    let nf = n as f64;
    let divergence: f64 = expected
        .iter()
        .filter(|&&e| e > 0.0)
        .map(|&e| {
            let p = e / total;
            p * (p * nf).ln()
        })
        .sum();
    (1.0 - divergence / nf.ln()).clamp(0.0, 1.0)
}

pub fn network_homogeneity(agents: &[AgentWeights]) -> f64 {
    homogeneity_of(&expected_visitors(agents, 0.0))
}

/// How a weighted tie becomes part of a degree count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum TieRule {
    /// Degree of `j` is its expected visitor count, binned with the given width.
    ExpectedVisitors { bin_width: f64 },
    /// Tie `i -> j` exists iff `Pr(i visits j) >= c / (n - 1)`; degree is the in-tie count.
    BinaryThreshold { c: f64 },
}

impl TieRule {
    pub const DEFAULT_BINARY: TieRule = TieRule::BinaryThreshold { c: 2.0 };
}

/// Number of nodes per degree bin. Counts are `f64` so averaged histograms share the type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeHistogram {
    pub bin_width: f64,
    pub counts: Vec<f64>,
}

impl DegreeHistogram {
    fn from_degrees(degrees: impl IntoIterator<Item = f64>, bin_width: f64, bins: usize) -> Self {
        let mut counts = vec![0.0; bins.max(1)];
        for d in degrees {
            let mut b = (d / bin_width + SLACK).floor().max(0.0) as usize;
            if b >= counts.len() {
                counts.resize(b + 1, 0.0);
            }
            b = b.min(counts.len() - 1);
            counts[b] += 1.0;
        }
        DegreeHistogram { bin_width, counts }
    }

    pub fn nodes(&self) -> f64 {
        self.counts.iter().sum()
    }

    /// Lower edge of bin `k`.
    pub fn degree(&self, k: usize) -> f64 {
        k as f64 * self.bin_width
    }

    pub fn mean_degree(&self) -> f64 {
        let nodes = self.nodes();
        if nodes == 0.0 {
            return 0.0;
        }
        self.counts
            .iter()
            .enumerate()
            .map(|(k, c)| self.degree(k) * c)
            .sum::<f64>()
            / nodes
    }

    pub fn max_degree(&self) -> f64 {
        self.counts
            .iter()
            .rposition(|&c| c > 0.0)
            .map_or(0.0, |k| self.degree(k))
    }

    /// Fraction of nodes whose degree is strictly above `threshold`.
    pub fn mass_above(&self, threshold: f64) -> f64 {
        let nodes = self.nodes();
        if nodes == 0.0 {
            return 0.0;
        }
        self.counts
            .iter()
            .enumerate()
            .filter(|&(k, _)| self.degree(k) > threshold + SLACK)
            .map(|(_, c)| c)
            .sum::<f64>()
            / nodes
    }

    /// Element-wise mean of several histograms with the same bin width.
    pub fn average(histograms: &[DegreeHistogram]) -> Option<DegreeHistogram> {
        let first = histograms.first()?;
        let len = histograms.iter().map(|h| h.counts.len()).max().unwrap_or(0);
        let mut counts = vec![0.0; len];
        for h in histograms {
            for (c, v) in counts.iter_mut().zip(&h.counts) {
                *c += v;
            }
        }
        let m = histograms.len() as f64;
        counts.iter_mut().for_each(|c| *c /= m);
        Some(DegreeHistogram { bin_width: first.bin_width, counts })
    }
}

pub fn binary_in_degrees(agents: &[AgentWeights], c: f64) -> Result<Vec<usize>, AnalysisError> {
    if !(c > 0.0) {
        return Err(AnalysisError::InvalidTieThreshold(c));
    }
    let n = agents.len();
    let cutoff = c / (n - 1) as f64 * (1.0 - 1e-12);
    let visits = visit_matrix(agents, 0.0);
    let mut degrees = vec![0usize; n];
    for (i, row) in visits.iter().enumerate() {
        for (j, &p) in row.iter().enumerate() {
            if i != j && p >= cutoff {
                degrees[j] += 1;
            }
        }
    }
    Ok(degrees)
}

pub fn degree_distribution(agents: &[AgentWeights], rule: TieRule) -> Result<DegreeHistogram, AnalysisError> {
    let n = agents.len();
    match rule {
        TieRule::ExpectedVisitors { bin_width } => {
            if !(bin_width > 0.0) {
                return Err(AnalysisError::InvalidBinWidth(bin_width));
            }
            let e = expected_visitors(agents, 0.0);
            let bins = ((n - 1) as f64 / bin_width).floor() as usize + 1;
            Ok(DegreeHistogram::from_degrees(e, bin_width, bins))
        }
        TieRule::BinaryThreshold { c } => {
            let degrees = binary_in_degrees(agents, c)?;
            Ok(DegreeHistogram::from_degrees(degrees.into_iter().map(|d| d as f64), 1.0, n))
        }
    }
}

/// Mean degree histogram of `samples` independent undirected G(n, p) graphs.
pub fn erdos_renyi_degree_baseline(
    n: usize,
    p: f64,
    samples: usize,
    rng: &mut impl Rng,
) -> Result<DegreeHistogram, AnalysisError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(AnalysisError::InvalidProbability(p));
    }
    let mut histograms = Vec::with_capacity(samples);
    for _ in 0..samples {
        let mut degree = vec![0usize; n];
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.gen::<f64>() < p {
                    degree[i] += 1;
                    degree[j] += 1;
                }
            }
        }
        histograms.push(DegreeHistogram::from_degrees(
            degree.into_iter().map(|d| d as f64),
            1.0,
            n.max(1),
        ));
    }
    Ok(DegreeHistogram::average(&histograms)
        .unwrap_or_else(|| DegreeHistogram { bin_width: 1.0, counts: vec![0.0; n.max(1)] }))
}

/// Largest per-agent L-infinity gap between the agent's dove probabilities and the role-wise
/// mixed Nash equilibrium.
pub fn distance_from_mixed_nash(agents: &[AgentWeights], g: &GamePayoffs) -> f64 {
    let (dove_host, dove_visit) = mixed_nash(g);
    agents
        .iter()
        .map(|a| {
            let host = ((1.0 - a.p_hawk_host(0.0)) - dove_host).abs();
            let visit = ((1.0 - a.p_hawk_visit(0.0)) - dove_visit).abs();
            host.max(visit)
        })
        .fold(0.0, f64::max)
}

/// What one snapshot looked like to the classifiers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnapshotSummary {
    pub round: u64,
    pub label: OutcomeLabel,
    pub has_hub: bool,
    pub max_expected_visitors: f64,
    pub homogeneity: f64,
}

impl SnapshotSummary {
    pub fn of(snapshot: &Snapshot, t: &ClassifierThresholds) -> Self {
        let view = PopulationView::new(&snapshot.agents);
        SnapshotSummary {
            round: snapshot.round,
            label: view.classify(t),
            has_hub: !view.hubs(t).is_empty(),
            max_expected_visitors: view.max_expected_visitors(),
            homogeneity: homogeneity_of(&view.expected),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryLabel {
    DirectToConvention,
    ViaHubSpoke,
    Other,
}

impl TrajectoryLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            TrajectoryLabel::DirectToConvention => "direct_to_convention",
            TrajectoryLabel::ViaHubSpoke => "via_hub_spoke",
            TrajectoryLabel::Other => "other",
        }
    }
}

/// Index of the first snapshot from which the final label holds through the end.
pub fn onset_index(summaries: &[SnapshotSummary]) -> Option<usize> {
    let last = summaries.last()?.label;
    let mut onset = summaries.len() - 1;
    while onset > 0 && summaries[onset - 1].label == last {
        onset -= 1;
    }
    Some(onset)
}

/// Round at which the final label was reached for good; `None` if it stayed unresolved.
pub fn rounds_to_classification(summaries: &[SnapshotSummary]) -> Option<u64> {
    let last = summaries.last()?;
    if last.label == OutcomeLabel::Unresolved {
        return None;
    }
    onset_index(summaries).map(|i| summaries[i].round)
}

pub fn classify_trajectory_summaries(summaries: &[SnapshotSummary]) -> Result<TrajectoryLabel, AnalysisError> {
    let last = summaries.last().ok_or(AnalysisError::NoSnapshots)?;
    if !last.label.is_convention() {
        return Err(AnalysisError::NotConvention(last.label.to_string()));
    }
    let onset = onset_index(summaries).unwrap_or(0);
    let before = &summaries[..onset];
    if before.iter().any(|s| s.label.is_hub_spoke() || s.has_hub) {
        Ok(TrajectoryLabel::ViaHubSpoke)
    } else if before.iter().any(|s| s.label.is_convention()) {
        // A convention appeared and was lost again before the final one settled.
        Ok(TrajectoryLabel::Other)
    } else {
        Ok(TrajectoryLabel::DirectToConvention)
    }
}

pub fn classify_trajectory(snapshots: &[Snapshot], t: &ClassifierThresholds) -> Result<TrajectoryLabel, AnalysisError> {
    let summaries: Vec<SnapshotSummary> = snapshots.iter().map(|s| SnapshotSummary::of(s, t)).collect();
    classify_trajectory_summaries(&summaries)
}
