//! Parameter grids over the payoff space, seed batches and order-independent aggregation.
//!
//! Jobs are independent: each carries a run seed derived from the base seed, the grid-point
//! index and the replicate index. With the `parallel` feature (default) jobs are spread over a
//! rayon pool; without it they run one after another. Either way results are keyed by
//! `(point, replicate)` and aggregated in key order, so tables are identical.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};

use serde::{Deserialize, Serialize};

use crate::analysis::{
    distance_from_mixed_nash, homogeneity_of, rounds_to_classification, ClassifierThresholds,
    OutcomeLabel, PopulationView, SnapshotSummary,
};
use crate::config::SimConfig;
use crate::engine::{run_simulation_with, Observer, Snapshot};
use crate::error::ConfigError;
use crate::game::GamePayoffs;
use crate::rng::derive_seed;

/// Which games a sweep covers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum GridKind {
    /// `x = x1 = x2`, `y = y1 = y2`, both over the step grid.
    SymmetricSquare,
    /// `x_i = 1 - y_i` with `y1` and `y2` over the step grid.
    AsymmetricSlice,
    /// Host payoffs fixed; `y2` over `[y2_min, y2_max]` with `x2 = y2 - offset`.
    BiasLine {
        x1: f64,
        y1: f64,
        y2_min: f64,
        y2_max: f64,
        offset: f64,
    },
    /// An explicit list of games.
    Explicit { points: Vec<GamePayoffs> },
}

impl GridKind {
    pub fn name(&self) -> &'static str {
        match self {
            GridKind::SymmetricSquare => "symmetric_square",
            GridKind::AsymmetricSlice => "asymmetric_slice",
            GridKind::BiasLine { .. } => "bias_line",
            GridKind::Explicit { .. } => "explicit",
        }
    }

    /// The host/visitor bias line with `x1 = 0.4`, `y1 = 0.5`, `y2` from 0.2 to 0.9 and
    /// `x2 = y2 - 0.1`.
    pub fn standard_bias_line() -> Self {
        GridKind::BiasLine {
            x1: 0.4,
            y1: 0.5,
            y2_min: 0.2,
            y2_max: 0.9,
            offset: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub grid: GridKind,
    /// Grid spacing.
    pub step: f64,
    pub seeds_per_point: u64,
    /// Template for every run; its payoffs are replaced per point and its seed is the base
    /// seed jobs derive from.
    pub base: SimConfig,
    pub thresholds: ClassifierThresholds,
}

pub const DEFAULT_STEP: f64 = 0.1;
pub const DEFAULT_SEEDS_PER_POINT: u64 = 100;

/// Rounds to 12 decimals so grid values such as `3 * 0.1` come out as `0.3`.
fn tidy(v: f64) -> f64 {
    (v * 1e12).round() / 1e12
}

fn axis(step: f64) -> Vec<f64> {
    let mut values = Vec::new();
    let mut k = 1u64;
    loop {
        let v = tidy(k as f64 * step);
        if v > 1.0 - step + 1e-9 {
            break;
        }
        values.push(v);
        k += 1;
    }
    values
}

fn inclusive_range(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let mut values = Vec::new();
    let mut k = 0u64;
    loop {
        let v = tidy(lo + k as f64 * step);
        if v > hi + 1e-9 {
            break;
        }
        values.push(v);
        k += 1;
    }
    values
}

impl SweepSpec {
    pub fn new(grid: GridKind, seeds_per_point: u64, base: SimConfig) -> Self {
        SweepSpec {
            grid,
            step: DEFAULT_STEP,
            seeds_per_point,
            base,
            thresholds: ClassifierThresholds::default(),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.step > 0.0 && self.step < 0.5) {
            return Err(ConfigError::invariant("step", "grid step must lie in (0, 0.5)", self.step));
        }
        if self.seeds_per_point == 0 {
            return Err(ConfigError::invariant("seeds_per_point", "must be at least 1", 0));
        }
        self.thresholds.validate()?;
        self.base.validate()
    }

    /// Games covered by the grid, in job order.
    pub fn points(&self) -> Result<Vec<GamePayoffs>, ConfigError> {
        self.validate()?;
        let step = self.step;
        let inside = |v: f64| v >= step - 1e-9 && v <= 1.0 - step + 1e-9;
        let candidates: Vec<GamePayoffs> = match &self.grid {
            GridKind::SymmetricSquare => {
                let a = axis(step);
                a.iter()
                    .flat_map(|&x| a.iter().map(move |&y| GamePayoffs { x1: x, y1: y, x2: x, y2: y }))
                    .collect()
            }
            GridKind::AsymmetricSlice => {
                let a = axis(step);
                a.iter()
                    .flat_map(|&y1| {
                        a.iter().map(move |&y2| GamePayoffs {
                            x1: tidy(1.0 - y1),
                            y1,
                            x2: tidy(1.0 - y2),
                            y2,
                        })
                    })
                    .collect()
            }
            GridKind::BiasLine { x1, y1, y2_min, y2_max, offset } => inclusive_range(*y2_min, *y2_max, step)
                .into_iter()
                .map(|y2| GamePayoffs { x1: *x1, y1: *y1, x2: tidy(y2 - offset), y2 })
                .collect(),
            GridKind::Explicit { points } => {
                for p in points {
                    p.validate()?;
                }
                points.clone()
            }
        };
        let explicit = matches!(self.grid, GridKind::Explicit { .. });
        let points: Vec<GamePayoffs> = candidates
            .into_iter()
            .filter(|g| g.validate().is_ok())
            .filter(|g| explicit || [g.x1, g.y1, g.x2, g.y2].into_iter().all(inside))
            .collect();
        if points.is_empty() {
            return Err(ConfigError::EmptyGrid(self.grid.name().to_string()));
        }
        Ok(points)
    }
}

/// One simulation of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepJob {
    pub point: usize,
    pub replicate: u64,
    pub payoffs: GamePayoffs,
    pub seed: u64,
}

impl SweepJob {
    pub fn config(&self, base: &SimConfig) -> SimConfig {
        SimConfig {
            payoffs: self.payoffs,
            seed: self.seed,
            ..base.clone()
        }
    }
}

pub fn job_seed(base_seed: u64, point: usize, replicate: u64) -> u64 {
    derive_seed(base_seed, &[point as u64, replicate])
}

pub fn generate_grid(spec: &SweepSpec) -> Result<Vec<SweepJob>, ConfigError> {
    let points = spec.points()?;
    Ok(points
        .iter()
        .enumerate()
        .flat_map(|(point, &payoffs)| {
            (0..spec.seeds_per_point).map(move |replicate| SweepJob {
                point,
                replicate,
                payoffs,
                seed: job_seed(spec.base.seed, point, replicate),
            })
        })
        .collect())
}

/// Outcome of one job.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub point: usize,
    pub replicate: u64,
    pub seed: u64,
    pub label: OutcomeLabel,
    pub rounds_to_class: Option<u64>,
    pub final_homogeneity: f64,
    pub max_expected_visitors: f64,
    pub distance_from_mixed_nash: f64,
    /// The job panicked; `label` is then `Unresolved`.
    pub error: bool,
}

#[derive(Debug, Clone)]
pub struct JobOutcome {
    pub record: RunRecord,
    pub summaries: Vec<SnapshotSummary>,
    pub final_state: Option<Snapshot>,
}

struct Summaries<'a> {
    thresholds: &'a ClassifierThresholds,
    out: Vec<SnapshotSummary>,
}

impl Observer for Summaries<'_> {
    fn on_snapshot(&mut self, snapshot: &Snapshot) {
        self.out.push(SnapshotSummary::of(snapshot, self.thresholds));
    }
}

/// Runs a job, keeping its per-snapshot summaries and final state. A panic inside the job is
/// caught and recorded as an unresolved, flagged outcome.
pub fn run_job_detailed(spec: &SweepSpec, job: &SweepJob) -> JobOutcome {
    let attempt = catch_unwind(AssertUnwindSafe(|| {
        let config = job.config(&spec.base);
        let mut observer = Summaries { thresholds: &spec.thresholds, out: Vec::new() };
        let stats = run_simulation_with(&config, &mut observer).expect("sweep base validated");
        let view = PopulationView::new(&stats.final_state.agents);
        let label = view.classify(&spec.thresholds);
        let record = RunRecord {
            point: job.point,
            replicate: job.replicate,
            seed: job.seed,
            label,
            rounds_to_class: rounds_to_classification(&observer.out),
            final_homogeneity: homogeneity_of(&view.expected),
            max_expected_visitors: view.max_expected_visitors(),
            distance_from_mixed_nash: distance_from_mixed_nash(&stats.final_state.agents, &job.payoffs),
            error: false,
        };
        JobOutcome { record, summaries: observer.out, final_state: Some(stats.final_state) }
    }));
    attempt.unwrap_or_else(|_| JobOutcome {
        record: RunRecord {
            point: job.point,
            replicate: job.replicate,
            seed: job.seed,
            label: OutcomeLabel::Unresolved,
            rounds_to_class: None,
            final_homogeneity: f64::NAN,
            max_expected_visitors: f64::NAN,
            distance_from_mixed_nash: f64::NAN,
            error: true,
        },
        summaries: Vec::new(),
        final_state: None,
    })
}

pub fn run_job(spec: &SweepSpec, job: &SweepJob) -> RunRecord {
    run_job_detailed(spec, job).record
}

/// Maps `f` over `items`, in parallel when the `parallel` feature is on. Output order always
/// matches input order.
pub fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        seq_map(items, f)
    }
}

/// The sequential fallback of [`par_map`], available in every build.
pub fn seq_map<T, R, F: Fn(&T) -> R>(items: &[T], f: F) -> Vec<R> {
    items.iter().map(f).collect()
}

/// Runs `op` with at most `workers` threads. Sequential builds ignore the worker count.
pub fn with_workers<R: Send>(workers: Option<usize>, op: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    {
        if let Some(w) = workers {
            if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(w.max(1)).build() {
                return pool.install(op);
            }
        }
        op()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        op()
    }
}

/// Per-run records of a sweep, keyed by `(point, replicate)`. Merging is a set union, so it
/// is commutative, associative and exact.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepTally {
    pub points: Vec<GamePayoffs>,
    pub records: BTreeMap<(usize, u64), RunRecord>,
}

impl SweepTally {
    pub fn new(points: Vec<GamePayoffs>) -> Self {
        SweepTally { points, records: BTreeMap::new() }
    }

    pub fn from_records(points: Vec<GamePayoffs>, records: impl IntoIterator<Item = RunRecord>) -> Result<Self, ConfigError> {
        let mut tally = SweepTally::new(points);
        for r in records {
            tally.insert(r)?;
        }
        Ok(tally)
    }

    pub fn insert(&mut self, record: RunRecord) -> Result<(), ConfigError> {
        if record.point >= self.points.len() {
            return Err(ConfigError::GridMismatch);
        }
        self.records.insert((record.point, record.replicate), record);
        Ok(())
    }

    pub fn contains(&self, point: usize, replicate: u64) -> bool {
        self.records.contains_key(&(point, replicate))
    }

    pub fn merge(mut self, other: SweepTally) -> Result<SweepTally, ConfigError> {
        if self.points.is_empty() {
            self.points = other.points.clone();
        } else if !other.points.is_empty() && self.points != other.points {
            return Err(ConfigError::GridMismatch);
        }
        for (_, r) in other.records {
            self.insert(r)?;
        }
        Ok(self)
    }

    pub fn result(&self) -> SweepResult {
        let mut rows: Vec<PointResult> = self.points.iter().map(|&p| PointResult::empty(p)).collect();
        for r in self.records.values() {
            rows[r.point].add(r);
        }
        rows.iter_mut().for_each(PointResult::finish);
        SweepResult { rows }
    }
}

/// Aggregated outcomes at one grid point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointResult {
    pub payoffs: GamePayoffs,
    pub n_seeds: u64,
    /// Indexed by [`OutcomeLabel::index`].
    pub counts: [u64; 5],
    pub n_errors: u64,
    pub prop_paradoxical: f64,
    pub prop_bourgeois: f64,
    /// Mean over runs whose label settled; NaN when none did.
    pub mean_rounds_to_class: f64,
    pub mean_homogeneity: f64,
    rounds_sum: u128,
    rounds_n: u64,
    homogeneity_sum: f64,
    homogeneity_n: u64,
}

// NaN means "no runs contributed", so two empty means compare equal.
impl PartialEq for PointResult {
    fn eq(&self, other: &Self) -> bool {
        let same = |a: f64, b: f64| a == b || (a.is_nan() && b.is_nan());
        self.payoffs == other.payoffs
            && self.n_seeds == other.n_seeds
            && self.counts == other.counts
            && self.n_errors == other.n_errors
            && same(self.prop_paradoxical, other.prop_paradoxical)
            && same(self.prop_bourgeois, other.prop_bourgeois)
            && same(self.mean_rounds_to_class, other.mean_rounds_to_class)
            && same(self.mean_homogeneity, other.mean_homogeneity)
            && self.rounds_sum == other.rounds_sum
            && self.rounds_n == other.rounds_n
            && same(self.homogeneity_sum, other.homogeneity_sum)
            && self.homogeneity_n == other.homogeneity_n
    }
}

impl PointResult {
    fn empty(payoffs: GamePayoffs) -> Self {
        PointResult {
            payoffs,
            n_seeds: 0,
            counts: [0; 5],
            n_errors: 0,
            prop_paradoxical: 0.0,
            prop_bourgeois: 0.0,
            mean_rounds_to_class: f64::NAN,
            mean_homogeneity: f64::NAN,
            rounds_sum: 0,
            rounds_n: 0,
            homogeneity_sum: 0.0,
            homogeneity_n: 0,
        }
    }

    fn add(&mut self, r: &RunRecord) {
        self.n_seeds += 1;
        self.counts[r.label.index()] += 1;
        self.n_errors += u64::from(r.error);
        if let Some(rounds) = r.rounds_to_class {
            self.rounds_sum += u128::from(rounds);
            self.rounds_n += 1;
        }
        if r.final_homogeneity.is_finite() {
            self.homogeneity_sum += r.final_homogeneity;
            self.homogeneity_n += 1;
        }
    }

    fn finish(&mut self) {
        if self.n_seeds > 0 {
            let n = self.n_seeds as f64;
            self.prop_paradoxical = self.count(OutcomeLabel::Paradoxical) as f64 / n;
            self.prop_bourgeois = self.count(OutcomeLabel::Bourgeois) as f64 / n;
        }
        if self.rounds_n > 0 {
            self.mean_rounds_to_class = self.rounds_sum as f64 / self.rounds_n as f64;
        }
        if self.homogeneity_n > 0 {
            self.mean_homogeneity = self.homogeneity_sum / self.homogeneity_n as f64;
        }
    }

    pub fn count(&self, label: OutcomeLabel) -> u64 {
        self.counts[label.index()]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<PointResult>,
}

/// Column names of the sweep table.
pub const SWEEP_COLUMNS: [&str; 13] = [
    "x1",
    "y1",
    "x2",
    "y2",
    "n_seeds",
    "n_bourgeois",
    "n_paradoxical",
    "n_network",
    "n_hybrid",
    "n_unresolved",
    "prop_paradoxical",
    "mean_rounds_to_class",
    "mean_homogeneity",
];

impl PointResult {
    /// Values in [`SWEEP_COLUMNS`] order.
    pub fn table_row(&self) -> Vec<String> {
        let g = self.payoffs;
        let mut row = vec![g.x1.to_string(), g.y1.to_string(), g.x2.to_string(), g.y2.to_string()];
        row.push(self.n_seeds.to_string());
        for label in OutcomeLabel::ALL {
            row.push(self.count(label).to_string());
        }
        row.push(self.prop_paradoxical.to_string());
        row.push(self.mean_rounds_to_class.to_string());
        row.push(self.mean_homogeneity.to_string());
        row
    }
}

pub fn aggregate(points: &[GamePayoffs], records: &[RunRecord]) -> Result<SweepResult, ConfigError> {
    Ok(SweepTally::from_records(points.to_vec(), records.iter().copied())?.result())
}

/// Runs every job not already present in `done` and returns the completed tally.
pub fn resume_sweep(spec: &SweepSpec, done: SweepTally, workers: Option<usize>) -> Result<SweepTally, ConfigError> {
    let points = spec.points()?;
    let jobs: Vec<SweepJob> = generate_grid(spec)?
        .into_iter()
        .filter(|j| !done.contains(j.point, j.replicate))
        .collect();
    let records = with_workers(workers, || par_map(&jobs, |job| run_job(spec, job)));
    let fresh = SweepTally::from_records(points, records)?;
    done.merge(fresh)
}

pub fn run_sweep(spec: &SweepSpec, workers: Option<usize>) -> Result<SweepResult, ConfigError> {
    let points = spec.points()?;
    Ok(resume_sweep(spec, SweepTally::new(points), workers)?.result())
}
