//! `conflict analyze` and `conflict baseline`: statistics of a finished run directory.

use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use conflict_core::analysis::{
    classify_trajectory_summaries, degree_distribution, distance_from_mixed_nash,
    erdos_renyi_degree_baseline, DegreeHistogram, OutcomeLabel, SnapshotSummary, TieRule,
};
use conflict_core::engine::Snapshot;
use conflict_core::rng;

use crate::config::{Loaded, RunSettings};
use crate::manifest::Manifest;
use crate::run::SNAPSHOTS_FILE;
use crate::{create_file, fmt_f64};

pub const ANALYSIS_DIR: &str = "analysis";
pub const NOT_APPLICABLE: &str = "not_applicable";

/// Stream index of the generator behind Erdős–Rényi samples; distinct from agent streams.
const BASELINE_STREAM: u64 = u64::MAX - 1;

#[derive(Debug, Clone)]
pub struct AnalyzeOptions {
    /// Output directory; `<run>/analysis` when unset.
    pub out: Option<PathBuf>,
    /// Binary tie threshold multiple `c`.
    pub tie_c: f64,
    /// Bin width of the expected-visitor histogram.
    pub bin_width: f64,
    /// Also write `er_baseline.csv`.
    pub baseline: bool,
    pub baseline_samples: usize,
    /// Seed of the baseline sampler; the run seed when unset.
    pub seed: Option<u64>,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            out: None,
            tie_c: 2.0,
            bin_width: 1.0,
            baseline: false,
            baseline_samples: 30,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisReport {
    pub final_label: OutcomeLabel,
    /// Trajectory label, or [`NOT_APPLICABLE`] when the run did not end in a convention.
    pub trajectory: String,
    pub homogeneity: Vec<(u64, f64)>,
    pub max_expected_visitors: f64,
    pub mean_binary_degree: f64,
    pub tail_mass: f64,
    pub baseline_tail_mass: f64,
    pub heavy_tail: bool,
}

pub fn read_run_settings(run: &Path) -> Result<RunSettings> {
    match Manifest::read(run)?.config {
        Loaded::Run(r) => Ok(r),
        Loaded::Sweep(_) => bail!("{} holds a sweep, not a run", run.display()),
    }
}

/// Calls `f` on every snapshot of the stream without holding more than one in memory.
/// Returns the last one.
pub fn stream_snapshots(run: &Path, mut f: impl FnMut(&Snapshot)) -> Result<Snapshot> {
    let path = run.join(SNAPSHOTS_FILE);
    let file = std::fs::File::open(&path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut last = None;
    for (k, line) in BufReader::new(file).lines().enumerate() {
        let line = line.with_context(|| format!("cannot read {}", path.display()))?;
        if line.trim().is_empty() {
            continue;
        }
        let snapshot: Snapshot = serde_json::from_str(&line)
            .with_context(|| format!("{} line {} is not a valid snapshot", path.display(), k + 1))?;
        f(&snapshot);
        last = Some(snapshot);
    }
    last.with_context(|| format!("{} contains no snapshots", path.display()))
}

fn write_histogram(path: &Path, h: &DegreeHistogram) -> Result<()> {
    let mut w = csv::Writer::from_writer(create_file(path)?);
    w.write_record(["degree", "count"])?;
    for (k, &c) in h.counts.iter().enumerate() {
        w.write_record([fmt_f64(h.degree(k)), fmt_f64(c)])?;
    }
    w.flush()?;
    Ok(())
}

fn write_series(path: &Path, column: &str, rows: &[(u64, String)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create_file(path)?);
    w.write_record(["round", column])?;
    for (round, v) in rows {
        w.write_record([round.to_string(), v.clone()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_analyze(run: &Path, opts: &AnalyzeOptions) -> Result<AnalysisReport> {
    let settings = read_run_settings(run)?;
    let t = settings.classifier;
    let mut summaries: Vec<SnapshotSummary> = Vec::new();
    let mut distance = Vec::new();
    let last = stream_snapshots(run, |s| {
        summaries.push(SnapshotSummary::of(s, &t));
        distance.push((s.round, distance_from_mixed_nash(&s.agents, &settings.sim.payoffs)));
    })?;

    let out = opts.out.clone().unwrap_or_else(|| run.join(ANALYSIS_DIR));
    std::fs::create_dir_all(&out).with_context(|| format!("cannot create {}", out.display()))?;

    let visitors = degree_distribution(&last.agents, TieRule::ExpectedVisitors { bin_width: opts.bin_width })?;
    let binary = degree_distribution(&last.agents, TieRule::BinaryThreshold { c: opts.tie_c })?;
    write_histogram(&out.join("degree_expected_visitors.csv"), &visitors)?;
    write_histogram(&out.join("degree_binary.csv"), &binary)?;

    let homogeneity: Vec<(u64, f64)> = summaries.iter().map(|s| (s.round, s.homogeneity)).collect();
    let fmt = |rows: &[(u64, f64)]| rows.iter().map(|&(r, v)| (r, fmt_f64(v))).collect::<Vec<_>>();
    write_series(&out.join("homogeneity.csv"), "homogeneity", &fmt(&homogeneity))?;
    write_series(&out.join("mixed_nash_distance.csv"), "distance", &fmt(&distance))?;
    let labels: Vec<(u64, String)> = summaries.iter().map(|s| (s.round, s.label.to_string())).collect();
    write_series(&out.join("labels.csv"), "label", &labels)?;

    let final_label = summaries.last().map(|s| s.label).unwrap_or(OutcomeLabel::Unresolved);
    let trajectory = if final_label.is_convention() {
        classify_trajectory_summaries(&summaries)?.as_str().to_string()
    } else {
        NOT_APPLICABLE.to_string()
    };

    // Heavy tail: a hub well above the mean visitor count (which is 1), and more binary-degree
    // mass beyond hub_factor times the mean degree than a density-matched random graph.
    let n = last.n();
    let mean_degree = binary.mean_degree();
    let p = (mean_degree / (n - 1) as f64).clamp(0.0, 1.0);
    let mut sampler = rng::stream(opts.seed.unwrap_or(settings.sim.seed), BASELINE_STREAM);
    let er = erdos_renyi_degree_baseline(n, p, opts.baseline_samples.max(1), &mut sampler)?;
    let cut = t.hub_factor * mean_degree;
    let tail_mass = binary.mass_above(cut);
    let baseline_tail_mass = er.mass_above(cut);
    let max_expected_visitors = summaries.last().map_or(0.0, |s| s.max_expected_visitors);
    let heavy_tail = mean_degree > 0.0 && max_expected_visitors >= t.hub_factor && tail_mass > baseline_tail_mass;
    if opts.baseline {
        write_histogram(&out.join("er_baseline.csv"), &er)?;
    }

    let mut w = csv::Writer::from_writer(create_file(&out.join("summary.csv"))?);
    w.write_record(SUMMARY_COLUMNS)?;
    w.write_record([
        final_label.to_string(),
        trajectory.clone(),
        fmt_f64(max_expected_visitors),
        fmt_f64(mean_degree),
        fmt_f64(binary.max_degree()),
        fmt_f64(tail_mass),
        fmt_f64(baseline_tail_mass),
        heavy_tail.to_string(),
    ])?;
    w.flush()?;

    Ok(AnalysisReport {
        final_label,
        trajectory,
        homogeneity,
        max_expected_visitors,
        mean_binary_degree: mean_degree,
        tail_mass,
        baseline_tail_mass,
        heavy_tail,
    })
}

pub const SUMMARY_COLUMNS: [&str; 8] = [
    "final_label",
    "trajectory",
    "max_expected_visitors",
    "mean_binary_degree",
    "max_binary_degree",
    "tail_mass",
    "baseline_tail_mass",
    "heavy_tail",
];

/// Where the Erdős–Rényi parameters come from.
#[derive(Debug, Clone)]
pub enum BaselineSource {
    Explicit { n: usize, p: f64 },
    /// Density matched to the final state of a run under the binary tie rule.
    Run { dir: PathBuf, tie_c: f64 },
}

pub fn cmd_baseline(source: &BaselineSource, samples: usize, seed: u64, out: &Path) -> Result<DegreeHistogram> {
    let (n, p) = match source {
        BaselineSource::Explicit { n, p } => (*n, *p),
        BaselineSource::Run { dir, tie_c } => {
            let last = stream_snapshots(dir, |_| ())?;
            let binary = degree_distribution(&last.agents, TieRule::BinaryThreshold { c: *tie_c })?;
            let n = last.n();
            (n, binary.mean_degree() / (n - 1) as f64)
        }
    };
    if n < 2 {
        bail!("baseline needs n >= 2, got {n}");
    }
    let mut sampler = rng::stream(seed, BASELINE_STREAM);
    let er = erdos_renyi_degree_baseline(n, p, samples.max(1), &mut sampler)?;
    std::fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    write_histogram(&out.join("er_baseline.csv"), &er)?;
    Ok(er)
}
