//! `conflict run`: one simulation, streamed to disk.

use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use conflict_core::analysis::{
    distance_from_mixed_nash, homogeneity_of, rounds_to_classification, OutcomeLabel,
    PopulationView, SnapshotSummary,
};
use conflict_core::engine::{run_simulation_with, Observer, Snapshot};

use crate::config::{Loaded, RunSettings};
use crate::manifest::Manifest;
use crate::{create_file, fmt_f64};

pub const SNAPSHOTS_FILE: &str = "snapshots.jsonl";
pub const EDGES_FILE: &str = "edges.csv";
pub const OUTCOME_FILE: &str = "outcome.csv";

pub const EDGE_COLUMNS: [&str; 4] = ["from", "to", "weight", "probability"];
pub const OUTCOME_COLUMNS: [&str; 9] = [
    "label",
    "rounds",
    "rounds_to_class",
    "max_expected_visitors",
    "homogeneity",
    "distance_from_mixed_nash",
    "underflow_events",
    "mean_host_payoff",
    "mean_visitor_payoff",
];

/// Writes every snapshot as one JSON line and keeps the per-snapshot summaries.
struct JsonlSink<'a, W: Write> {
    out: W,
    settings: &'a RunSettings,
    summaries: Vec<SnapshotSummary>,
    error: Option<std::io::Error>,
}

impl<W: Write> Observer for JsonlSink<'_, W> {
    fn on_snapshot(&mut self, snapshot: &Snapshot) {
        self.summaries.push(SnapshotSummary::of(snapshot, &self.settings.classifier));
        if self.error.is_some() {
            return;
        }
        let written = serde_json::to_writer(&mut self.out, snapshot)
            .map_err(std::io::Error::from)
            .and_then(|_| self.out.write_all(b"\n"));
        if let Err(e) = written {
            self.error = Some(e);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub label: OutcomeLabel,
    pub snapshots: usize,
}

pub fn cmd_run(settings: &RunSettings, out: &Path) -> Result<RunReport> {
    std::fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    Manifest::new(Loaded::Run(settings.clone())).write(out)?;

    let mut sink = JsonlSink {
        out: BufWriter::new(create_file(&out.join(SNAPSHOTS_FILE))?),
        settings,
        summaries: Vec::new(),
        error: None,
    };
    let stats = run_simulation_with(&settings.sim, &mut sink)?;
    if let Some(e) = sink.error.take() {
        return Err(e).context("cannot write snapshot stream");
    }
    sink.out.flush().context("cannot write snapshot stream")?;

    let agents = &stats.final_state.agents;
    let mut edges = csv::Writer::from_writer(create_file(&out.join(EDGES_FILE))?);
    edges.write_record(EDGE_COLUMNS)?;
    for (i, a) in agents.iter().enumerate() {
        let total: f64 = a.partner_weights.iter().sum();
        for (j, &w) in a.partner_weights.iter().enumerate() {
            if i == j {
                continue;
            }
            let p = if total > 0.0 { w / total } else { 0.0 };
            edges.write_record([i.to_string(), j.to_string(), fmt_f64(w), fmt_f64(p)])?;
        }
    }
    edges.flush()?;

    let view = PopulationView::new(agents);
    let label = view.classify(&settings.classifier);
    let rounds_to_class = rounds_to_classification(&sink.summaries);
    let mut outcome = csv::Writer::from_writer(create_file(&out.join(OUTCOME_FILE))?);
    outcome.write_record(OUTCOME_COLUMNS)?;
    outcome.write_record([
        label.to_string(),
        settings.sim.rounds.to_string(),
        rounds_to_class.map(|r| r.to_string()).unwrap_or_default(),
        fmt_f64(view.max_expected_visitors()),
        fmt_f64(homogeneity_of(&view.expected)),
        fmt_f64(distance_from_mixed_nash(agents, &settings.sim.payoffs)),
        stats.diagnostics.underflow_events.to_string(),
        fmt_f64(stats.summary.mean_host_payoff()),
        fmt_f64(stats.summary.mean_visitor_payoff()),
    ])?;
    outcome.flush()?;

    Ok(RunReport { label, snapshots: sink.summaries.len() })
}
