//! `conflict sweep`: a resumable parameter sweep.
//!
//! Finished jobs are appended to `records.csv` in chunks. Re-running into the same directory
//! with the same config skips every job already recorded; the final table is aggregated from
//! all records, so it does not depend on how often the sweep was interrupted.

use std::fs::{File, OpenOptions};
use std::path::Path;

use anyhow::{bail, Context, Result};
use conflict_core::sweep::{
    generate_grid, par_map, run_job, with_workers, RunRecord, SweepResult, SweepSpec,
    SweepTally, SWEEP_COLUMNS,
};

use crate::config::Loaded;
use crate::create_file;
use crate::manifest::{Manifest, MANIFEST_FILE};

pub const RECORDS_FILE: &str = "records.csv";
pub const TABLE_FILE: &str = "table.csv";

/// Jobs run between two appends to `records.csv`.
const CHUNK: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub jobs: usize,
    pub resumed: usize,
    pub result: SweepResult,
}

/// Reads the complete records of an earlier attempt. A torn final line (the process died
/// mid-write) is dropped; anything else malformed is an error.
fn read_records(path: &Path) -> Result<Vec<RunRecord>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let complete = match text.rfind('\n') {
        Some(end) => &text[..=end],
        None => "",
    };
    let mut reader = csv::Reader::from_reader(complete.as_bytes());
    let mut records = Vec::new();
    for (k, row) in reader.deserialize().enumerate() {
        let r: RunRecord = row.with_context(|| format!("{} row {} is malformed", path.display(), k + 1))?;
        records.push(r);
    }
    Ok(records)
}

pub const RECORD_COLUMNS: [&str; 9] = [
    "point",
    "replicate",
    "seed",
    "label",
    "rounds_to_class",
    "final_homogeneity",
    "max_expected_visitors",
    "distance_from_mixed_nash",
    "error",
];

fn write_records(file: File, records: &[RunRecord], header: bool) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    if header {
        w.write_record(RECORD_COLUMNS)?;
    }
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_sweep(spec: &SweepSpec, out: &Path, workers: Option<usize>) -> Result<SweepReport> {
    let points = spec.points()?;
    let jobs = generate_grid(spec)?;
    let config = Loaded::Sweep(spec.clone());
    std::fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;

    let records_path = out.join(RECORDS_FILE);
    let mut tally = SweepTally::new(points.clone());
    if out.join(MANIFEST_FILE).exists() {
        let previous = Manifest::read(out)?;
        if previous.header.config_sha256 != config.digest() {
            bail!(
                "{} already holds a different configuration; use a fresh output directory",
                out.display()
            );
        }
        if records_path.exists() {
            tally = SweepTally::from_records(points.clone(), read_records(&records_path)?)?;
        }
    } else {
        Manifest::new(config).write(out)?;
    }
    let resumed = jobs.iter().filter(|j| tally.contains(j.point, j.replicate)).count();

    // Rewrite what survived so that the file ends on a record boundary before appending.
    let done: Vec<RunRecord> = tally.records.values().copied().collect();
    write_records(create_file(&records_path)?, &done, true)?;
    let todo: Vec<_> = jobs.iter().filter(|j| !tally.contains(j.point, j.replicate)).copied().collect();

    with_workers(workers, || -> Result<()> {
        for chunk in todo.chunks(CHUNK) {
            let records = par_map(chunk, |job| run_job(spec, job));
            let file = OpenOptions::new().append(true).open(&records_path)?;
            write_records(file, &records, false)?;
            for r in records {
                tally.insert(r)?;
            }
        }
        Ok(())
    })?;

    let result = tally.result();
    create_file(&out.join(TABLE_FILE))
        .and_then(|f| write_table(f, &result))
        .context("cannot write sweep table")?;
    Ok(SweepReport { jobs: jobs.len(), resumed, result })
}

fn write_table(file: File, result: &SweepResult) -> Result<()> {
    let mut table = csv::Writer::from_writer(file);
    table.write_record(SWEEP_COLUMNS)?;
    for row in &result.rows {
        table.write_record(row.table_row())?;
    }
    table.flush()?;
    Ok(())
}
