//! Result emission: one plain-text summary table for a batch, plus one CSV
//! trace per run for external plotting of paths and clearance profiles.
//!
//! Everything written in iteration-budget mode is byte-deterministic; the
//! wall-clock timing file is only produced when a run was actually governed
//! by a wall-clock budget.

use crate::aggregate::{aggregate, Statistic, Summary};
use crate::run::{FailureCause, RunMetrics, RunTrace};
use crate::scenario::ScenarioError;
use navsim_core::Real;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

/// One finished run, labeled for the summary table.
#[derive(Debug, Clone)]
pub struct RunRecord {
    /// Scenario name; doubles as the trace file stem.
    pub name: String,
    pub controller: &'static str,
    pub setup: &'static str,
    pub metrics: RunMetrics,
    /// Present when tracing was enabled for the run.
    pub trace: Option<RunTrace>,
}

/// The per-run metrics file: everything `aggregate` needs to rebuild a
/// summary later, reproducible byte for byte (no wall-clock content).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub name: String,
    pub controller: String,
    pub setup: String,
    pub success: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure_cause: Option<FailureCause>,
    pub path_length: Real,
    pub mission_time: Real,
    pub replan_count: u64,
    pub decisions: u64,
    /// Summed deterministic decision cost over the run.
    pub total_evaluations: u64,
}

impl MetricsRecord {
    pub fn from_record(record: &RunRecord) -> Self {
        let m = &record.metrics;
        MetricsRecord {
            name: record.name.clone(),
            controller: record.controller.to_string(),
            setup: record.setup.to_string(),
            success: m.success,
            failure_cause: m.failure_cause,
            path_length: m.path_length,
            mission_time: m.mission_time,
            replan_count: m.replan_count,
            decisions: m.decision_evaluations.len() as u64,
            total_evaluations: m.decision_evaluations.iter().sum(),
        }
    }

    /// Enough of a `RunMetrics` to feed [`aggregate`].
    pub fn to_metrics(&self) -> RunMetrics {
        RunMetrics {
            success: self.success,
            failure_cause: self.failure_cause,
            path_length: self.path_length,
            mission_time: self.mission_time,
            min_obstacle_distance: vec![],
            decision_evaluations: vec![],
            decision_seconds: vec![],
            replan_count: self.replan_count,
        }
    }
}

/// Load every `metrics-*.toml` under `directory`, sorted by file name.
pub fn load_metrics(directory: impl AsRef<Path>) -> Result<Vec<MetricsRecord>, ScenarioError> {
    let mut paths: Vec<_> = std::fs::read_dir(directory)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("metrics-") && n.ends_with(".toml"))
        })
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|path| {
            let text = std::fs::read_to_string(path)?;
            Ok(toml::from_str(&text)?)
        })
        .collect()
}

/// Rebuild the per-group summary lines from loaded metrics records.
pub fn summarize_metrics(records: &[MetricsRecord]) -> String {
    let mut groups: Vec<(&str, &str)> = Vec::new();
    for record in records {
        let key = (record.controller.as_str(), record.setup.as_str());
        if !groups.contains(&key) {
            groups.push(key);
        }
    }
    let mut out = String::new();
    for (controller, setup) in groups {
        let batch: Vec<RunMetrics> = records
            .iter()
            .filter(|r| r.controller == controller && r.setup == setup)
            .map(MetricsRecord::to_metrics)
            .collect();
        let _ = writeln!(out, "{}", summary_line(controller, setup, &aggregate(&batch)));
    }
    out
}

fn fmt_metric(value: Option<Real>) -> String {
    match value {
        Some(v) => format!("{v:.2}"),
        None => "-".to_string(),
    }
}

fn fmt_statistic(stat: Option<Statistic>) -> String {
    match stat {
        Some(s) => format!(
            "{:.2} +/- {}",
            s.mean,
            s.std_dev.map_or_else(|| "-".to_string(), |d| format!("{d:.2}")),
        ),
        None => "-".to_string(),
    }
}

/// Lowest recorded center distance to any obstacle, for the table.
fn closest_approach(metrics: &RunMetrics) -> Option<Real> {
    metrics
        .min_obstacle_distance
        .iter()
        .map(|(_, d)| *d)
        .fold(None, |acc, d| Some(acc.map_or(d, |a: Real| a.min(d))))
        .filter(|d| d.is_finite())
}

/// Render the per-run table plus one aggregate line per controller/setup
/// group, in first-appearance order.
pub fn summary_table(records: &[RunRecord]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<28} {:<7} {:<18} {:<10} {:>9} {:>9} {:>9} {:>8}",
        "scenario", "ctrl", "setup", "outcome", "path(m)", "time(s)", "clear(m)", "replans",
    );
    for record in records {
        let m = &record.metrics;
        let outcome = m
            .failure_cause
            .map_or("success", |cause| cause.label());
        let _ = writeln!(
            out,
            "{:<28} {:<7} {:<18} {:<10} {:>9} {:>9} {:>9} {:>8}",
            record.name,
            record.controller,
            record.setup,
            outcome,
            fmt_metric(m.success.then_some(m.path_length)),
            fmt_metric(m.success.then_some(m.mission_time)),
            fmt_metric(closest_approach(m)),
            m.replan_count,
        );
    }

    let mut groups: Vec<(&'static str, &'static str)> = Vec::new();
    for record in records {
        let key = (record.controller, record.setup);
        if !groups.contains(&key) {
            groups.push(key);
        }
    }
    out.push('\n');
    for (controller, setup) in groups {
        let batch: Vec<RunMetrics> = records
            .iter()
            .filter(|r| r.controller == controller && r.setup == setup)
            .map(|r| r.metrics.clone())
            .collect();
        let summary = aggregate(&batch);
        let _ = writeln!(out, "{}", summary_line(controller, setup, &summary));
    }
    out
}

fn summary_line(controller: &str, setup: &str, summary: &Summary) -> String {
    let mut line = format!(
        "{controller} / {setup}: {}/{} success, path {} , time {}",
        summary.successes,
        summary.runs,
        fmt_statistic(summary.path_length),
        fmt_statistic(summary.mission_time),
    );
    if !summary.failure_counts.is_empty() {
        let causes: Vec<String> = summary
            .failure_counts
            .iter()
            .map(|(cause, count)| format!("{} x{}", cause.label(), count))
            .collect();
        let _ = write!(line, " ({})", causes.join(", "));
    }
    line
}

/// Write `summary.txt`, one `metrics-<name>.toml` per run, and one
/// `trace-<name>.csv` per traced run into `directory` (created if missing).
/// With `wall_clock` set, per-decision seconds go to `seconds-<name>.csv`;
/// they are skipped otherwise because clock readings would break byte
/// determinism.
pub fn emit_results(
    records: &[RunRecord],
    directory: impl AsRef<Path>,
    wall_clock: bool,
) -> Result<(), ScenarioError> {
    let directory = directory.as_ref();
    std::fs::create_dir_all(directory)?;
    std::fs::write(directory.join("summary.txt"), summary_table(records))?;

    for record in records {
        let metrics = MetricsRecord::from_record(record);
        std::fs::write(
            directory.join(format!("metrics-{}.toml", record.name)),
            toml::to_string_pretty(&metrics)?,
        )?;
        if let Some(trace) = &record.trace {
            let path = directory.join(format!("trace-{}.csv", record.name));
            let mut writer = csv::Writer::from_path(&path)?;
            for step in &trace.steps {
                writer.serialize(step)?;
            }
            writer.flush()?;
        }
        if wall_clock {
            let path = directory.join(format!("seconds-{}.csv", record.name));
            let mut writer = csv::Writer::from_path(&path)?;
            writer.write_record(["decision", "seconds"])?;
            for (i, s) in record.metrics.decision_seconds.iter().enumerate() {
                writer.write_record([i.to_string(), format!("{s:.6}")])?;
            }
            writer.flush()?;
        }
    }
    Ok(())
}
