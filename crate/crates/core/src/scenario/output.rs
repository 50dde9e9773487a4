use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::{AlgorithmRun, RunSummary, ShellUsage};
use crate::constellation::{csv_to_error, Metric, Network};
use crate::costmodel::ReplicaSchedule;
use crate::delivery::DeliveryReport;
use crate::demand::ContentCatalog;
use crate::{Error, Result};

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(|e| csv_to_error(path, e))
}

fn finish(path: &Path, mut w: csv::Writer<std::fs::File>) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

pub(super) fn write_rows<W: Write, T: Serialize>(out: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io("<stream>", e))
}

pub(super) fn read_rows<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_to_error(path, e))?;
    let mut out = Vec::new();
    for (i, row) in r.deserialize().enumerate() {
        out.push(row.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i as u64 + 2,
            reason: e.to_string(),
        })?);
    }
    Ok(out)
}

pub(super) fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub(super) fn write_costs(path: &Path, run: &AlgorithmRun, catalog: &ContentCatalog, metric: Metric) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["algorithm", "content", "metric", "query", "replication", "storage", "total"])?;
    let alg = run.algorithm.as_str();
    for (c, b) in run.costs.iter().enumerate() {
        w.write_record([
            alg,
            &catalog.contents[c],
            metric.as_str(),
            &b.query.to_string(),
            &b.replication.to_string(),
            &b.storage.to_string(),
            &b.total.to_string(),
        ])?;
    }
    finish(path, w)
}

pub(super) fn write_schedule(
    path: &Path,
    schedule: &ReplicaSchedule,
    catalog: &ContentCatalog,
) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["content", "slot", "node_id"])?;
    for c in 0..schedule.contents() {
        for t in 1..=schedule.slots() {
            for v in schedule.get(c, t) {
                w.write_record([catalog.contents[c].as_str(), &t.to_string(), &v.to_string()])?;
            }
        }
    }
    finish(path, w)
}

pub(super) fn write_ops(path: &Path, run: &AlgorithmRun, catalog: &ContentCatalog) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "algorithm",
        "content",
        "iterations",
        "relaxations",
        "orbit_relaxations",
        "evaluations",
        "objective",
    ])?;
    for (c, o) in run.ops.iter().enumerate() {
        let objective = run.objective[c].map(|v| v.to_string()).unwrap_or_default();
        w.write_record([
            run.algorithm.as_str(),
            &catalog.contents[c],
            &o.iterations.to_string(),
            &o.relaxations.to_string(),
            &o.orbit_relaxations.to_string(),
            &o.evaluations.to_string(),
            &objective,
        ])?;
    }
    finish(path, w)
}

pub(super) fn write_shell_usage(path: &Path, rows: &[ShellUsage]) -> Result<()> {
    let mut w = writer(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    finish(path, w)
}

pub(super) fn write_delivery(path: &Path, reports: &[(String, DeliveryReport)]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["slot", "policy", "mean_qoe", "traffic_gb", "requests", "unreachable"])?;
    for (policy, report) in reports {
        for s in &report.slots {
            w.write_record([
                &s.slot.to_string(),
                policy.as_str(),
                &s.mean_qoe.to_string(),
                &s.traffic_gb.to_string(),
                &s.requests.to_string(),
                &s.unreachable.to_string(),
            ])?;
        }
    }
    finish(path, w)
}

pub(super) fn write_replica_load(path: &Path, reports: &[(String, DeliveryReport)], network: &Network) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["policy", "node_id", "node_name", "load"])?;
    for (policy, report) in reports {
        for (node, load) in &report.replica_load {
            w.write_record([policy.as_str(), &node.to_string(), &network.node(*node).name, &load.to_string()])?;
        }
    }
    finish(path, w)
}

pub(super) fn write_summary(path: &Path, summary: &RunSummary) -> Result<()> {
    let mut w = writer(path)?;
    for r in &summary.rows {
        w.serialize(r)?;
    }
    finish(path, w)
}
