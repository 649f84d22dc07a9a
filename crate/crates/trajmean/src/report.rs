//! Aggregation of trial reports and the files written to an output
//! directory.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::sim::{EstimateReport, TrialReport};
use crate::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub name: String,
    pub mean: f64,
    pub std: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mean_seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub trials: usize,
    /// Fused estimates, then single nodes, then all nodes pooled.
    pub rows: Vec<SummaryRow>,
}

impl Summary {
    pub fn row(&self, name: &str) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("OSPA2 over {} trial(s)\n", self.trials);
        let _ = writeln!(out, "{:<10} {:>12}   {:>10}", "estimate", "mean", "std");
        for r in &self.rows {
            let _ = write!(out, "{:<10} {:>12.4} ± {:>10.4}", r.name, r.mean, r.std);
            if let Some(s) = r.mean_seconds {
                let _ = write!(out, "   {s:.3} s");
            }
            out.push('\n');
        }
        out
    }
}

/// Mean and sample standard deviation; the deviation of one value is 0.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn row(name: &str, items: &[&EstimateReport]) -> SummaryRow {
    let values: Vec<f64> = items.iter().map(|e| e.ospa2).collect();
    let (mean, std) = mean_std(&values);
    let seconds: Option<Vec<f64>> = items.iter().map(|e| e.seconds).collect();
    SummaryRow {
        name: name.to_owned(),
        mean,
        std,
        mean_seconds: seconds.map(|s| mean_std(&s).0),
    }
}

/// Groups estimates by name in first-seen order.
fn groups<'a>(
    reports: &'a [TrialReport],
    pick: impl Fn(&'a TrialReport) -> &'a [EstimateReport],
) -> Vec<(String, Vec<&'a EstimateReport>)> {
    let mut out: Vec<(String, Vec<&EstimateReport>)> = Vec::new();
    for e in reports.iter().flat_map(pick) {
        match out.iter_mut().find(|(n, _)| *n == e.name) {
            Some((_, v)) => v.push(e),
            None => out.push((e.name.clone(), vec![e])),
        }
    }
    out
}

pub fn summarize(reports: &[TrialReport]) -> Summary {
    let mut rows: Vec<SummaryRow> = groups(reports, |r| &r.fused)
        .iter()
        .map(|(n, v)| row(n, v))
        .collect();
    let nodes = groups(reports, |r| &r.nodes);
    rows.extend(nodes.iter().map(|(n, v)| row(n, v)));
    let pooled: Vec<&EstimateReport> = nodes.iter().flat_map(|(_, v)| v.iter().copied()).collect();
    if !pooled.is_empty() {
        rows.push(row("nodes", &pooled));
    }
    Summary {
        trials: reports.len(),
        rows,
    }
}

/// Per-scan mean over `series`.
pub fn mean_series<'a>(series: impl IntoIterator<Item = &'a [f64]>) -> Vec<f64> {
    let mut sum: Vec<f64> = Vec::new();
    let mut count = 0usize;
    for s in series {
        if sum.is_empty() {
            sum = vec![0.0; s.len()];
        }
        sum.iter_mut().zip(s).for_each(|(a, b)| *a += b);
        count += 1;
    }
    sum.iter_mut().for_each(|v| *v /= count as f64);
    sum
}

/// Writes `scan,value` rows with 1-based scans.
pub fn write_series(path: &Path, values: &[f64]) -> Result<(), Error> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["scan", "value"])?;
    for (k, v) in values.iter().enumerate() {
        w.write_record([(k + 1).to_string(), v.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Error> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn as_f64(v: &[usize]) -> Vec<f64> {
    v.iter().map(|&x| x as f64).collect()
}

/// Writes `trial_NNN.json`, `summary.json`, `summary.txt` and, per estimate,
/// `ospa2_<name>.csv` and `cardinality_<name>.csv` averaged over trials,
/// plus `cardinality_truth.csv`.
pub fn write_outputs(dir: &Path, reports: &[TrialReport]) -> Result<Summary, Error> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for r in reports {
        write_json(&dir.join(format!("trial_{:03}.json", r.trial)), r)?;
    }
    let summary = summarize(reports);
    write_json(&dir.join("summary.json"), &summary)?;
    let txt = dir.join("summary.txt");
    fs::write(&txt, summary.to_text()).map_err(|e| Error::io(&txt, e))?;

    let truth: Vec<Vec<f64>> = reports
        .iter()
        .map(|r| as_f64(&r.truth_cardinality))
        .collect();
    write_series(
        &dir.join("cardinality_truth.csv"),
        &mean_series(truth.iter().map(Vec::as_slice)),
    )?;
    let fused = groups(reports, |r| &r.fused);
    let nodes = groups(reports, |r| &r.nodes);
    for (name, items) in fused.into_iter().chain(nodes) {
        let ospa = mean_series(items.iter().map(|e| e.ospa2_series.as_slice()));
        write_series(&dir.join(format!("ospa2_{name}.csv")), &ospa)?;
        let card: Vec<Vec<f64>> = items
            .iter()
            .map(|e| as_f64(&e.cardinality_series))
            .collect();
        write_series(
            &dir.join(format!("cardinality_{name}.csv")),
            &mean_series(card.iter().map(Vec::as_slice)),
        )?;
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn est(name: &str, v: f64) -> EstimateReport {
        EstimateReport {
            name: name.into(),
            ospa2: v,
            ospa2_series: vec![v, v],
            cardinality_series: vec![1, 2],
            cost: None,
            seconds: None,
        }
    }

    #[test]
    fn summary_rows() {
        let reports: Vec<TrialReport> = [1.0, 3.0]
            .iter()
            .enumerate()
            .map(|(trial, v)| TrialReport {
                trial,
                truth_cardinality: vec![1, 1],
                nodes: vec![est("node1", 10.0 * v), est("node2", 20.0 * v)],
                fused: vec![est("greedy1", *v)],
            })
            .collect();
        let s = summarize(&reports);
        let names: Vec<&str> = s.rows.iter().map(|r| r.name.as_str()).collect();
        assert_eq!(names, ["greedy1", "node1", "node2", "nodes"]);
        let g = s.row("greedy1").unwrap();
        assert_eq!((g.mean, g.std), (2.0, 2f64.sqrt()));
        assert_eq!(s.row("nodes").unwrap().mean, 30.0);
        assert!(s.to_text().contains("greedy1"));
    }

    #[test]
    fn single_value_has_zero_spread() {
        assert_eq!(mean_std(&[4.0]), (4.0, 0.0));
    }
}
