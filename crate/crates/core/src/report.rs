//! Experiment reports: per-run records, mean/std aggregation and long-format
//! trace CSVs.
//!
//! The summary holds only quantities that are a function of the inputs and
//! seeds, so reruns produce byte-identical JSON. Wall-clock times go to a
//! separate CSV.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::baselines::ViewSelection;
use crate::metrics::Scores;
use crate::{Result, UimcError};

/// Version of the summary layout; bumped on any field change.
pub const SUMMARY_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Uimc,
    Bsv,
    Concat,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Uimc => "uimc",
            Method::Bsv => "bsv",
            Method::Concat => "concat",
        }
    }
}

/// One method run on one seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub method: Method,
    pub run: usize,
    pub seed: u64,
    /// Absent when the dataset has no labels.
    pub scores: Option<Scores>,
    pub labels: Vec<usize>,
    /// UIMC only.
    pub iters_run: Option<usize>,
    pub converged: Option<bool>,
    pub final_weights: Option<Vec<f64>>,
    pub final_objective: Option<f64>,
    /// BSV only.
    pub chosen_view: Option<usize>,
    pub selection: Option<ViewSelection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Population standard deviation; zero for a single run.
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Some(Self { mean, std: var.sqrt() })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    pub runs: usize,
    pub acc: Option<MeanStd>,
    pub nmi: Option<MeanStd>,
    pub purity: Option<MeanStd>,
    /// Set when BSV chose its view without ground truth.
    pub flagged_objective_selection: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema_version: u32,
    pub m: usize,
    pub c: usize,
    pub n_views: usize,
    pub missing_rates: Vec<f64>,
    pub labelled: bool,
    pub methods: Vec<MethodSummary>,
    pub runs: Vec<RunRecord>,
}

/// Aggregates runs per method, in first-appearance order of the methods.
pub fn summarize_methods(runs: &[RunRecord]) -> Vec<MethodSummary> {
    let mut methods: Vec<Method> = Vec::new();
    for r in runs {
        if !methods.contains(&r.method) {
            methods.push(r.method);
        }
    }
    methods
        .into_iter()
        .map(|method| {
            let mine: Vec<&RunRecord> = runs.iter().filter(|r| r.method == method).collect();
            let scores: Vec<Scores> = mine.iter().filter_map(|r| r.scores).collect();
            let metric = |f: fn(&Scores) -> f64| MeanStd::of(&scores.iter().map(f).collect::<Vec<_>>());
            MethodSummary {
                method,
                runs: mine.len(),
                acc: metric(|s| s.acc),
                nmi: metric(|s| s.nmi),
                purity: metric(|s| s.purity),
                flagged_objective_selection: mine.iter().any(|r| r.selection == Some(ViewSelection::Objective)),
            }
        })
        .collect()
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| UimcError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `run,iteration,objective` rows.
pub fn write_objective_trace(path: &Path, traces: &[(usize, &[f64])]) -> Result<()> {
    let mut out = String::from("run,iteration,objective\n");
    for (run, trace) in traces {
        for (it, v) in trace.iter().enumerate() {
            writeln!(out, "{run},{it},{v:?}").expect("write to string");
        }
    }
    write_text(path, &out)
}

/// Writes `run,iteration,view,weight` rows.
pub fn write_weight_trace(path: &Path, traces: &[(usize, &[Vec<f64>])]) -> Result<()> {
    let mut out = String::from("run,iteration,view,weight\n");
    for (run, trace) in traces {
        for (it, ws) in trace.iter().enumerate() {
            for (v, w) in ws.iter().enumerate() {
                writeln!(out, "{run},{it},{v},{w:?}").expect("write to string");
            }
        }
    }
    write_text(path, &out)
}

/// Writes `method,run,seconds` rows.
pub fn write_timings(path: &Path, timings: &[(Method, usize, f64)]) -> Result<()> {
    let mut out = String::from("method,run,seconds\n");
    for (method, run, secs) in timings {
        writeln!(out, "{},{run},{secs:?}", method.name()).expect("write to string");
    }
    write_text(path, &out)
}
