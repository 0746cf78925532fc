//! Executes an experiment spec and writes its reports.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use uimc::baselines::{bsv, concat, ViewSelection};
use uimc::dataset::io::{load_manifest, write_json, LoadedDataset, MaskFile};
use uimc::dataset::synthetic::generate;
use uimc::dataset::{IncompleteDataset, MultiViewDataset};
use uimc::metrics::evaluate;
use uimc::report::{
    summarize_methods, write_objective_trace, write_timings, write_weight_trace, MeanStd, Method, MethodSummary,
    RunRecord, Summary, SUMMARY_SCHEMA_VERSION,
};
use uimc::solver::{solve, SolverConfig};

use crate::spec::{sweep_config, ExperimentSpec};

/// The data every run starts from, before per-run masking.
enum Source {
    Complete(MultiViewDataset),
    Masked(IncompleteDataset),
}

fn load_source(spec: &ExperimentSpec) -> Result<Source> {
    if let Some(params) = &spec.synthetic {
        return Ok(Source::Complete(generate(params).context("generating synthetic data")?));
    }
    let path = spec.manifest.as_ref().expect("validated");
    match load_manifest(path).with_context(|| format!("loading {}", path.display()))? {
        LoadedDataset::Complete(d) => Ok(Source::Complete(d)),
        LoadedDataset::Masked(d) => {
            if spec.mask.is_some() {
                bail!("{} is already masked; drop the mask option", path.display());
            }
            Ok(Source::Masked(d))
        }
    }
}

/// The dataset for run `run`; seeded masks advance their seed by the run index.
fn dataset_for_run(spec: &ExperimentSpec, source: &Source, run: usize) -> Result<IncompleteDataset> {
    match (source, &spec.mask) {
        (Source::Masked(d), _) => Ok(d.clone()),
        (Source::Complete(d), None) => Ok(d.to_incomplete()),
        (Source::Complete(d), Some(mask)) => {
            let mask = match mask {
                MaskFile::Rates { seed, .. } | MaskFile::Scheme { seed, .. } => mask.reseeded(seed + run as u64),
                MaskFile::Presented { .. } => mask.clone(),
            };
            mask.apply(d).with_context(|| format!("masking for run {run}"))
        }
    }
}

struct RunOutput {
    record: RunRecord,
    seconds: f64,
    objective_trace: Option<Vec<f64>>,
    weight_trace: Option<Vec<Vec<f64>>>,
}

fn run_method(
    method: Method,
    data: &IncompleteDataset,
    config: &SolverConfig,
    run: usize,
    seed: u64,
) -> Result<RunOutput> {
    let started = Instant::now();
    let truth = data.labels();
    let mut record = RunRecord {
        method,
        run,
        seed,
        scores: None,
        labels: Vec::new(),
        iters_run: None,
        converged: None,
        final_weights: None,
        final_objective: None,
        chosen_view: None,
        selection: None,
    };
    let (mut objective_trace, mut weight_trace) = (None, None);
    match method {
        Method::Uimc => {
            let config = SolverConfig { seed, ..config.clone() };
            let out = solve(data, &config).with_context(|| format!("uimc run {run}"))?;
            record.labels = out.labels;
            record.iters_run = Some(out.iters_run);
            record.converged = Some(out.converged);
            record.final_weights = Some(out.weights);
            record.final_objective = out.objective_trace.last().copied();
            objective_trace = Some(out.objective_trace);
            weight_trace = Some(out.weight_trace);
        }
        Method::Bsv => {
            let out = bsv(data, data.c(), seed, truth).with_context(|| format!("bsv run {run}"))?;
            if out.selection == Some(ViewSelection::Objective) {
                log::warn!("no labels: bsv reports the view with the lowest normalised k-means objective");
            }
            record.labels = out.labels;
            record.chosen_view = out.chosen_view;
            record.selection = out.selection;
        }
        Method::Concat => {
            record.labels = concat(data, data.c(), seed)
                .with_context(|| format!("concat run {run}"))?
                .labels;
        }
    }
    if let Some(t) = truth {
        record.scores = Some(evaluate(&record.labels, t)?);
    }
    Ok(RunOutput {
        record,
        seconds: started.elapsed().as_secs_f64(),
        objective_trace,
        weight_trace,
    })
}

fn run_all(
    spec: &ExperimentSpec,
    source: &Source,
    config: &SolverConfig,
    methods: &[Method],
) -> Result<(Vec<RunOutput>, IncompleteDataset)> {
    let mut outputs = Vec::new();
    let mut first = None;
    for run in 0..spec.repeat {
        let seed = spec.seed + run as u64;
        let data = dataset_for_run(spec, source, run)?;
        for &method in methods {
            let out = run_method(method, &data, config, run, seed)?;
            if let Some(s) = &out.record.scores {
                log::info!(
                    "run {run} {}: acc {:.4} nmi {:.4} purity {:.4}",
                    method.name(),
                    s.acc,
                    s.nmi,
                    s.purity
                );
            }
            outputs.push(out);
        }
        first.get_or_insert(data);
    }
    Ok((outputs, first.expect("repeat >= 1")))
}

/// Runs the experiment and returns the written summary.
pub fn execute(spec: &ExperimentSpec) -> Result<Summary> {
    spec.validate()?;
    let out_dir = spec.out.as_ref().expect("validated");
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let source = load_source(spec)?;
    let config = spec.solver_config()?;
    write_json(&config, &out_dir.join("solver_config.json"))?;
    write_json(spec, &out_dir.join("experiment.json"))?;

    if let Some(sweep) = &spec.sweep {
        run_sweep(spec, &source, &config, &sweep.param, &sweep.values, out_dir)?;
    }

    let (outputs, first) = run_all(spec, &source, &config, &spec.methods)?;
    let runs: Vec<RunRecord> = outputs.iter().map(|o| o.record.clone()).collect();
    let summary = Summary {
        schema_version: SUMMARY_SCHEMA_VERSION,
        m: first.m(),
        c: first.c(),
        n_views: first.n_views(),
        missing_rates: first.missing_rates(),
        labelled: first.labels().is_some(),
        methods: summarize_methods(&runs),
        runs,
    };
    write_json(&summary, &out_dir.join("summary.json"))?;

    let objective: Vec<(usize, &[f64])> = outputs
        .iter()
        .filter_map(|o| o.objective_trace.as_deref().map(|t| (o.record.run, t)))
        .collect();
    let weights: Vec<(usize, &[Vec<f64>])> = outputs
        .iter()
        .filter_map(|o| o.weight_trace.as_deref().map(|t| (o.record.run, t)))
        .collect();
    if !objective.is_empty() {
        write_objective_trace(&out_dir.join("objective_trace.csv"), &objective)?;
        write_weight_trace(&out_dir.join("weight_trace.csv"), &weights)?;
    }
    let timings: Vec<(Method, usize, f64)> = outputs
        .iter()
        .map(|o| (o.record.method, o.record.run, o.seconds))
        .collect();
    write_timings(&out_dir.join("timings.csv"), &timings)?;
    Ok(summary)
}

fn metric_cell(m: &Option<MeanStd>) -> String {
    m.map_or_else(|| ",".to_owned(), |s| format!("{:?},{:?}", s.mean, s.std))
}

/// UIMC over each value of one hyperparameter; writes `sweep.csv`.
fn run_sweep(
    spec: &ExperimentSpec,
    source: &Source,
    base: &SolverConfig,
    param: &str,
    values: &[serde_json::Value],
    out_dir: &Path,
) -> Result<()> {
    let mut csv = String::from("param,value,runs,acc_mean,acc_std,nmi_mean,nmi_std,purity_mean,purity_std\n");
    for value in values {
        let config = sweep_config(base, param, value)?;
        let (outputs, _) = run_all(spec, source, &config, &[Method::Uimc])?;
        let runs: Vec<RunRecord> = outputs.into_iter().map(|o| o.record).collect();
        let MethodSummary {
            runs: n,
            acc,
            nmi,
            purity,
            ..
        } = summarize_methods(&runs).remove(0);
        writeln!(
            csv,
            "{param},{value},{n},{},{},{}",
            metric_cell(&acc),
            metric_cell(&nmi),
            metric_cell(&purity)
        )
        .expect("write to string");
    }
    let path = out_dir.join("sweep.csv");
    fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))
}
