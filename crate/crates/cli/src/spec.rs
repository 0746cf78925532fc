//! Experiment specification: what to load, how to mask it, which methods to
//! run and where to write. Read from a JSON or TOML file, then overridden by
//! command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use uimc::dataset::io::MaskFile;
use uimc::dataset::synthetic::SyntheticParams;
use uimc::report::Method;
use uimc::solver::SolverConfig;

/// One hyperparameter swept over a list of values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    /// A `SolverConfig` field name.
    pub param: String,
    pub values: Vec<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub manifest: Option<PathBuf>,
    pub synthetic: Option<SyntheticParams>,
    pub mask: Option<MaskFile>,
    pub solver_config: Option<PathBuf>,
    pub methods: Vec<Method>,
    pub out: Option<PathBuf>,
    pub repeat: usize,
    /// Run `i` uses seed `seed + i` for the solver and the baselines.
    pub seed: u64,
    pub sweep: Option<Sweep>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            manifest: None,
            synthetic: None,
            mask: None,
            solver_config: None,
            methods: vec![Method::Uimc, Method::Bsv, Method::Concat],
            out: None,
            repeat: 1,
            seed: 0,
            sweep: None,
        }
    }
}

impl ExperimentSpec {
    /// Reads a spec file; relative paths inside it are resolved against the
    /// file's directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let mut spec: Self = read_config(path)?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        for p in [&mut spec.manifest, &mut spec.solver_config, &mut spec.out]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.repeat == 0 {
            bail!("repeat must be at least 1");
        }
        if self.methods.is_empty() {
            bail!("select at least one method");
        }
        match (&self.manifest, &self.synthetic) {
            (None, None) => bail!("give a dataset manifest or synthetic-generator parameters"),
            (Some(_), Some(_)) => bail!("give either a manifest or synthetic parameters, not both"),
            _ => {}
        }
        if self.out.is_none() {
            bail!("an output directory is required");
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                bail!("sweep over {} has no values", sweep.param);
            }
            sweep_config(&SolverConfig::default(), &sweep.param, &sweep.values[0])?;
        }
        Ok(())
    }

    pub fn solver_config(&self) -> Result<SolverConfig> {
        match &self.solver_config {
            Some(p) => SolverConfig::from_file(p).with_context(|| format!("reading solver config {}", p.display())),
            None => Ok(SolverConfig::default()),
        }
    }
}

/// `base` with one field replaced; unknown fields and invalid values are
/// rejected.
pub fn sweep_config(base: &SolverConfig, param: &str, value: &serde_json::Value) -> Result<SolverConfig> {
    let mut raw = serde_json::to_value(base)?;
    let fields = raw.as_object_mut().expect("config serialises to an object");
    if !fields.contains_key(param) {
        bail!("unknown solver parameter {param:?}");
    }
    fields.insert(param.to_owned(), value.clone());
    let config: SolverConfig = serde_json::from_value(raw).with_context(|| format!("value {value} for {param}"))?;
    config
        .validate()
        .with_context(|| format!("value {value} for {param}"))?;
    Ok(config)
}

/// Parses `name=v1,v2,...`; each value is read as JSON, falling back to a
/// string.
pub fn parse_sweep(text: &str) -> Result<Sweep> {
    let (param, values) = text.split_once('=').context("expected PARAM=V1,V2,...")?;
    let values = values
        .split(',')
        .map(|v| serde_json::from_str(v.trim()).unwrap_or_else(|_| serde_json::Value::String(v.trim().to_owned())))
        .collect();
    Ok(Sweep {
        param: param.trim().to_owned(),
        values,
    })
}

/// Reads JSON, or TOML when the extension is `.toml`.
pub fn read_config<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let parsed = if path.extension().is_some_and(|e| e == "toml") {
        toml::from_str(&text).map_err(anyhow::Error::from)
    } else {
        serde_json::from_str(&text).map_err(anyhow::Error::from)
    };
    parsed.with_context(|| format!("parsing {}", path.display()))
}
