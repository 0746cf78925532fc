//! `uimc`: synthesize, mask, cluster and evaluate multi-view datasets.

mod run;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use uimc::dataset::io::{load_dataset, read_json, read_labels, save_dataset, save_incomplete, write_json, MaskFile};
use uimc::dataset::synthetic::{generate, SyntheticParams};
use uimc::metrics::evaluate;
use uimc::report::Method;

use spec::{parse_sweep, read_config, ExperimentSpec};

#[derive(Parser)]
#[command(
    name = "uimc",
    version,
    about = "Unbalanced incomplete multi-view clustering experiments"
)]
struct Cli {
    /// Log more (-v info, -vv debug). RUST_LOG takes precedence.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labelled synthetic dataset.
    Synth(SynthArgs),
    /// Remove instances from a complete dataset.
    Mask(MaskArgs),
    /// Run UIMC and baselines, writing scores, traces and a summary.
    Run(RunArgs),
    /// Score predicted labels against ground truth.
    Eval(EvalArgs),
}

/// Synthetic-generator flags; each overrides the matching config value.
#[derive(Args, Default)]
struct SynthFlags {
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    c: Option<usize>,
    /// Per-view feature dimensions, e.g. 30,40,20.
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    separation: Option<f64>,
    #[arg(long)]
    latent_dim: Option<usize>,
    /// Seed of the generator.
    #[arg(long)]
    data_seed: Option<u64>,
}

impl SynthFlags {
    fn any(&self) -> bool {
        self.m.is_some()
            || self.c.is_some()
            || self.dims.is_some()
            || self.noise.is_some()
            || self.separation.is_some()
            || self.latent_dim.is_some()
            || self.data_seed.is_some()
    }

    fn apply(&self, mut p: SyntheticParams) -> SyntheticParams {
        if let Some(v) = self.m {
            p.m = v;
        }
        if let Some(v) = self.c {
            p.c = v;
        }
        if let Some(v) = &self.dims {
            p.dims = v.clone();
        }
        if let Some(v) = self.noise {
            p.noise = v;
        }
        if let Some(v) = self.separation {
            p.separation = v;
        }
        if let Some(v) = self.latent_dim {
            p.latent_dim = v;
        }
        if let Some(v) = self.data_seed {
            p.seed = v;
        }
        p
    }
}

/// Mask flags: direct rates, multipliers × PER, or a mask file.
#[derive(Args, Default)]
struct MaskFlags {
    /// Per-view missing rates, e.g. 0,0.3,0.6.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["multipliers", "mask_file"])]
    rates: Option<Vec<f64>>,
    /// Per-view multipliers of the average missing rate (needs --per).
    #[arg(long, value_delimiter = ',', requires = "per", conflicts_with = "mask_file")]
    multipliers: Option<Vec<f64>>,
    /// Average missing rate scaled by --multipliers.
    #[arg(long, requires = "multipliers")]
    per: Option<f64>,
    /// JSON mask file (rates, multipliers or explicit presented indices).
    #[arg(long)]
    mask_file: Option<PathBuf>,
    /// Seed for the random masks built from --rates or --multipliers.
    #[arg(long)]
    mask_seed: Option<u64>,
}

impl MaskFlags {
    fn build(&self, default_seed: u64) -> Result<Option<MaskFile>> {
        let seed = self.mask_seed.unwrap_or(default_seed);
        if let Some(rates) = &self.rates {
            return Ok(Some(MaskFile::Rates {
                rates: rates.clone(),
                seed,
            }));
        }
        if let (Some(multipliers), Some(per)) = (&self.multipliers, self.per) {
            return Ok(Some(MaskFile::Scheme {
                multipliers: multipliers.clone(),
                per,
                seed,
            }));
        }
        if let Some(path) = &self.mask_file {
            let mask: MaskFile = read_json("mask file", path)?;
            return Ok(Some(match self.mask_seed {
                Some(s) => mask.reseeded(s),
                None => mask,
            }));
        }
        if self.mask_seed.is_some() {
            bail!("--mask-seed needs --rates, --multipliers or --mask-file");
        }
        Ok(None)
    }
}

#[derive(Args)]
struct SynthArgs {
    /// Output directory for the manifest, view CSVs and labels.
    #[arg(long)]
    out: PathBuf,
    /// JSON or TOML file of generator parameters.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    flags: SynthFlags,
}

#[derive(Args)]
struct MaskArgs {
    /// Manifest of a complete dataset.
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    mask: MaskFlags,
}

#[derive(Args)]
struct RunArgs {
    /// JSON or TOML experiment spec; flags override its fields.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Dataset manifest (complete or masked).
    #[arg(long, conflicts_with = "synthetic")]
    manifest: Option<PathBuf>,
    /// Generate the data instead of loading it (implied by any generator flag).
    #[arg(long)]
    synthetic: bool,
    #[command(flatten)]
    synth: SynthFlags,
    #[command(flatten)]
    mask: MaskFlags,
    /// JSON or TOML solver config.
    #[arg(long)]
    solver_config: Option<PathBuf>,
    /// Methods to run, e.g. uimc,bsv,concat.
    #[arg(long, value_delimiter = ',', value_parser = parse_method)]
    methods: Option<Vec<Method>>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of runs; run i uses seed + i.
    #[arg(long)]
    repeat: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Also sweep one solver parameter, e.g. alpha=0.001,0.01,0.1.
    #[arg(long, value_parser = parse_sweep_arg)]
    sweep: Option<spec::Sweep>,
}

#[derive(Args)]
struct EvalArgs {
    /// Predicted labels, one integer per line.
    #[arg(long)]
    predicted: PathBuf,
    /// Ground-truth labels, one integer per line.
    #[arg(long)]
    truth: PathBuf,
    /// Also write the scores as JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_method(s: &str) -> Result<Method, String> {
    match s.trim() {
        "uimc" => Ok(Method::Uimc),
        "bsv" => Ok(Method::Bsv),
        "concat" => Ok(Method::Concat),
        other => Err(format!("unknown method {other:?}; expected uimc, bsv or concat")),
    }
}

fn parse_sweep_arg(s: &str) -> Result<spec::Sweep, String> {
    parse_sweep(s).map_err(|e| e.to_string())
}

fn synth(args: SynthArgs) -> Result<()> {
    let base = match &args.config {
        Some(p) => read_config(p)?,
        None => SyntheticParams::default(),
    };
    let params = args.flags.apply(base);
    let data = generate(&params).context("generating data")?;
    let manifest = save_dataset(&data, &args.out)?;
    println!("{}", manifest.display());
    Ok(())
}

fn mask(args: MaskArgs) -> Result<()> {
    let data = load_dataset(&args.manifest)?;
    let Some(mask) = args.mask.build(0)? else {
        bail!("give --rates, --multipliers with --per, or --mask-file");
    };
    let masked = mask.apply(&data)?;
    let manifest = save_incomplete(&masked, &args.out)?;
    println!("{}", manifest.display());
    Ok(())
}

/// The experiment spec after applying flag overrides to the optional file.
fn resolve_spec(args: RunArgs) -> Result<ExperimentSpec> {
    let mut spec = match &args.spec {
        Some(p) => ExperimentSpec::from_file(p)?,
        None => ExperimentSpec::default(),
    };
    if let Some(v) = args.seed {
        spec.seed = v;
    }
    if let Some(p) = args.manifest {
        spec.manifest = Some(p);
        spec.synthetic = None;
    }
    if args.synthetic || args.synth.any() {
        spec.manifest = None;
        spec.synthetic = Some(args.synth.apply(spec.synthetic.take().unwrap_or_default()));
    }
    if let Some(mask) = args.mask.build(spec.seed)? {
        spec.mask = Some(mask);
    }
    if let Some(p) = args.solver_config {
        spec.solver_config = Some(p);
    }
    if let Some(m) = args.methods {
        spec.methods = m;
    }
    if let Some(p) = args.out {
        spec.out = Some(p);
    }
    if let Some(r) = args.repeat {
        spec.repeat = r;
    }
    if let Some(s) = args.sweep {
        spec.sweep = Some(s);
    }
    Ok(spec)
}

fn run_cmd(args: RunArgs) -> Result<()> {
    let spec = resolve_spec(args)?;
    let summary = run::execute(&spec)?;
    for m in &summary.methods {
        match m.acc {
            Some(acc) => println!(
                "{:<7} acc {:.4} ± {:.4}  nmi {:.4}  purity {:.4}  ({} runs)",
                m.method.name(),
                acc.mean,
                acc.std,
                m.nmi.map_or(f64::NAN, |s| s.mean),
                m.purity.map_or(f64::NAN, |s| s.mean),
                m.runs
            ),
            None => println!("{:<7} {} runs (no labels)", m.method.name(), m.runs),
        }
    }
    Ok(())
}

fn eval(args: EvalArgs) -> Result<()> {
    let predicted = read_labels(&args.predicted)?;
    let truth = read_labels(&args.truth)?;
    let scores = evaluate(&predicted, &truth)?;
    println!("{}", serde_json::to_string(&scores)?);
    if let Some(out) = &args.out {
        write_json(&scores, out)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = match cli.command {
        Command::Synth(a) => synth(a),
        Command::Mask(a) => mask(a),
        Command::Run(a) => run_cmd(a),
        Command::Eval(a) => eval(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
