//! Command-line front end: `synth`, `features`, `train`, `eval`, `baseline`
//! and `sweep`.
//!
//! Exit codes: 0 on success, 1 for invalid input or configuration, 2 when a
//! run fails after its inputs were accepted.

mod config;

pub use config::{RunConfig, Source};

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::baselines::run_baselines;
use crate::datasets::{export_dataset, import_dataset, synth_generate, Dataset, Split};
use crate::error::{Error, Result};
use crate::graph::{load_edge_list, structural_features};
use crate::models::{load_checkpoint, save_checkpoint, GraphContext, ParameterStore};
use crate::training::{evaluate, history_to_csv, train, MetricsRecord, TrainOutcome};

pub const HISTORY_FILE: &str = "history.csv";
pub const REPORT_FILE: &str = "report.txt";
pub const CHECKPOINT_DIR: &str = "checkpoint";
pub const SUMMARY_FILE: &str = "summary.csv";

#[derive(Parser, Debug)]
#[command(name = "casper", version, about = "Personality-gated cascade prediction")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct ConfigArgs {
    /// Flat `key = value` config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override one setting, e.g. `--set train.lambda=10`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a synthetic dataset directory.
    Synth {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute structural features of an edge list.
    Features {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a model; writes checkpoint, history and report.
    Train {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a checkpoint on one split.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "test")]
        split: Split,
        #[arg(long, default_value_t = 0.5)]
        prefix_fraction: f64,
        /// Report path; printed to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the feature-based baselines.
    Baseline {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train over a grid of lambda values and seeds.
    Sweep {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated; overrides `sweep.lambdas`.
        #[arg(long)]
        lambdas: Option<String>,
        /// Comma-separated; overrides `sweep.seeds`.
        #[arg(long)]
        seeds: Option<String>,
    },
}

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Parse { .. } | Error::Invalid(_) | Error::File { .. } | Error::Shape { .. } => 1,
        Error::NonFinite { .. }
        | Error::NonScalarLoss(_)
        | Error::NonDeterministic { .. }
        | Error::NotConverged { .. }
        | Error::Io(_) => 2,
    }
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Synth { cfg, out } => cmd_synth(&load(&cfg)?, &out),
        Command::Features { graph, out } => cmd_features(&graph, &out),
        Command::Train { cfg, data, out } => cmd_train(&load(&cfg)?, &data, &out).map(|_| ()),
        Command::Eval { checkpoint, data, split, prefix_fraction, out } => {
            let report = cmd_eval(&checkpoint, &data, split, prefix_fraction)?;
            match out {
                Some(path) => fs::write(path, report)?,
                None => print!("{report}"),
            }
            Ok(())
        }
        Command::Baseline { cfg, data, out } => cmd_baseline(&load(&cfg)?, &data, &out),
        Command::Sweep { mut cfg, data, out, lambdas, seeds } => {
            cfg.overrides.extend(lambdas.map(|l| format!("sweep.lambdas={l}")));
            cfg.overrides.extend(seeds.map(|s| format!("sweep.seeds={s}")));
            cmd_sweep(&load(&cfg)?, &data, &out).map(|_| ())
        }
    }
}

fn load(args: &ConfigArgs) -> Result<RunConfig> {
    RunConfig::load(args.config.as_deref(), &args.overrides)
}

fn pairs_text(pairs: &[(String, String)]) -> String {
    pairs.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}

fn metric_lines(out: &mut String, m: &MetricsRecord) {
    let _ = writeln!(out, "{}.{}.rmrse={}", m.split, m.task, m.rmrse);
    let _ = writeln!(out, "{}.{}.mape={}", m.split, m.task, m.mape);
}

pub fn cmd_synth(cfg: &RunConfig, out: &Path) -> Result<()> {
    let dataset = synth_generate(&cfg.synth)?;
    export_dataset(&dataset, out)?;
    let (tr, va, te) = dataset.split_counts();
    let mut echo = pairs_text(&cfg.pairs_with(&["synth."]));
    let _ = writeln!(echo, "cascades.train={tr}\ncascades.val={va}\ncascades.test={te}");
    fs::write(out.join("synth.txt"), echo)?;
    Ok(())
}

pub fn cmd_features(graph: &Path, out: &Path) -> Result<()> {
    let text = fs::read_to_string(graph).map_err(|e| Error::file(graph, format!("cannot read: {e}")))?;
    let g = load_edge_list(&text).map_err(|e| Error::file(graph, e.to_string()))?;
    let f = structural_features(&g)?;
    fs::write(out, f.to_csv(&g))?;
    Ok(())
}

fn load_dataset(dir: &Path, prefix_fraction: f64) -> Result<(Dataset, GraphContext)> {
    let mut d = import_dataset(dir)?;
    d.observe(prefix_fraction)?;
    let ctx = GraphContext::new(&d.graph, &d.features)?;
    Ok((d, ctx))
}

/// Train with `cfg` and report test metrics. Writes `checkpoint/`,
/// `history.csv` and `report.txt` under `out`.
pub fn cmd_train(cfg: &RunConfig, data: &Path, out: &Path) -> Result<TrainOutcome> {
    let (dataset, ctx) = load_dataset(data, cfg.prefix_fraction)?;
    train_into(cfg, &dataset, &ctx, out)
}

fn train_into(cfg: &RunConfig, dataset: &Dataset, ctx: &GraphContext, out: &Path) -> Result<TrainOutcome> {
    fs::create_dir_all(out)?;
    let init = ParameterStore::init(&cfg.model, &dataset.features, cfg.train.seed)?;
    let outcome = train(init, dataset, ctx, &cfg.train)?;
    save_checkpoint(&outcome.store, &out.join(CHECKPOINT_DIR))?;
    fs::write(out.join(HISTORY_FILE), history_to_csv(&outcome.history))?;

    let mut report = pairs_text(&cfg.pairs_with(&["model.", "train.", "data."]));
    let _ = writeln!(report, "epochs_run={}", outcome.history.len());
    let best = outcome.best_epoch.map_or("none".to_string(), |e| e.to_string());
    let _ = writeln!(report, "best_epoch={best}");
    let (cas, per) = evaluate(&outcome.store, dataset, ctx, Split::Test)?;
    metric_lines(&mut report, &cas);
    metric_lines(&mut report, &per);
    fs::write(out.join(REPORT_FILE), report)?;
    Ok(outcome)
}

pub fn cmd_eval(checkpoint: &Path, data: &Path, split: Split, prefix_fraction: f64) -> Result<String> {
    if !(prefix_fraction > 0.0 && prefix_fraction <= 1.0) {
        return Err(Error::Config(format!("prefix fraction {prefix_fraction} outside (0, 1]")));
    }
    let store = load_checkpoint(checkpoint)?;
    let (dataset, ctx) = load_dataset(data, prefix_fraction)?;
    if store.node_count != dataset.graph.node_count() {
        return Err(Error::invalid(format!(
            "checkpoint has {} nodes, dataset has {}",
            store.node_count,
            dataset.graph.node_count()
        )));
    }
    let (cas, per) = evaluate(&store, &dataset, &ctx, split)?;
    let mut report = pairs_text(&store.config.to_pairs());
    let _ = writeln!(report, "data.prefix_fraction={prefix_fraction}");
    metric_lines(&mut report, &cas);
    metric_lines(&mut report, &per);
    Ok(report)
}

pub fn cmd_baseline(cfg: &RunConfig, data: &Path, out: &Path) -> Result<()> {
    let (dataset, _) = load_dataset(data, cfg.prefix_fraction)?;
    let results = run_baselines(&dataset, &cfg.baseline, Split::Test)?;
    let mut report = pairs_text(&cfg.pairs_with(&["baseline.", "data."]));
    for r in &results {
        let m = &r.metrics;
        let _ = writeln!(report, "{}.{}.{}.rmrse={}", r.name, m.split, m.task, m.rmrse);
        let _ = writeln!(report, "{}.{}.{}.mape={}", r.name, m.split, m.task, m.mape);
    }
    if let Some(parent) = out.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(out, report)?;
    Ok(())
}

/// Test metrics of one `(lambda, seed)` sweep run.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub lambda: f64,
    pub seed: u64,
    pub cascade: MetricsRecord,
    pub personality: MetricsRecord,
    pub best_epoch: Option<usize>,
}

pub const SUMMARY_HEADER: &str =
    "lambda,seed,test_cascade_rmrse,test_cascade_mape,test_personality_rmrse,test_personality_mape,best_epoch";

/// Per-run rows followed by one `seed=mean` row per lambda.
pub fn summary_csv(rows: &[SweepRow], lambdas: &[f64]) -> String {
    let mut out = format!("{SUMMARY_HEADER}\n");
    for r in rows {
        let best = r.best_epoch.map_or(String::new(), |e| e.to_string());
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{best}",
            r.lambda, r.seed, r.cascade.rmrse, r.cascade.mape, r.personality.rmrse, r.personality.mape
        );
    }
    for &l in lambdas {
        let sel: Vec<&SweepRow> = rows.iter().filter(|r| r.lambda == l).collect();
        if sel.is_empty() {
            continue;
        }
        let mean = |f: &dyn Fn(&SweepRow) -> f64| sel.iter().map(|r| f(r)).sum::<f64>() / sel.len() as f64;
        let _ = writeln!(
            out,
            "{l},mean,{},{},{},{},",
            mean(&|r| r.cascade.rmrse),
            mean(&|r| r.cascade.mape),
            mean(&|r| r.personality.rmrse),
            mean(&|r| r.personality.mape)
        );
    }
    out
}

/// One training run per `(lambda, seed)`; each goes to
/// `out/lambda_<l>_seed_<s>/`, and `summary.csv` collects the test metrics.
pub fn cmd_sweep(cfg: &RunConfig, data: &Path, out: &Path) -> Result<Vec<SweepRow>> {
    if cfg.sweep_lambdas.is_empty() || cfg.sweep_seeds.is_empty() {
        return Err(Error::Config("sweep needs at least one lambda and one seed".into()));
    }
    let (dataset, ctx) = load_dataset(data, cfg.prefix_fraction)?;
    let mut rows = Vec::new();
    for &seed in &cfg.sweep_seeds {
        for &lambda in &cfg.sweep_lambdas {
            let mut run_cfg = cfg.clone();
            run_cfg.train.lambda = lambda;
            run_cfg.train.seed = seed;
            let dir = out.join(format!("lambda_{lambda}_seed_{seed}"));
            let outcome = train_into(&run_cfg, &dataset, &ctx, &dir)?;
            let (cascade, personality) = evaluate(&outcome.store, &dataset, &ctx, Split::Test)?;
            rows.push(SweepRow { lambda, seed, cascade, personality, best_epoch: outcome.best_epoch });
        }
    }
    fs::write(out.join(SUMMARY_FILE), summary_csv(&rows, &cfg.sweep_lambdas))?;
    Ok(rows)
}
