use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use oran_conflicts::evaluation::{conflict_f1, edge_f1, random_baseline_f1, EDGE_METRIC_NOTE};
use oran_conflicts::labeler::ConflictKind;
use oran_conflicts::manifest::{Hyperparameters, RunManifest};
use oran_conflicts::pipeline::{
    correlation_for, CorrelationSource, Evaluation, GroundTruth, RunConfig,
};
use oran_conflicts::reconstruct::ReconstructedAdjacency;
use oran_conflicts::sage::{AdamConfig, DEFAULT_EPOCHS, DEFAULT_LEARNING_RATE};
use oran_conflicts::{
    binarize, build_temporal_graph, forward, generate_dataset, ground_truth_graph, init_model,
    inject_subscriptions, label_conflicts, load_scenario, run_pipeline, run_sweep, train,
    write_artifacts, Activation, ConflictGraph, Scenario, SageModel, SweepConfig, ThresholdMode,
    TimeSeriesDataset,
};

const OUT_ENV: &str = "ORAN_CONFLICTS_OUT";

/// xApp conflict laboratory: synthesize KPI data, learn embeddings, rebuild the
/// parameter/KPI graph and label conflicts.
#[derive(Parser)]
#[command(name = "oran-conflicts", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a synthetic dataset.
    Generate(GenerateArgs),
    /// Train the embedding network on a dataset.
    Train(TrainArgs),
    /// Rebuild the conflict graph from a trained model's embeddings.
    Reconstruct(ReconstructArgs),
    /// Label conflicts in a graph edge list.
    Label(LabelArgs),
    /// Score a graph edge list against the scenario's ground truth.
    Evaluate(EvaluateArgs),
    /// Run every stage and write all artifacts.
    Pipeline(PipelineArgs),
    /// Run a parameter grid from a TOML config.
    Sweep(SweepArgs),
    /// Export the ground-truth graph or convert an edge list.
    Export(ExportArgs),
}

#[derive(Args)]
struct ScenarioArg {
    /// Scenario TOML file, or `default` for the built-in scenario.
    #[arg(long, default_value = "default")]
    scenario: String,
}

#[derive(Args)]
struct OutArg {
    /// Output directory.
    #[arg(long, env = OUT_ENV, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    scenario: ScenarioArg,
    #[arg(long, default_value_t = 450)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    scenario: ScenarioArg,
    /// Dataset CSV written by `generate`.
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, default_value_t = DEFAULT_EPOCHS)]
    epochs: usize,
    #[arg(long, default_value_t = DEFAULT_LEARNING_RATE)]
    learning_rate: f64,
    #[arg(long, default_value_t = 16)]
    hidden: usize,
    /// Weight-initialization seed; defaults to the dataset's seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = ActivationArg::Relu)]
    activation: ActivationArg,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct ReconstructArgs {
    #[command(flatten)]
    scenario: ScenarioArg,
    #[arg(long)]
    dataset: PathBuf,
    /// Model snapshot written by `train`.
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Absolute)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value_t = SourceArg::Embeddings)]
    source: SourceArg,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct LabelArgs {
    #[command(flatten)]
    scenario: ScenarioArg,
    /// Edge list (`u v` per line).
    #[arg(long)]
    graph: PathBuf,
    /// Exit with status 3 if any conflict is found.
    #[arg(long)]
    fail_on_conflict: bool,
    /// Write conflicts.csv here instead of printing a summary only.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    scenario: ScenarioArg,
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value_t = 1000)]
    baseline_seeds: u64,
}

#[derive(Args)]
struct PipelineArgs {
    #[command(flatten)]
    scenario: ScenarioArg,
    #[arg(long, default_value_t = 450)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_EPOCHS)]
    epochs: usize,
    #[arg(long, default_value_t = DEFAULT_LEARNING_RATE)]
    learning_rate: f64,
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Absolute)]
    mode: ModeArg,
    #[arg(long, default_value_t = 16)]
    hidden: usize,
    #[arg(long, value_enum, default_value_t = ActivationArg::Relu)]
    activation: ActivationArg,
    #[arg(long, value_enum, default_value_t = SourceArg::Embeddings)]
    source: SourceArg,
    #[arg(long, default_value_t = 1000)]
    baseline_seeds: u64,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep config TOML.
    #[arg(long)]
    config: PathBuf,
    /// Overrides `workers` from the config.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    scenario: ScenarioArg,
    /// Edge list to convert; the ground truth is exported when omitted.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Dot)]
    format: Format,
    /// Output file; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Dot,
    Csv,
    Edgelist,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Absolute,
    Signed,
}

impl From<ModeArg> for ThresholdMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Absolute => ThresholdMode::Absolute,
            ModeArg::Signed => ThresholdMode::Signed,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ActivationArg {
    Relu,
    Tanh,
    Sigmoid,
    Identity,
}

impl From<ActivationArg> for Activation {
    fn from(a: ActivationArg) -> Self {
        match a {
            ActivationArg::Relu => Activation::Relu,
            ActivationArg::Tanh => Activation::Tanh,
            ActivationArg::Sigmoid => Activation::Sigmoid,
            ActivationArg::Identity => Activation::Identity,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SourceArg {
    Embeddings,
    RawData,
}

impl From<SourceArg> for CorrelationSource {
    fn from(s: SourceArg) -> Self {
        match s {
            SourceArg::Embeddings => CorrelationSource::Embeddings,
            SourceArg::RawData => CorrelationSource::RawData,
        }
    }
}

/// Bad input or configuration; exits with status 2.
#[derive(Debug)]
struct Usage(String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage<T>(r: oran_conflicts::Result<T>) -> anyhow::Result<T> {
    r.map_err(|e| Usage(e.to_string()).into())
}

fn bad_input(message: String) -> anyhow::Error {
    Usage(message).into()
}

fn scenario_of(arg: &ScenarioArg) -> anyhow::Result<Scenario> {
    usage(load_scenario(&arg.scenario))
}

fn ensure_dir(dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn read_graph(path: &Path, scenario: &Scenario) -> anyhow::Result<ConflictGraph> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| bad_input(format!("{}: {e}", path.display())))?;
    usage(ConflictGraph::parse_edge_list(&text, scenario))
        .with_context(|| format!("reading {}", path.display()))
}

fn read_dataset(path: &Path, scenario: &Scenario) -> anyhow::Result<TimeSeriesDataset> {
    if !path.exists() {
        return Err(bad_input(format!("{}: dataset not found", path.display())));
    }
    let d = usage(TimeSeriesDataset::read(path, scenario.parameters().len()))?;
    if d.feature_names() != scenario.feature_names().as_slice() {
        return Err(bad_input(format!(
            "{}: columns {:?} do not match scenario features {:?}",
            path.display(),
            d.feature_names(),
            scenario.feature_names()
        )));
    }
    Ok(d)
}

fn generate(args: GenerateArgs) -> anyhow::Result<ExitCode> {
    let scenario = scenario_of(&args.scenario)?;
    let dataset = usage(generate_dataset(&scenario, args.samples, args.seed))?;
    let dir = &args.out.out;
    ensure_dir(dir)?;
    let path = dir.join("dataset.csv");
    dataset.write(&path)?;
    let mut manifest = RunManifest::new("generate", &args.scenario.scenario, &scenario.hash());
    manifest.dataset_path = Some("dataset.csv".into());
    manifest.dataset_seed = Some(args.seed);
    manifest.samples = Some(args.samples);
    manifest.seal_run_id();
    manifest.record_existing(dir, "dataset.csv")?;
    manifest.record_existing(dir, "dataset.csv.meta.json")?;
    manifest.finish(dir)?;
    println!("wrote {} samples to {}", dataset.len(), path.display());
    Ok(ExitCode::SUCCESS)
}

fn train_cmd(args: TrainArgs) -> anyhow::Result<ExitCode> {
    let scenario = scenario_of(&args.scenario)?;
    let dataset = read_dataset(&args.dataset, &scenario)?;
    let graph = build_temporal_graph(&dataset)?;
    let seed = args.seed.unwrap_or(dataset.seed());
    let n = scenario.feature_count();
    let model = usage(init_model(&[n, args.hidden, n], seed))?
        .with_activations(args.activation.into(), Activation::Identity);
    let (model, trace) = usage(train(model, &graph, args.epochs, args.learning_rate))?;
    let dir = &args.out.out;
    ensure_dir(dir)?;
    let mut manifest = RunManifest::new("train", &args.scenario.scenario, &scenario.hash());
    manifest.dataset_path = Some(args.dataset.display().to_string());
    manifest.dataset_seed = Some(dataset.seed());
    manifest.samples = Some(dataset.len());
    manifest.model_snapshot_path = Some("model.json".into());
    manifest.hyperparameters = Some(Hyperparameters {
        epochs: args.epochs,
        layer_dims: model.layer_dims().to_vec(),
        hidden_activation: model.hidden_activation(),
        output_activation: model.output_activation(),
        optimizer: AdamConfig::with_learning_rate(args.learning_rate),
        model_seed: seed,
    });
    manifest.seal_run_id();
    manifest.write_artifact(dir, "model.json", model.to_json()?.as_bytes())?;
    manifest.write_artifact(dir, "loss.csv", trace.to_csv_string().as_bytes())?;
    manifest.finish(dir)?;
    println!(
        "trained {} epochs: loss {:.6} -> {:.6}; snapshot {}",
        args.epochs,
        trace.losses[0],
        trace.losses[trace.losses.len() - 1],
        dir.join("model.json").display()
    );
    Ok(ExitCode::SUCCESS)
}

fn reconstruct_cmd(args: ReconstructArgs) -> anyhow::Result<ExitCode> {
    let scenario = scenario_of(&args.scenario)?;
    let dataset = read_dataset(&args.dataset, &scenario)?;
    if !args.model.exists() {
        return Err(bad_input(format!("{}: model not found", args.model.display())));
    }
    let model = usage(SageModel::load(&args.model))?;
    let temporal = build_temporal_graph(&dataset)?;
    let embeddings = usage(forward(&model, &temporal))?;
    let correlation = correlation_for(args.source.into(), &temporal, &embeddings)?;
    let adjacency = usage(binarize(&correlation, args.threshold, args.mode.into()))?;
    let graph = usage(inject_subscriptions(&adjacency, &scenario))?;
    let dir = &args.out.out;
    ensure_dir(dir)?;
    let mut manifest = RunManifest::new("reconstruct", &args.scenario.scenario, &scenario.hash());
    manifest.dataset_path = Some(args.dataset.display().to_string());
    manifest.model_snapshot_path = Some(args.model.display().to_string());
    manifest.threshold = Some(args.threshold);
    manifest.threshold_mode = Some(args.mode.into());
    manifest.correlation_source = Some(CorrelationSource::from(args.source).as_str().into());
    manifest.seal_run_id();
    manifest.write_artifact(dir, "correlation.csv", correlation.to_csv_string().as_bytes())?;
    manifest.write_artifact(dir, "adjacency.csv", adjacency.to_csv_string().as_bytes())?;
    manifest.write_artifact(dir, "graph.edgelist", graph.to_edge_list().as_bytes())?;
    manifest.write_artifact(dir, "graph.dot", graph.to_dot("reconstructed").as_bytes())?;
    manifest.finish(dir)?;
    println!(
        "{} feature edges at threshold {}; graph written to {}",
        adjacency.edge_count(),
        args.threshold,
        dir.join("graph.edgelist").display()
    );
    Ok(ExitCode::SUCCESS)
}

fn label_cmd(args: LabelArgs) -> anyhow::Result<ExitCode> {
    let scenario = scenario_of(&args.scenario)?;
    let graph = read_graph(&args.graph, &scenario)?;
    let report = label_conflicts(&graph);
    print!("{}", report.to_text_summary());
    if let Some(dir) = &args.out {
        ensure_dir(dir)?;
        let path = dir.join("conflicts.csv");
        std::fs::write(&path, report.to_csv_string())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    if args.fail_on_conflict && !report.is_empty() {
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn evaluate_cmd(args: EvaluateArgs) -> anyhow::Result<ExitCode> {
    let scenario = scenario_of(&args.scenario)?;
    let graph = read_graph(&args.graph, &scenario)?;
    let truth = GroundTruth::for_scenario(&scenario);
    let names = scenario.feature_names();
    let features = graph.feature_ids();
    let mut edges = Vec::new();
    for (a, &u) in features.iter().enumerate() {
        for (b, &v) in features.iter().enumerate().skip(a + 1) {
            if graph.has_edge(u, v) {
                edges.push((a, b));
            }
        }
    }
    let adjacency = usage(ReconstructedAdjacency::from_edges(names.clone(), &edges))?;
    // subscriptions come from the scenario, not the file
    let graph = usage(inject_subscriptions(&adjacency, &scenario))?;
    let report = label_conflicts(&graph);
    let baseline_f1 = usage(random_baseline_f1(
        &truth.graph,
        &names,
        adjacency.density(),
        args.baseline_seeds,
    ))?;
    let evaluation = Evaluation {
        edge: usage(edge_f1(&adjacency, &truth.graph))?,
        direct: conflict_f1(&report, &truth.report, ConflictKind::Direct),
        implicit: conflict_f1(&report, &truth.report, ConflictKind::Implicit),
        indirect: conflict_f1(&report, &truth.report, ConflictKind::Indirect),
        predicted_edges: adjacency.edge_count(),
        baseline_f1,
    };
    print!("{}", evaluation.to_csv_string(&graph.fingerprint()));
    Ok(ExitCode::SUCCESS)
}

fn pipeline_cmd(args: PipelineArgs) -> anyhow::Result<ExitCode> {
    let scenario = scenario_of(&args.scenario)?;
    let config = RunConfig {
        samples: args.samples,
        seed: args.seed,
        epochs: args.epochs,
        learning_rate: args.learning_rate,
        threshold: args.threshold,
        threshold_mode: args.mode.into(),
        hidden_units: args.hidden,
        hidden_activation: args.activation.into(),
        correlation_source: args.source.into(),
        baseline_seeds: args.baseline_seeds,
    };
    let outcome = run_pipeline(&scenario, &config).map_err(|e| match &e {
        oran_conflicts::Error::Stage { source, .. }
            if matches!(**source, oran_conflicts::Error::InvalidArgument(_)) =>
        {
            bad_input(e.to_string())
        }
        _ => e.into(),
    })?;
    let manifest = write_artifacts(&args.out.out, &args.scenario.scenario, &scenario, &config, &outcome)?;
    let ev = &outcome.reconstruction.evaluation;
    println!("run {}", manifest.run_id);
    println!(
        "edges: f1 {:.4} (precision {:.4}, recall {:.4}, {} predicted); random baseline {:.4}",
        ev.edge.f1, ev.edge.precision, ev.edge.recall, ev.predicted_edges, ev.baseline_f1
    );
    println!("{EDGE_METRIC_NOTE}");
    for kind in ConflictKind::ALL {
        println!("{kind}: f1 {:.4}", ev.conflict(kind).f1);
    }
    println!("artifacts in {}", args.out.out.display());
    Ok(ExitCode::SUCCESS)
}

fn sweep_cmd(args: SweepArgs) -> anyhow::Result<ExitCode> {
    if !args.config.exists() {
        return Err(bad_input(format!("{}: config not found", args.config.display())));
    }
    let mut config = usage(SweepConfig::load(&args.config))?;
    if let Some(w) = args.workers {
        if w == 0 {
            return Err(bad_input("--workers must be ≥ 1".into()));
        }
        config.workers = w;
    }
    usage(config.resolved_scenario())?;
    let result = run_sweep(&config)?;
    println!(
        "{} cells computed, {} resumed, {} failed; results in {}",
        result.records_written,
        result.records_skipped,
        result.failures,
        result.output_dir.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn export_cmd(args: ExportArgs) -> anyhow::Result<ExitCode> {
    let scenario = scenario_of(&args.scenario)?;
    let (graph, title) = match &args.graph {
        Some(path) => (read_graph(path, &scenario)?, "graph"),
        None => (ground_truth_graph(&scenario), "ground-truth"),
    };
    let text = match args.format {
        Format::Dot => graph.to_dot(title),
        Format::Csv => graph.to_adjacency_csv(),
        Format::Edgelist => graph.to_edge_list(),
    };
    match &args.output {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Generate(a) => generate(a),
        Command::Train(a) => train_cmd(a),
        Command::Reconstruct(a) => reconstruct_cmd(a),
        Command::Label(a) => label_cmd(a),
        Command::Evaluate(a) => evaluate_cmd(a),
        Command::Pipeline(a) => pipeline_cmd(a),
        Command::Sweep(a) => sweep_cmd(a),
        Command::Export(a) => export_cmd(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
