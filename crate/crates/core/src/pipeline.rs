//! End-to-end run: generate → build → train → reconstruct → inject → label → score.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, StageExt};
use crate::evaluation::{conflict_f1, edge_f1, random_baseline_f1, F1Metrics, EDGE_METRIC_NOTE};
use crate::graph::ConflictGraph;
use crate::labeler::{label_conflicts, ConflictKind, ConflictReport};
use crate::manifest::{Hyperparameters, RunManifest};
use crate::matrix::Matrix;
use crate::model::{generate_dataset, ground_truth_graph, TimeSeriesDataset};
use crate::reconstruct::{
    binarize, feature_correlation, inject_subscriptions, CorrelationMatrix,
    ReconstructedAdjacency, ThresholdMode, DEFAULT_THRESHOLD,
};
use crate::sage::{
    forward, init_model, train, Activation, AdamConfig, EmbeddingMatrix, SageModel,
    TrainingTrace, DEFAULT_EPOCHS, DEFAULT_LEARNING_RATE,
};
use crate::scenario::Scenario;
use crate::temporal::{build_temporal_graph, TemporalGraph};

pub const DEFAULT_SAMPLES: usize = 450;
pub const DEFAULT_HIDDEN_UNITS: usize = 16;
pub const DEFAULT_BASELINE_SEEDS: u64 = 1000;

/// What the correlation step is computed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorrelationSource {
    /// Final-layer embeddings of the trained network.
    #[default]
    Embeddings,
    /// The standardized dataset itself. Diagnostic only; no learning involved.
    RawData,
}

impl CorrelationSource {
    pub fn as_str(self) -> &'static str {
        match self {
            CorrelationSource::Embeddings => "embeddings",
            CorrelationSource::RawData => "raw-data",
        }
    }
}

impl FromStr for CorrelationSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "embeddings" => Ok(CorrelationSource::Embeddings),
            "raw-data" => Ok(CorrelationSource::RawData),
            other => Err(Error::InvalidArgument(format!(
                "unknown correlation source `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub samples: usize,
    /// Seeds both dataset generation and weight initialization (independent streams).
    pub seed: u64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub threshold: f64,
    pub threshold_mode: ThresholdMode,
    pub hidden_units: usize,
    pub hidden_activation: Activation,
    pub correlation_source: CorrelationSource,
    pub baseline_seeds: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            samples: DEFAULT_SAMPLES,
            seed: 0,
            epochs: DEFAULT_EPOCHS,
            learning_rate: DEFAULT_LEARNING_RATE,
            threshold: DEFAULT_THRESHOLD,
            threshold_mode: ThresholdMode::Absolute,
            hidden_units: DEFAULT_HIDDEN_UNITS,
            hidden_activation: Activation::Relu,
            correlation_source: CorrelationSource::Embeddings,
            baseline_seeds: DEFAULT_BASELINE_SEEDS,
        }
    }
}

impl RunConfig {
    pub fn layer_dims(&self, features: usize) -> Vec<usize> {
        vec![features, self.hidden_units, features]
    }
}

/// Ground-truth graph and its conflict report.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub graph: ConflictGraph,
    pub report: ConflictReport,
}

impl GroundTruth {
    pub fn for_scenario(scenario: &Scenario) -> Self {
        let graph = ground_truth_graph(scenario);
        let report = label_conflicts(&graph);
        Self { graph, report }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub edge: F1Metrics,
    pub direct: F1Metrics,
    pub implicit: F1Metrics,
    pub indirect: F1Metrics,
    pub predicted_edges: usize,
    /// Mean edge F1 of density-matched random graphs.
    pub baseline_f1: f64,
}

impl Evaluation {
    pub fn conflict(&self, kind: ConflictKind) -> &F1Metrics {
        match kind {
            ConflictKind::Direct => &self.direct,
            ConflictKind::Implicit => &self.implicit,
            ConflictKind::Indirect => &self.indirect,
        }
    }

    pub fn to_csv_string(&self, run_id: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# run {run_id}; {EDGE_METRIC_NOTE}; zero denominators give 0");
        out.push_str("target,true_positives,false_positives,false_negatives,precision,recall,f1\n");
        let rows = [
            ("edges", &self.edge),
            ("direct", &self.direct),
            ("implicit", &self.implicit),
            ("indirect", &self.indirect),
        ];
        for (name, m) in rows {
            let _ = writeln!(
                out,
                "{name},{},{},{},{:.6},{:.6},{:.6}",
                m.true_positives, m.false_positives, m.false_negatives, m.precision, m.recall, m.f1
            );
        }
        let _ = writeln!(out, "random_baseline,,,,,,{:.6}", self.baseline_f1);
        out
    }
}

/// Everything derived from one correlation matrix at one threshold.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub correlation: CorrelationMatrix,
    pub adjacency: ReconstructedAdjacency,
    pub graph: ConflictGraph,
    pub report: ConflictReport,
    pub evaluation: Evaluation,
}

/// Binarizes `correlation`, injects subscriptions, labels and scores against `truth`.
pub fn reconstruct_and_score(
    scenario: &Scenario,
    truth: &GroundTruth,
    correlation: CorrelationMatrix,
    threshold: f64,
    mode: ThresholdMode,
    baseline_seeds: u64,
) -> Result<Reconstruction> {
    let adjacency = binarize(&correlation, threshold, mode).stage("reconstruct")?;
    let graph = inject_subscriptions(&adjacency, scenario).stage("inject")?;
    let report = label_conflicts(&graph);
    let edge = edge_f1(&adjacency, &truth.graph).stage("evaluate")?;
    let baseline_f1 = random_baseline_f1(
        &truth.graph,
        adjacency.feature_names(),
        adjacency.density(),
        baseline_seeds,
    )
    .stage("evaluate")?;
    let evaluation = Evaluation {
        edge,
        direct: conflict_f1(&report, &truth.report, ConflictKind::Direct),
        implicit: conflict_f1(&report, &truth.report, ConflictKind::Implicit),
        indirect: conflict_f1(&report, &truth.report, ConflictKind::Indirect),
        predicted_edges: adjacency.edge_count(),
        baseline_f1,
    };
    Ok(Reconstruction {
        correlation,
        adjacency,
        graph,
        report,
        evaluation,
    })
}

/// Correlation of the configured source.
pub fn correlation_for(
    source: CorrelationSource,
    temporal: &TemporalGraph,
    embeddings: &EmbeddingMatrix,
) -> Result<CorrelationMatrix> {
    let data: &Matrix = match source {
        CorrelationSource::Embeddings => embeddings.rows(),
        CorrelationSource::RawData => temporal.features(),
    };
    feature_correlation(data, temporal.feature_names()).stage("correlate")
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub dataset: TimeSeriesDataset,
    pub temporal: TemporalGraph,
    pub model: SageModel,
    pub trace: TrainingTrace,
    pub embeddings: EmbeddingMatrix,
    pub truth: GroundTruth,
    pub reconstruction: Reconstruction,
}

/// Runs every stage once. Errors carry the name of the failing stage.
pub fn run_pipeline(scenario: &Scenario, config: &RunConfig) -> Result<RunOutcome> {
    let dataset = generate_dataset(scenario, config.samples, config.seed).stage("generate")?;
    let temporal = build_temporal_graph(&dataset).stage("build")?;
    let model = init_model(&config.layer_dims(scenario.feature_count()), config.seed)
        .stage("init")?
        .with_activations(config.hidden_activation, Activation::Identity);
    let (model, trace) =
        train(model, &temporal, config.epochs, config.learning_rate).stage("train")?;
    let embeddings = forward(&model, &temporal).stage("embed")?;
    let correlation = correlation_for(config.correlation_source, &temporal, &embeddings)?;
    let truth = GroundTruth::for_scenario(scenario);
    let reconstruction = reconstruct_and_score(
        scenario,
        &truth,
        correlation,
        config.threshold,
        config.threshold_mode,
        config.baseline_seeds,
    )?;
    Ok(RunOutcome {
        dataset,
        temporal,
        model,
        trace,
        embeddings,
        truth,
        reconstruction,
    })
}

pub const DATASET_FILE: &str = "dataset.csv";
pub const MODEL_FILE: &str = "model.json";
pub const LOSS_FILE: &str = "loss.csv";
pub const CORRELATION_FILE: &str = "correlation.csv";
pub const ADJACENCY_FILE: &str = "adjacency.csv";
pub const GRAPH_DOT_FILE: &str = "graph.dot";
pub const GRAPH_EDGELIST_FILE: &str = "graph.edgelist";
pub const REPORT_CSV_FILE: &str = "conflicts.csv";
pub const REPORT_TEXT_FILE: &str = "conflicts.txt";
pub const METRICS_FILE: &str = "metrics.csv";

/// Writes every artifact of `outcome` into `dir` plus a manifest naming them.
///
/// All artifacts except the manifest's timestamps are byte-identical across
/// repeated runs with the same inputs.
pub fn write_artifacts(
    dir: &Path,
    scenario_source: &str,
    scenario: &Scenario,
    config: &RunConfig,
    outcome: &RunOutcome,
) -> Result<RunManifest> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut manifest = RunManifest::new("pipeline", scenario_source, &scenario.hash());
    manifest.dataset_path = Some(DATASET_FILE.into());
    manifest.dataset_seed = Some(config.seed);
    manifest.samples = Some(config.samples);
    manifest.model_snapshot_path = Some(MODEL_FILE.into());
    manifest.hyperparameters = Some(Hyperparameters {
        epochs: config.epochs,
        layer_dims: outcome.model.layer_dims().to_vec(),
        hidden_activation: outcome.model.hidden_activation(),
        output_activation: outcome.model.output_activation(),
        optimizer: AdamConfig::with_learning_rate(config.learning_rate),
        model_seed: outcome.model.seed(),
    });
    manifest.threshold = Some(config.threshold);
    manifest.threshold_mode = Some(config.threshold_mode);
    manifest.correlation_source = Some(config.correlation_source.as_str().into());
    manifest.seal_run_id();
    let run_id = manifest.run_id.clone();

    outcome.dataset.write(&dir.join(DATASET_FILE))?;
    manifest.record_existing(dir, DATASET_FILE)?;
    let meta = TimeSeriesDataset::metadata_path(Path::new(DATASET_FILE));
    manifest.record_existing(dir, &meta.to_string_lossy())?;

    let rec = &outcome.reconstruction;
    manifest.write_artifact(dir, MODEL_FILE, outcome.model.to_json()?.as_bytes())?;
    manifest.write_artifact(dir, LOSS_FILE, outcome.trace.to_csv_string().as_bytes())?;
    manifest.write_artifact(dir, CORRELATION_FILE, rec.correlation.to_csv_string().as_bytes())?;
    manifest.write_artifact(dir, ADJACENCY_FILE, rec.adjacency.to_csv_string().as_bytes())?;
    let dot = format!("// run {run_id}\n{}", rec.graph.to_dot("reconstructed"));
    manifest.write_artifact(dir, GRAPH_DOT_FILE, dot.as_bytes())?;
    manifest.write_artifact(dir, GRAPH_EDGELIST_FILE, rec.graph.to_edge_list().as_bytes())?;
    manifest.write_artifact(dir, REPORT_CSV_FILE, rec.report.to_csv_string().as_bytes())?;
    let summary = format!("# run {run_id}\n{}", rec.report.to_text_summary());
    manifest.write_artifact(dir, REPORT_TEXT_FILE, summary.as_bytes())?;
    manifest.write_artifact(dir, METRICS_FILE, rec.evaluation.to_csv_string(&run_id).as_bytes())?;
    manifest.finish(dir)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_run_produces_consistent_outcome() {
        let s = Scenario::default_scenario();
        let cfg = RunConfig {
            samples: 60,
            epochs: 20,
            baseline_seeds: 10,
            ..RunConfig::default()
        };
        let out = run_pipeline(&s, &cfg).unwrap();
        assert_eq!(out.dataset.len(), 60);
        assert_eq!(out.trace.losses.len(), 20);
        assert_eq!(out.embeddings.rows().shape(), (60, 11));
        // direct conflicts depend only on subscriptions
        assert_eq!(out.reconstruction.evaluation.direct.f1, 1.0);
    }

    #[test]
    fn stage_errors_are_tagged() {
        let s = Scenario::default_scenario();
        let cfg = RunConfig {
            samples: 0,
            ..RunConfig::default()
        };
        let err = run_pipeline(&s, &cfg).unwrap_err();
        assert!(err.to_string().starts_with("generate:"), "{err}");

        let cfg = RunConfig {
            samples: 20,
            epochs: 2,
            threshold: 1.5,
            ..RunConfig::default()
        };
        let err = run_pipeline(&s, &cfg).unwrap_err();
        assert!(err.to_string().starts_with("reconstruct:"), "{err}");
    }

    #[test]
    fn raw_data_source_skips_embeddings() {
        let s = Scenario::default_scenario();
        let cfg = RunConfig {
            samples: 100,
            epochs: 1,
            correlation_source: CorrelationSource::RawData,
            baseline_seeds: 5,
            ..RunConfig::default()
        };
        let out = run_pipeline(&s, &cfg).unwrap();
        let direct = feature_correlation(out.temporal.features(), out.temporal.feature_names()).unwrap();
        assert_eq!(out.reconstruction.correlation, direct);
    }
}
