//! Conflict-graph laboratory for O-RAN xApps.
//!
//! Synthetic parameter/KPI datasets are embedded with a temporal GraphSAGE network,
//! the parameter–KPI graph is reconstructed from embedding correlations, and
//! direct, implicit and indirect conflicts are labeled and scored against the
//! structural ground truth.

pub mod error;
pub mod evaluation;
pub mod graph;
pub mod labeler;
pub mod manifest;
pub mod matrix;
pub mod model;
pub mod pipeline;
pub mod reconstruct;
pub mod sage;
pub mod scenario;
pub mod temporal;

pub use error::{Error, Result};
pub use evaluation::sweep::{run_sweep, SweepConfig, SweepRecord, SweepResult};
pub use evaluation::{conflict_f1, edge_f1, F1Metrics};
pub use graph::{ConflictGraph, Vertex, VertexClass};
pub use labeler::{label_conflicts, Conflict, ConflictKind, ConflictReport};
pub use manifest::RunManifest;
pub use matrix::Matrix;
pub use model::{generate_dataset, ground_truth_graph, TimeSeriesDataset};
pub use pipeline::{run_pipeline, write_artifacts, CorrelationSource, RunConfig, RunOutcome};
pub use reconstruct::{
    binarize, feature_correlation, inject_subscriptions, CorrelationMatrix,
    ReconstructedAdjacency, ThresholdMode,
};
pub use sage::{forward, init_model, train, Activation, EmbeddingMatrix, SageModel, TrainingTrace};
pub use scenario::{load_scenario, ModelId, Scenario, XAppSpec};
pub use temporal::{build_temporal_graph, TemporalGraph};
