//! Reconstructs the parameter–KPI graph from embedding correlations.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ordered_pair, ConflictGraph, VertexClass};
use crate::matrix::Matrix;
use crate::scenario::Scenario;

pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Pairwise Pearson coefficients between feature columns.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    values: Matrix,
    feature_names: Vec<String>,
}

impl CorrelationMatrix {
    pub fn new(values: Matrix, feature_names: Vec<String>) -> Result<Self> {
        let (r, c) = values.shape();
        if r != c || r != feature_names.len() {
            return Err(Error::DimensionMismatch(format!(
                "{r}×{c} correlation matrix with {} names",
                feature_names.len()
            )));
        }
        Ok(Self {
            values,
            feature_names,
        })
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    pub fn dim(&self) -> usize {
        self.feature_names.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn to_csv_string(&self) -> String {
        matrix_csv(&self.feature_names, |i, j| format!("{:.16e}", self.get(i, j)))
    }
}

/// Pearson correlation between every pair of columns of `data` (two-pass: means
/// first, then centered sums). Diagonal entries are exactly 1.
pub fn feature_correlation(data: &Matrix, feature_names: &[String]) -> Result<CorrelationMatrix> {
    let (t, d) = data.shape();
    if feature_names.len() != d {
        return Err(Error::DimensionMismatch(format!(
            "{} names for {d} columns",
            feature_names.len()
        )));
    }
    if t < 2 {
        return Err(Error::InvalidArgument(
            "correlation needs at least two rows".into(),
        ));
    }
    let mut means = vec![0.0; d];
    for r in 0..t {
        for (m, v) in means.iter_mut().zip(data.row(r)) {
            *m += v;
        }
    }
    for m in &mut means {
        *m /= t as f64;
    }
    let mut centered = data.clone();
    for r in 0..t {
        for (v, m) in centered.row_mut(r).iter_mut().zip(&means) {
            *v -= m;
        }
    }
    // cross[i][j] = Σ_r c[r][i]·c[r][j]
    let cross = centered.transpose_mul(&centered);
    for j in 0..d {
        if cross[(j, j)] == 0.0 {
            return Err(Error::ConstantColumn(j));
        }
    }
    let mut values = Matrix::zeros(d, d);
    for i in 0..d {
        values[(i, i)] = 1.0;
        for j in i + 1..d {
            let r = (cross[(i, j)] / (cross[(i, i)] * cross[(j, j)]).sqrt()).clamp(-1.0, 1.0);
            values[(i, j)] = r;
            values[(j, i)] = r;
        }
    }
    CorrelationMatrix::new(values, feature_names.to_vec())
}

/// Whether binarization compares `|r|` or `r` with the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdMode {
    #[default]
    Absolute,
    Signed,
}

impl FromStr for ThresholdMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "absolute" => Ok(ThresholdMode::Absolute),
            "signed" => Ok(ThresholdMode::Signed),
            other => Err(Error::InvalidArgument(format!(
                "unknown threshold mode `{other}`"
            ))),
        }
    }
}

/// Symmetric 0/1 matrix over the feature vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReconstructedAdjacency {
    feature_names: Vec<String>,
    adjacency: Vec<Vec<u8>>,
    /// Threshold in millionths, so the struct stays `Eq`; `None` for baselines.
    threshold_micros: Option<u64>,
}

impl ReconstructedAdjacency {
    /// Edgeless adjacency over the given features.
    pub fn empty(feature_names: Vec<String>) -> Self {
        let n = feature_names.len();
        Self {
            feature_names,
            adjacency: vec![vec![0; n]; n],
            threshold_micros: None,
        }
    }

    pub fn from_edges(feature_names: Vec<String>, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj = Self::empty(feature_names);
        let n = adj.dim();
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::OutOfRange {
                    index: u.max(v),
                    len: n,
                });
            }
            if u == v {
                return Err(Error::InvalidArgument("self-loop in adjacency".into()));
            }
            adj.adjacency[u][v] = 1;
            adj.adjacency[v][u] = 1;
        }
        Ok(adj)
    }

    pub fn dim(&self) -> usize {
        self.feature_names.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn threshold(&self) -> Option<f64> {
        self.threshold_micros.map(|m| m as f64 / 1e6)
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i][j] == 1
    }

    pub fn matrix(&self) -> &[Vec<u8>] {
        &self.adjacency
    }

    /// Index pairs `(i, j)` with `i < j`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.dim();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if self.adjacency[i][j] == 1 {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.edges().len()
    }

    /// Edges as lexicographically ordered name pairs.
    pub fn edge_names(&self) -> BTreeSet<(String, String)> {
        self.edges()
            .into_iter()
            .map(|(i, j)| ordered_pair(&self.feature_names[i], &self.feature_names[j]))
            .collect()
    }

    /// Fraction of off-diagonal pairs that are edges.
    pub fn density(&self) -> f64 {
        let n = self.dim();
        let pairs = n * n.saturating_sub(1) / 2;
        if pairs == 0 {
            0.0
        } else {
            self.edge_count() as f64 / pairs as f64
        }
    }

    pub fn to_csv_string(&self) -> String {
        matrix_csv(&self.feature_names, |i, j| self.adjacency[i][j].to_string())
    }
}

fn matrix_csv(names: &[String], cell: impl Fn(usize, usize) -> String) -> String {
    let mut out = String::from("feature");
    for n in names {
        out.push(',');
        out.push_str(n);
    }
    out.push('\n');
    for (i, n) in names.iter().enumerate() {
        out.push_str(n);
        for j in 0..names.len() {
            let _ = write!(out, ",{}", cell(i, j));
        }
        out.push('\n');
    }
    out
}

/// Keeps pair `(i, j)`, `i ≠ j`, iff its correlation passes `threshold ∈ (0, 1)`.
pub fn binarize(
    corr: &CorrelationMatrix,
    threshold: f64,
    mode: ThresholdMode,
) -> Result<ReconstructedAdjacency> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "threshold {threshold} must lie in (0, 1)"
        )));
    }
    let n = corr.dim();
    let mut adj = ReconstructedAdjacency::empty(corr.feature_names().to_vec());
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let r = corr.get(i, j);
            let score = match mode {
                ThresholdMode::Absolute => r.abs(),
                ThresholdMode::Signed => r,
            };
            if score >= threshold {
                adj.adjacency[i][j] = 1;
            }
        }
    }
    adj.threshold_micros = Some((threshold * 1e6).round() as u64);
    Ok(adj)
}

/// Full conflict graph: feature edges from `adj`, subscription edges from `scenario`.
pub fn inject_subscriptions(
    adj: &ReconstructedAdjacency,
    scenario: &Scenario,
) -> Result<ConflictGraph> {
    let mut g = ConflictGraph::empty_for(scenario);
    let feature_ids = g.feature_ids();
    let expected: Vec<&str> = feature_ids.iter().map(|&i| g.name(i)).collect();
    let got: Vec<&str> = adj.feature_names().iter().map(String::as_str).collect();
    if expected != got {
        return Err(Error::NameMismatch(format!(
            "adjacency features {got:?} do not match scenario features {expected:?}"
        )));
    }
    for (i, j) in adj.edges() {
        g.add_edge(feature_ids[i], feature_ids[j])?;
    }
    g.add_subscriptions(scenario)?;
    debug_assert!(g
        .edges()
        .all(|(u, v)| !(g.class(u) == VertexClass::XApp && g.class(v) == VertexClass::XApp)));
    Ok(g)
}

/// Erdős–Rényi graph: each unordered pair independently with probability `p`.
pub fn random_graph_baseline(
    feature_names: Vec<String>,
    edge_probability: f64,
    seed: u64,
) -> Result<ReconstructedAdjacency> {
    if !(0.0..=1.0).contains(&edge_probability) {
        return Err(Error::InvalidArgument(format!(
            "edge probability {edge_probability} must lie in [0, 1]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = feature_names.len();
    let mut adj = ReconstructedAdjacency::empty(feature_names);
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(edge_probability) {
                adj.adjacency[i][j] = 1;
                adj.adjacency[j][i] = 1;
            }
        }
    }
    Ok(adj)
}
