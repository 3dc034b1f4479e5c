//! Mean-aggregating graph neural network over a temporal chain.
//!
//! Layer `k` maps the previous embeddings `H` to
//!
//! ```text
//! H'[t] = σ_k( W_k · mean{ H[t−1], H[t], H[t+1] } )
//! ```
//!
//! where out-of-range neighbors are dropped from the mean. `W_k` has shape
//! `d_out × d_in`; there is no bias. The model is trained to reconstruct its own
//! input features under the loss `(1/T) Σ_t ‖h_t − x_t‖²`.
//!
//! Summation order is fixed: neighbor sums run `t−1, t, t+1`; matrix products
//! accumulate over the inner index in ascending order; the loss accumulates rows
//! then columns in ascending order. With the same seed and inputs, training is
//! bit-for-bit reproducible.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::temporal::TemporalGraph;

/// Default layer widths: 11 features in, 16 hidden units, 11 features out.
pub const DEFAULT_LAYER_DIMS: [usize; 3] = [11, 16, 11];
pub const DEFAULT_LEARNING_RATE: f64 = 0.001;
pub const DEFAULT_EPOCHS: usize = 1000;

const SNAPSHOT_FORMAT: &str = "oran-conflicts-sage/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Identity,
    Tanh,
    Sigmoid,
}

impl Activation {
    pub fn as_str(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Identity => "identity",
            Activation::Tanh => "tanh",
            Activation::Sigmoid => "sigmoid",
        }
    }

    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Identity => z,
            Activation::Tanh => z.tanh(),
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
        }
    }

    /// Derivative at pre-activation `z`, given `h = apply(z)`.
    #[inline]
    fn derivative(self, z: f64, h: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
            Activation::Tanh => 1.0 - h * h,
            Activation::Sigmoid => h * (1.0 - h),
        }
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relu" => Ok(Activation::Relu),
            "identity" => Ok(Activation::Identity),
            "tanh" => Ok(Activation::Tanh),
            "sigmoid" => Ok(Activation::Sigmoid),
            other => Err(Error::InvalidArgument(format!("unknown activation `{other}`"))),
        }
    }
}

impl std::fmt::Display for Activation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SageModel {
    layer_dims: Vec<usize>,
    weights: Vec<Matrix>,
    hidden_activation: Activation,
    output_activation: Activation,
    seed: u64,
}

/// Glorot-style uniform bound for a `d_out × d_in` matrix.
pub fn init_bound(d_in: usize, d_out: usize) -> f64 {
    (6.0 / (d_in + d_out) as f64).sqrt()
}

/// Fills each weight matrix i.i.d. uniform on `[−b, b]`, `b = √(6 / (d_in + d_out))`.
///
/// `layer_dims` lists widths from input to output, so `n` widths give `n − 1`
/// weight matrices. Hidden layers use a rectifier and the output layer is linear.
pub fn init_model(layer_dims: &[usize], seed: u64) -> Result<SageModel> {
    if layer_dims.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least an input and an output width".into(),
        ));
    }
    if layer_dims.contains(&0) {
        return Err(Error::InvalidArgument("layer widths must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // keep weight draws independent of dataset draws made with the same seed
    rng.set_stream(1);
    let weights = layer_dims
        .windows(2)
        .map(|w| {
            let (d_in, d_out) = (w[0], w[1]);
            let b = init_bound(d_in, d_out);
            let data = (0..d_in * d_out)
                .map(|_| {
                    let u: f64 = rng.random();
                    (2.0 * u - 1.0) * b
                })
                .collect();
            Matrix::from_vec(d_out, d_in, data)
        })
        .collect();
    Ok(SageModel {
        layer_dims: layer_dims.to_vec(),
        weights,
        hidden_activation: Activation::Relu,
        output_activation: Activation::Identity,
        seed,
    })
}

#[derive(Serialize, Deserialize)]
struct Snapshot {
    format: String,
    layer_dims: Vec<usize>,
    hidden_activation: Activation,
    output_activation: Activation,
    seed: u64,
    /// Row-major, one flat vector per weight matrix.
    weights: Vec<Vec<f64>>,
}

impl SageModel {
    /// Builds a model from explicit weights; shapes must chain.
    pub fn from_weights(
        weights: Vec<Matrix>,
        hidden_activation: Activation,
        output_activation: Activation,
    ) -> Result<Self> {
        let Some(first) = weights.first() else {
            return Err(Error::InvalidArgument("model needs at least one layer".into()));
        };
        let mut layer_dims = vec![first.cols()];
        for (k, w) in weights.iter().enumerate() {
            let d_in = *layer_dims.last().unwrap();
            if w.cols() != d_in {
                return Err(Error::DimensionMismatch(format!(
                    "layer {} expects input width {d_in}, weight has {} columns",
                    k + 1,
                    w.cols()
                )));
            }
            layer_dims.push(w.rows());
        }
        Ok(Self {
            layer_dims,
            weights,
            hidden_activation,
            output_activation,
            seed: 0,
        })
    }

    pub fn with_activations(mut self, hidden: Activation, output: Activation) -> Self {
        self.hidden_activation = hidden;
        self.output_activation = output;
        self
    }

    pub fn layer_dims(&self) -> &[usize] {
        &self.layer_dims
    }

    pub fn weights(&self) -> &[Matrix] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [Matrix] {
        &mut self.weights
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_dims.last().unwrap()
    }

    pub fn hidden_activation(&self) -> Activation {
        self.hidden_activation
    }

    pub fn output_activation(&self) -> Activation {
        self.output_activation
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn activation_for(&self, layer: usize) -> Activation {
        if layer + 1 == self.weights.len() {
            self.output_activation
        } else {
            self.hidden_activation
        }
    }

    /// Digest of shapes, activations and the exact weight bits.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        for d in &self.layer_dims {
            h.update((*d as u64).to_le_bytes());
        }
        h.update(self.hidden_activation.as_str().as_bytes());
        h.update(self.output_activation.as_str().as_bytes());
        for w in &self.weights {
            for v in w.as_slice() {
                h.update(v.to_bits().to_le_bytes());
            }
        }
        hex::encode(&h.finalize()[..8])
    }

    pub fn to_json(&self) -> Result<String> {
        let snap = Snapshot {
            format: SNAPSHOT_FORMAT.into(),
            layer_dims: self.layer_dims.clone(),
            hidden_activation: self.hidden_activation,
            output_activation: self.output_activation,
            seed: self.seed,
            weights: self.weights.iter().map(|w| w.as_slice().to_vec()).collect(),
        };
        Ok(serde_json::to_string_pretty(&snap)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let snap: Snapshot = serde_json::from_str(text)?;
        if snap.format != SNAPSHOT_FORMAT {
            return Err(Error::InvalidArgument(format!(
                "unsupported snapshot format `{}`",
                snap.format
            )));
        }
        if snap.weights.len() + 1 != snap.layer_dims.len() {
            return Err(Error::DimensionMismatch(
                "weight count does not match layer dims".into(),
            ));
        }
        let mut weights = Vec::with_capacity(snap.weights.len());
        for (k, flat) in snap.weights.into_iter().enumerate() {
            let (d_in, d_out) = (snap.layer_dims[k], snap.layer_dims[k + 1]);
            if flat.len() != d_in * d_out {
                return Err(Error::DimensionMismatch(format!(
                    "layer {} has {} weights, expected {}",
                    k + 1,
                    flat.len(),
                    d_in * d_out
                )));
            }
            weights.push(Matrix::from_vec(d_out, d_in, flat));
        }
        Ok(Self {
            layer_dims: snap.layer_dims,
            weights,
            hidden_activation: snap.hidden_activation,
            output_activation: snap.output_activation,
            seed: snap.seed,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Per-vertex embeddings produced by one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    rows: Matrix,
    layer_index: usize,
}

impl EmbeddingMatrix {
    pub fn new(rows: Matrix, layer_index: usize) -> Self {
        Self { rows, layer_index }
    }

    pub fn rows(&self) -> &Matrix {
        &self.rows
    }

    pub fn into_rows(self) -> Matrix {
        self.rows
    }

    pub fn layer_index(&self) -> usize {
        self.layer_index
    }
}

/// Row t becomes the mean of rows `{t−1, t, t+1}` that exist.
pub fn mean_aggregate(h: &Matrix) -> Matrix {
    let (n, d) = h.shape();
    let mut out = Matrix::zeros(n, d);
    for t in 0..n {
        let lo = t.saturating_sub(1);
        let hi = (t + 1).min(n - 1);
        let count = (hi - lo + 1) as f64;
        let dst = out.row_mut(t);
        for s in lo..=hi {
            for (o, v) in dst.iter_mut().zip(h.row(s)) {
                *o += v;
            }
        }
        for o in dst.iter_mut() {
            *o /= count;
        }
    }
    out
}

/// Adjoint of [`mean_aggregate`]: routes each row's gradient back to the rows it averaged.
fn mean_aggregate_adjoint(g: &Matrix) -> Matrix {
    let (n, d) = g.shape();
    let mut out = Matrix::zeros(n, d);
    for s in 0..n {
        let lo = s.saturating_sub(1);
        let hi = (s + 1).min(n - 1);
        let dst = out.row_mut(s);
        for t in lo..=hi {
            let t_lo = t.saturating_sub(1);
            let t_hi = (t + 1).min(n - 1);
            let count = (t_hi - t_lo + 1) as f64;
            for (o, v) in dst.iter_mut().zip(g.row(t)) {
                *o += v / count;
            }
        }
    }
    out
}

struct Trace {
    /// Aggregated input of each layer.
    aggregated: Vec<Matrix>,
    pre: Vec<Matrix>,
    post: Vec<Matrix>,
}

fn check_compatible(model: &SageModel, graph: &TemporalGraph) -> Result<()> {
    if graph.feature_dim() != model.input_dim() {
        return Err(Error::DimensionMismatch(format!(
            "graph has {} features, model expects {}",
            graph.feature_dim(),
            model.input_dim()
        )));
    }
    if graph.vertex_count() == 0 {
        return Err(Error::InvalidArgument("graph has no vertices".into()));
    }
    Ok(())
}

fn run_layers(model: &SageModel, input: &Matrix) -> Trace {
    let mut trace = Trace {
        aggregated: Vec::with_capacity(model.weights.len()),
        pre: Vec::with_capacity(model.weights.len()),
        post: Vec::with_capacity(model.weights.len()),
    };
    for (k, w) in model.weights.iter().enumerate() {
        let prev = trace.post.last().unwrap_or(input);
        let agg = mean_aggregate(prev);
        let z = agg.mul_transposed(w);
        let act = model.activation_for(k);
        let h = z.map(|v| act.apply(v));
        trace.aggregated.push(agg);
        trace.pre.push(z);
        trace.post.push(h);
    }
    trace
}

/// Final-layer embeddings for every vertex.
pub fn forward(model: &SageModel, graph: &TemporalGraph) -> Result<EmbeddingMatrix> {
    check_compatible(model, graph)?;
    let mut trace = run_layers(model, graph.features());
    let layers = trace.post.len();
    Ok(EmbeddingMatrix::new(trace.post.pop().unwrap(), layers))
}

/// `(1/T) Σ_t Σ_j (h[t][j] − x[t][j])²`.
pub fn mse_loss(embeddings: &EmbeddingMatrix, graph: &TemporalGraph) -> Result<f64> {
    let h = embeddings.rows();
    let x = graph.features();
    if h.shape() != x.shape() {
        return Err(Error::DimensionMismatch(format!(
            "embeddings {:?} vs features {:?}",
            h.shape(),
            x.shape()
        )));
    }
    Ok(squared_error(h, x) / x.rows() as f64)
}

fn squared_error(h: &Matrix, x: &Matrix) -> f64 {
    let mut acc = 0.0;
    for (a, b) in h.as_slice().iter().zip(x.as_slice()) {
        let d = a - b;
        acc += d * d;
    }
    acc
}

/// Loss, its gradient with respect to every weight matrix, and the final embeddings.
pub fn loss_and_gradients(
    model: &SageModel,
    graph: &TemporalGraph,
) -> Result<(f64, Vec<Matrix>, EmbeddingMatrix)> {
    check_compatible(model, graph)?;
    let x = graph.features();
    if model.output_dim() != x.cols() {
        return Err(Error::DimensionMismatch(format!(
            "model outputs {} features, graph has {}",
            model.output_dim(),
            x.cols()
        )));
    }
    let trace = run_layers(model, x);
    let n = x.rows() as f64;
    let out = trace.post.last().unwrap();
    let loss = squared_error(out, x) / n;

    let layers = model.weights.len();
    let mut grads = vec![Matrix::zeros(0, 0); layers];
    // dL/dH for the current layer's output
    let mut upstream = Matrix::zeros(out.rows(), out.cols());
    for ((u, h), xv) in upstream
        .as_mut_slice()
        .iter_mut()
        .zip(out.as_slice())
        .zip(x.as_slice())
    {
        *u = 2.0 * (h - xv) / n;
    }
    for k in (0..layers).rev() {
        let act = model.activation_for(k);
        let mut dz = upstream;
        for ((g, z), h) in dz
            .as_mut_slice()
            .iter_mut()
            .zip(trace.pre[k].as_slice())
            .zip(trace.post[k].as_slice())
        {
            *g *= act.derivative(*z, *h);
        }
        grads[k] = dz.transpose_mul(&trace.aggregated[k]);
        if k == 0 {
            break;
        }
        let d_agg = dz.mul(&model.weights[k]);
        upstream = mean_aggregate_adjoint(&d_agg);
    }
    let embeddings = EmbeddingMatrix::new(trace.post.into_iter().last().unwrap(), layers);
    Ok((loss, grads, embeddings))
}

/// Adaptive-moment optimizer settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamConfig {
    pub fn with_learning_rate(learning_rate: f64) -> Self {
        Self {
            learning_rate,
            ..Self::default()
        }
    }
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: DEFAULT_LEARNING_RATE,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingTrace {
    /// Loss of the forward pass at the start of each epoch, before its update.
    pub losses: Vec<f64>,
    pub epochs: usize,
    pub optimizer: AdamConfig,
    /// Fingerprint of the model after the last update.
    pub final_model: String,
}

impl TrainingTrace {
    pub fn learning_rate(&self) -> f64 {
        self.optimizer.learning_rate
    }

    /// `epoch,loss` rows, epochs counted from 1.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("epoch,loss\n");
        for (i, l) in self.losses.iter().enumerate() {
            let _ = writeln!(out, "{},{l:.16e}", i + 1);
        }
        out
    }
}

/// Full-batch training with Adam at the given learning rate.
pub fn train(
    model: SageModel,
    graph: &TemporalGraph,
    epochs: usize,
    learning_rate: f64,
) -> Result<(SageModel, TrainingTrace)> {
    train_observed(
        model,
        graph,
        epochs,
        AdamConfig::with_learning_rate(learning_rate),
        |_, _| Ok(()),
    )
}

/// Like [`train`], calling `on_epoch(epoch, model)` after each update (epochs from 1).
///
/// Because training is deterministic, the model seen at epoch `e` is identical to the
/// result of training for exactly `e` epochs.
pub fn train_observed(
    mut model: SageModel,
    graph: &TemporalGraph,
    epochs: usize,
    optimizer: AdamConfig,
    mut on_epoch: impl FnMut(usize, &SageModel) -> Result<()>,
) -> Result<(SageModel, TrainingTrace)> {
    if epochs == 0 {
        return Err(Error::InvalidArgument("epochs must be ≥ 1".into()));
    }
    if !(optimizer.learning_rate > 0.0 && optimizer.learning_rate.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "learning rate must be positive, got {}",
            optimizer.learning_rate
        )));
    }
    let mut first: Vec<Matrix> = model
        .weights
        .iter()
        .map(|w| Matrix::zeros(w.rows(), w.cols()))
        .collect();
    let mut second = first.clone();
    let mut losses = Vec::with_capacity(epochs);
    let AdamConfig {
        learning_rate,
        beta1,
        beta2,
        epsilon,
    } = optimizer;
    for epoch in 1..=epochs {
        let (loss, grads, _) = loss_and_gradients(&model, graph)?;
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss { epoch, loss });
        }
        losses.push(loss);
        let c1 = 1.0 - beta1.powi(epoch as i32);
        let c2 = 1.0 - beta2.powi(epoch as i32);
        for (k, g) in grads.iter().enumerate() {
            let w = model.weights[k].as_mut_slice();
            let m = first[k].as_mut_slice();
            let v = second[k].as_mut_slice();
            for i in 0..w.len() {
                let gi = g.as_slice()[i];
                m[i] = beta1 * m[i] + (1.0 - beta1) * gi;
                v[i] = beta2 * v[i] + (1.0 - beta2) * gi * gi;
                let m_hat = m[i] / c1;
                let v_hat = v[i] / c2;
                w[i] -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
            }
        }
        on_epoch(epoch, &model)?;
    }
    let trace = TrainingTrace {
        losses,
        epochs,
        optimizer,
        final_model: model.fingerprint(),
    };
    Ok((model, trace))
}

/// Finite-difference step used by [`gradient_check`].
pub const GRADIENT_CHECK_STEP: f64 = 1e-5;
/// Gradients smaller than this in magnitude are compared absolutely.
const GRADIENT_CHECK_FLOOR: f64 = 1e-6;

/// Largest relative disagreement between analytic gradients and central finite
/// differences over every weight entry: `|a − n| / max(|a|, |n|, 10⁻⁶)`.
pub fn gradient_check(model: &SageModel, graph: &TemporalGraph) -> Result<f64> {
    let (_, analytic, _) = loss_and_gradients(model, graph)?;
    let mut probe = model.clone();
    let mut worst = 0.0f64;
    for k in 0..probe.weights.len() {
        for i in 0..probe.weights[k].as_slice().len() {
            let original = probe.weights[k].as_slice()[i];
            probe.weights[k].as_mut_slice()[i] = original + GRADIENT_CHECK_STEP;
            let plus = mse_loss(&forward(&probe, graph)?, graph)?;
            probe.weights[k].as_mut_slice()[i] = original - GRADIENT_CHECK_STEP;
            let minus = mse_loss(&forward(&probe, graph)?, graph)?;
            probe.weights[k].as_mut_slice()[i] = original;
            let numeric = (plus - minus) / (2.0 * GRADIENT_CHECK_STEP);
            let a = analytic[k].as_slice()[i];
            let denom = a.abs().max(numeric.abs()).max(GRADIENT_CHECK_FLOOR);
            worst = worst.max((a - numeric).abs() / denom);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_graph(t: usize, d: usize, seed: u64) -> TemporalGraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..t * d).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let names = (0..d).map(|j| format!("f{j}")).collect();
        TemporalGraph::from_features(Matrix::from_vec(t, d, data), names).unwrap()
    }

    #[test]
    fn init_shapes_and_bound() {
        let m = init_model(&DEFAULT_LAYER_DIMS, 3).unwrap();
        assert_eq!(m.weights().len(), 2);
        assert_eq!(m.weights()[0].shape(), (16, 11));
        assert_eq!(m.weights()[1].shape(), (11, 16));
        assert!((init_bound(11, 11) - 0.5222).abs() < 1e-4);
        let b = init_bound(11, 16);
        assert!(m.weights()[0].as_slice().iter().all(|w| w.abs() <= b));
    }

    #[test]
    fn init_is_deterministic() {
        assert_eq!(init_model(&[11, 16, 11], 9).unwrap(), init_model(&[11, 16, 11], 9).unwrap());
        assert_ne!(init_model(&[11, 16, 11], 9).unwrap(), init_model(&[11, 16, 11], 10).unwrap());
    }

    #[test]
    fn init_rejects_bad_dims() {
        assert!(init_model(&[11], 0).is_err());
        assert!(init_model(&[11, 0, 11], 0).is_err());
    }

    #[test]
    fn identity_on_constant_chain() {
        let x = vec![0.3, -1.2, 2.5];
        let rows = vec![x.clone(); 3];
        let g = TemporalGraph::from_features(
            Matrix::from_rows(&rows),
            vec!["a".into(), "b".into(), "c".into()],
        )
        .unwrap();
        let m = SageModel::from_weights(
            vec![Matrix::identity(3), Matrix::identity(3)],
            Activation::Identity,
            Activation::Identity,
        )
        .unwrap();
        let h = forward(&m, &g).unwrap();
        for t in 0..3 {
            for j in 0..3 {
                assert!((h.rows()[(t, j)] - x[j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn single_vertex_uses_self_only() {
        let g = TemporalGraph::from_features(Matrix::from_rows(&[vec![2.0, -3.0]]), vec!["a".into(), "b".into()])
            .unwrap();
        let w = Matrix::from_rows(&[vec![1.0, 1.0], vec![0.5, 0.0]]);
        let m = SageModel::from_weights(vec![w], Activation::Relu, Activation::Identity).unwrap();
        let h = forward(&m, &g).unwrap();
        assert_eq!(h.rows().row(0), &[-1.0, 1.0]);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let g = random_graph(4, 5, 0);
        let m = init_model(&[11, 16, 11], 0).unwrap();
        assert!(matches!(forward(&m, &g), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn loss_basics() {
        let g = random_graph(4, 3, 1);
        let same = EmbeddingMatrix::new(g.features().clone(), 0);
        assert_eq!(mse_loss(&same, &g).unwrap(), 0.0);

        let one = TemporalGraph::from_features(Matrix::from_rows(&[vec![0.0; 11]]), (0..11).map(|j| j.to_string()).collect())
            .unwrap();
        let mut h = Matrix::zeros(1, 11);
        h[(0, 0)] = 1.0;
        assert_eq!(mse_loss(&EmbeddingMatrix::new(h, 2), &one).unwrap(), 1.0);
    }

    #[test]
    fn adjoint_matches_transpose() {
        // ⟨M a, b⟩ = ⟨a, Mᵀ b⟩
        for n in 1..7 {
            let a = random_graph(n, 2, n as u64).features().clone();
            let b = random_graph(n, 2, 100 + n as u64).features().clone();
            let lhs: f64 = mean_aggregate(&a).as_slice().iter().zip(b.as_slice()).map(|(x, y)| x * y).sum();
            let rhs: f64 = a.as_slice().iter().zip(mean_aggregate_adjoint(&b).as_slice()).map(|(x, y)| x * y).sum();
            assert!((lhs - rhs).abs() < 1e-12, "n={n}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn gradient_check_small_instance() {
        let g = random_graph(8, 11, 4);
        let m = init_model(&DEFAULT_LAYER_DIMS, 4).unwrap();
        let err = gradient_check(&m, &g).unwrap();
        assert!(err < 1e-4, "max relative error {err}");
    }

    #[test]
    fn gradient_check_other_activations() {
        let g = random_graph(6, 4, 8);
        for act in [Activation::Tanh, Activation::Sigmoid, Activation::Identity] {
            let m = init_model(&[4, 5, 3, 4], 8).unwrap().with_activations(act, Activation::Identity);
            let err = gradient_check(&m, &g).unwrap();
            assert!(err < 1e-4, "{act}: {err}");
        }
    }

    #[test]
    fn linear_gradient_matches_closed_form() {
        // single identity layer: L = (1/T)‖A Wᵀ − X‖², ∇W = (2/T)(A Wᵀ − X)ᵀ A with A = M X
        let g = random_graph(7, 3, 12);
        let m = init_model(&[3, 3], 12)
            .unwrap()
            .with_activations(Activation::Identity, Activation::Identity);
        let (_, grads, _) = loss_and_gradients(&m, &g).unwrap();
        let x = g.features();
        let t = x.rows();
        let w = &m.weights()[0];
        let mut expected = Matrix::zeros(3, 3);
        for s in 0..t {
            let lo = s.saturating_sub(1);
            let hi = (s + 1).min(t - 1);
            let mut a = [0.0; 3];
            for r in lo..=hi {
                for j in 0..3 {
                    a[j] += x[(r, j)] / (hi - lo + 1) as f64;
                }
            }
            for o in 0..3 {
                let pred: f64 = (0..3).map(|j| w[(o, j)] * a[j]).sum();
                let resid = pred - x[(s, o)];
                for j in 0..3 {
                    expected[(o, j)] += 2.0 / t as f64 * resid * a[j];
                }
            }
        }
        for (a, b) in grads[0].as_slice().iter().zip(expected.as_slice()) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn zero_features_give_zero_gradient() {
        let g = TemporalGraph::from_features(Matrix::zeros(5, 11), (0..11).map(|j| j.to_string()).collect())
            .unwrap();
        let m = init_model(&DEFAULT_LAYER_DIMS, 1).unwrap();
        let (loss, grads, _) = loss_and_gradients(&m, &g).unwrap();
        assert_eq!(loss, 0.0);
        assert!(grads.iter().all(|gr| gr.as_slice().iter().all(|v| *v == 0.0)));
    }

    #[test]
    fn training_reduces_loss_and_is_deterministic() {
        let g = random_graph(30, 11, 2);
        let m = init_model(&DEFAULT_LAYER_DIMS, 2).unwrap();
        let (a, ta) = train(m.clone(), &g, 200, 0.01).unwrap();
        let (b, tb) = train(m, &g, 200, 0.01).unwrap();
        assert_eq!(a, b);
        assert_eq!(ta, tb);
        assert_eq!(ta.losses.len(), 200);
        assert!(ta.losses.last().unwrap() < &ta.losses[0]);
    }

    #[test]
    fn one_epoch_trace() {
        let g = random_graph(5, 11, 3);
        let m = init_model(&DEFAULT_LAYER_DIMS, 3).unwrap();
        let (_, t) = train(m.clone(), &g, 1, 0.001).unwrap();
        assert_eq!(t.losses.len(), 1);
        assert!(train(m.clone(), &g, 0, 0.001).is_err());
        assert!(train(m, &g, 5, 0.0).is_err());
    }

    #[test]
    fn observed_checkpoints_equal_short_runs() {
        let g = random_graph(12, 11, 5);
        let m = init_model(&DEFAULT_LAYER_DIMS, 5).unwrap();
        let mut at_7 = None;
        train_observed(m.clone(), &g, 20, AdamConfig::default(), |e, model| {
            if e == 7 {
                at_7 = Some(model.clone());
            }
            Ok(())
        })
        .unwrap();
        let (direct, _) = train(m, &g, 7, DEFAULT_LEARNING_RATE).unwrap();
        assert_eq!(at_7.unwrap(), direct);
    }

    #[test]
    fn divergence_is_reported() {
        let g = random_graph(5, 2, 6);
        let mut m = init_model(&[2, 2], 6)
            .unwrap()
            .with_activations(Activation::Identity, Activation::Identity);
        m.weights_mut()[0].as_mut_slice()[0] = f64::INFINITY;
        let err = train(m, &g, 3, 0.1).unwrap_err();
        assert!(matches!(err, Error::NonFiniteLoss { epoch: 1, .. }), "{err}");
    }

    #[test]
    fn snapshot_round_trip() {
        let m = init_model(&DEFAULT_LAYER_DIMS, 77).unwrap();
        let back = SageModel::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.fingerprint(), m.fingerprint());
    }

    #[test]
    fn loss_trace_csv() {
        let t = TrainingTrace {
            losses: vec![1.5, 0.25],
            epochs: 2,
            optimizer: AdamConfig::default(),
            final_model: "x".into(),
        };
        assert_eq!(
            t.to_csv_string(),
            "epoch,loss\n1,1.5000000000000000e0\n2,2.5000000000000000e-1\n"
        );
    }
}
