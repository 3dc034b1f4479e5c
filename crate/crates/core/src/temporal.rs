//! Chain-structured temporal graph over dataset rows.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::TimeSeriesDataset;

/// Per-feature z-score statistics (population standard deviation).
#[derive(Debug, Clone, PartialEq)]
pub struct Standardization {
    pub means: Vec<f64>,
    pub std_devs: Vec<f64>,
}

impl Standardization {
    /// Maps standardized rows back to the original feature scale.
    pub fn destandardize(&self, standardized: &Matrix) -> Matrix {
        let mut out = standardized.clone();
        for t in 0..out.rows() {
            for (j, v) in out.row_mut(t).iter_mut().enumerate() {
                *v = *v * self.std_devs[j] + self.means[j];
            }
        }
        out
    }
}

/// Vertices are time steps `0..T`; edges join `t` and `t + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalGraph {
    features: Matrix,
    feature_names: Vec<String>,
    stats: Standardization,
}

impl TemporalGraph {
    /// Wraps already-prepared features without standardizing them.
    pub fn from_features(features: Matrix, feature_names: Vec<String>) -> Result<Self> {
        if features.cols() != feature_names.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} names for {} feature columns",
                feature_names.len(),
                features.cols()
            )));
        }
        let d = features.cols();
        Ok(Self {
            features,
            feature_names,
            stats: Standardization {
                means: vec![0.0; d],
                std_devs: vec![1.0; d],
            },
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.features.rows()
    }

    pub fn edge_count(&self) -> usize {
        self.vertex_count().saturating_sub(1)
    }

    pub fn feature_dim(&self) -> usize {
        self.features.cols()
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn standardization(&self) -> &Standardization {
        &self.stats
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> {
        (1..self.vertex_count()).map(|t| (t - 1, t))
    }

    /// `{t − 1, t + 1}` clipped to the valid range, ascending.
    pub fn neighborhood(&self, t: usize) -> Result<Vec<usize>> {
        let n = self.vertex_count();
        if t >= n {
            return Err(Error::OutOfRange { index: t, len: n });
        }
        let mut out = Vec::with_capacity(2);
        if t > 0 {
            out.push(t - 1);
        }
        if t + 1 < n {
            out.push(t + 1);
        }
        Ok(out)
    }

    /// Chain rendering for inspection; vertex labels are indices only.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph temporal {\n");
        for t in 0..self.vertex_count() {
            let _ = writeln!(out, "  {t};");
        }
        for (u, v) in self.edges() {
            let _ = writeln!(out, "  {u} -- {v};");
        }
        out.push_str("}\n");
        out
    }
}

/// Standardizes every column to zero mean and unit (population) variance and
/// lays the rows out on a chain.
pub fn build_temporal_graph(dataset: &TimeSeriesDataset) -> Result<TemporalGraph> {
    let raw = dataset.rows();
    let (t_len, d) = raw.shape();
    if t_len == 0 {
        return Err(Error::InvalidArgument("dataset has no rows".into()));
    }
    let mut means = vec![0.0; d];
    let mut std_devs = vec![0.0; d];
    for j in 0..d {
        let mut sum = 0.0;
        for t in 0..t_len {
            sum += raw[(t, j)];
        }
        let mean = sum / t_len as f64;
        let mut ss = 0.0;
        for t in 0..t_len {
            let c = raw[(t, j)] - mean;
            ss += c * c;
        }
        let sd = (ss / t_len as f64).sqrt();
        if sd == 0.0 || !sd.is_finite() {
            return Err(Error::ZeroVariance(dataset.feature_names()[j].clone()));
        }
        means[j] = mean;
        std_devs[j] = sd;
    }
    let mut features = raw.clone();
    for t in 0..t_len {
        for (j, v) in features.row_mut(t).iter_mut().enumerate() {
            *v = (*v - means[j]) / std_devs[j];
        }
    }
    Ok(TemporalGraph {
        features,
        feature_names: dataset.feature_names().to_vec(),
        stats: Standardization { means, std_devs },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::generate_dataset;
    use crate::scenario::Scenario;

    fn graph(n: usize, seed: u64) -> (TimeSeriesDataset, TemporalGraph) {
        let d = generate_dataset(&Scenario::default_scenario(), n, seed).unwrap();
        let g = build_temporal_graph(&d).unwrap();
        (d, g)
    }

    #[test]
    fn chain_counts() {
        let (_, g) = graph(450, 1);
        assert_eq!(g.vertex_count(), 450);
        assert_eq!(g.edge_count(), 449);
        assert_eq!(g.edges().count(), 449);
    }

    #[test]
    fn neighborhoods() {
        let g = TemporalGraph::from_features(Matrix::zeros(5, 1), vec!["x".into()]).unwrap();
        assert_eq!(g.neighborhood(2).unwrap(), vec![1, 3]);
        assert_eq!(g.neighborhood(0).unwrap(), vec![1]);
        assert_eq!(g.neighborhood(4).unwrap(), vec![3]);
        assert!(matches!(
            g.neighborhood(5),
            Err(Error::OutOfRange { index: 5, len: 5 })
        ));
    }

    #[test]
    fn single_row_has_no_neighbors() {
        // One row is constant in every column, so use prepared features directly.
        let g = TemporalGraph::from_features(Matrix::zeros(1, 3), vec!["a".into(), "b".into(), "c".into()])
            .unwrap();
        assert_eq!(g.edge_count(), 0);
        assert!(g.neighborhood(0).unwrap().is_empty());
    }

    #[test]
    fn constant_column_is_named() {
        let s = Scenario::default_scenario();
        let d = generate_dataset(&s, 1, 1).unwrap();
        let err = build_temporal_graph(&d).unwrap_err();
        assert!(matches!(err, Error::ZeroVariance(ref n) if n == "P1"), "{err}");
    }

    #[test]
    fn columns_are_standardized() {
        let (_, g) = graph(300, 2);
        let f = g.features();
        for j in 0..f.cols() {
            // independent recomputation of the column moments
            let col = f.column(j);
            let n = col.len() as f64;
            let mean = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            assert!(mean.abs() < 1e-9, "mean {mean}");
            assert!((var.sqrt() - 1.0).abs() < 1e-9, "sd {}", var.sqrt());
        }
    }

    #[test]
    fn standardization_inverts() {
        let (d, g) = graph(200, 3);
        let back = g.standardization().destandardize(g.features());
        for (a, b) in back.as_slice().iter().zip(d.rows().as_slice()) {
            assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn interior_degree_two() {
        for n in [2usize, 3, 17, 64] {
            let g = TemporalGraph::from_features(Matrix::zeros(n, 1), vec!["x".into()]).unwrap();
            for t in 0..n {
                let deg = g.neighborhood(t).unwrap().len();
                let expected = if t == 0 || t == n - 1 { 1 } else { 2 };
                assert_eq!(deg, expected);
            }
        }
    }

    #[test]
    fn dot_export() {
        let g = TemporalGraph::from_features(Matrix::zeros(3, 1), vec!["x".into()]).unwrap();
        assert_eq!(g.to_dot(), "graph temporal {\n  0;\n  1;\n  2;\n  0 -- 1;\n  1 -- 2;\n}\n");
    }
}
