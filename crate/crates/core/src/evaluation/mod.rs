//! Precision, recall and F1 against known ground truth, plus the sweep harness.

pub mod sweep;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::ConflictGraph;
use crate::labeler::{ConflictKind, ConflictReport};
use crate::reconstruct::{random_graph_baseline, ReconstructedAdjacency};

/// How precision, recall and F1 are defined when their denominator is zero.
pub const ZERO_DIVISION_CONVENTION: &str = "zero";

/// Note attached to every edge-metric output.
pub const EDGE_METRIC_NOTE: &str =
    "edge metrics cover parameter/KPI pairs only; subscription edges are excluded";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct F1Metrics {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl F1Metrics {
    /// Any ratio with a zero denominator is 0.
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self {
            true_positives: tp,
            false_positives: fp,
            false_negatives: fn_,
            precision,
            recall,
            f1,
        }
    }

    pub fn from_sets<T: Ord>(predicted: &BTreeSet<T>, truth: &BTreeSet<T>) -> Self {
        let tp = predicted.intersection(truth).count();
        Self::from_counts(tp, predicted.len() - tp, truth.len() - tp)
    }
}

/// Scores reconstructed feature edges against the feature edges of `truth`.
pub fn edge_f1(predicted: &ReconstructedAdjacency, truth: &ConflictGraph) -> Result<F1Metrics> {
    let truth_features: BTreeSet<&str> = truth
        .feature_ids()
        .into_iter()
        .map(|i| truth.name(i))
        .collect();
    let predicted_features: BTreeSet<&str> =
        predicted.feature_names().iter().map(String::as_str).collect();
    if truth_features != predicted_features {
        return Err(Error::NameMismatch(format!(
            "predicted features {predicted_features:?} differ from truth features {truth_features:?}"
        )));
    }
    Ok(F1Metrics::from_sets(
        &predicted.edge_names(),
        &truth.feature_edges(),
    ))
}

/// Scores the conflicts of one kind by exact tuple comparison.
pub fn conflict_f1(
    predicted: &ConflictReport,
    truth: &ConflictReport,
    kind: ConflictKind,
) -> F1Metrics {
    let p: BTreeSet<_> = predicted.of_kind(kind).collect();
    let t: BTreeSet<_> = truth.of_kind(kind).collect();
    F1Metrics::from_sets(&p, &t)
}

/// Mean edge F1 of random graphs with edge probability `density` over `seeds` draws.
pub fn random_baseline_f1(
    truth: &ConflictGraph,
    feature_names: &[String],
    density: f64,
    seeds: u64,
) -> Result<f64> {
    if seeds == 0 {
        return Err(Error::InvalidArgument("need at least one baseline seed".into()));
    }
    let mut total = 0.0;
    for seed in 0..seeds {
        let adj = random_graph_baseline(feature_names.to_vec(), density, seed)?;
        total += edge_f1(&adj, truth)?.f1;
    }
    Ok(total / seeds as f64)
}

/// Median with the mean of the two middle values for even counts. `None` when empty.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ground_truth_graph;
    use crate::scenario::Scenario;

    #[test]
    fn arithmetic_case() {
        let m = F1Metrics::from_counts(2, 1, 1);
        assert!((m.precision - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.recall - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.f1 - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn missed_one_of_two() {
        let m = F1Metrics::from_counts(1, 0, 1);
        assert_eq!(m.precision, 1.0);
        assert_eq!(m.recall, 0.5);
        assert!((m.f1 - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn zero_denominators() {
        let m = F1Metrics::from_counts(0, 0, 10);
        assert_eq!((m.precision, m.recall, m.f1), (0.0, 0.0, 0.0));
        let m = F1Metrics::from_counts(0, 0, 0);
        assert_eq!(m.f1, 0.0);
    }

    #[test]
    fn identity_and_empty_prediction() {
        let s = Scenario::default_scenario();
        let truth = ground_truth_graph(&s);
        let names = s.feature_names();
        let idx = |n: &str| names.iter().position(|x| x == n).unwrap();
        let edges: Vec<_> = truth
            .feature_edges()
            .iter()
            .map(|(a, b)| (idx(a), idx(b)))
            .collect();
        let perfect = ReconstructedAdjacency::from_edges(names.clone(), &edges).unwrap();
        let m = edge_f1(&perfect, &truth).unwrap();
        assert_eq!((m.precision, m.recall, m.f1), (1.0, 1.0, 1.0));
        assert_eq!(m.true_positives, 10);

        let empty = ReconstructedAdjacency::empty(names);
        let m = edge_f1(&empty, &truth).unwrap();
        assert_eq!((m.precision, m.recall, m.f1), (0.0, 0.0, 0.0));
        assert_eq!(m.false_negatives, 10);
    }

    #[test]
    fn mismatched_features_rejected() {
        let s = Scenario::default_scenario();
        let truth = ground_truth_graph(&s);
        let other = ReconstructedAdjacency::empty((0..11).map(|i| format!("x{i}")).collect());
        assert!(edge_f1(&other, &truth).is_err());
    }

    #[test]
    fn medians() {
        assert_eq!(median(&[]), None);
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), Some(2.5));
    }

    #[test]
    fn complete_graph_baseline() {
        // p = 1 predicts all 55 pairs: precision 10/55, recall 1
        let s = Scenario::default_scenario();
        let truth = ground_truth_graph(&s);
        let f1 = random_baseline_f1(&truth, &s.feature_names(), 1.0, 3).unwrap();
        let p = 10.0 / 55.0;
        assert!((f1 - 2.0 * p / (p + 1.0)).abs() < 1e-12);
    }
}
