//! Independent naive implementations used as oracles by the property and acceptance suites.

#![allow(dead_code)]

use std::collections::BTreeSet;

use oran_conflicts::graph::{Vertex, VertexClass};
use oran_conflicts::labeler::{Conflict, ConflictKind};
use oran_conflicts::{Activation, ConflictGraph, Matrix, SageModel, TemporalGraph};
use rand::Rng;

pub const ACTIVATIONS: [Activation; 4] = [
    Activation::Relu,
    Activation::Tanh,
    Activation::Sigmoid,
    Activation::Identity,
];

fn uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Random model and chain graph with `3 ≤ T ≤ 24` and widths up to 6.
pub fn random_instance<R: Rng>(rng: &mut R) -> (SageModel, TemporalGraph) {
    let t = rng.random_range(3..=24);
    let d = rng.random_range(1..=6);
    let layers = rng.random_range(1..=3);
    let mut dims = vec![d];
    for _ in 1..layers {
        dims.push(rng.random_range(1..=6));
    }
    dims.push(d);
    let weights = dims
        .windows(2)
        .map(|w| {
            let data = (0..w[0] * w[1]).map(|_| uniform(rng, -1.0, 1.0)).collect();
            Matrix::from_vec(w[1], w[0], data)
        })
        .collect();
    let hidden = ACTIVATIONS[rng.random_range(0..ACTIVATIONS.len())];
    let model = SageModel::from_weights(weights, hidden, Activation::Identity).unwrap();
    let features = Matrix::from_vec(t, d, (0..t * d).map(|_| uniform(rng, -3.0, 3.0)).collect());
    let names = (0..d).map(|i| format!("f{i}")).collect();
    (model, TemporalGraph::from_features(features, names).unwrap())
}

fn naive_activation(a: Activation, z: f64) -> f64 {
    match a {
        Activation::Relu => {
            if z > 0.0 {
                z
            } else {
                0.0
            }
        }
        Activation::Tanh => z.tanh(),
        Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
        Activation::Identity => z,
    }
}

/// Materializes each vertex's neighbor list from the edge iterator, then
/// averages, multiplies and activates one scalar at a time.
pub fn naive_forward(model: &SageModel, graph: &TemporalGraph) -> Vec<Vec<f64>> {
    let n = graph.vertex_count();
    let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (u, v) in graph.edges() {
        neighbors[u].push(v);
        neighbors[v].push(u);
    }
    let x = graph.features();
    let mut h: Vec<Vec<f64>> = (0..n).map(|t| x.row(t).to_vec()).collect();
    let layers = model.weights().len();
    for (k, w) in model.weights().iter().enumerate() {
        let act = if k + 1 == layers {
            model.output_activation()
        } else {
            model.hidden_activation()
        };
        let mut next = Vec::with_capacity(n);
        for t in 0..n {
            let mut members = neighbors[t].clone();
            members.push(t);
            let d_in = h[t].len();
            let mut agg = vec![0.0; d_in];
            for &s in &members {
                for i in 0..d_in {
                    agg[i] += h[s][i];
                }
            }
            for a in &mut agg {
                *a /= members.len() as f64;
            }
            let row: Vec<f64> = (0..w.rows())
                .map(|j| {
                    let mut z = 0.0;
                    for i in 0..d_in {
                        z += w[(j, i)] * agg[i];
                    }
                    naive_activation(act, z)
                })
                .collect();
            next.push(row);
        }
        h = next;
    }
    h
}

pub fn naive_mse(h: &[Vec<f64>], x: &Matrix) -> f64 {
    let mut total = 0.0;
    for (t, row) in h.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let e = v - x[(t, j)];
            total += e * e;
        }
    }
    total / h.len() as f64
}

/// Textbook Pearson coefficient per pair of columns.
pub fn naive_pearson(data: &Matrix) -> Vec<Vec<f64>> {
    let (t, d) = data.shape();
    let cols: Vec<Vec<f64>> = (0..d).map(|j| (0..t).map(|r| data[(r, j)]).collect()).collect();
    let mean = |c: &[f64]| c.iter().sum::<f64>() / c.len() as f64;
    let mut out = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in 0..d {
            let (mi, mj) = (mean(&cols[i]), mean(&cols[j]));
            let mut sxy = 0.0;
            let mut sxx = 0.0;
            let mut syy = 0.0;
            for r in 0..t {
                let a = cols[i][r] - mi;
                let b = cols[j][r] - mj;
                sxy += a * b;
                sxx += a * a;
                syy += b * b;
            }
            out[i][j] = sxy / (sxx.sqrt() * syy.sqrt());
        }
    }
    out
}

/// Random heterogeneous graph with at most 12 vertices and no A–A edges.
pub fn random_conflict_graph<R: Rng>(rng: &mut R) -> ConflictGraph {
    let n = rng.random_range(1..=12);
    let mut counts = [0usize; 3];
    let vertices: Vec<Vertex> = (0..n)
        .map(|_| {
            let c = rng.random_range(0..3);
            counts[c] += 1;
            let (prefix, class) = match c {
                0 => ("a", VertexClass::XApp),
                1 => ("p", VertexClass::Parameter),
                _ => ("k", VertexClass::Kpi),
            };
            Vertex {
                name: format!("{prefix}{}", counts[c]),
                class,
            }
        })
        .collect();
    let mut g = ConflictGraph::new(vertices).unwrap();
    let p = uniform(rng, 0.1, 0.8);
    for u in 0..n {
        for v in u + 1..n {
            let both_apps = g.class(u) == VertexClass::XApp && g.class(v) == VertexClass::XApp;
            if !both_apps && rng.random_bool(p) {
                g.add_edge(u, v).unwrap();
            }
        }
    }
    g
}

fn conflict(kind: ConflictKind, i: &str, j: &str, witnesses: &[&str]) -> Conflict {
    Conflict {
        kind,
        xapp_i: i.into(),
        xapp_j: j.into(),
        witnesses: witnesses.iter().map(|s| s.to_string()).collect(),
    }
}

/// Every conflict found by enumerating all vertex tuples of the right classes.
pub fn exhaustive_conflicts(g: &ConflictGraph, kind: ConflictKind) -> Vec<Conflict> {
    let of = |class| -> Vec<usize> { (0..g.vertex_count()).filter(|&v| g.class(v) == class).collect() };
    let (apps, params, kpis) = (of(VertexClass::XApp), of(VertexClass::Parameter), of(VertexClass::Kpi));
    let e = |u: usize, v: usize| g.has_edge(u, v) || g.has_edge(v, u);
    let nm = |v: usize| g.name(v);
    let mut out = BTreeSet::new();
    for &ai in &apps {
        for &aj in &apps {
            if ai == aj {
                continue;
            }
            match kind {
                ConflictKind::Direct => {
                    for &p in &params {
                        if e(ai, p) && e(aj, p) && nm(ai) < nm(aj) {
                            out.insert(conflict(kind, nm(ai), nm(aj), &[nm(p)]));
                        }
                    }
                }
                ConflictKind::Implicit => {
                    for &pm in &params {
                        for &pn in &params {
                            for &k in &kpis {
                                let hit = pm != pn && e(ai, pm) && e(pm, k) && e(k, pn) && e(pn, aj);
                                if hit && nm(ai) < nm(aj) {
                                    out.insert(conflict(kind, nm(ai), nm(aj), &[nm(pm), nm(pn), nm(k)]));
                                }
                            }
                        }
                    }
                }
                ConflictKind::Indirect => {
                    for &pm in &params {
                        for &pn in &params {
                            for &k in &kpis {
                                if pm != pn && e(ai, pm) && e(pm, k) && e(k, aj) && e(aj, pn) {
                                    out.insert(conflict(kind, nm(ai), nm(aj), &[nm(pm), nm(k), nm(pn)]));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out.into_iter().collect()
}
