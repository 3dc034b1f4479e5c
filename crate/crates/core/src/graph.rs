//! Heterogeneous conflict graph over xApps (A), parameters (P) and KPIs (K).

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VertexClass {
    XApp,
    Parameter,
    Kpi,
}

impl VertexClass {
    pub fn label(self) -> &'static str {
        match self {
            VertexClass::XApp => "A",
            VertexClass::Parameter => "P",
            VertexClass::Kpi => "K",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    pub name: String,
    pub class: VertexClass,
}

/// Undirected, vertex-labeled graph. Edges are stored as `(u, v)` with `u < v`.
///
/// A–A edges and self-loops are rejected; every other class pair is allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictGraph {
    vertices: Vec<Vertex>,
    index: HashMap<String, usize>,
    edges: BTreeSet<(usize, usize)>,
    adjacency: Vec<BTreeSet<usize>>,
}

impl ConflictGraph {
    pub fn new(vertices: Vec<Vertex>) -> Result<Self> {
        let mut index = HashMap::with_capacity(vertices.len());
        for (i, v) in vertices.iter().enumerate() {
            if index.insert(v.name.clone(), i).is_some() {
                return Err(Error::InvalidArgument(format!(
                    "duplicate vertex name `{}`",
                    v.name
                )));
            }
        }
        let adjacency = vec![BTreeSet::new(); vertices.len()];
        Ok(Self {
            vertices,
            index,
            edges: BTreeSet::new(),
            adjacency,
        })
    }

    /// Vertices of a scenario: xApps, then parameters, then KPIs, each in declared order.
    pub fn scenario_vertices(scenario: &Scenario) -> Vec<Vertex> {
        let a = scenario.xapps().iter().map(|x| Vertex {
            name: x.name.clone(),
            class: VertexClass::XApp,
        });
        let p = scenario.parameters().iter().map(|x| Vertex {
            name: x.name.clone(),
            class: VertexClass::Parameter,
        });
        let k = scenario.kpis().iter().map(|x| Vertex {
            name: x.name.clone(),
            class: VertexClass::Kpi,
        });
        a.chain(p).chain(k).collect()
    }

    /// Edgeless graph over the scenario's vertices.
    pub fn empty_for(scenario: &Scenario) -> Self {
        Self::new(Self::scenario_vertices(scenario)).expect("scenario names are unique")
    }

    /// Adds the scenario's A–P (control) and A–K (monitor) subscription edges.
    pub fn add_subscriptions(&mut self, scenario: &Scenario) -> Result<()> {
        for x in scenario.xapps() {
            for target in x.controls.iter().chain(&x.monitors) {
                self.add_edge_by_name(&x.name, target)?;
            }
        }
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex(&self, id: usize) -> &Vertex {
        &self.vertices[id]
    }

    pub fn name(&self, id: usize) -> &str {
        &self.vertices[id].name
    }

    pub fn class(&self, id: usize) -> VertexClass {
        self.vertices[id].class
    }

    pub fn id(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn ids_of(&self, class: VertexClass) -> impl Iterator<Item = usize> + '_ {
        (0..self.vertices.len()).filter(move |&i| self.vertices[i].class == class)
    }

    /// Parameter and KPI vertex ids, in vertex order.
    pub fn feature_ids(&self) -> Vec<usize> {
        (0..self.vertices.len())
            .filter(|&i| self.vertices[i].class != VertexClass::XApp)
            .collect()
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<bool> {
        let n = self.vertices.len();
        for id in [u, v] {
            if id >= n {
                return Err(Error::OutOfRange { index: id, len: n });
            }
        }
        if u == v {
            return Err(Error::InvalidArgument(format!(
                "self-loop on `{}`",
                self.vertices[u].name
            )));
        }
        if self.class(u) == VertexClass::XApp && self.class(v) == VertexClass::XApp {
            return Err(Error::InvalidArgument(format!(
                "xApp–xApp edge `{}`–`{}` is not allowed",
                self.name(u),
                self.name(v)
            )));
        }
        let key = (u.min(v), u.max(v));
        let fresh = self.edges.insert(key);
        if fresh {
            self.adjacency[u].insert(v);
            self.adjacency[v].insert(u);
        }
        Ok(fresh)
    }

    pub fn add_edge_by_name(&mut self, u: &str, v: &str) -> Result<bool> {
        let lookup = |name: &str| {
            self.id(name)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown vertex `{name}`")))
        };
        let (u, v) = (lookup(u)?, lookup(v)?);
        self.add_edge(u, v)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    pub fn neighbors(&self, v: usize) -> &BTreeSet<usize> {
        &self.adjacency[v]
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Feature–feature (P–K, K–K, P–P) edges as name pairs.
    pub fn feature_edges(&self) -> BTreeSet<(String, String)> {
        self.edges()
            .filter(|&(u, v)| {
                self.class(u) != VertexClass::XApp && self.class(v) != VertexClass::XApp
            })
            .map(|(u, v)| ordered_pair(self.name(u), self.name(v)))
            .collect()
    }

    /// Symmetric 0/1 view in vertex order.
    pub fn adjacency_matrix(&self) -> Vec<Vec<u8>> {
        let n = self.vertices.len();
        let mut m = vec![vec![0u8; n]; n];
        for &(u, v) in &self.edges {
            m[u][v] = 1;
            m[v][u] = 1;
        }
        m
    }

    /// Digest of the vertex labels and edge set.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        for v in &self.vertices {
            h.update(v.class.label().as_bytes());
            h.update(v.name.as_bytes());
            h.update([0u8]);
        }
        for &(u, v) in &self.edges {
            h.update((u as u64).to_le_bytes());
            h.update((v as u64).to_le_bytes());
        }
        hex::encode(&h.finalize()[..8])
    }

    /// One `u v` line per edge, sorted by vertex order.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for &(u, v) in &self.edges {
            let _ = writeln!(out, "{} {}", self.name(u), self.name(v));
        }
        out
    }

    /// Graphviz rendering with one style per vertex class.
    pub fn to_dot(&self, title: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "graph \"{}\" {{", escape(title));
        for v in &self.vertices {
            let (shape, color) = match v.class {
                VertexClass::XApp => ("box", "lightblue"),
                VertexClass::Parameter => ("ellipse", "palegreen"),
                VertexClass::Kpi => ("diamond", "lightsalmon"),
            };
            let _ = writeln!(
                out,
                "  \"{}\" [class=\"{}\", shape={shape}, style=filled, fillcolor={color}];",
                escape(&v.name),
                v.class.label()
            );
        }
        for &(u, v) in &self.edges {
            let _ = writeln!(
                out,
                "  \"{}\" -- \"{}\";",
                escape(self.name(u)),
                escape(self.name(v))
            );
        }
        out.push_str("}\n");
        out
    }

    /// Adjacency matrix as CSV with vertex names as row and column headers.
    pub fn to_adjacency_csv(&self) -> String {
        let names: Vec<&str> = self.vertices.iter().map(|v| v.name.as_str()).collect();
        let m = self.adjacency_matrix();
        let mut out = String::from("vertex");
        for n in &names {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for (i, row) in m.iter().enumerate() {
            out.push_str(names[i]);
            for x in row {
                let _ = write!(out, ",{x}");
            }
            out.push('\n');
        }
        out
    }

    /// Parses an edge list over the scenario's vertices. Blank lines and `#` comments
    /// are skipped; each remaining line must hold exactly two vertex names.
    pub fn parse_edge_list(text: &str, scenario: &Scenario) -> Result<Self> {
        let mut g = Self::empty_for(scenario);
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 2 {
                return Err(Error::Parse {
                    location: format!("line {line_no}"),
                    message: format!("expected `u v`, got `{raw}`"),
                });
            }
            let mut ids = [0usize; 2];
            for (slot, name) in ids.iter_mut().zip(&parts) {
                *slot = g.id(name).ok_or_else(|| Error::UnknownVertex {
                    name: name.to_string(),
                    line: line_no,
                })?;
            }
            g.add_edge(ids[0], ids[1]).map_err(|e| Error::Parse {
                location: format!("line {line_no}"),
                message: e.to_string(),
            })?;
        }
        Ok(g)
    }
}

pub(crate) fn ordered_pair(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}
