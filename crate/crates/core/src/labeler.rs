//! Direct, implicit and indirect conflict detection by pattern matching.
//!
//! Control subscriptions are the A–P edges of the graph and monitor
//! subscriptions are the A–K edges. K–K edges play no part in any pattern.
//!
//! * direct: `a_i – p – a_j`
//! * implicit: `a_i – p_m – k – p_n – a_j` with `p_m ≠ p_n`
//! * indirect (depth one): `a_i – p_m – k – a_j – p_n` with `p_m ≠ p_n`, where
//!   `a_j` monitors `k`. This pattern is asymmetric, so `(a_i, a_j)` is ordered.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ConflictGraph, VertexClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConflictKind {
    Direct,
    Implicit,
    Indirect,
}

impl ConflictKind {
    pub const ALL: [ConflictKind; 3] = [
        ConflictKind::Direct,
        ConflictKind::Implicit,
        ConflictKind::Indirect,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ConflictKind::Direct => "direct",
            ConflictKind::Implicit => "implicit",
            ConflictKind::Indirect => "indirect",
        }
    }
}

impl fmt::Display for ConflictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ConflictKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(ConflictKind::Direct),
            "implicit" => Ok(ConflictKind::Implicit),
            "indirect" => Ok(ConflictKind::Indirect),
            other => Err(Error::InvalidArgument(format!("unknown conflict kind `{other}`"))),
        }
    }
}

/// A detected conflict, identified by vertex names.
///
/// Witnesses: direct `[p]`; implicit `[p_m, p_n, k]` where `a_i` controls `p_m`;
/// indirect `[p_m, k, p_n]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Conflict {
    pub kind: ConflictKind,
    pub xapp_i: String,
    pub xapp_j: String,
    pub witnesses: Vec<String>,
}

impl Conflict {
    fn direct(a: &str, b: &str, p: &str) -> Self {
        let (i, j) = if a <= b { (a, b) } else { (b, a) };
        Self {
            kind: ConflictKind::Direct,
            xapp_i: i.into(),
            xapp_j: j.into(),
            witnesses: vec![p.into()],
        }
    }

    fn implicit(a: &str, pa: &str, b: &str, pb: &str, k: &str) -> Self {
        let ((i, pi), (j, pj)) = if a <= b { ((a, pa), (b, pb)) } else { ((b, pb), (a, pa)) };
        Self {
            kind: ConflictKind::Implicit,
            xapp_i: i.into(),
            xapp_j: j.into(),
            witnesses: vec![pi.into(), pj.into(), k.into()],
        }
    }

    fn indirect(a: &str, pm: &str, k: &str, b: &str, pn: &str) -> Self {
        Self {
            kind: ConflictKind::Indirect,
            xapp_i: a.into(),
            xapp_j: b.into(),
            witnesses: vec![pm.into(), k.into(), pn.into()],
        }
    }
}

impl fmt::Display for Conflict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = &self.witnesses;
        match self.kind {
            ConflictKind::Direct => write!(f, "direct: {} and {} both control {}", self.xapp_i, self.xapp_j, w[0]),
            ConflictKind::Implicit => write!(
                f,
                "implicit: {} via {} and {} via {} both affect {}",
                self.xapp_i, w[0], self.xapp_j, w[1], w[2]
            ),
            ConflictKind::Indirect => write!(
                f,
                "indirect: {} -> {} -> {} -> {} -> {}",
                self.xapp_i, w[0], w[1], self.xapp_j, w[2]
            ),
        }
    }
}

fn class_neighbors(g: &ConflictGraph, v: usize, class: VertexClass) -> impl Iterator<Item = usize> + '_ {
    g.neighbors(v).iter().copied().filter(move |&u| g.class(u) == class)
}

/// One conflict per unordered xApp pair per shared controlled parameter.
pub fn detect_direct(g: &ConflictGraph) -> Vec<Conflict> {
    let mut out = BTreeSet::new();
    for p in g.ids_of(VertexClass::Parameter) {
        let controllers: Vec<usize> = class_neighbors(g, p, VertexClass::XApp).collect();
        for (x, &a) in controllers.iter().enumerate() {
            for &b in &controllers[x + 1..] {
                out.insert(Conflict::direct(g.name(a), g.name(b), g.name(p)));
            }
        }
    }
    out.into_iter().collect()
}

/// One conflict per unordered xApp pair per `(p_m, p_n, k)` with `p_m ≠ p_n`.
pub fn detect_implicit(g: &ConflictGraph) -> Vec<Conflict> {
    let mut out = BTreeSet::new();
    for k in g.ids_of(VertexClass::Kpi) {
        let params: Vec<usize> = class_neighbors(g, k, VertexClass::Parameter).collect();
        for &pm in &params {
            for &pn in &params {
                if pm == pn {
                    continue;
                }
                for ai in class_neighbors(g, pm, VertexClass::XApp) {
                    for aj in class_neighbors(g, pn, VertexClass::XApp) {
                        if ai != aj {
                            out.insert(Conflict::implicit(
                                g.name(ai),
                                g.name(pm),
                                g.name(aj),
                                g.name(pn),
                                g.name(k),
                            ));
                        }
                    }
                }
            }
        }
    }
    out.into_iter().collect()
}

/// One conflict per ordered `(a_i, a_j)` per chain `a_i – p_m – k – a_j – p_n`, `p_m ≠ p_n`.
pub fn detect_indirect(g: &ConflictGraph) -> Vec<Conflict> {
    let mut out = BTreeSet::new();
    for ai in g.ids_of(VertexClass::XApp) {
        for pm in class_neighbors(g, ai, VertexClass::Parameter) {
            for k in class_neighbors(g, pm, VertexClass::Kpi) {
                for aj in class_neighbors(g, k, VertexClass::XApp) {
                    if aj == ai {
                        continue;
                    }
                    for pn in class_neighbors(g, aj, VertexClass::Parameter) {
                        if pn != pm {
                            out.insert(Conflict::indirect(
                                g.name(ai),
                                g.name(pm),
                                g.name(k),
                                g.name(aj),
                                g.name(pn),
                            ));
                        }
                    }
                }
            }
        }
    }
    out.into_iter().collect()
}

/// All detected conflicts, deduplicated and sorted by `(kind, xapp_i, xapp_j, witnesses)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConflictReport {
    conflicts: Vec<Conflict>,
    graph_fingerprint: String,
}

impl ConflictReport {
    pub fn from_conflicts(conflicts: impl IntoIterator<Item = Conflict>, graph_fingerprint: String) -> Self {
        let set: BTreeSet<Conflict> = conflicts.into_iter().collect();
        Self {
            conflicts: set.into_iter().collect(),
            graph_fingerprint,
        }
    }

    pub fn conflicts(&self) -> &[Conflict] {
        &self.conflicts
    }

    pub fn of_kind(&self, kind: ConflictKind) -> impl Iterator<Item = &Conflict> {
        self.conflicts.iter().filter(move |c| c.kind == kind)
    }

    pub fn count(&self, kind: ConflictKind) -> usize {
        self.of_kind(kind).count()
    }

    pub fn counts(&self) -> BTreeMap<ConflictKind, usize> {
        ConflictKind::ALL.iter().map(|&k| (k, self.count(k))).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.conflicts.is_empty()
    }

    pub fn graph_fingerprint(&self) -> &str {
        &self.graph_fingerprint
    }

    /// `kind,xapp_i,xapp_j,witness_1,witness_2,witness_3`; unused witness columns are empty.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("kind,xapp_i,xapp_j,witness_1,witness_2,witness_3\n");
        for c in &self.conflicts {
            let w = |i: usize| c.witnesses.get(i).map_or("", String::as_str);
            let _ = writeln!(out, "{},{},{},{},{},{}", c.kind, c.xapp_i, c.xapp_j, w(0), w(1), w(2));
        }
        out
    }

    pub fn to_text_summary(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "conflict report for graph {}", self.graph_fingerprint);
        for kind in ConflictKind::ALL {
            let _ = writeln!(out, "  {kind}: {}", self.count(kind));
        }
        for c in &self.conflicts {
            let _ = writeln!(out, "{c}");
        }
        out
    }
}

/// Runs all three detectors.
pub fn label_conflicts(g: &ConflictGraph) -> ConflictReport {
    let all = detect_direct(g)
        .into_iter()
        .chain(detect_implicit(g))
        .chain(detect_indirect(g));
    ConflictReport::from_conflicts(all, g.fingerprint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Vertex;

    fn graph(xapps: &[&str], params: &[&str], kpis: &[&str], edges: &[(&str, &str)]) -> ConflictGraph {
        let mk = |names: &[&str], class| {
            names
                .iter()
                .map(|n| Vertex {
                    name: n.to_string(),
                    class,
                })
                .collect::<Vec<_>>()
        };
        let mut v = mk(xapps, VertexClass::XApp);
        v.extend(mk(params, VertexClass::Parameter));
        v.extend(mk(kpis, VertexClass::Kpi));
        let mut g = ConflictGraph::new(v).unwrap();
        for (a, b) in edges {
            g.add_edge_by_name(a, b).unwrap();
        }
        g
    }

    #[test]
    fn direct_minimal() {
        let g = graph(&["a1", "a2"], &["p1", "p2"], &[], &[("a1", "p1"), ("a2", "p1")]);
        assert_eq!(detect_direct(&g), vec![Conflict::direct("a1", "a2", "p1")]);
        let g = graph(&["a1", "a2"], &["p1", "p2"], &[], &[("a1", "p1"), ("a2", "p2")]);
        assert!(detect_direct(&g).is_empty());
    }

    #[test]
    fn implicit_minimal() {
        let edges = [("a1", "p1"), ("a2", "p2"), ("p1", "k1"), ("p2", "k1")];
        let g = graph(&["a1", "a2"], &["p1", "p2"], &["k1", "k2"], &edges);
        let found = detect_implicit(&g);
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].xapp_i, "a1");
        assert_eq!(found[0].witnesses, vec!["p1", "p2", "k1"]);

        let edges = [("a1", "p1"), ("a2", "p2"), ("p1", "k1"), ("p2", "k2")];
        let g = graph(&["a1", "a2"], &["p1", "p2"], &["k1", "k2"], &edges);
        assert!(detect_implicit(&g).is_empty());
    }

    #[test]
    fn indirect_minimal() {
        let edges = [("a1", "p1"), ("p1", "k1"), ("k1", "a4"), ("a4", "p4")];
        let g = graph(&["a1", "a4"], &["p1", "p4"], &["k1"], &edges);
        let found = detect_indirect(&g);
        assert_eq!(found, vec![Conflict::indirect("a1", "p1", "k1", "a4", "p4")]);

        let edges = [("a1", "p1"), ("p1", "k1"), ("a4", "p4")];
        let g = graph(&["a1", "a4"], &["p1", "p4"], &["k1"], &edges);
        assert!(detect_indirect(&g).is_empty());
    }

    #[test]
    fn self_conflicts_excluded() {
        // one xApp controlling two parameters that share a KPI it also monitors
        let edges = [("a1", "p1"), ("a1", "p2"), ("p1", "k1"), ("p2", "k1"), ("a1", "k1")];
        let g = graph(&["a1"], &["p1", "p2"], &["k1"], &edges);
        assert!(label_conflicts(&g).is_empty());
    }

    #[test]
    fn kk_edges_ignored() {
        let edges = [("a1", "p1"), ("p1", "k1"), ("k1", "k2"), ("k2", "a2"), ("a2", "p2")];
        let g = graph(&["a1", "a2"], &["p1", "p2"], &["k1", "k2"], &edges);
        assert!(label_conflicts(&g).is_empty());
    }

    #[test]
    fn no_xapps_no_conflicts() {
        let g = graph(&[], &["p1"], &["k1"], &[("p1", "k1")]);
        let r = label_conflicts(&g);
        assert!(r.is_empty());
        assert_eq!(r.counts().values().sum::<usize>(), 0);
    }

    #[test]
    fn report_formats() {
        let edges = [("a1", "p1"), ("a2", "p1")];
        let g = graph(&["a1", "a2"], &["p1"], &[], &edges);
        let r = label_conflicts(&g);
        assert_eq!(
            r.to_csv_string(),
            "kind,xapp_i,xapp_j,witness_1,witness_2,witness_3\ndirect,a1,a2,p1,,\n"
        );
        let text = r.to_text_summary();
        assert!(text.contains("direct: 1"));
        assert!(text.contains("a1 and a2 both control p1"));
    }
}
