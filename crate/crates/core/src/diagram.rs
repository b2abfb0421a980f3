//! Standard Bratteli diagrams truncated at an explicit depth, their subdiagrams,
//! structural validation and the JSON exchange format.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An edge of level `n`, going from `source ∈ V_{n-1}` to `range ∈ V_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub id: String,
    pub source: usize,
    pub range: usize,
}

/// A leveled multigraph `V_0, …, V_N` / `E_1, …, E_N`.
///
/// Edges of each level are kept sorted by identifier; that order is the
/// canonical lexicographic order used for paths everywhere downstream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BratteliDiagram {
    levels: Vec<Vec<String>>,
    edges: Vec<Vec<Edge>>,
    out: Vec<Vec<Vec<usize>>>,
    inc: Vec<Vec<Vec<usize>>>,
}

impl BratteliDiagram {
    /// Build a diagram from vertex names per level and edges per level
    /// (`edges[n-1]` holds `E_n`). Only referential integrity is checked here;
    /// the structural invariants are reported by [`validate`].
    pub fn new(levels: Vec<Vec<String>>, edges: Vec<Vec<Edge>>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Malformed("no levels".into()));
        }
        if edges.len() + 1 != levels.len() {
            return Err(Error::Malformed(format!(
                "{} vertex levels but {} edge levels",
                levels.len(),
                edges.len()
            )));
        }
        for (n, level) in levels.iter().enumerate() {
            let mut seen = HashSet::new();
            for v in level {
                if !seen.insert(v) {
                    return Err(Error::Malformed(format!("duplicate vertex {v:?} at level {n}")));
                }
            }
        }
        let mut ids = HashSet::new();
        let mut sorted = Vec::with_capacity(edges.len());
        for (i, mut level) in edges.into_iter().enumerate() {
            let n = i + 1;
            for e in &level {
                if !ids.insert(e.id.clone()) {
                    return Err(Error::Malformed(format!("duplicate edge id {:?}", e.id)));
                }
                if e.source >= levels[n - 1].len() || e.range >= levels[n].len() {
                    return Err(Error::Malformed(format!(
                        "edge {:?} at level {n} has an endpoint outside its levels",
                        e.id
                    )));
                }
            }
            level.sort_by(|a, b| a.id.cmp(&b.id));
            sorted.push(level);
        }
        let mut out: Vec<Vec<Vec<usize>>> = levels.iter().map(|l| vec![Vec::new(); l.len()]).collect();
        let mut inc: Vec<Vec<Vec<usize>>> = levels.iter().map(|l| vec![Vec::new(); l.len()]).collect();
        for (i, level) in sorted.iter().enumerate() {
            for (k, e) in level.iter().enumerate() {
                out[i][e.source].push(k);
                inc[i + 1][e.range].push(k);
            }
        }
        Ok(BratteliDiagram { levels, edges: sorted, out, inc })
    }

    /// Truncation depth `N`.
    pub fn depth(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self, n: usize) -> &[String] {
        &self.levels[n]
    }

    pub fn levels(&self) -> &[Vec<String>] {
        &self.levels
    }

    /// `E_n` for `1 ≤ n ≤ N`.
    pub fn edges(&self, n: usize) -> &[Edge] {
        &self.edges[n - 1]
    }

    pub fn edge(&self, n: usize, k: usize) -> &Edge {
        &self.edges[n - 1][k]
    }

    /// Indices of level-`n+1` edges leaving vertex `v ∈ V_n`.
    pub fn outgoing(&self, n: usize, v: usize) -> &[usize] {
        &self.out[n][v]
    }

    /// Indices of level-`n` edges entering vertex `v ∈ V_n`.
    pub fn incoming(&self, n: usize, v: usize) -> &[usize] {
        &self.inc[n][v]
    }

    pub fn vertex_index(&self, n: usize, name: &str) -> Option<usize> {
        self.levels.get(n)?.iter().position(|v| v == name)
    }

    pub fn edge_index(&self, n: usize, id: &str) -> Option<usize> {
        self.edges.get(n.checked_sub(1)?)?.binary_search_by(|e| e.id.as_str().cmp(id)).ok()
    }

    /// Locate an edge id anywhere in the diagram.
    pub fn find_edge(&self, id: &str) -> Option<(usize, usize)> {
        (1..=self.depth()).find_map(|n| self.edge_index(n, id).map(|k| (n, k)))
    }

    /// Range vertex of the last edge, or `v0` for the empty path.
    pub fn end_vertex(&self, path: &[usize]) -> usize {
        match path.len() {
            0 => 0,
            n => self.edges[n - 1][path[n - 1]].range,
        }
    }

    pub fn path_ids(&self, path: &[usize]) -> Vec<String> {
        path.iter().enumerate().map(|(i, &k)| self.edges[i][k].id.clone()).collect()
    }

    /// Parse an edge-id array into a path starting at level 1.
    pub fn path_from_ids(&self, ids: &[String]) -> Result<Vec<usize>> {
        let mut path = Vec::with_capacity(ids.len());
        for (i, id) in ids.iter().enumerate() {
            let k = self
                .edge_index(i + 1, id)
                .ok_or_else(|| Error::Input(format!("edge {id:?} is not at level {}", i + 1)))?;
            if self.edges[i][k].source != self.end_vertex(&path) {
                return Err(Error::Input(format!("path {ids:?} is not composable at level {}", i + 1)));
            }
            path.push(k);
        }
        Ok(path)
    }

    /// The same diagram cut at depth `depth ≤ N`.
    pub fn truncated(&self, depth: usize) -> BratteliDiagram {
        BratteliDiagram::new(self.levels[..=depth].to_vec(), self.edges[..depth].to_vec())
            .expect("truncation of a well-formed diagram")
    }
}

/// Per-level vertex subsets `W_n` and edge subsets `F_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subdiagram {
    w: Vec<Vec<bool>>,
    f: Vec<Vec<bool>>,
}

impl Subdiagram {
    pub fn from_masks(diagram: &BratteliDiagram, w: Vec<Vec<bool>>, f: Vec<Vec<bool>>) -> Result<Self> {
        let ok = w.len() == diagram.depth() + 1
            && f.len() == diagram.depth()
            && w.iter().enumerate().all(|(n, l)| l.len() == diagram.vertices(n).len())
            && f.iter().enumerate().all(|(i, l)| l.len() == diagram.edges(i + 1).len());
        if !ok {
            return Err(Error::Malformed("subdiagram masks do not match the diagram shape".into()));
        }
        Ok(Subdiagram { w, f })
    }

    /// Subdiagram given by per-level vertex names and a flat list of edge ids.
    pub fn from_names(diagram: &BratteliDiagram, w: &[Vec<String>], f: &[String]) -> Result<Self> {
        let mut wm: Vec<Vec<bool>> = diagram.levels.iter().map(|l| vec![false; l.len()]).collect();
        if w.len() > wm.len() {
            return Err(Error::Malformed("subdiagram has more levels than the diagram".into()));
        }
        for (n, names) in w.iter().enumerate() {
            for name in names {
                let v = diagram
                    .vertex_index(n, name)
                    .ok_or_else(|| Error::Malformed(format!("W names unknown vertex {name:?} at level {n}")))?;
                wm[n][v] = true;
            }
        }
        let mut fm: Vec<Vec<bool>> = diagram.edges.iter().map(|l| vec![false; l.len()]).collect();
        for id in f {
            let (n, k) = diagram
                .find_edge(id)
                .ok_or_else(|| Error::Malformed(format!("F names unknown edge {id:?}")))?;
            fm[n - 1][k] = true;
        }
        Ok(Subdiagram { w: wm, f: fm })
    }

    /// The subdiagram spanned by a set of edges: `W = r(F) ∪ {v0}`.
    pub fn from_edges(diagram: &BratteliDiagram, f: Vec<Vec<bool>>) -> Result<Self> {
        let mut w: Vec<Vec<bool>> = diagram.levels.iter().map(|l| vec![false; l.len()]).collect();
        w[0].iter_mut().for_each(|b| *b = true);
        for (i, level) in f.iter().enumerate() {
            for (k, &inf) in level.iter().enumerate() {
                if inf {
                    w[i + 1][diagram.edge(i + 1, k).range] = true;
                }
            }
        }
        Subdiagram::from_masks(diagram, w, f)
    }

    /// `F = E`, `W = V`.
    pub fn full(diagram: &BratteliDiagram) -> Self {
        Subdiagram {
            w: diagram.levels.iter().map(|l| vec![true; l.len()]).collect(),
            f: diagram.edges.iter().map(|l| vec![true; l.len()]).collect(),
        }
    }

    /// `F = ∅`, `W = {v0}`.
    pub fn empty(diagram: &BratteliDiagram) -> Self {
        let mut w: Vec<Vec<bool>> = diagram.levels.iter().map(|l| vec![false; l.len()]).collect();
        w[0].iter_mut().for_each(|b| *b = true);
        Subdiagram { w, f: diagram.edges.iter().map(|l| vec![false; l.len()]).collect() }
    }

    pub fn in_w(&self, n: usize, v: usize) -> bool {
        self.w[n][v]
    }

    pub fn in_f(&self, n: usize, k: usize) -> bool {
        self.f[n - 1][k]
    }

    pub fn w_level(&self, n: usize) -> impl Iterator<Item = usize> + '_ {
        self.w[n].iter().enumerate().filter(|(_, &b)| b).map(|(v, _)| v)
    }

    pub fn w_masks(&self) -> &[Vec<bool>] {
        &self.w
    }

    pub fn f_masks(&self) -> &[Vec<bool>] {
        &self.f
    }

    pub fn is_f_path(&self, path: &[usize]) -> bool {
        path.iter().enumerate().all(|(i, &k)| self.f[i][k])
    }

    /// Lexicographically least `F`-edge leaving `v ∈ W_n`.
    pub fn least_f_out(&self, diagram: &BratteliDiagram, n: usize, v: usize) -> Option<usize> {
        diagram.outgoing(n, v).iter().copied().find(|&k| self.f[n][k])
    }

    pub fn truncated(&self, depth: usize) -> Subdiagram {
        Subdiagram { w: self.w[..=depth].to_vec(), f: self.f[..depth].to_vec() }
    }

    pub fn f_ids(&self, diagram: &BratteliDiagram) -> Vec<String> {
        let mut ids = Vec::new();
        for (i, level) in self.f.iter().enumerate() {
            for (k, &b) in level.iter().enumerate() {
                if b {
                    ids.push(diagram.edge(i + 1, k).id.clone());
                }
            }
        }
        ids
    }

    pub fn w_names(&self, diagram: &BratteliDiagram) -> Vec<Vec<String>> {
        self.w
            .iter()
            .enumerate()
            .map(|(n, l)| {
                l.iter()
                    .enumerate()
                    .filter(|(_, &b)| b)
                    .map(|(v, _)| diagram.vertices(n)[v].clone())
                    .collect()
            })
            .collect()
    }
}

/// One violated invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: String,
    pub location: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, kind: &str, location: String) {
        self.violations.push(Violation { kind: kind.into(), location });
    }

    pub fn has(&self, kind: &str) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }
}

/// Check the standard-diagram invariants and, when given, the subdiagram ones.
pub fn validate(diagram: &BratteliDiagram, sub: Option<&Subdiagram>) -> ValidationReport {
    let mut report = ValidationReport::default();
    let depth = diagram.depth();
    if diagram.vertices(0).len() != 1 {
        report.push("V_0 is not a singleton", "level 0".into());
    }
    for n in 0..=depth {
        if diagram.vertices(n).is_empty() {
            report.push("empty level", format!("level {n}"));
        }
        for (v, name) in diagram.vertices(n).iter().enumerate() {
            if n < depth && diagram.outgoing(n, v).is_empty() {
                report.push("sink below frontier", format!("vertex {name:?} at level {n}"));
            }
            if n >= 1 && diagram.incoming(n, v).is_empty() {
                report.push("no incoming edge", format!("vertex {name:?} at level {n}"));
            }
        }
    }
    let Some(sub) = sub else { return report };
    if !sub.in_w(0, 0) {
        report.push("W not covered", "v0 missing from W_0".into());
    }
    for n in 1..=depth {
        for (k, e) in diagram.edges(n).iter().enumerate() {
            if sub.in_f(n, k) && (!sub.in_w(n - 1, e.source) || !sub.in_w(n, e.range)) {
                report.push("F edge endpoint outside W", format!("edge {:?} at level {n}", e.id));
            }
        }
    }
    for n in 0..=depth {
        for v in sub.w_level(n).collect::<Vec<_>>() {
            let name = &diagram.vertices(n)[v];
            if n >= 1 && !diagram.incoming(n, v).iter().any(|&k| sub.in_f(n, k)) {
                report.push("W not covered", format!("vertex {name:?} at level {n} is not in r(F)"));
            }
            if n < depth && sub.least_f_out(diagram, n, v).is_none() {
                report.push("subdiagram sink", format!("vertex {name:?} at level {n}"));
            }
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeJson {
    pub id: String,
    pub s: String,
    pub r: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubdiagramJson {
    #[serde(rename = "W")]
    pub w: Vec<Vec<String>>,
    #[serde(rename = "F")]
    pub f: Vec<String>,
}

/// On-disk diagram format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramJson {
    pub levels: Vec<Vec<String>>,
    pub edges: Vec<Vec<EdgeJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subdiagram: Option<SubdiagramJson>,
}

impl DiagramJson {
    pub fn from_diagram(diagram: &BratteliDiagram, sub: Option<&Subdiagram>) -> Self {
        let edges = (1..=diagram.depth())
            .map(|n| {
                diagram
                    .edges(n)
                    .iter()
                    .map(|e| EdgeJson {
                        id: e.id.clone(),
                        s: diagram.vertices(n - 1)[e.source].clone(),
                        r: diagram.vertices(n)[e.range].clone(),
                    })
                    .collect()
            })
            .collect();
        DiagramJson {
            levels: diagram.levels().to_vec(),
            edges,
            subdiagram: sub.map(|s| SubdiagramJson { w: s.w_names(diagram), f: s.f_ids(diagram) }),
        }
    }

    pub fn into_diagram(&self) -> Result<(BratteliDiagram, Option<Subdiagram>)> {
        let mut lookup: Vec<HashMap<&str, usize>> = Vec::new();
        for level in &self.levels {
            lookup.push(level.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect());
        }
        let mut edges = Vec::with_capacity(self.edges.len());
        for (i, level) in self.edges.iter().enumerate() {
            let n = i + 1;
            if n >= self.levels.len() {
                return Err(Error::Malformed(format!("edge level {n} has no range level")));
            }
            let mut out = Vec::with_capacity(level.len());
            for e in level {
                let source = *lookup[n - 1]
                    .get(e.s.as_str())
                    .ok_or_else(|| Error::Malformed(format!("edge {:?}: unknown source {:?}", e.id, e.s)))?;
                let range = *lookup[n]
                    .get(e.r.as_str())
                    .ok_or_else(|| Error::Malformed(format!("edge {:?}: unknown range {:?}", e.id, e.r)))?;
                out.push(Edge { id: e.id.clone(), source, range });
            }
            edges.push(out);
        }
        let diagram = BratteliDiagram::new(self.levels.clone(), edges)?;
        let sub = match &self.subdiagram {
            Some(s) => Some(Subdiagram::from_names(&diagram, &s.w, &s.f)?),
            None => None,
        };
        Ok((diagram, sub))
    }
}

/// Name-keyed edge counts per level; handy for assertions and reports.
pub fn edge_multiset(diagram: &BratteliDiagram, n: usize) -> BTreeMap<(String, String), usize> {
    let mut counts = BTreeMap::new();
    for e in diagram.edges(n) {
        let key = (diagram.vertices(n - 1)[e.source].clone(), diagram.vertices(n)[e.range].clone());
        *counts.entry(key).or_insert(0) += 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn odometer_with_single_f_edge_passes() {
        let (d, s) = fixtures::odometer(3);
        assert!(validate(&d, Some(&s)).pass());
    }

    #[test]
    fn isolated_vertex_has_no_incoming_edge() {
        let levels = vec![vec!["v0".into()], vec!["a".into()], vec!["a".into(), "iso".into()]];
        let edges = vec![
            vec![Edge { id: "e1".into(), source: 0, range: 0 }],
            vec![Edge { id: "e2".into(), source: 0, range: 0 }],
        ];
        let d = BratteliDiagram::new(levels, edges).unwrap();
        let report = validate(&d, None);
        assert!(report.has("no incoming edge"));
        assert_eq!(report.violations.len(), 1);
    }

    #[test]
    fn uncovered_w_vertex_is_reported() {
        let (d, _) = fixtures::odometer(2);
        let w = vec![vec!["v0".to_string()], vec!["v".to_string()], vec!["v".to_string()]];
        // level-2 vertex is in W but has no incoming F edge
        let s = Subdiagram::from_names(&d, &w, &["a1".to_string()]).unwrap();
        let report = validate(&d, Some(&s));
        assert!(report.has("W not covered"));
    }

    #[test]
    fn sink_check_stops_at_the_frontier() {
        let (d, s) = fixtures::odometer(1);
        assert!(validate(&d, Some(&s)).pass());
    }

    #[test]
    fn json_round_trip_preserves_diagram_and_subdiagram() {
        let (d, s) = fixtures::two_chain(4);
        let json = DiagramJson::from_diagram(&d, Some(&s));
        let text = serde_json::to_string(&json).unwrap();
        let back: DiagramJson = serde_json::from_str(&text).unwrap();
        let (d2, s2) = back.into_diagram().unwrap();
        assert_eq!(d, d2);
        assert_eq!(Some(s), s2);
    }

    #[test]
    fn duplicate_edge_ids_are_malformed() {
        let levels = vec![vec!["v0".into()], vec!["a".into()]];
        let edges = vec![vec![
            Edge { id: "e".into(), source: 0, range: 0 },
            Edge { id: "e".into(), source: 0, range: 0 },
        ]];
        assert!(matches!(BratteliDiagram::new(levels, edges), Err(Error::Malformed(_))));
    }
}
