//! Telescoping (composing levels into paths) and microscoping (splitting a
//! level through one intermediate vertex per edge).

use std::collections::HashMap;

use crate::counts::TelescopePlan;
use crate::diagram::{BratteliDiagram, Edge, Subdiagram};
use crate::error::{Error, Result};

/// Bijection between old depth-`n(K)` paths and new depth-`K` paths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Recoding {
    plan: TelescopePlan,
    /// Per new level: old segment → new edge index.
    forward: Vec<HashMap<Vec<usize>, usize>>,
    /// Per new level: new edge index → old segment.
    backward: Vec<Vec<Vec<usize>>>,
}

impl Recoding {
    pub fn plan(&self) -> &TelescopePlan {
        &self.plan
    }

    /// Old path of length `n(K)` to the new path of length `K`.
    pub fn forward(&self, old: &[usize]) -> Option<Vec<usize>> {
        let levels = self.plan.levels();
        if old.len() != *levels.last()? {
            return None;
        }
        levels
            .windows(2)
            .enumerate()
            .map(|(k, w)| self.forward[k].get(&old[w[0]..w[1]]).copied())
            .collect()
    }

    /// Prefix variant: an old path whose length is a plan level.
    pub fn forward_prefix(&self, old: &[usize]) -> Option<Vec<usize>> {
        let levels = self.plan.levels();
        let k_max = levels.iter().position(|&l| l == old.len())?;
        (0..k_max).map(|k| self.forward[k].get(&old[levels[k]..levels[k + 1]]).copied()).collect()
    }

    pub fn backward(&self, new: &[usize]) -> Vec<usize> {
        new.iter().enumerate().flat_map(|(k, &e)| self.backward[k][e].iter().copied()).collect()
    }
}

/// A sequence of recodings applied left to right.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RecodingChain(pub Vec<Recoding>);

impl RecodingChain {
    pub fn forward(&self, old: &[usize]) -> Option<Vec<usize>> {
        let mut cur = old.to_vec();
        for r in &self.0 {
            cur = r.forward(&cur)?;
        }
        Some(cur)
    }

    pub fn backward(&self, new: &[usize]) -> Vec<usize> {
        self.0.iter().rev().fold(new.to_vec(), |cur, r| r.backward(&cur))
    }

    /// Single plan equivalent to the whole chain.
    pub fn composed_plan(&self, depth: usize) -> Result<TelescopePlan> {
        self.0.iter().try_fold(TelescopePlan::identity(depth), |acc, r| acc.then(r.plan()))
    }
}

/// Name of a telescoped edge: the tuple of its constituent edge ids.
pub fn tuple_id(ids: &[&str]) -> String {
    format!("({})", ids.join(","))
}

fn segments_from(diagram: &BratteliDiagram, from: usize, to: usize, v: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut stack: Vec<(usize, Vec<usize>)> = vec![(v, Vec::new())];
    // depth-first with reversed pushes keeps the lexicographic order
    while let Some((u, seg)) = stack.pop() {
        let level = from + seg.len();
        if level == to {
            out.push(seg);
            continue;
        }
        for &k in diagram.outgoing(level, u).iter().rev() {
            let mut next = seg.clone();
            next.push(k);
            stack.push((diagram.edge(level + 1, k).range, next));
        }
    }
    out
}

/// Telescope to the levels of `plan`. The subdiagram, when given, keeps the
/// paths lying entirely in `F`.
pub fn telescope(
    diagram: &BratteliDiagram,
    plan: &TelescopePlan,
    sub: Option<&Subdiagram>,
) -> Result<(BratteliDiagram, Option<Subdiagram>, Recoding)> {
    let levels = plan.levels();
    if *levels.last().unwrap() > diagram.depth() {
        return Err(Error::LevelOutOfRange(format!(
            "plan {levels:?} exceeds depth {}",
            diagram.depth()
        )));
    }
    let new_levels: Vec<Vec<String>> = levels.iter().map(|&n| diagram.vertices(n).to_vec()).collect();
    let mut new_edges = Vec::new();
    let mut segs_per_level = Vec::new();
    for w in levels.windows(2) {
        let (from, to) = (w[0], w[1]);
        let mut edges = Vec::new();
        let mut segs = Vec::new();
        for v in 0..diagram.vertices(from).len() {
            for seg in segments_from(diagram, from, to, v) {
                let ids: Vec<&str> = seg.iter().enumerate().map(|(i, &k)| diagram.edge(from + i + 1, k).id.as_str()).collect();
                let range = diagram.edge(to, *seg.last().unwrap()).range;
                edges.push(Edge { id: tuple_id(&ids), source: v, range });
                segs.push(seg);
            }
        }
        new_edges.push(edges);
        segs_per_level.push(segs);
    }
    let new_diagram = BratteliDiagram::new(new_levels, new_edges)?;
    // the constructor sorted edges by id; rebuild the segment tables in that order
    let mut forward = Vec::new();
    let mut backward = Vec::new();
    for (k, segs) in segs_per_level.into_iter().enumerate() {
        let from = levels[k];
        let mut fw = HashMap::with_capacity(segs.len());
        let mut bw = vec![Vec::new(); segs.len()];
        for seg in segs {
            let ids: Vec<&str> = seg.iter().enumerate().map(|(i, &e)| diagram.edge(from + i + 1, e).id.as_str()).collect();
            let idx = new_diagram.edge_index(k + 1, &tuple_id(&ids)).expect("telescoped edge present");
            fw.insert(seg.clone(), idx);
            bw[idx] = seg;
        }
        forward.push(fw);
        backward.push(bw);
    }
    let new_sub = match sub {
        Some(s) => {
            let f: Vec<Vec<bool>> = backward
                .iter()
                .enumerate()
                .map(|(k, segs)| {
                    segs.iter()
                        .map(|seg| seg.iter().enumerate().all(|(i, &e)| s.in_f(levels[k] + i + 1, e)))
                        .collect()
                })
                .collect();
            Some(Subdiagram::from_edges(&new_diagram, f)?)
        }
        None => None,
    };
    Ok((new_diagram, new_sub, Recoding { plan: plan.clone(), forward, backward }))
}

/// Insert one intermediate vertex per edge of `E_n`, splitting each edge `e`
/// into `s(e) → ⟨e⟩ → r(e)`.
pub fn microscope(diagram: &BratteliDiagram, n: usize) -> Result<BratteliDiagram> {
    if n == 0 || n > diagram.depth() {
        return Err(Error::LevelOutOfRange(format!("microscope level {n} on depth {}", diagram.depth())));
    }
    let mut levels = diagram.levels().to_vec();
    let mids: Vec<String> = diagram.edges(n).iter().map(|e| format!("<{}>", e.id)).collect();
    levels.insert(n, mids);
    let mut edges: Vec<Vec<Edge>> = (1..=diagram.depth()).map(|m| diagram.edges(m).to_vec()).collect();
    let original = edges.remove(n - 1);
    let lower = original
        .iter()
        .enumerate()
        .map(|(i, e)| Edge { id: format!("{}:in", e.id), source: e.source, range: i })
        .collect();
    let upper = original
        .iter()
        .enumerate()
        .map(|(i, e)| Edge { id: format!("{}:out", e.id), source: i, range: e.range })
        .collect();
    edges.insert(n - 1, upper);
    edges.insert(n - 1, lower);
    BratteliDiagram::new(levels, edges)
}
