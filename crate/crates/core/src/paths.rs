//! Finite path spaces, cylinder sets and cylinder functions.
//!
//! A depth-`N` path stands for the cylinder of infinite paths extending it;
//! every relation built on such a universe implicitly shares the tail beyond
//! `N`.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::diagram::{BratteliDiagram, Subdiagram};
use crate::error::{Error, Result};

pub const DEFAULT_PATH_CAP: usize = 100_000;

/// All depth-`d` paths from `v0` in lexicographic order, with an index.
#[derive(Debug, Clone)]
pub struct PathSpace {
    depth: usize,
    paths: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
}

impl PathSpace {
    pub fn from_paths(depth: usize, paths: Vec<Vec<usize>>) -> Self {
        let index = paths.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
        PathSpace { depth, paths, index }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn paths(&self) -> &[Vec<usize>] {
        &self.paths
    }

    pub fn path(&self, i: usize) -> &[usize] {
        &self.paths[i]
    }

    pub fn index_of(&self, path: &[usize]) -> Option<usize> {
        self.index.get(path).copied()
    }
}

fn walk(
    diagram: &BratteliDiagram,
    depth: usize,
    cap: usize,
    keep: &dyn Fn(usize, usize) -> bool,
) -> Result<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let mut stack: Vec<Vec<usize>> = vec![Vec::new()];
    while let Some(p) = stack.pop() {
        if p.len() == depth {
            if out.len() == cap {
                return Err(Error::CapExceeded { depth, count: out.len() + 1, cap });
            }
            out.push(p);
            continue;
        }
        let n = p.len();
        let v = diagram.end_vertex(&p);
        for &k in diagram.outgoing(n, v).iter().rev() {
            if keep(n + 1, k) {
                let mut q = p.clone();
                q.push(k);
                stack.push(q);
            }
        }
    }
    Ok(out)
}

pub fn enumerate_paths(diagram: &BratteliDiagram, depth: usize, cap: usize) -> Result<PathSpace> {
    if depth > diagram.depth() {
        return Err(Error::LevelOutOfRange(format!("path depth {depth} > {}", diagram.depth())));
    }
    Ok(PathSpace::from_paths(depth, walk(diagram, depth, cap, &|_, _| true)?))
}

/// Depth-`d` paths using only `F`-edges.
pub fn y_paths(diagram: &BratteliDiagram, sub: &Subdiagram, depth: usize) -> Result<PathSpace> {
    if depth > diagram.depth() {
        return Err(Error::LevelOutOfRange(format!("path depth {depth} > {}", diagram.depth())));
    }
    Ok(PathSpace::from_paths(depth, walk(diagram, depth, usize::MAX, &|n, k| sub.in_f(n, k))?))
}

/// A clopen set given by admissible depth-`d` prefixes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CylinderSet {
    pub depth: usize,
    pub prefixes: Vec<Vec<usize>>,
}

impl CylinderSet {
    /// `Y_k`: the paths whose first `k` edges lie in `F`.
    pub fn y_k(diagram: &BratteliDiagram, sub: &Subdiagram, k: usize) -> Result<CylinderSet> {
        Ok(CylinderSet { depth: k, prefixes: y_paths(diagram, sub, k)?.paths })
    }

    pub fn contains(&self, path: &[usize]) -> bool {
        path.len() >= self.depth && self.prefixes.binary_search_by(|p| p.as_slice().cmp(&path[..self.depth])).is_ok()
    }
}

/// A finite-valued map determined by the depth-`d` prefix, defined on the
/// listed prefixes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CylinderFunction {
    pub depth: usize,
    pub table: BTreeMap<Vec<usize>, u32>,
}

impl CylinderFunction {
    pub fn constant(value: u32) -> Self {
        CylinderFunction { depth: 0, table: BTreeMap::from([(Vec::new(), value)]) }
    }

    pub fn get(&self, path: &[usize]) -> Option<u32> {
        if path.len() < self.depth {
            return None;
        }
        self.table.get(&path[..self.depth]).copied()
    }

    /// Tabulate `values` (indexed like `space`) over depth-`depth` prefixes.
    /// Fails when two paths with the same prefix carry different values.
    pub fn from_values(space: &PathSpace, values: &[u32], depth: usize) -> std::result::Result<Self, (usize, usize)> {
        let mut table: BTreeMap<Vec<usize>, (u32, usize)> = BTreeMap::new();
        for (i, p) in space.paths().iter().enumerate() {
            let key = p[..depth].to_vec();
            match table.get(&key) {
                Some(&(v, j)) if v != values[i] => return Err((j, i)),
                Some(_) => {}
                None => {
                    table.insert(key, (values[i], i));
                }
            }
        }
        Ok(CylinderFunction { depth, table: table.into_iter().map(|(k, (v, _))| (k, v)).collect() })
    }

    /// Smallest prefix depth at which `values` is a cylinder function.
    pub fn minimal(space: &PathSpace, values: &[u32]) -> Self {
        (0..=space.depth())
            .find_map(|d| CylinderFunction::from_values(space, values, d).ok())
            .expect("full depth always tabulates")
    }

    pub fn labels(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.table.values().copied().collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}
