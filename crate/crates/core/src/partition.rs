//! Equivalence relations on finite path universes, stored as partitions.

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::diagram::BratteliDiagram;
use crate::error::{Error, Result};
use crate::paths::{CylinderFunction, PathSpace};

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        true
    }

    pub fn into_partition(mut self) -> Partition {
        let n = self.parent.len();
        Partition::from_keys((0..n).map(|i| self.find(i)))
    }
}

/// Class id per element, canonically numbered by first occurrence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition {
    labels: Vec<usize>,
}

impl Partition {
    pub fn from_keys<K: Hash + Eq, I: IntoIterator<Item = K>>(keys: I) -> Self {
        let mut ids: HashMap<K, usize> = HashMap::new();
        let labels = keys
            .into_iter()
            .map(|k| {
                let next = ids.len();
                *ids.entry(k).or_insert(next)
            })
            .collect();
        Partition { labels }
    }

    pub fn diagonal(n: usize) -> Self {
        Partition { labels: (0..n).collect() }
    }

    pub fn full(n: usize) -> Self {
        Partition { labels: vec![0; n] }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn class_of(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_classes(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }

    pub fn same(&self, i: usize, j: usize) -> bool {
        self.labels[i] == self.labels[j]
    }

    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_classes()];
        for (i, &c) in self.labels.iter().enumerate() {
            out[c].push(i);
        }
        out
    }

    /// True when every class of `self` lies inside one class of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.first_refinement_failure(coarser).is_none()
    }

    /// A pair related by `self` but not by `coarser`.
    pub fn first_refinement_failure(&self, coarser: &Partition) -> Option<(usize, usize)> {
        assert_eq!(self.len(), coarser.len(), "partitions over different universes");
        let mut rep: Vec<Option<usize>> = vec![None; self.num_classes()];
        for i in 0..self.len() {
            match rep[self.labels[i]] {
                None => rep[self.labels[i]] = Some(i),
                Some(j) if coarser.labels[j] != coarser.labels[i] => return Some((j, i)),
                Some(_) => {}
            }
        }
        None
    }

    pub fn join(&self, other: &Partition) -> Partition {
        assert_eq!(self.len(), other.len(), "partitions over different universes");
        let mut uf = UnionFind::new(self.len());
        for p in [self, other] {
            let mut first: Vec<Option<usize>> = vec![None; p.num_classes()];
            for i in 0..p.len() {
                match first[p.labels[i]] {
                    None => first[p.labels[i]] = Some(i),
                    Some(j) => {
                        uf.union(j, i);
                    }
                }
            }
        }
        uf.into_partition()
    }

    pub fn meet(&self, other: &Partition) -> Partition {
        assert_eq!(self.len(), other.len(), "partitions over different universes");
        Partition::from_keys(self.labels.iter().zip(&other.labels))
    }

    /// Induced partition on `subset` (indices into this universe), indexed by
    /// position in `subset`.
    pub fn restrict(&self, subset: &[usize]) -> Partition {
        Partition::from_keys(subset.iter().map(|&i| self.labels[i]))
    }

    /// Union of the classes meeting `members`.
    pub fn saturate(&self, members: &[bool]) -> Vec<bool> {
        let mut hit = vec![false; self.num_classes()];
        for (i, &m) in members.iter().enumerate() {
            if m {
                hit[self.labels[i]] = true;
            }
        }
        self.labels.iter().map(|&c| hit[c]).collect()
    }

    /// SHA-256 over the canonical label sequence.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for l in &self.labels {
            h.update((*l as u64).to_le_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// `R_n` on a depth-`N` universe: `x ~ x'` iff `x_k = x'_k` for `n < k ≤ N`
/// (and, for `n = N`, the two paths end at the same vertex).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TailRelation {
    pub n: usize,
    pub depth: usize,
    pub partition: Partition,
}

pub fn tail_relation(diagram: &BratteliDiagram, space: &PathSpace, n: usize) -> Result<TailRelation> {
    let depth = space.depth();
    if n > depth {
        return Err(Error::LevelOutOfRange(format!("tail relation R_{n} on depth {depth}")));
    }
    let partition = Partition::from_keys(space.paths().iter().map(|p| (diagram.end_vertex(&p[..n]), &p[n..])));
    Ok(TailRelation { n, depth, partition })
}

/// Output of the label realization: `S = {(x,x') ∈ R : μ(x) = μ(x')}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    /// Number of labels `|K|`.
    pub k: usize,
    /// `μ` per universe element.
    pub values: Vec<u32>,
    /// `μ` as a cylinder function of minimal prefix depth.
    pub function: CylinderFunction,
}

/// Realize a subrelation `S ⊆ R` by a label map of minimal prefix depth.
pub fn realize_label_map(space: &PathSpace, r: &Partition, s: &Partition) -> Result<LabelMap> {
    if let Some((i, j)) = s.first_refinement_failure(r) {
        return Err(Error::Input(format!("S is not a subrelation of R: elements {i} and {j}")));
    }
    let s_classes = s.classes();
    for d in 0..=space.depth() {
        let prefix_ids = Partition::from_keys(space.paths().iter().map(|p| &p[..d]));
        let mut uf = UnionFind::new(prefix_ids.num_classes());
        for class in &s_classes {
            for w in class.windows(2) {
                uf.union(prefix_ids.class_of(w[0]), prefix_ids.class_of(w[1]));
            }
        }
        let roots = uf.into_partition();
        let mu: Vec<u32> = (0..space.len()).map(|i| roots.class_of(prefix_ids.class_of(i)) as u32).collect();
        // distinct S-classes inside one R-class must get distinct labels
        let mut seen: HashMap<(usize, u32), usize> = HashMap::new();
        let consistent = (0..space.len()).all(|i| *seen.entry((r.class_of(i), mu[i])).or_insert(s.class_of(i)) == s.class_of(i));
        if consistent {
            let function = CylinderFunction::from_values(space, &mu, d).expect("labels are prefix determined");
            let k = roots.num_classes().max(1);
            return Ok(LabelMap { k, values: mu, function });
        }
    }
    unreachable!("full-depth prefixes always realize S")
}

/// For each `S_m`, the least `n` with `S_m ⊆ R_n|Y`; `tails[n]` is `R_n|Y`.
/// Fails when the sequence is not nested.
pub fn check_nested(seq: &[Partition], tails: &[Partition]) -> Result<Vec<usize>> {
    for (m, w) in seq.windows(2).enumerate() {
        if let Some((i, j)) = w[0].first_refinement_failure(&w[1]) {
            return Err(Error::Input(format!("S_{} is not contained in S_{}: elements {i}, {j}", m + 1, m + 2)));
        }
    }
    seq.iter()
        .enumerate()
        .map(|(m, s)| {
            tails
                .iter()
                .position(|t| s.refines(t))
                .ok_or_else(|| Error::Input(format!("S_{} is not contained in the horizon tail relation", m + 1)))
        })
        .collect()
}

/// `{"universe": [path-ids], "classes": [[path-ids]]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionJson {
    pub universe: Vec<Vec<String>>,
    pub classes: Vec<Vec<Vec<String>>>,
}

impl PartitionJson {
    pub fn from_partition(diagram: &BratteliDiagram, space: &PathSpace, p: &Partition) -> Self {
        PartitionJson {
            universe: space.paths().iter().map(|q| diagram.path_ids(q)).collect(),
            classes: p.classes().iter().map(|c| c.iter().map(|&i| diagram.path_ids(space.path(i))).collect()).collect(),
        }
    }

    /// Parse against a universe; every universe element must be covered once.
    pub fn to_partition(&self, diagram: &BratteliDiagram, space: &PathSpace) -> Result<Partition> {
        let mut label = vec![usize::MAX; space.len()];
        for (c, class) in self.classes.iter().enumerate() {
            for ids in class {
                let path = diagram.path_from_ids(ids)?;
                let i = space
                    .index_of(&path)
                    .ok_or_else(|| Error::Input(format!("path {ids:?} is not in the universe")))?;
                if label[i] != usize::MAX {
                    return Err(Error::Input(format!("path {ids:?} appears in two classes")));
                }
                label[i] = c;
            }
        }
        if let Some(i) = label.iter().position(|&l| l == usize::MAX) {
            return Err(Error::Input(format!("path {:?} is not covered", diagram.path_ids(space.path(i)))));
        }
        Ok(Partition::from_keys(label))
    }
}
